#include "mpsdp/runner.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "mpsdp/commuting.hpp"
#include "mpsdp/dp_solver.hpp"
#include "mpsdp/errors.hpp"
#include "mpsdp/linalg.hpp"
#include "mpsdp/oracle.hpp"

namespace mpsdp {

namespace {

constexpr std::size_t kExactEchoLimit = std::size_t{1} << 12;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

json assignment_json(const Assignment& a) {
  return {{"gamma_left", a.gamma_left}, {"pairs", a.pairs}, {"gamma_right", a.gamma_right}};
}

struct Context {
  const RunConfig& cfg;
  std::ostream* log;
  NnHamiltonian raw;
  json result = json::object();
  json warnings = json::array();
  json timings = json::object();

  void note(const std::string& msg) const {
    if (log != nullptr && cfg.verbose) *log << "[mpsdp] " << msg << '\n';
  }

  /// epsilon_op from the config, or from target_error through the
  /// required-epsilon formula on the grouped chain.
  std::optional<double> epsilon_op(const NnHamiltonian& grouped) {
    if (cfg.solver.epsilon_op) return cfg.solver.epsilon_op;
    if (!cfg.solver.target_error) return std::nullopt;
    const double eps = required_epsilon(*cfg.solver.target_error, grouped.J, cfg.solver.D, grouped.n);
    result["epsilon_from_target"] = eps;
    result["delta_for_target"] = eps / (2.0 * 59.0 * static_cast<double>(grouped.d() * cfg.solver.D));
    return eps;
  }

  SolverOptions solver_options(const NnHamiltonian& grouped) {
    SolverOptions o;
    o.delta = cfg.solver.delta;
    o.epsilon_op = epsilon_op(grouped);
    o.cap = cfg.solver.cap;
    o.threads = cfg.threads;
    return o;
  }

  void echo_grouping(const NnHamiltonian& g) {
    result["grouping"] = {{"s", g.s}, {"d_end", g.d_end()}, {"n_grouped", g.n}, {"J", g.J}};
  }

  void warn_if_vacuous(double epsilon_cert) {
    if (epsilon_cert >= 1.0) warnings.push_back(kVacuousWarning);
  }

  void maybe_exact() {
    if (raw.total_dim() <= kExactEchoLimit) result["e_exact"] = exact_ground(raw).e0;
  }
};

void run_solve(Context& ctx, RunOutput& out) {
  const auto t0 = Clock::now();
  const NnHamiltonian g = group_boundaries(ctx.raw, ctx.cfg.solver.D);
  ctx.echo_grouping(g);
  const SolverOptions opts = ctx.solver_options(g);
  ctx.note("building nets and running the dynamic program");
  const SolveResult res = solve(g, ctx.cfg.solver.D, opts);
  auto& r = ctx.result;
  r["e_alg"] = res.e_alg;
  r["e_true"] = res.e_true;
  r["e_true_minus_e_alg"] = res.e_true - res.e_alg;
  r["lower_bound"] = res.lower_bound;
  r["upper_slack"] = res.upper_slack;
  r["epsilon_cert"] = res.epsilon_cert;
  r["epsilon_op"] = res.epsilon_op;
  r["delta"] = res.delta;
  r["N"] = res.N;
  r["G_end"] = res.end_net_size;
  r["discarded_pairs"] = res.discarded_pairs;
  r["list_sizes"] = res.list_sizes;
  r["dropped"] = res.dropped;
  r["junction_defects"] = res.junction_defects;
  r["assignment"] = assignment_json(res.assignment);
  ctx.warn_if_vacuous(res.epsilon_cert);
  ctx.maybe_exact();
  ctx.timings["nets_ms"] = res.timings.nets_ms;
  ctx.timings["dp_ms"] = res.timings.dp_ms;
  ctx.timings["evaluate_ms"] = res.timings.evaluate_ms;
  ctx.timings["total_ms"] = ms_since(t0);
  if (ctx.cfg.output.emit_mps) out.mps = mps_to_json(res.omega);
}

void run_enumerate(Context& ctx, RunOutput& out) {
  const auto t0 = Clock::now();
  const std::size_t D = ctx.cfg.solver.D;
  const NnHamiltonian g = group_boundaries(ctx.raw, D);
  ctx.echo_grouping(g);
  const SolverOptions opts = ctx.solver_options(g);
  require_solver_layout(g, D);
  const BoundaryNet ends = build_end_net(D, g.d_end(), opts.delta, opts.cap, opts.threads);
  const PairNet net = build_pair_net(D, g.d(), opts.delta, opts.epsilon_op, opts.cap, opts.threads);
  ctx.timings["nets_ms"] = ms_since(t0);
  const auto t1 = Clock::now();
  ctx.note("enumerating stitched net assignments");
  const EnumerationResult res = enumerate_net_optimum(g, ends, net, net.epsilon_op, opts.threads);
  ctx.timings["enumerate_ms"] = ms_since(t1);
  auto& r = ctx.result;
  r["feasible"] = res.feasible;
  r["sequences"] = res.sequences;
  r["epsilon_cert"] = net.epsilon_cert;
  r["epsilon_op"] = net.epsilon_op;
  r["delta"] = net.delta;
  r["N"] = net.size();
  r["G_end"] = ends.size();
  ctx.warn_if_vacuous(net.epsilon_cert);
  if (res.feasible) {
    r["e_alg"] = res.e_alg_min;
    r["assignment"] = assignment_json(res.assignment);
    const CanonicalMps omega = assemble(g, ends, net, res.assignment);
    r["e_true"] = expectation_full(omega, g);
    const auto b = error_bounds(res.e_alg_min, g.J, g.n, D, net.epsilon_cert);
    r["lower_bound"] = b.lower;
    r["upper_slack"] = b.upper_slack;
    if (ctx.cfg.output.emit_mps) out.mps = mps_to_json(omega);
  } else {
    ctx.warnings.push_back("no stitched assignment exists at this epsilon_op");
  }
  ctx.maybe_exact();
  ctx.timings["total_ms"] = ms_since(t0);
}

void run_oracle(Context& ctx, RunOutput&) {
  const auto t0 = Clock::now();
  const GroundTruth gt = exact_ground(ctx.raw);
  ctx.result["e_exact"] = gt.e0;
  ctx.result["degeneracy"] = gt.degeneracy;
  ctx.result["gap"] = gt.gap;
  ctx.result["J"] = ctx.raw.J;
  ctx.result["commuting"] = is_commuting(ctx.raw);
  ctx.timings["total_ms"] = ms_since(t0);
}

void run_commuting(Context& ctx, RunOutput& out) {
  const auto t0 = Clock::now();
  if (!is_commuting(ctx.raw)) {
    throw ConfigError("model.name", "commuting mode needs a commuting Hamiltonian; largest commutator norm " +
                                        std::to_string(max_adjacent_commutator(ctx.raw)));
  }
  CanonicalMps seed;
  NnHamiltonian h = ctx.raw;
  std::optional<GroundTruth> gt;
  if (ctx.raw.total_dim() <= (std::size_t{1} << 14)) gt = exact_ground(ctx.raw);
  RefineOptions ropts;
  if (ctx.cfg.run.seed_state == "perturbed_ground") {
    if (!gt) throw InfeasibleError("perturbed_ground seed needs a dense-sized chain (dimension <= 2^14)");
    // First eigenvector outside the ground cluster.
    const MatrixXc dense = to_dense_hamiltonian(ctx.raw);
    Eigen::SelfAdjointEigenSolver<MatrixXc> eig(dense);
    const Eigen::Index excited = static_cast<Eigen::Index>(
        std::min<std::size_t>(gt->degeneracy, static_cast<std::size_t>(dense.rows()) - 1));
    VectorXc v = eig.eigenvectors().col(0) + ctx.cfg.run.perturbation * eig.eigenvectors().col(excited);
    v /= v.norm();
    const std::size_t d = ctx.raw.d();
    std::size_t cap = 1;
    for (std::size_t k = 0; k < ctx.raw.n / 2; ++k) cap *= d;
    seed = canonicalize(v, ctx.raw.n, d, cap, d);
    ropts.surplus = dense_energy(ctx.raw, v) - gt->e0;
    ctx.result["seed_energy"] = gt->e0 + *ropts.surplus;
  } else {
    h = group_boundaries(ctx.raw, ctx.cfg.solver.D);
    ctx.echo_grouping(h);
    const SolveResult res = solve(h, ctx.cfg.solver.D, ctx.solver_options(h));
    seed = res.omega;
    ctx.result["seed_energy"] = res.e_true;
    ctx.result["epsilon_cert"] = res.epsilon_cert;
    ctx.result["epsilon_op"] = res.epsilon_op;
    ctx.warn_if_vacuous(res.epsilon_cert);
    if (gt) ropts.surplus = res.e_true - gt->e0;
  }
  ctx.note("projecting onto term eigenspaces");
  const RefineResult rr = refine_to_eigenstate(seed, h, ropts);
  json chosen = json::array();
  for (const auto& c : rr.chosen) {
    chosen.push_back({{"term", c.term}, {"index", c.index}, {"eigenvalue", c.eigenvalue}, {"weight", c.weight}});
  }
  double residual_max = 0.0;
  for (double v : rr.residuals) residual_max = std::max(residual_max, v);
  json block = {{"chosen", chosen},
                {"energy", rr.energy},
                {"residual_max", residual_max},
                {"recheck_max", rr.recheck_max},
                {"ranks", rr.ranks}};
  if (rr.surplus_bound) block["surplus_bound"] = *rr.surplus_bound;
  if (gt) {
    block["matched_exact"] = std::abs(rr.energy - gt->e0) <= 1e-8;
    ctx.result["e_exact"] = gt->e0;
    ctx.result["gap"] = gt->gap;
  }
  ctx.result["commuting"] = block;
  ctx.timings["total_ms"] = ms_since(t0);
  if (ctx.cfg.output.emit_mps) out.mps = mps_to_json(rr.state);
}

void run_net_stats(Context& ctx, RunOutput&) {
  const auto t0 = Clock::now();
  const std::size_t D = ctx.cfg.solver.D;
  const NnHamiltonian g = group_boundaries(ctx.raw, D);
  ctx.echo_grouping(g);
  const SolverOptions opts = ctx.solver_options(g);
  const double eps_cert = pair_net_epsilon_cert(D, g.d(), opts.delta);
  const double eps = opts.epsilon_op.value_or(eps_cert);
  const NetSizeEstimate est = net_size_estimate(D, g.d(), eps);
  json bound = {{"epsilon", eps}, {"base", est.base}, {"exponent", est.exponent}, {"log10", est.log10}};
  if (est.exact) bound["value"] = *est.exact;
  auto& r = ctx.result;
  r["size_bound"] = bound;
  r["epsilon_cert"] = eps_cert;
  r["epsilon_op"] = eps;
  ctx.warn_if_vacuous(eps_cert);
  try {
    const PairNet net = build_pair_net(D, g.d(), opts.delta, opts.epsilon_op, opts.cap, opts.threads);
    r["N"] = net.size();
    r["lambda_net"] = net.lambdas.size();
    r["b_net"] = net.b_net_size;
    r["discarded_pairs"] = net.discarded;
  } catch (const InfeasibleError& e) {
    r["N"] = nullptr;
    ctx.warnings.push_back(std::string("pair net not built: ") + e.what());
  }
  try {
    const BoundaryNet ends = build_end_net(D, g.d_end(), opts.delta, opts.cap, opts.threads);
    r["G_end"] = ends.size();
  } catch (const InfeasibleError& e) {
    r["G_end"] = nullptr;
    ctx.warnings.push_back(std::string("boundary net not built: ") + e.what());
  }
  ctx.timings["total_ms"] = ms_since(t0);
}

void run_baseline(Context& ctx, RunOutput& out) {
  const auto t0 = Clock::now();
  const std::size_t n = ctx.raw.n;
  const std::size_t d = ctx.raw.d();
  CanonicalMps start;
  const std::string& kind = ctx.cfg.run.start;
  if (kind == "random") {
    std::mt19937_64 rng(ctx.cfg.run.state_seed);
    if (ctx.raw.total_dim() > (std::size_t{1} << 14)) throw InfeasibleError("random start needs dimension <= 2^14");
    start = canonicalize(random_state(ctx.raw.total_dim(), rng), n, d, ctx.cfg.solver.D, d,
                         TruncationMode::truncate);
  } else {
    const std::vector<std::size_t> basis(n, kind == "all_up" ? 0 : 1);
    start = product_state(basis, d, d, ctx.cfg.solver.D);
  }
  ctx.note("running the single-site sweep baseline");
  const BaselineResult res = local_sweep_baseline(ctx.raw, ctx.cfg.solver.D, start, ctx.cfg.run.sweeps);
  ctx.result["energy"] = res.energy;
  ctx.result["sweep_energies"] = res.sweep_energies;
  ctx.result["accepted_moves"] = res.accepted_moves;
  ctx.maybe_exact();
  ctx.timings["total_ms"] = ms_since(t0);
  if (ctx.cfg.output.emit_mps) out.mps = mps_to_json(res.state);
}

}  // namespace

RunOutput execute(const RunConfig& cfg, std::ostream* log) {
  validate_config(cfg);
  Context ctx{cfg, log, build_model(cfg.model.name, cfg.model.params, cfg.model.n, cfg.model.seed)};
  ctx.result["mode"] = cfg.run.mode;
  ctx.result["model"] = {{"name", cfg.model.name}, {"params", cfg.model.params}, {"n", cfg.model.n},
                         {"seed", cfg.model.seed}};
  json solver = {{"D", cfg.solver.D}, {"delta", cfg.solver.delta}, {"cap", cfg.solver.cap}};
  if (cfg.solver.epsilon_op) solver["epsilon_op"] = *cfg.solver.epsilon_op;
  if (cfg.solver.target_error) solver["target_error"] = *cfg.solver.target_error;
  ctx.result["solver"] = solver;

  RunOutput out;
  const std::string& mode = cfg.run.mode;
  if (mode == "solve") {
    run_solve(ctx, out);
  } else if (mode == "enumerate") {
    run_enumerate(ctx, out);
  } else if (mode == "oracle") {
    run_oracle(ctx, out);
  } else if (mode == "commuting") {
    run_commuting(ctx, out);
  } else if (mode == "net-stats") {
    run_net_stats(ctx, out);
  } else {
    run_baseline(ctx, out);
  }
  ctx.result["warnings"] = ctx.warnings;
  ctx.result["timings"] = ctx.timings;
  ctx.result["digest"] = result_digest(ctx.result);
  out.result = std::move(ctx.result);
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InfeasibleError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 4;
  return 2;
}

}  // namespace mpsdp
