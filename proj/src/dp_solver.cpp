#include "mpsdp/dp_solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "mpsdp/errors.hpp"
#include "mpsdp/parallel.hpp"

namespace mpsdp {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

DefectMatrix left_defect(std::span<const double> lambda, const Tensor& b,
                         std::span<const double> lambda_next) {
  if (b.rank() != 3) throw ShapeError("left_defect expects a rank-3 tensor");
  const std::size_t rows = b.extent(0), p = b.extent(1), cols = b.extent(2);
  if (lambda.size() != rows || lambda_next.size() != cols) {
    throw ShapeError("left_defect: lambda lengths do not match tensor " + shape_string(b.shape()));
  }
  MatrixXc x(static_cast<Eigen::Index>(rows * p), static_cast<Eigen::Index>(cols));
  for (std::size_t a = 0; a < rows; ++a)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t c = 0; c < cols; ++c)
        x(static_cast<Eigen::Index>(a * p + i), static_cast<Eigen::Index>(c)) =
            lambda[a] * b[(a * p + i) * cols + c];
  DefectMatrix out;
  out.delta = x.adjoint() * x;
  const auto mu = mu_of(lambda, b);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    out.delta(ci, ci) = lambda_next[c] * lambda_next[c] - mu[c] * mu[c];
  }
  for (Eigen::Index r = 0; r < out.delta.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.delta.cols(); ++c) {
      const double v = std::abs(out.delta(r, c));
      out.max_abs = std::max(out.max_abs, v);
      if (r == c) {
        out.max_diag = std::max(out.max_diag, v);
      } else {
        out.max_offdiag = std::max(out.max_offdiag, v);
      }
    }
  }
  return out;
}

ErrorBounds error_bounds(double e_alg, double J, std::size_t n, std::size_t D, double epsilon) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(D);
  return {e_alg - 6.0 * J * nn * epsilon, 1.5 * J * dd * dd * nn * nn * epsilon};
}

double required_epsilon(double target, double J, std::size_t D, std::size_t n) {
  if (!(target > 0.0) || !(J > 0.0) || D == 0 || n == 0) {
    throw RangeError("required_epsilon needs positive target, J, D and n");
  }
  const double dd = static_cast<double>(D);
  const double nn = static_cast<double>(n);
  return target / (2.0 * J * dd * dd * nn * nn);
}

bool stitches(std::span<const double> mu, std::span<const double> lambda, double epsilon_op) {
  if (mu.size() != lambda.size()) throw ShapeError("stitching vectors differ in length");
  double s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) s += (mu[k] - lambda[k]) * (mu[k] - lambda[k]);
  return std::sqrt(s) <= 2.0 * epsilon_op;
}

std::vector<DpEntry> first_list(const BoundaryNet& ends, const PairNet& net, const MatrixXc& hterm,
                                unsigned threads) {
  detail::require_hermitian(hterm);
  if (ends.size() == 0 || net.size() == 0) throw NumericalError("empty net");
  std::vector<DpEntry> list(net.size());
  parallel_for(net.size(), threads, [&](std::size_t p) {
    const NetPair& pair = net.pairs[p];
    DpEntry best{p, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t g = 0; g < ends.size(); ++g) {
      const double e = detail::window_left(ends.tensors[g], pair.lambda, pair.b, hterm);
      if (e < best.energy) {
        best.energy = e;
        best.tail = g;
      }
    }
    list[p] = best;
  });
  return list;
}

std::vector<DpEntry> extend_list(const std::vector<DpEntry>& prev, const PairNet& net,
                                 const MatrixXc& hterm, double epsilon_op, unsigned threads,
                                 std::size_t* dropped) {
  if (prev.empty()) throw NumericalError("cannot extend an empty list");
  detail::require_hermitian(hterm);
  // Admissibility depends on the successor only through its lambda, so the
  // predecessor sets are computed once per lambda-net element.
  std::vector<std::vector<std::size_t>> admissible(net.lambdas.size());
  for (std::size_t l = 0; l < net.lambdas.size(); ++l) {
    for (std::size_t q = 0; q < prev.size(); ++q) {
      if (stitches(net.pairs[prev[q].pair_index].mu, net.lambdas[l], epsilon_op)) {
        admissible[l].push_back(q);
      }
    }
  }
  constexpr double kNone = std::numeric_limits<double>::infinity();
  std::vector<DpEntry> slots(net.size(), DpEntry{0, 0, kNone});
  parallel_for(net.size(), threads, [&](std::size_t p) {
    const NetPair& pair = net.pairs[p];
    DpEntry best{p, 0, kNone};
    for (std::size_t q : admissible[pair.lambda_index]) {
      const NetPair& before = net.pairs[prev[q].pair_index];
      const double e = prev[q].energy + detail::window_interior(before.lambda, before.b, pair.b, hterm);
      if (e < best.energy) {
        best.energy = e;
        best.tail = q;
      }
    }
    slots[p] = best;
  });
  std::vector<DpEntry> out;
  std::size_t lost = 0;
  for (const auto& e : slots) {
    if (std::isinf(e.energy)) {
      ++lost;
    } else {
      out.push_back(e);
    }
  }
  if (dropped != nullptr) *dropped = lost;
  if (out.empty()) {
    throw NumericalError("no stitching-admissible transitions: epsilon_op = " +
                         std::to_string(epsilon_op) + " is too small for the grid");
  }
  return out;
}

void require_solver_layout(const NnHamiltonian& h, std::size_t D) {
  if (h.n < 3) throw RangeError("the solver needs at least three (grouped) sites");
  if (D == 0) throw RangeError("bond dimension must be positive");
  if (h.dims.front() != h.dims.back()) throw RangeError("boundary sites must share one dimension");
  for (std::size_t k = 1; k + 1 < h.n; ++k) {
    if (h.dims[k] != h.dims[1]) throw RangeError("interior sites must share one dimension");
  }
  if (D > h.dims.front()) {
    throw RangeError("D = " + std::to_string(D) + " exceeds the boundary dimension " +
                     std::to_string(h.dims.front()) + "; group the boundary sites first");
  }
}

CanonicalMps assemble(const NnHamiltonian& h, const BoundaryNet& ends, const PairNet& net,
                      const Assignment& a) {
  CanonicalMps m;
  m.n = h.n;
  m.d = h.d();
  m.D = net.D;
  m.d_end = h.d_end();
  m.s = h.s;
  m.gamma_left = ends.tensors.at(a.gamma_left);
  m.lambda2 = net.pairs.at(a.pairs.front()).lambda;
  for (std::size_t p : a.pairs) m.b_tensors.push_back(net.pairs.at(p).b);
  m.gamma_right = ends.tensors.at(a.gamma_right);
  m.validate();
  return m;
}

SolveResult solve_with_nets(const NnHamiltonian& h, const BoundaryNet& ends, const PairNet& net,
                            const SolverOptions& options) {
  require_solver_layout(h, net.D);
  if (net.d != h.d()) throw RangeError("pair net physical dimension differs from the Hamiltonian");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = h.n;
  const double N = static_cast<double>(net.size());
  const double G = static_cast<double>(ends.size());
  const double transitions = 2.0 * N * G + static_cast<double>(n - 3) * N * N;
  if (transitions > options.max_transitions) {
    throw InfeasibleError("dynamic program needs about " + std::to_string(transitions) +
                          " transitions, above the guard " + std::to_string(options.max_transitions));
  }

  SolveResult res;
  res.delta = net.delta;
  res.epsilon_cert = net.epsilon_cert;
  res.epsilon_op = net.epsilon_op;
  res.N = net.size();
  res.end_net_size = ends.size();
  res.discarded_pairs = net.discarded;
  res.transitions = transitions;

  std::vector<std::vector<DpEntry>> lists;
  lists.push_back(first_list(ends, net, h.terms[0], options.threads));
  for (std::size_t j = 3; j <= n - 1; ++j) {
    std::size_t lost = 0;
    lists.push_back(extend_list(lists.back(), net, h.terms[j - 2], net.epsilon_op, options.threads, &lost));
    res.dropped.push_back(lost);
  }
  for (const auto& l : lists) res.list_sizes.push_back(l.size());

  // Final step: every right boundary against every entry of L_{n-1}.
  const auto& last = lists.back();
  const MatrixXc& hlast = h.terms[n - 2];
  detail::require_hermitian(hlast);
  std::vector<DpEntry> finals(ends.size());
  parallel_for(ends.size(), options.threads, [&](std::size_t g) {
    DpEntry best{g, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t q = 0; q < last.size(); ++q) {
      const NetPair& pair = net.pairs[last[q].pair_index];
      const double e = last[q].energy + detail::window_right(pair.lambda, pair.b, ends.tensors[g], hlast);
      if (e < best.energy) {
        best.energy = e;
        best.tail = q;
      }
    }
    finals[g] = best;
  });
  std::size_t g_best = 0;
  for (std::size_t g = 1; g < finals.size(); ++g) {
    if (finals[g].energy < finals[g_best].energy) g_best = g;
  }
  res.e_alg = finals[g_best].energy;
  if (!std::isfinite(res.e_alg)) throw NumericalError("dynamic program produced no finite energy");

  // Backtrack.
  Assignment& a = res.assignment;
  a.gamma_right = g_best;
  a.pairs.assign(n - 2, 0);
  std::size_t pos = finals[g_best].tail;
  for (std::size_t k = lists.size(); k-- > 0;) {
    a.pairs[k] = lists[k][pos].pair_index;
    pos = lists[k][pos].tail;
  }
  a.gamma_left = pos;
  res.timings.dp_ms = elapsed_ms(start);

  const auto eval_start = std::chrono::steady_clock::now();
  res.omega = assemble(h, ends, net, a);
  res.e_true = expectation_full(res.omega, h);
  const auto bounds = error_bounds(res.e_alg, h.J, n, net.D, net.epsilon_cert);
  res.lower_bound = bounds.lower;
  res.upper_slack = bounds.upper_slack;
  for (std::size_t k = 0; k + 1 < a.pairs.size(); ++k) {
    const NetPair& here = net.pairs[a.pairs[k]];
    const NetPair& next = net.pairs[a.pairs[k + 1]];
    res.junction_defects.push_back(left_defect(here.lambda, here.b, next.lambda).max_abs);
  }
  res.timings.evaluate_ms = elapsed_ms(eval_start);
  return res;
}

SolveResult solve(const NnHamiltonian& h, std::size_t D, const SolverOptions& options) {
  require_solver_layout(h, D);
  const auto start = std::chrono::steady_clock::now();
  const BoundaryNet ends = build_end_net(D, h.d_end(), options.delta, options.cap, options.threads);
  const PairNet net = build_pair_net(D, h.d(), options.delta, options.epsilon_op, options.cap, options.threads);
  const double nets_ms = elapsed_ms(start);
  SolveResult res = solve_with_nets(h, ends, net, options);
  res.timings.nets_ms = nets_ms;
  return res;
}

}  // namespace mpsdp
