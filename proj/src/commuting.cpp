#include "mpsdp/commuting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mpsdp/errors.hpp"

namespace mpsdp {

namespace {

std::size_t max_bond(const MpsChain& c) {
  std::size_t worst = 1;
  for (const auto& s : c.sites) worst = std::max({worst, s.extent(0), s.extent(2)});
  return worst;
}

/// |(H_t - e) psi| / |psi|.
double term_residual(const CanonicalMps& m, const NnHamiltonian& h, std::size_t t, double e) {
  if (use_dense_path(h)) {
    VectorXc v = to_dense(m);
    v /= v.norm();
    return (apply_term(h, t, v) - e * v).norm();
  }
  const MpsChain chain = to_chain(m);
  const MatrixXc shifted =
      h.terms[t] - e * MatrixXc::Identity(h.terms[t].rows(), h.terms[t].cols());
  return chain_norm(apply_two_site(chain, t, shifted)) / chain_norm(chain);
}

}  // namespace

bool use_dense_path(const NnHamiltonian& h) {
  return h.n <= 12 && h.total_dim() <= (std::size_t{1} << 14);
}

EigDecomp eig_projectors(const MatrixXc& hterm, double cluster_tol) {
  detail::require_hermitian(hterm);
  const MatrixXc sym = 0.5 * (hterm + hterm.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("term eigensolver did not converge");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  EigDecomp out;
  Eigen::Index first = 0;
  for (Eigen::Index i = 1; i <= ev.size(); ++i) {
    if (i < ev.size() && ev(i) - ev(first) <= cluster_tol * scale) continue;
    const MatrixXc v = eig.eigenvectors().middleCols(first, i - first);
    out.projectors.push_back(v * v.adjoint());
    out.eigenvalues.push_back(ev.segment(first, i - first).mean());
    first = i;
  }
  out.k = out.projectors.size();
  return out;
}

Projection apply_projector(const CanonicalMps& m, const MatrixXc& projector, std::size_t site) {
  if (site + 1 >= m.n) throw RangeError("projector position out of range");
  const MpsChain chain = to_chain(m);
  const double before = chain_norm(chain);
  const MpsChain applied = apply_two_site(chain, site, projector);
  const double after = chain_norm(applied);
  const double ratio = before > 0.0 ? after / before : 0.0;
  if (!(ratio > 1e-12)) {
    throw NumericalError("projector on sites " + std::to_string(site) + ", " +
                         std::to_string(site + 1) + " annihilates the state");
  }
  const std::size_t cap = std::max(m.D, max_bond(applied));
  Projection out;
  out.state = canonicalize_chain(applied, cap, TruncationMode::strict, m.s).mps;
  out.weight = ratio * ratio;
  return out;
}

std::vector<EigenspaceScore> score_eigenspaces(const CanonicalMps& m, const NnHamiltonian& h,
                                               std::size_t t, const EigDecomp& decomp) {
  if (t + 1 >= h.n) throw RangeError("term index out of range");
  std::vector<EigenspaceScore> scores(decomp.k);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (use_dense_path(h)) {
    VectorXc v = to_dense(m);
    v /= v.norm();
    for (std::size_t j = 0; j < decomp.k; ++j) {
      const VectorXc vj = apply_local_operator(h.dims, t, decomp.projectors[j], v);
      scores[j].weight = vj.squaredNorm();
      scores[j].energy = scores[j].weight > 1e-24 ? dense_energy(h, vj) : nan;
    }
    return scores;
  }
  const MpsChain chain = to_chain(m);
  const double n0 = chain_norm(chain);
  for (std::size_t j = 0; j < decomp.k; ++j) {
    const MpsChain applied = apply_two_site(chain, t, decomp.projectors[j]);
    const double ratio = chain_norm(applied) / n0;
    scores[j].weight = ratio * ratio;
    scores[j].energy = scores[j].weight > 1e-24 ? chain_energy(applied, h) : nan;
  }
  return scores;
}

RefineResult refine_to_eigenstate(const CanonicalMps& omega, const NnHamiltonian& h,
                                  const RefineOptions& options) {
  if (omega.n != h.n) throw ShapeError("state and Hamiltonian site counts differ");
  if (!is_commuting(h)) {
    throw RangeError("refine_to_eigenstate needs commuting terms; largest commutator norm is " +
                     std::to_string(max_adjacent_commutator(h)));
  }
  const double n = static_cast<double>(h.n);
  RefineResult res;
  CanonicalMps state = omega;
  for (std::size_t t = 0; t + 1 < h.n; ++t) {
    const EigDecomp decomp = eig_projectors(h.terms[t], options.cluster_tol);
    const auto scores = score_eigenspaces(state, h, t, decomp);
    const double threshold = 1.0 / (static_cast<double>(decomp.k) * n * n);
    std::size_t pick = decomp.k;
    for (std::size_t j = 0; j < decomp.k; ++j) {
      if (!(scores[j].weight >= threshold)) continue;
      if (pick == decomp.k || scores[j].energy < scores[pick].energy) pick = j;
    }
    if (pick == decomp.k) {
      throw NumericalError("no eigenspace of term " + std::to_string(t) +
                           " carries weight >= 1/(k n^2); the seed energy surplus is too large");
    }
    state = apply_projector(state, decomp.projectors[pick], t).state;
    res.chosen.push_back({t, pick, decomp.eigenvalues[pick], scores[pick].weight});
    for (const auto& c : res.chosen) {
      res.recheck_max = std::max(res.recheck_max, term_residual(state, h, c.term, c.eigenvalue));
    }
  }
  res.energy = 0.0;
  for (const auto& c : res.chosen) res.energy += c.eigenvalue;
  res.residuals = verify_eigenstate(state, h, options.cluster_tol);
  for (std::size_t j = 2; j <= state.n; ++j) res.ranks.push_back(state.bond_dim(j));
  if (options.surplus) res.surplus_bound = std::pow(1.0 + 1.0 / n, n - 1.0) * *options.surplus;
  res.state = std::move(state);
  return res;
}

std::vector<double> verify_eigenstate(const CanonicalMps& state, const NnHamiltonian& h,
                                      double cluster_tol) {
  if (state.n != h.n) throw ShapeError("state and Hamiltonian site counts differ");
  std::vector<double> out;
  const bool dense = use_dense_path(h);
  VectorXc v;
  if (dense) {
    v = to_dense(state);
    v /= v.norm();
  }
  for (std::size_t t = 0; t + 1 < h.n; ++t) {
    const EigDecomp decomp = eig_projectors(h.terms[t], cluster_tol);
    double best = std::numeric_limits<double>::infinity();
    if (dense) {
      const VectorXc w = apply_term(h, t, v);
      for (double e : decomp.eigenvalues) best = std::min(best, (w - e * v).norm());
    } else {
      for (double e : decomp.eigenvalues) best = std::min(best, term_residual(state, h, t, e));
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace mpsdp
