#pragma once

// Eigenspace projection for commuting nearest-neighbour Hamiltonians: an
// approximate ground state is driven into an exact common eigenstate by
// projecting onto one eigenspace of each term in turn.

#include <cstddef>
#include <optional>
#include <vector>

#include "mpsdp/hamiltonian.hpp"
#include "mpsdp/mps.hpp"

namespace mpsdp {

struct EigDecomp {
  std::vector<MatrixXc> projectors;
  std::vector<double> eigenvalues;  ///< cluster means, ascending
  std::size_t k = 0;
};

/// Groups eigenvalues closer than cluster_tol * max(1, |largest|) into one
/// eigenspace.
EigDecomp eig_projectors(const MatrixXc& hterm, double cluster_tol = 1e-8);

struct Projection {
  CanonicalMps state;   ///< P psi / |P psi|
  double weight = 0.0;  ///< <psi|P|psi> / <psi|psi>
};

/// Applies a projector to sites (site, site+1) and recompresses exactly.
/// The bond cap grows as needed. Throws NumericalError when the weight's
/// square root is at most 1e-12.
Projection apply_projector(const CanonicalMps& m, const MatrixXc& projector, std::size_t site);

struct EigenspaceScore {
  double weight = 0.0;  ///< c_j
  double energy = 0.0;  ///< E(P_j psi / |P_j psi|), NaN when c_j is zero
};

/// c_j and E(psi_j) for every eigenspace of term t.
std::vector<EigenspaceScore> score_eigenspaces(const CanonicalMps& m, const NnHamiltonian& h,
                                               std::size_t t, const EigDecomp& decomp);

struct ChosenEigenspace {
  std::size_t term = 0;
  std::size_t index = 0;
  double eigenvalue = 0.0;
  double weight = 0.0;
};

struct RefineOptions {
  double cluster_tol = 1e-8;
  std::optional<double> surplus;  ///< expected energy surplus of the seed
};

struct RefineResult {
  CanonicalMps state;
  double energy = 0.0;  ///< sum of chosen eigenvalues
  std::vector<ChosenEigenspace> chosen;
  std::vector<double> residuals;     ///< per term, after the last projection
  double recheck_max = 0.0;          ///< worst residual of earlier terms seen mid-run
  std::vector<std::size_t> ranks;    ///< Schmidt ranks of the final state
  std::optional<double> surplus_bound;  ///< (1+1/n)^(n-1) times the seed surplus
};

/// Throws RangeError for non-commuting input and NumericalError when a term
/// has no eigenspace with c_j >= 1/(k n^2).
RefineResult refine_to_eigenstate(const CanonicalMps& omega, const NnHamiltonian& h,
                                  const RefineOptions& options = {});

/// Per-term min over eigenvalues e of |(H_t - e) psi| for normalized psi.
std::vector<double> verify_eigenstate(const CanonicalMps& state, const NnHamiltonian& h,
                                      double cluster_tol = 1e-8);

/// Dense evaluation is used when n <= 12 and the chain dimension is at most 2^14.
bool use_dense_path(const NnHamiltonian& h);

}  // namespace mpsdp
