#pragma once

// Canonical matrix product states in (lambda, B) pair form.
//
// A canonical MPS on n sites is stored as
//
//   Gamma_left  lambda_2  B_2  B_3 ... B_{n-1}  Gamma_right
//
// where B_j = Gamma_j mu_j is the right-canonical site tensor and only the
// first Schmidt vector lambda_2 is kept. The remaining lambda vectors follow
// from mu_of. Bond dimensions may vary from bond to bond up to the cap D,
// which is what an exact canonical form of a state with small boundary
// dimension needs.

#include <cstddef>
#include <span>
#include <vector>

#include "mpsdp/hamiltonian.hpp"
#include "mpsdp/tensor.hpp"

namespace mpsdp {

struct CanonicalMps {
  std::size_t n = 0;       ///< site count (grouped chain)
  std::size_t d = 0;       ///< interior physical dimension
  std::size_t D = 0;       ///< bond dimension cap
  std::size_t d_end = 0;   ///< boundary physical dimension
  std::size_t s = 1;       ///< boundary grouping count

  Tensor gamma_left;              ///< (D_2, d_end)
  std::vector<double> lambda2;    ///< Schmidt coefficients at the first cut
  std::vector<Tensor> b_tensors;  ///< (D_j, d, D_{j+1}) for interior sites
  Tensor gamma_right;             ///< (D_n, d_end)

  /// Dimension of bond j, for j in [2, n] (bond j sits left of site j).
  std::size_t bond_dim(std::size_t j) const;
  /// lambda_2 .. lambda_n, the later ones derived through mu_of.
  std::vector<std::vector<double>> lambdas() const;
  /// Shape, finiteness and sign checks; throws ShapeError or RangeError.
  void validate() const;
};

struct CanonicalReport {
  std::vector<double> left;           ///< per interior pair (lambda_j, B_j)
  std::vector<double> right;          ///< per interior B_j
  double boundary_left = 0.0;         ///< Gamma_left rows
  double boundary_right = 0.0;        ///< Gamma_right rows
  std::vector<double> normalization;  ///< | |lambda_j|^2 - 1 | per bond
  double tol = 0.0;
  bool pass = false;

  double max_residual() const;
};

enum class TruncationMode { strict, truncate };

struct Canonicalization {
  CanonicalMps mps;
  std::vector<std::size_t> ranks;  ///< Schmidt rank per bond, bonds 2..n
  double discarded_weight = 0.0;   ///< summed squared discarded Schmidt values
};

/// Singular values at or below this are treated as zero.
inline constexpr double kSchmidtThreshold = 1e-12;

/// mu_b = sqrt(sum_{i,a} |lambda_a B[a,i,b]|^2).
std::vector<double> mu_of(std::span<const double> lambda, const Tensor& b);

/// Largest off-diagonal |<(lambda B)_b | (lambda B)_b'>| over b != b'.
double left_overlap_residual(std::span<const double> lambda, const Tensor& b);

/// Exact canonical form of a unit vector over d_end d^(n-2) d_end.
/// Strict mode throws RangeError when a cut has more than D Schmidt values
/// above the threshold; truncate mode keeps the D largest and renormalizes.
Canonicalization canonicalize_detailed(const VectorXc& state, std::size_t n,
                                       std::size_t d, std::size_t D,
                                       std::size_t d_end,
                                       TruncationMode mode = TruncationMode::strict);
CanonicalMps canonicalize(const VectorXc& state, std::size_t n, std::size_t d,
                          std::size_t D, std::size_t d_end,
                          TruncationMode mode = TruncationMode::strict);

/// Dense coefficient vector, site 1 most significant. Guarded at 2^24.
VectorXc to_dense(const CanonicalMps& m);

CanonicalReport check_canonical(const CanonicalMps& m, double tol = 1e-10);

/// Windowed energy of one term assuming canonical collapse on both sides.
/// b2 of rank 3 gives the interior window (lambda_j, B_j, B_{j+1}); b2 of
/// rank 2 is read as Gamma_right and gives the right boundary window.
double local_energy(std::span<const double> lambda, const Tensor& b1,
                    const Tensor& b2, const MatrixXc& hterm);
/// Left boundary window (Gamma_left, lambda_2, B_2).
double local_energy_left(const Tensor& gamma_left, std::span<const double> lambda2,
                         const Tensor& b2, const MatrixXc& hterm);
/// Whole-chain window for n = 2: (Gamma_left, lambda_2, Gamma_right).
double local_energy_pair(const Tensor& gamma_left, std::span<const double> lambda2,
                         const Tensor& gamma_right, const MatrixXc& hterm);

/// Sum of windowed energies over all terms of h.
double local_energy_sum(const CanonicalMps& m, const NnHamiltonian& h);

/// <Omega|H|Omega> / <Omega|Omega> by transfer contraction; exact for any
/// gauge, canonical or not.
double expectation_full(const CanonicalMps& m, const NnHamiltonian& h);

/// Product state with the given basis index per site; all bonds have
/// dimension 1 and D records the cap.
CanonicalMps product_state(std::span<const std::size_t> basis, std::size_t d,
                           std::size_t d_end, std::size_t D, std::size_t s = 1);

/// Multiplies v by a phase so that its largest-magnitude entry is real
/// positive.
VectorXc align_phase(const VectorXc& v);
/// |a - e^{i phi} b| with phi fixed by aligning the largest entry of a.
double phase_aligned_distance(const VectorXc& a, const VectorXc& b);

namespace detail {

/// Window energies without the Hermiticity check, for inner loops that
/// validate the term once up front.
double window_left(const Tensor& gamma_left, std::span<const double> lambda2,
                   const Tensor& b2, const MatrixXc& hterm);
double window_interior(std::span<const double> lambda, const Tensor& b1,
                       const Tensor& b2, const MatrixXc& hterm);
double window_right(std::span<const double> lambda, const Tensor& b1,
                    const Tensor& gamma_right, const MatrixXc& hterm);
void require_hermitian(const MatrixXc& hterm);

}  // namespace detail

// Generic open-boundary MPS used for transfer contractions, operator
// application and recompression. Site k has shape (left, physical, right)
// with outer bonds of dimension 1.
struct MpsChain {
  std::vector<Tensor> sites;

  std::size_t size() const { return sites.size(); }
  std::vector<std::size_t> physical_dims() const;
};

MpsChain to_chain(const CanonicalMps& m);
/// Left-orthonormal chain holding a dense vector (no truncation).
MpsChain chain_from_dense(const VectorXc& state, std::span<const std::size_t> dims);
VectorXc chain_to_dense(const MpsChain& c);
double chain_norm(const MpsChain& c);
/// Unnormalized <psi| op_{k,k+1} |psi>.
cplx chain_two_site_expectation(const MpsChain& c, std::size_t k, const MatrixXc& op);
/// <psi|H|psi> / <psi|psi>.
double chain_energy(const MpsChain& c, const NnHamiltonian& h);
/// op applied to sites (k, k+1); the bond between them is re-split by SVD.
MpsChain apply_two_site(const MpsChain& c, std::size_t k, const MatrixXc& op);
/// Canonical form of a chain; the state is normalized first.
Canonicalization canonicalize_chain(const MpsChain& c, std::size_t D,
                                    TruncationMode mode, std::size_t s = 1);

}  // namespace mpsdp
