#pragma once

// Nearest-neighbour Hamiltonians H = sum_j H_{j,j+1} on open chains.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpsdp/tensor.hpp"

namespace mpsdp {

struct NnHamiltonian {
  std::size_t n = 0;               ///< site count (after any grouping)
  std::vector<std::size_t> dims;   ///< per-site physical dimension
  std::vector<MatrixXc> terms;     ///< term j acts on sites (j, j+1), 0-based
  double J = 0.0;                  ///< max operator norm over terms
  std::size_t s = 1;               ///< boundary grouping count

  std::size_t d() const { return n > 2 ? dims[1] : dims[0]; }
  std::size_t d_end() const { return dims.front(); }
  /// Product of all site dimensions (saturates at SIZE_MAX).
  std::size_t total_dim() const;
};

using ModelParams = std::map<std::string, double>;

/// Validates shapes and Hermiticity (1e-10) and caches J.
NnHamiltonian make_hamiltonian(std::vector<std::size_t> dims,
                               std::vector<MatrixXc> terms, std::size_t s = 1);

/// Model names accepted by build_model.
const std::vector<std::string>& model_names();

/// Catalog models on n sites with uniform dimension d (ungrouped, s = 1).
///
///   zz_chain            J Z.Z                        params: J
///   transverse_ising    -J Z.Z - g X                 params: J, g
///   heisenberg          J (X.X + Y.Y + Z.Z)          params: J
///   random_hermitian    seeded Gaussian terms        params: d, scale
///   trap_model          (bond/2)(I - Z.Z) + field (I+Z)/2 per site
///                                                    params: bond, field
///   diagonal_commuting  seeded diagonal terms        params: d, scale
///   rotated_classical   diagonal_commuting conjugated by one seeded
///                       unitary per site             params: d, scale
///
/// Single-site fields are folded into the bond terms with weight 1/2 on
/// each adjacent bond; boundary sites fold their whole field into their
/// only bond.
NnHamiltonian build_model(const std::string& name, const ModelParams& params,
                          std::size_t n, std::optional<std::uint64_t> seed = {});

/// Smallest s >= 1 with d^s >= D.
std::size_t grouping_count(std::size_t d, std::size_t D);

/// Merges the first s and last s sites into single sites of dimension d^s
/// so that every cut of the grouped chain has room for D Schmidt vectors.
NnHamiltonian group_boundaries(const NnHamiltonian& h, std::size_t D);

double max_term_norm(const NnHamiltonian& h);

/// Largest operator norm of [H_{j-1,j} x I, I x H_{j,j+1}] over adjacent pairs.
double max_adjacent_commutator(const NnHamiltonian& h);
bool is_commuting(const NnHamiltonian& h, double tol = 1e-10);

/// Dense sum of identity-padded terms; total dimension must be <= 2^14.
MatrixXc to_dense_hamiltonian(const NnHamiltonian& h);

/// (I x op x I) v with op acting on sites (t, t+1) of a chain with the
/// given site dimensions.
VectorXc apply_local_operator(std::span<const std::size_t> dims, std::size_t t,
                              const MatrixXc& op, const VectorXc& v);
/// Matrix-free (I x H_{t,t+1} x I) v.
VectorXc apply_term(const NnHamiltonian& h, std::size_t t, const VectorXc& v);
/// Matrix-free H v.
VectorXc apply_hamiltonian(const NnHamiltonian& h, const VectorXc& v);
/// <v|H|v> / <v|v>.
double dense_energy(const NnHamiltonian& h, const VectorXc& v);

}  // namespace mpsdp
