#pragma once

// Reference computations used to check the solver: exact diagonalization,
// brute-force search over net assignments, and a greedy single-site sweep.

#include <cstddef>
#include <vector>

#include "mpsdp/dp_solver.hpp"
#include "mpsdp/epsnet.hpp"
#include "mpsdp/hamiltonian.hpp"
#include "mpsdp/mps.hpp"

namespace mpsdp {

struct GroundTruth {
  double e0 = 0.0;
  VectorXc ground_vector;
  std::size_t degeneracy = 0;  ///< eigenvalues within 1e-9 of e0
  double gap = 0.0;            ///< to the next distinct eigenvalue, 0 if none
  Eigen::VectorXd spectrum;    ///< ascending
};

/// Dense Hermitian eigendecomposition; total dimension must be <= 2^14.
GroundTruth exact_ground(const NnHamiltonian& h);

struct EnumerationResult {
  bool feasible = false;       ///< false when no sequence stitches
  double e_alg_min = 0.0;
  Assignment assignment;       ///< lexicographically first minimizer
  double sequences = 0.0;      ///< admissible sequences scored
};

/// Scores every stitched sequence (Gamma_left, pairs..., Gamma_right) with
/// the same window arithmetic and summation order as the dynamic program.
/// Throws InfeasibleError above max_sequences admissible sequences.
EnumerationResult enumerate_net_optimum(const NnHamiltonian& h, const BoundaryNet& ends,
                                        const PairNet& net, double epsilon_op,
                                        unsigned threads = 0, double max_sequences = 1e8);

struct BaselineResult {
  double energy = 0.0;
  std::vector<double> sweep_energies;  ///< energy after each full sweep
  std::size_t accepted_moves = 0;
  CanonicalMps state;
};

/// Greedy coordinate descent: each step replaces one site tensor by the
/// lowest eigenvector of the effective Hamiltonian with the other sites
/// fixed, and is kept only if it lowers the energy by more than 1e-12. The
/// state is brought back to canonical form (bond cap D) after each move.
/// A sweep visits sites left to right and back. Needs a dense-sized chain.
BaselineResult local_sweep_baseline(const NnHamiltonian& h, std::size_t D,
                                    const CanonicalMps& start, std::size_t sweeps);

}  // namespace mpsdp
