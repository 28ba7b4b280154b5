#pragma once

// Dynamic program over net elements. Each list L_j holds, for every pair
// (lambda, B) of the pair net that can sit at site j, the lowest windowed
// energy of any stitched chain ending in it and a pointer to its best
// predecessor.

#include <cstddef>
#include <optional>
#include <vector>

#include "mpsdp/epsnet.hpp"
#include "mpsdp/hamiltonian.hpp"
#include "mpsdp/mps.hpp"

namespace mpsdp {

struct DpEntry {
  std::size_t pair_index = 0;  ///< index into the pair net
  std::size_t tail = 0;        ///< position in the previous list (Gamma_left index for L_2)
  double energy = 0.0;
};

struct Assignment {
  std::size_t gamma_left = 0;        ///< boundary net index
  std::vector<std::size_t> pairs;    ///< pair net index for sites 2..n-1
  std::size_t gamma_right = 0;       ///< boundary net index

  bool operator==(const Assignment&) const = default;
};

struct DefectMatrix {
  MatrixXc delta;          ///< off-diagonal Gram of (lambda B) plus the diagonal mismatch
  double max_abs = 0.0;
  double max_offdiag = 0.0;
  double max_diag = 0.0;
};

/// Delta = R + diag(|lambda_next|^2 - mu^2) with R the off-diagonal Gram
/// matrix of the columns of lambda B.
DefectMatrix left_defect(std::span<const double> lambda, const Tensor& b,
                         std::span<const double> lambda_next);

struct ErrorBounds {
  double lower = 0.0;        ///< e_alg - 6 J n epsilon
  double upper_slack = 0.0;  ///< 1.5 J D^2 n^2 epsilon
};

ErrorBounds error_bounds(double e_alg, double J, std::size_t n, std::size_t D, double epsilon);
/// epsilon giving additive error `target`: target / (2 J D^2 n^2).
double required_epsilon(double target, double J, std::size_t D, std::size_t n);

/// Stitching test |mu - lambda| <= 2 epsilon_op.
bool stitches(std::span<const double> mu, std::span<const double> lambda, double epsilon_op);

/// First list: every pair with its best Gamma_left under the left window.
std::vector<DpEntry> first_list(const BoundaryNet& ends, const PairNet& net,
                                const MatrixXc& hterm, unsigned threads = 0);

/// One stitched step. Pairs without an admissible predecessor are left out
/// and counted in *dropped. Throws NumericalError when nothing survives.
std::vector<DpEntry> extend_list(const std::vector<DpEntry>& prev, const PairNet& net,
                                 const MatrixXc& hterm, double epsilon_op,
                                 unsigned threads = 0, std::size_t* dropped = nullptr);

struct SolverOptions {
  double delta = 0.25;
  std::optional<double> epsilon_op;  ///< defaults to the certified epsilon
  double cap = 1e7;                  ///< candidate cap per generated family
  double max_transitions = 2e9;      ///< guard on total DP transitions
  unsigned threads = 0;
};

struct SolveTimings {
  double nets_ms = 0.0;
  double dp_ms = 0.0;
  double evaluate_ms = 0.0;
};

struct SolveResult {
  CanonicalMps omega;
  Assignment assignment;
  double e_alg = 0.0;
  double e_true = 0.0;
  double lower_bound = 0.0;
  double upper_slack = 0.0;
  double epsilon_cert = 0.0;
  double epsilon_op = 0.0;
  double delta = 0.0;
  std::size_t N = 0;              ///< pair net size
  std::size_t end_net_size = 0;
  std::size_t discarded_pairs = 0;
  std::vector<std::size_t> list_sizes;  ///< |L_2| .. |L_{n-1}|
  std::vector<std::size_t> dropped;     ///< pairs dropped while building L_3 .. L_{n-1}
  std::vector<double> junction_defects; ///< max |Delta| between consecutive chosen pairs
  double transitions = 0.0;
  SolveTimings timings;
};

/// Checks that h has the grouped layout (d_end, d, ..., d, d_end), n >= 3,
/// and D <= d_end.
void require_solver_layout(const NnHamiltonian& h, std::size_t D);

SolveResult solve_with_nets(const NnHamiltonian& h, const BoundaryNet& ends, const PairNet& net,
                            const SolverOptions& options);
/// Builds both nets and runs the dynamic program.
SolveResult solve(const NnHamiltonian& h, std::size_t D, const SolverOptions& options);

/// Assembles the MPS named by an assignment.
CanonicalMps assemble(const NnHamiltonian& h, const BoundaryNet& ends, const PairNet& net,
                      const Assignment& a);

}  // namespace mpsdp
