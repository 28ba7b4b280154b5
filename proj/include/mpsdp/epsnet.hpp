#pragma once

// Grid-based nets of matrices with orthonormal rows, and the boundary and
// (lambda, B) pair nets built from them.

#include <cstddef>
#include <optional>
#include <vector>

#include "mpsdp/tensor.hpp"

namespace mpsdp {

struct GridParams {
  double delta = 0.25;

  explicit GridParams(double delta);
  /// Certified covering radius per row for b columns: 59 b delta.
  double nu_cert(std::size_t b) const { return 59.0 * static_cast<double>(b) * delta; }
};

/// {(2j+1) delta : j = 0 .. ceil(1/(2 delta)) - 2} followed by 1 - delta.
std::vector<double> real_grid(double delta);
/// x e^{i 2 pi y} over x, y in real_grid, x outer and y inner.
std::vector<cplx> complex_grid(double delta);
/// Worst distance from the closed unit disc to complex_grid, estimated on
/// a fine polar sample. Diagnostic only.
double complex_grid_covering_radius(double delta, std::size_t samples = 400);

/// Named stages of the generator pipeline, exposed for property tests.
namespace pipeline {

/// Entrywise nearest grid point (X).
MatrixXc round_to_grid(const MatrixXc& a, const std::vector<cplx>& grid);
/// Max over rows of the Euclidean row distance.
double row_distance(const MatrixXc& a, const MatrixXc& b);
/// Step 1: every row norm within [1 - 2 sqrt(b) delta, 1 + 2 sqrt(b) delta].
bool norm_filter(const MatrixXc& x, double delta);
/// Step 2: rows scaled to unit norm (Y).
MatrixXc normalize_rows(const MatrixXc& x);
/// Largest |<y_i|y_j>| over i != j.
double max_row_overlap(const MatrixXc& y);
/// Step 3: every off-diagonal row overlap at most 9 sqrt(b) delta.
bool overlap_filter(const MatrixXc& y, double delta);
/// Step 4: Gram-Schmidt over the rows in order (Z). Returns nothing when
/// a row is numerically dependent on the earlier ones.
std::optional<MatrixXc> gram_schmidt_rows(const MatrixXc& y);

}  // namespace pipeline

struct FamilyStats {
  double candidates = 0;           ///< |grid|^(ab)
  std::size_t after_norm_filter = 0;
  std::size_t after_overlap_filter = 0;
  std::size_t degenerate = 0;      ///< dropped by Gram-Schmidt
  std::size_t duplicates = 0;      ///< identical outputs collapsed
};

struct OrthonormalFamily {
  std::size_t a = 0, b = 0;
  double delta = 0.0;
  bool real_nonneg = false;
  double nu_cert = 0.0;
  std::vector<MatrixXc> matrices;  ///< a x b, orthonormal rows
  FamilyStats stats;
};

/// Enumerates every a x b matrix over the grid in lexicographic order of
/// grid indices (row-major entry order, first entry most significant) and
/// runs the four pipeline steps. Outputs that coincide after Gram-Schmidt
/// (entrywise within 1e-10) are kept once, at their first occurrence.
/// Throws InfeasibleError when |grid|^(ab) exceeds cap.
OrthonormalFamily orthonormal_family(std::size_t a, std::size_t b, double delta,
                                     bool real_nonneg, double cap = 1e7,
                                     unsigned threads = 0);

struct BoundaryNet {
  std::vector<Tensor> tensors;  ///< (D, d_end), orthonormal rows
  double delta = 0.0;
  double nu_cert = 0.0;
  std::size_t size() const { return tensors.size(); }
};

BoundaryNet build_end_net(std::size_t D, std::size_t d_end, double delta,
                          double cap = 1e7, unsigned threads = 0);

struct NetPair {
  std::vector<double> lambda;
  Tensor b;                  ///< (D, d, D)
  std::vector<double> mu;    ///< mu_of(lambda, b)
  std::size_t lambda_index = 0;  ///< index into PairNet::lambdas
  std::size_t b_index = 0;       ///< index into the B-net
};

struct PairNet {
  std::vector<NetPair> pairs;
  std::vector<std::vector<double>> lambdas;  ///< the lambda-net
  std::size_t D = 0, d = 0;
  double delta = 0.0;
  double nu_cert_lambda = 0.0;
  double nu_cert_b = 0.0;
  double epsilon_cert = 0.0;
  double epsilon_op = 0.0;
  std::size_t b_net_size = 0;
  std::size_t discarded = 0;  ///< pairs removed by the left-canonical filter
  std::size_t size() const { return pairs.size(); }
};

/// 2 * 59 * d * D * delta.
double pair_net_epsilon_cert(std::size_t D, std::size_t d, double delta);

/// Cartesian product of the lambda-net and the B-net, filtered to pairs
/// whose left overlaps are at most 3 epsilon_op (default: epsilon_cert).
/// Throws NumericalError when the filter leaves nothing.
PairNet build_pair_net(std::size_t D, std::size_t d, double delta,
                       std::optional<double> epsilon_op = {}, double cap = 1e7,
                       unsigned threads = 0);

struct NetSizeEstimate {
  double base = 0.0;       ///< 144 d D / epsilon
  double exponent = 0.0;   ///< D + 2 d D^2
  double log10 = 0.0;
  std::optional<unsigned long long> exact;  ///< when it fits in 64 bits
};

NetSizeEstimate net_size_estimate(std::size_t D, std::size_t d, double epsilon);

}  // namespace mpsdp
