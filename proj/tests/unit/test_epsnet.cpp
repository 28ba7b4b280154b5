#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mpsdp/errors.hpp"
#include "mpsdp/epsnet.hpp"
#include "mpsdp/linalg.hpp"
#include "mpsdp/mps.hpp"
#include "support/oracles.hpp"

using namespace mpsdp;

namespace {

bool contains_row(const std::vector<MatrixXc>& family, const std::vector<cplx>& row, double tol) {
  return std::any_of(family.begin(), family.end(), [&](const MatrixXc& m) {
    double dist = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k)
      dist = std::max(dist, std::abs(m(0, static_cast<Eigen::Index>(k)) - row[k]));
    return dist < tol;
  });
}

}  // namespace

TEST(EpsNet, RealGridExamples) {
  EXPECT_EQ(real_grid(0.25), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(real_grid(0.5), (std::vector<double>{0.5}));
  const auto g = real_grid(0.1);
  const std::vector<double> expected = {0.1, 0.3, 0.5, 0.7, 0.9};
  ASSERT_EQ(g.size(), expected.size());
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], expected[k], 1e-14);
}

TEST(EpsNet, ComplexGridExamples) {
  const auto half = complex_grid(0.5);
  ASSERT_EQ(half.size(), 1u);
  EXPECT_LT(std::abs(half[0] - cplx(-0.5, 0.0)), 1e-15);

  const auto quarter = complex_grid(0.25);
  const std::vector<cplx> expected = {{0, 0.25}, {0, -0.25}, {0, 0.75}, {0, -0.75}};
  ASSERT_EQ(quarter.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(std::abs(quarter[k] - expected[k]), 1e-15);
  EXPECT_EQ(complex_grid(0.1).size(), 25u);
}

TEST(EpsNet, GridRejectsBadSpacing) {
  EXPECT_THROW((void)real_grid(0.0), RangeError);
  EXPECT_THROW((void)real_grid(0.6), RangeError);
}

// The (0.25, 0.25) candidate passes the norm filter too (norm 0.354 is
// inside [0.293, 1.707]) and normalizes onto the same row as (0.75, 0.75),
// so the family still has exactly three distinct members.
TEST(EpsNet, RealFamilyExample) {
  const auto f = orthonormal_family(1, 2, 0.25, true);
  ASSERT_EQ(f.matrices.size(), 3u);
  const double a = 1 / std::sqrt(10.0), b = 3 / std::sqrt(10.0), c = 1 / std::sqrt(2.0);
  EXPECT_TRUE(contains_row(f.matrices, {a, b}, 1e-12));
  EXPECT_TRUE(contains_row(f.matrices, {b, a}, 1e-12));
  EXPECT_TRUE(contains_row(f.matrices, {c, c}, 1e-12));
  EXPECT_EQ(f.stats.candidates, 4.0);
  EXPECT_EQ(f.stats.after_norm_filter, 4u);
  EXPECT_EQ(f.stats.duplicates, 1u);
}

TEST(EpsNet, FamiliesMatchABruteForceReimplementation) {
  for (double delta : {0.25, 0.1}) {
    for (bool real : {true, false}) {
      for (std::size_t b : {2u, 3u}) {
        if (!real && delta < 0.2 && b == 3) continue;  // 25^3 rows, slow in the quadratic oracle
        const auto f = orthonormal_family(1, b, delta, real);
        const auto ref = oracle::brute_force_family_one_row(b, delta, real);
        ASSERT_EQ(f.matrices.size(), ref.size()) << "delta=" << delta << " b=" << b;
        for (std::size_t k = 0; k < ref.size(); ++k) {
          for (std::size_t e = 0; e < b; ++e)
            EXPECT_LT(std::abs(f.matrices[k](0, static_cast<Eigen::Index>(e)) - ref[k][e]), 1e-12);
        }
      }
    }
  }
}

TEST(EpsNet, FamilyRowsAreOrthonormal) {
  for (auto [a, b] : {std::pair{1u, 2u}, std::pair{1u, 3u}, std::pair{2u, 4u}}) {
    const auto f = orthonormal_family(a, b, 0.25, false);
    ASSERT_FALSE(f.matrices.empty());
    for (const auto& m : f.matrices) EXPECT_LE(row_orthonormality_defect(m), 1e-10);
    EXPECT_NEAR(f.nu_cert, 59.0 * b * 0.25, 1e-12);
  }
}

TEST(EpsNet, FamilyIsIndependentOfThreadCount) {
  const auto one = orthonormal_family(2, 4, 0.25, false, 1e7, 1);
  const auto many = orthonormal_family(2, 4, 0.25, false, 1e7, 8);
  ASSERT_EQ(one.matrices.size(), many.matrices.size());
  for (std::size_t k = 0; k < one.matrices.size(); ++k) EXPECT_EQ(one.matrices[k], many.matrices[k]);
}

TEST(EpsNet, FamilyGuards) {
  EXPECT_THROW((void)orthonormal_family(2, 4, 0.1, false, 1e6), InfeasibleError);
  EXPECT_THROW((void)orthonormal_family(3, 2, 0.25, false), RangeError);
}

TEST(EpsNet, EndNetExample) {
  const auto ends = build_end_net(1, 2, 0.25);
  const auto f = orthonormal_family(1, 2, 0.25, false);
  ASSERT_EQ(ends.size(), f.matrices.size());
  for (std::size_t k = 0; k < ends.size(); ++k) {
    ASSERT_EQ(ends.tensors[k].shape(), Shape({1, 2}));
    EXPECT_EQ(Tensor::from_matrix(f.matrices[k]).values(), ends.tensors[k].values());
  }
  EXPECT_THROW((void)build_end_net(3, 2, 0.25), RangeError);
}

TEST(EpsNet, PairNetForBondDimensionOne) {
  const auto net = build_pair_net(1, 2, 0.25);
  ASSERT_EQ(net.lambdas.size(), 1u);
  EXPECT_NEAR(net.lambdas[0][0], 1.0, 1e-15);
  const auto f = orthonormal_family(1, 2, 0.25, false);
  EXPECT_EQ(net.size(), f.matrices.size());
  EXPECT_EQ(net.discarded, 0u);
  for (const auto& p : net.pairs) {
    EXPECT_NEAR(p.mu[0], 1.0, 1e-12);
    EXPECT_EQ(p.b.shape(), Shape({1, 2, 1}));
  }
  EXPECT_NEAR(net.epsilon_cert, 2 * 59 * 2 * 1 * 0.25, 1e-12);
}

TEST(EpsNet, PairNetIsTheProductWhenTheFilterIsVacuous) {
  const auto net = build_pair_net(2, 2, 0.25, 10.0);
  EXPECT_EQ(net.size(), net.lambdas.size() * net.b_net_size);
  EXPECT_EQ(net.discarded, 0u);
}

TEST(EpsNet, PairNetFilterRemovesNonCanonicalPairs) {
  const double eps = 0.05;
  const auto net = build_pair_net(2, 2, 0.25, eps);
  EXPECT_EQ(net.size() + net.discarded, net.lambdas.size() * net.b_net_size);
  for (const auto& p : net.pairs) EXPECT_LE(left_overlap_residual(p.lambda, p.b), 3 * eps + 1e-15);
  // A pair whose two weighted columns coincide has overlap 1/2.
  Tensor b({2, 2, 2});
  b.at({0, 0, 0}) = b.at({0, 0, 1}) = 1 / std::sqrt(2.0);
  b.at({1, 1, 0}) = b.at({1, 1, 1}) = 1 / std::sqrt(2.0);
  const std::vector<double> lam = {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};
  EXPECT_NEAR(left_overlap_residual(lam, b), 0.5, 1e-15);
  EXPECT_GT(left_overlap_residual(lam, b), 3 * eps);
}

// Perturbing a left-canonical matrix by eps moves column overlaps by at
// most 2 eps + eps^2.
TEST(EpsNet, OverlapFilterIsSoundUnderPerturbation) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXc a = random_isometry_rows(3, 6, rng).adjoint();  // orthonormal columns
    MatrixXc e(6, 3);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = cplx(g(rng), g(rng));
    const double eps = 0.01 + 0.1 * (trial % 5);
    const MatrixXc c = a + eps * e / e.norm();
    const MatrixXc gram = c.adjoint() * c;
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j)
        if (i != j) EXPECT_LE(std::abs(gram(i, j)), 2 * eps + eps * eps + 1e-12);
  }
}

TEST(EpsNet, PipelineStages) {
  using namespace pipeline;
  const auto grid = complex_grid(0.25);
  MatrixXc a(1, 2);
  a << cplx(0.0, 0.3), cplx(0.0, -0.8);
  const MatrixXc x = round_to_grid(a, grid);
  EXPECT_LT(std::abs(x(0, 0) - cplx(0.0, 0.25)), 1e-15);
  EXPECT_LT(std::abs(x(0, 1) - cplx(0.0, -0.75)), 1e-15);
  EXPECT_NEAR(row_distance(a, x), std::hypot(0.05, 0.05), 1e-14);
  EXPECT_TRUE(norm_filter(x, 0.25));
  const MatrixXc y = normalize_rows(x);
  EXPECT_NEAR(y.row(0).norm(), 1.0, 1e-15);
  MatrixXc pair(2, 2);
  pair << 1.0, 0.0, 1.0, 0.0;
  EXPECT_NEAR(max_row_overlap(pair), 1.0, 1e-15);
  EXPECT_FALSE(overlap_filter(pair, 0.01));
  EXPECT_FALSE(gram_schmidt_rows(pair).has_value());
  MatrixXc skew(2, 2);
  skew << 1.0, 0.1, 0.1, 1.0;
  const auto z = gram_schmidt_rows(normalize_rows(skew));
  ASSERT_TRUE(z.has_value());
  EXPECT_LE(row_orthonormality_defect(*z), 1e-14);
}

// For nonnegative real grids rounding never moves an entry by more than
// delta, so the chain of pipeline bounds holds for every survivor.
TEST(EpsNet, RealPipelineBoundChain) {
  using namespace pipeline;
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double delta : {0.25, 0.1}) {
    std::vector<cplx> grid;
    for (double r : real_grid(delta)) grid.emplace_back(r, 0.0);
    for (int trial = 0; trial < 500; ++trial) {
      MatrixXc a(1, 3);
      for (Eigen::Index k = 0; k < 3; ++k) a(0, k) = u(rng);
      a /= a.norm();
      const MatrixXc x = round_to_grid(a, grid);
      EXPECT_LE(row_distance(a, x), 2 * std::sqrt(3.0) * delta + 1e-12);
      if (!norm_filter(x, delta)) continue;
      const MatrixXc y = normalize_rows(x);
      EXPECT_LE(row_distance(a, y), (4 + 2.0 / 35) * std::sqrt(3.0) * delta + 1e-12);
    }
  }
}

TEST(EpsNet, NetSizeEstimate) {
  const auto small = net_size_estimate(1, 2, 1.0);
  EXPECT_DOUBLE_EQ(small.base, 288.0);
  EXPECT_DOUBLE_EQ(small.exponent, 5.0);
  ASSERT_TRUE(small.exact.has_value());
  EXPECT_EQ(*small.exact, 1981355655168ull);

  const auto big = net_size_estimate(2, 2, 0.1);
  EXPECT_NEAR(big.base, 5760.0, 1e-9);
  EXPECT_DOUBLE_EQ(big.exponent, 18.0);
  EXPECT_NEAR(big.log10, 67.7, 0.05);
  EXPECT_FALSE(big.exact.has_value());
}
