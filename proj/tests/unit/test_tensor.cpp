#include <gtest/gtest.h>

#include <random>

#include "mpsdp/errors.hpp"
#include "mpsdp/linalg.hpp"
#include "mpsdp/tensor.hpp"
#include "support/oracles.hpp"

using namespace mpsdp;

TEST(Tensor, IdentityContractedWithVectorIsTheVector) {
  Tensor v({3}, {1.0, cplx(2.0, 1.0), -3.0});
  const Tensor out = contract(Tensor::identity(3), v, {1}, {0});
  ASSERT_EQ(out.shape(), Shape({3}));
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(out[k], v[k]);
}

TEST(Tensor, FullContractionIsAScalarDotProduct) {
  Tensor a({2}, {1.0, 2.0});
  Tensor b({2}, {3.0, 4.0});
  const Tensor out = contract(a, b, {0}, {0});
  EXPECT_EQ(out.rank(), 0u);
  EXPECT_DOUBLE_EQ(out[0].real(), 11.0);
}

TEST(Tensor, ContractionMatchesNestedLoops) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = oracle::random_tensor({2, 3, 2}, rng);
    const Tensor b = oracle::random_tensor({3, 4, 2}, rng);
    const Tensor fast = contract(a, b, {1, 2}, {0, 2});
    const Tensor slow = oracle::loop_contract(a, b, {1, 2}, {0, 2});
    ASSERT_EQ(fast.shape(), slow.shape());
    EXPECT_LT(distance(fast, slow), 1e-12);

    const Tensor fast1 = contract(a, b, {1}, {0});
    const Tensor slow1 = oracle::loop_contract(a, b, {1}, {0});
    ASSERT_EQ(fast1.shape(), Shape({2, 2, 4, 2}));
    EXPECT_LT(distance(fast1, slow1), 1e-12);
  }
}

TEST(Tensor, ContractionIsBilinear) {
  std::mt19937_64 rng(8);
  const Tensor a1 = oracle::random_tensor({3, 2}, rng);
  const Tensor a2 = oracle::random_tensor({3, 2}, rng);
  const Tensor b = oracle::random_tensor({2, 5}, rng);
  const cplx s(0.3, -1.2);
  const Tensor lhs = contract(a1 + s * a2, b, {1}, {0});
  const Tensor rhs = contract(a1, b, {1}, {0}) + s * contract(a2, b, {1}, {0});
  EXPECT_LT(distance(lhs, rhs), 1e-12);
}

TEST(Tensor, MismatchedExtentsNameTheAxes) {
  Tensor a({2, 3});
  Tensor b({4, 2});
  try {
    (void)contract(a, b, {1}, {0});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('3'), std::string::npos);
    EXPECT_NE(msg.find('4'), std::string::npos);
  }
}

TEST(Tensor, NormExamples) {
  EXPECT_EQ(norm(Tensor({4})), 0.0);
  EXPECT_NEAR(norm(Tensor::identity(5)), std::sqrt(5.0), 1e-14);
  std::mt19937_64 rng(9);
  const Tensor t = oracle::random_tensor({2, 3, 4}, rng);
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += std::norm(t[k]);
  EXPECT_NEAR(norm(t), std::sqrt(s), 1e-13);
}

TEST(Tensor, FixIndexSelectsRowsAndColumns) {
  Tensor m({2, 2}, {1.0, 2.0, 3.0, 4.0});
  const Tensor col = fix_index(m, 1, 0);
  ASSERT_EQ(col.shape(), Shape({2}));
  EXPECT_EQ(col[0], cplx(1.0));
  EXPECT_EQ(col[1], cplx(3.0));
  const Tensor row = fix_index(m, 0, 1);
  EXPECT_EQ(row[0], cplx(3.0));
  EXPECT_EQ(row[1], cplx(4.0));
}

TEST(Tensor, StackInvertsFixIndex) {
  std::mt19937_64 rng(10);
  const Tensor t = oracle::random_tensor({3, 2, 4}, rng);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    std::vector<Tensor> slices;
    for (std::size_t v = 0; v < t.extent(axis); ++v) slices.push_back(fix_index(t, axis, v));
    const Tensor back = stack(slices, axis);
    ASSERT_EQ(back.shape(), t.shape());
    EXPECT_EQ(distance(back, t), 0.0);
  }
}

TEST(Tensor, FixIndexOutOfRangeThrows) {
  EXPECT_THROW((void)fix_index(Tensor({2, 2}), 1, 2), RangeError);
  EXPECT_THROW((void)fix_index(Tensor({2, 2}), 2, 0), RangeError);
}

TEST(Tensor, PermuteAndReshapeRoundTrip) {
  std::mt19937_64 rng(11);
  const Tensor t = oracle::random_tensor({2, 3, 4}, rng);
  const std::vector<std::size_t> perm = {2, 0, 1};
  const Tensor p = t.permuted(perm);
  ASSERT_EQ(p.shape(), Shape({4, 2, 3}));
  EXPECT_EQ(p.at({3, 1, 2}), t.at({1, 2, 3}));
  const std::vector<std::size_t> inv = {1, 2, 0};
  EXPECT_EQ(distance(p.permuted(inv), t), 0.0);
  EXPECT_THROW((void)t.reshaped({5, 5}), ShapeError);
}

// Contracting with a tensor whose slices along the joined edge are
// orthonormal preserves distances.
TEST(Tensor, IsometricContractionPreservesDistance) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t D = 3;
    const Tensor b1 = oracle::random_tensor({4, D}, rng);
    const Tensor b2 = oracle::random_tensor({4, D}, rng);
    const Tensor iso = Tensor::from_matrix(random_isometry_rows(D, 6, rng));
    const double lhs = distance(contract(b1, iso, {1}, {0}), contract(b2, iso, {1}, {0}));
    EXPECT_NEAR(lhs, distance(b1, b2), 1e-12);
  }
}
