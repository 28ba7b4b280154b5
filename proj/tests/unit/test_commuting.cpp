#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "mpsdp/commuting.hpp"
#include "mpsdp/errors.hpp"
#include "mpsdp/linalg.hpp"
#include "mpsdp/oracle.hpp"
#include "support/oracles.hpp"

using namespace mpsdp;

namespace {

std::size_t pow_size(std::size_t d, std::size_t n) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < n; ++k) r *= d;
  return r;
}

// Ground vector plus `weight` times an eigenvector of the next distinct
// eigenvalue, normalized and written exactly as an MPS.
CanonicalMps perturbed_ground(const NnHamiltonian& h, double weight) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(to_dense_hamiltonian(h));
  const auto& ev = es.eigenvalues();
  Eigen::Index excited = 1;
  while (ev(excited) - ev(0) < 1e-9) ++excited;
  VectorXc v = es.eigenvectors().col(0) + weight * es.eigenvectors().col(excited);
  v /= v.norm();
  return canonicalize(v, h.n, h.d(), pow_size(h.d(), h.n / 2), h.d_end());
}

}  // namespace

TEST(Commuting, ProjectorExamples) {
  const auto zz = eig_projectors(kron(pauli_z(), pauli_z()));
  ASSERT_EQ(zz.k, 2u);
  EXPECT_NEAR(zz.eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(zz.eigenvalues[1], 1.0, 1e-14);
  for (const auto& p : zz.projectors) EXPECT_NEAR(p.trace().real(), 2.0, 1e-12);

  const auto id = eig_projectors(MatrixXc::Identity(4, 4));
  ASSERT_EQ(id.k, 1u);
  EXPECT_LT((id.projectors[0] - MatrixXc::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Commuting, ProjectorsResolveTheIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto h = build_model("rotated_classical", {}, 4, seed);
    for (const auto& t : h.terms) {
      const auto dec = eig_projectors(t);
      MatrixXc sum = MatrixXc::Zero(t.rows(), t.cols());
      MatrixXc rebuilt = MatrixXc::Zero(t.rows(), t.cols());
      for (std::size_t j = 0; j < dec.k; ++j) {
        const MatrixXc& p = dec.projectors[j];
        sum += p;
        rebuilt += dec.eigenvalues[j] * p;
        EXPECT_LE((p * p - p).cwiseAbs().maxCoeff(), 1e-10);
        for (std::size_t l = j + 1; l < dec.k; ++l)
          EXPECT_LE((p * dec.projectors[l]).cwiseAbs().maxCoeff(), 1e-10);
      }
      EXPECT_LE((sum - MatrixXc::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((rebuilt - t).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Commuting, TrivialProjections) {
  std::mt19937_64 rng(41);
  const auto m = oracle::random_canonical(5, 2, 4, rng);
  const auto same = apply_projector(m, MatrixXc::Identity(4, 4), 2);
  EXPECT_NEAR(same.weight, 1.0, 1e-12);
  EXPECT_LT(phase_aligned_distance(to_dense(same.state), to_dense(m)), 1e-10);

  const std::vector<std::size_t> zeros(4, 0);
  const auto prod = product_state(zeros, 2, 2, 1);
  MatrixXc p00 = MatrixXc::Zero(4, 4);
  p00(0, 0) = 1.0;
  const auto kept = apply_projector(prod, p00, 1);
  EXPECT_NEAR(kept.weight, 1.0, 1e-14);
  EXPECT_LT(phase_aligned_distance(to_dense(kept.state), to_dense(prod)), 1e-12);

  MatrixXc p11 = MatrixXc::Zero(4, 4);
  p11(3, 3) = 1.0;
  EXPECT_THROW((void)apply_projector(prod, p11, 1), NumericalError);
}

TEST(Commuting, ProjectionMatchesDenseApplication) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = oracle::random_canonical(6, 2, 4, rng);
    const MatrixXc u = random_unitary(4, rng);
    const MatrixXc proj = u.leftCols(2) * u.leftCols(2).adjoint();
    const std::size_t site = trial % 5;
    const auto out = apply_projector(m, proj, site);
    const VectorXc v = to_dense(m);
    const std::vector<std::size_t> dims(6, 2);
    VectorXc pv = apply_local_operator(dims, site, proj, v);
    EXPECT_NEAR(out.weight, pv.squaredNorm(), 1e-10);
    pv /= pv.norm();
    EXPECT_LT(phase_aligned_distance(to_dense(out.state), pv), 1e-8);
    EXPECT_LE(check_canonical(out.state).max_residual(), 1e-10);
  }
}

TEST(Commuting, GroundStateIsAFixedPoint) {
  const auto h = build_model("zz_chain", {}, 6);
  const std::vector<std::size_t> neel = {0, 1, 0, 1, 0, 1};
  const auto seed = product_state(neel, 2, 2, 1);
  const auto r = refine_to_eigenstate(seed, h);
  EXPECT_NEAR(r.energy, -5.0, 1e-12);
  for (double res : r.residuals) EXPECT_LE(res, 1e-10);
  for (const auto& c : r.chosen) EXPECT_NEAR(c.weight, 1.0, 1e-12);
  EXPECT_LT(phase_aligned_distance(to_dense(r.state), to_dense(seed)), 1e-12);
}

TEST(Commuting, RefinesPerturbedGroundStates) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto h = build_model("rotated_classical", {}, 5, seed);
    const double e0 = exact_ground(h).e0;
    const auto start = perturbed_ground(h, 0.1);
    const double surplus = expectation_full(start, h) - e0;
    RefineOptions opt;
    opt.surplus = surplus;
    const auto r = refine_to_eigenstate(start, h, opt);
    EXPECT_NEAR(r.energy, e0, 1e-8) << "seed " << seed;
    EXPECT_NEAR(expectation_full(r.state, h), e0, 1e-8);
    for (double res : verify_eigenstate(r.state, h)) EXPECT_LE(res, 1e-8);
    ASSERT_TRUE(r.surplus_bound.has_value());
    EXPECT_NEAR(*r.surplus_bound, std::pow(1.2, 4) * surplus, 1e-12);
    EXPECT_LE(expectation_full(r.state, h) - e0, *r.surplus_bound + 1e-10);
    for (std::size_t rank : r.ranks) EXPECT_LE(rank, start.D * 4u);
  }
}

TEST(Commuting, VerifyEigenstate) {
  const auto h = build_model("zz_chain", {}, 5);
  const std::vector<std::size_t> idx = {0, 0, 1, 0, 1};
  for (double r : verify_eigenstate(product_state(idx, 2, 2, 1), h)) EXPECT_LE(r, 1e-12);

  std::mt19937_64 rng(43);
  const auto random = oracle::random_canonical(5, 2, 4, rng);
  const auto res = verify_eigenstate(random, h);
  EXPECT_GT(*std::max_element(res.begin(), res.end()), 0.1);
}

TEST(Commuting, LongChainsUseTheMpsPath) {
  const auto h = build_model("zz_chain", {}, 14);
  ASSERT_FALSE(use_dense_path(h));
  std::vector<std::size_t> idx(14, 0);
  for (std::size_t k = 0; k < 14; k += 2) idx[k] = 1;
  for (double r : verify_eigenstate(product_state(idx, 2, 2, 1), h)) EXPECT_LE(r, 1e-12);

  // The Neel state is already a common eigenstate, so refinement keeps it.
  const auto r = refine_to_eigenstate(product_state(idx, 2, 2, 1), h);
  EXPECT_NEAR(r.energy, -13.0, 1e-12);
}

// The MPS evaluation path agrees with dense vectors on a chain small
// enough for both.
TEST(Commuting, ScoresAgreeAcrossEvaluationPaths) {
  const auto h = build_model("rotated_classical", {}, 5, 4);
  ASSERT_TRUE(use_dense_path(h));
  const auto start = perturbed_ground(h, 0.3);
  const auto dec = eig_projectors(h.terms[1]);
  const auto scores = score_eigenspaces(start, h, 1, dec);
  const std::vector<std::size_t> dims(5, 2);
  const VectorXc v = to_dense(start);
  for (std::size_t j = 0; j < dec.k; ++j) {
    VectorXc pv = apply_local_operator(dims, 1, dec.projectors[j], v);
    const double c = pv.squaredNorm();
    EXPECT_NEAR(scores[j].weight, c, 1e-10);
    if (c > 1e-12) {
      const auto proj = apply_projector(start, dec.projectors[j], 1);
      EXPECT_NEAR(scores[j].energy, chain_energy(to_chain(proj.state), h), 1e-9);
      EXPECT_NEAR(scores[j].energy, dense_energy(h, pv), 1e-9);
    }
  }
}

TEST(Commuting, RejectsNonCommutingInput) {
  const auto h = build_model("transverse_ising", {}, 4);
  const std::vector<std::size_t> idx(4, 0);
  EXPECT_THROW((void)refine_to_eigenstate(product_state(idx, 2, 2, 1), h), RangeError);
}
