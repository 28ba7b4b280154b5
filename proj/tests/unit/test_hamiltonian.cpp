#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>

#include "mpsdp/errors.hpp"
#include "mpsdp/hamiltonian.hpp"
#include "mpsdp/linalg.hpp"
#include "support/oracles.hpp"

using namespace mpsdp;

namespace {

MatrixXc zz() { return kron(pauli_z(), pauli_z()); }

VectorXc basis(std::size_t dim, std::size_t k) {
  VectorXc v = VectorXc::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return v;
}

Eigen::VectorXd spectrum(const MatrixXc& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST(Hamiltonian, ZzChainHasUnitZzTerms) {
  const auto h = build_model("zz_chain", {}, 4);
  ASSERT_EQ(h.terms.size(), 3u);
  for (const auto& t : h.terms) EXPECT_LT((t - zz()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(h.J, 1.0, 1e-14);
}

TEST(Hamiltonian, TrapModelBasisEnergies) {
  const auto h = build_model("trap_model", {}, 5);
  // Basis index 0 is all-up (every Z eigenvalue +1).
  EXPECT_NEAR(dense_energy(h, basis(32, 0)), 5.0, 1e-12);
  EXPECT_NEAR(dense_energy(h, basis(32, 31)), 0.0, 1e-12);
}

// Every basis state costs 4 per misaligned bond plus 1 per up spin.
TEST(Hamiltonian, TrapModelIsTheCountingPenalty) {
  for (std::size_t n = 2; n <= 10; ++n) {
    const auto h = build_model("trap_model", {}, n);
    const MatrixXc H = to_dense_hamiltonian(h);
    const std::size_t dim = std::size_t{1} << n;
    EXPECT_LT((H - MatrixXc(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
    for (std::size_t k = 0; k < dim; ++k) {
      int ups = 0, misaligned = 0;
      for (std::size_t site = 0; site < n; ++site) {
        const bool up = ((k >> (n - 1 - site)) & 1u) == 0;
        ups += up ? 1 : 0;
        if (site + 1 < n) {
          const bool next_up = ((k >> (n - 2 - site)) & 1u) == 0;
          misaligned += up != next_up ? 1 : 0;
        }
      }
      ASSERT_NEAR(H(k, k).real(), 4.0 * misaligned + ups, 1e-12) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Hamiltonian, HeisenbergPairHasSingletGround) {
  const auto h = build_model("heisenberg", {}, 2);
  ASSERT_EQ(h.terms.size(), 1u);
  const MatrixXc expected = kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()) + zz();
  EXPECT_LT((h.terms[0] - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(spectrum(h.terms[0])(0), -3.0, 1e-12);
}

TEST(Hamiltonian, TransverseIsingFoldsTheField) {
  const double J = 1.3, g = 0.7;
  const auto h = build_model("transverse_ising", {{"J", J}, {"g", g}}, 4);
  // Reference assembled site by site.
  const std::vector<std::size_t> dims(4, 2);
  const std::size_t dim = 16;
  MatrixXc ref = MatrixXc::Zero(dim, dim);
  MatrixXc id = MatrixXc::Identity(2, 2);
  for (std::size_t j = 0; j + 1 < 4; ++j) {
    MatrixXc op = MatrixXc::Identity(1, 1);
    for (std::size_t s = 0; s < 4; ++s) op = kron(op, (s == j || s == j + 1) ? pauli_z() : id);
    ref -= J * op;
  }
  for (std::size_t j = 0; j < 4; ++j) {
    MatrixXc op = MatrixXc::Identity(1, 1);
    for (std::size_t s = 0; s < 4; ++s) op = kron(op, s == j ? pauli_x() : id);
    ref -= g * op;
  }
  EXPECT_LT((to_dense_hamiltonian(h) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hamiltonian, UnknownModelAndParameterAreRejected) {
  EXPECT_THROW((void)build_model("no_such_model", {}, 4), RangeError);
  EXPECT_THROW((void)build_model("zz_chain", {{"g", 1.0}}, 4), RangeError);
  EXPECT_THROW((void)build_model("zz_chain", {}, 1), RangeError);
}

TEST(Hamiltonian, SeededModelsAreReproducible) {
  const auto a = build_model("random_hermitian", {{"d", 3}}, 4, 17);
  const auto b = build_model("random_hermitian", {{"d", 3}}, 4, 17);
  const auto c = build_model("random_hermitian", {{"d", 3}}, 4, 18);
  for (std::size_t t = 0; t < a.terms.size(); ++t) EXPECT_EQ(a.terms[t], b.terms[t]);
  EXPECT_GT((a.terms[0] - c.terms[0]).norm(), 1e-3);
}

TEST(Hamiltonian, MakeHamiltonianValidates) {
  MatrixXc bad = zz();
  bad(0, 1) = cplx(0.0, 1.0);
  EXPECT_THROW((void)make_hamiltonian({2, 2}, {bad}), RangeError);
  EXPECT_THROW((void)make_hamiltonian({2, 2}, {MatrixXc::Identity(3, 3)}), ShapeError);
  EXPECT_THROW((void)make_hamiltonian({2, 2, 2}, {zz()}), ShapeError);
}

TEST(Hamiltonian, GroupingCount) {
  EXPECT_EQ(grouping_count(2, 1), 1u);
  EXPECT_EQ(grouping_count(2, 2), 1u);
  EXPECT_EQ(grouping_count(2, 3), 2u);
  EXPECT_EQ(grouping_count(2, 4), 2u);
  EXPECT_EQ(grouping_count(2, 5), 3u);
  EXPECT_EQ(grouping_count(3, 9), 2u);
}

TEST(Hamiltonian, GroupingWithOneSiteIsIdentity) {
  const auto h = build_model("transverse_ising", {}, 5);
  const auto g = group_boundaries(h, 2);
  EXPECT_EQ(g.s, 1u);
  EXPECT_EQ(g.n, 5u);
  EXPECT_EQ(g.d_end(), 2u);
  for (std::size_t t = 0; t < h.terms.size(); ++t)
    EXPECT_LT((g.terms[t] - h.terms[t]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hamiltonian, GroupingPreservesTheSpectrum) {
  for (const char* name : {"transverse_ising", "heisenberg", "random_hermitian"}) {
    const auto h = build_model(name, {}, 6, 3);
    for (std::size_t D : {3u, 4u}) {
      const auto g = group_boundaries(h, D);
      EXPECT_EQ(g.s, 2u);
      EXPECT_EQ(g.n, 4u);
      EXPECT_EQ(g.d_end(), 4u);
      EXPECT_LE(g.d_end(), D * 2);
      const auto a = spectrum(to_dense_hamiltonian(h));
      const auto b = spectrum(to_dense_hamiltonian(g));
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10) << name;
      EXPECT_NEAR(g.J, max_term_norm(g), 1e-14);
    }
  }
}

TEST(Hamiltonian, GroupingNeedsALongEnoughChain) {
  const auto h = build_model("zz_chain", {}, 4);
  EXPECT_THROW((void)group_boundaries(h, 4), RangeError);
}

TEST(Hamiltonian, MaxTermNormMatchesEigenvalues) {
  const auto z = make_hamiltonian({2, 2}, {zz()});
  EXPECT_NEAR(max_term_norm(z), 1.0, 1e-14);
  const auto zero = make_hamiltonian({2, 2, 2}, {MatrixXc::Zero(4, 4), MatrixXc::Zero(4, 4)});
  EXPECT_EQ(max_term_norm(zero), 0.0);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXc t = random_hermitian(9, rng);
    const auto h = make_hamiltonian({3, 3}, {t});
    EXPECT_NEAR(max_term_norm(h), spectrum(t).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Hamiltonian, CommutingDetection) {
  EXPECT_TRUE(is_commuting(build_model("zz_chain", {}, 5)));
  EXPECT_TRUE(is_commuting(build_model("trap_model", {}, 5)));
  EXPECT_FALSE(is_commuting(build_model("transverse_ising", {{"g", 0.5}}, 5)));
  EXPECT_TRUE(is_commuting(build_model("transverse_ising", {{"g", 0.0}}, 5)));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_TRUE(is_commuting(build_model("rotated_classical", {}, 5, seed)));
    EXPECT_TRUE(is_commuting(build_model("diagonal_commuting", {{"d", 3}}, 4, seed)));
  }
  // Independent check: dense commutator of neighbouring embedded terms.
  const auto h = build_model("transverse_ising", {{"g", 0.5}}, 3);
  const MatrixXc a = kron(h.terms[0], MatrixXc::Identity(2, 2));
  const MatrixXc b = kron(MatrixXc::Identity(2, 2), h.terms[1]);
  EXPECT_NEAR(max_adjacent_commutator(h), operator_norm(a * b - b * a), 1e-10);
}

TEST(Hamiltonian, DenseAssemblyExamples) {
  const auto pair = build_model("heisenberg", {}, 2);
  EXPECT_LT((to_dense_hamiltonian(pair) - pair.terms[0]).cwiseAbs().maxCoeff(), 1e-15);

  const auto h = build_model("zz_chain", {}, 3);
  const MatrixXc H = to_dense_hamiltonian(h);
  const double expected[8] = {2, 0, -2, 0, 0, -2, 0, 2};
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(H(k, k).real(), expected[k], 1e-15);
    for (int l = 0; l < 8; ++l)
      if (l != k) EXPECT_EQ(H(k, l), cplx(0.0));
  }
}

TEST(Hamiltonian, MatrixFreeApplicationMatchesDense) {
  std::mt19937_64 rng(21);
  for (const char* name : {"transverse_ising", "heisenberg", "random_hermitian", "rotated_classical"}) {
    const auto h = build_model(name, {}, 6, 4);
    const MatrixXc H = to_dense_hamiltonian(h);
    const VectorXc v = random_state(64, rng);
    EXPECT_LT((apply_hamiltonian(h, v) - H * v).norm(), 1e-12) << name;
    EXPECT_NEAR(dense_energy(h, v), oracle::dense_matrix_energy(h, v), 1e-12);
  }
}

TEST(Hamiltonian, DenseGuard) {
  const auto h = build_model("zz_chain", {}, 15);
  EXPECT_THROW((void)to_dense_hamiltonian(h), InfeasibleError);
}
