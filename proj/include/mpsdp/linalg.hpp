#pragma once

// Small dense linear-algebra helpers shared by the modules.

#include <cstddef>
#include <cstdint>
#include <random>

#include "mpsdp/tensor.hpp"

namespace mpsdp {

struct Svd {
  MatrixXc u;            ///< rows x k, orthonormal columns
  Eigen::VectorXd s;     ///< k singular values, descending
  MatrixXc vh;           ///< k x cols, orthonormal rows
};

/// Thin SVD with k = min(rows, cols).
Svd thin_svd(const MatrixXc& m);

/// Thin QR: q is rows x k with orthonormal columns, r is k x cols,
/// k = min(rows, cols).
void thin_qr(const MatrixXc& m, MatrixXc& q, MatrixXc& r);

MatrixXc kron(const MatrixXc& a, const MatrixXc& b);

/// Deviation from Hermiticity: max |m - m^dagger| entry.
double hermitian_defect(const MatrixXc& m);

/// Largest singular value.
double operator_norm(const MatrixXc& m);

/// Max |entry| of rows*rows^dagger - I.
double row_orthonormality_defect(const MatrixXc& rows);

/// Extends `rows` (k x n, orthonormal rows, k <= target <= n) with further
/// orthonormal rows taken from the standard basis, in index order.
MatrixXc complete_orthonormal_rows(const MatrixXc& rows, std::size_t target);

/// Haar-distributed unitary of size n (QR of a Ginibre matrix, phases fixed).
MatrixXc random_unitary(std::size_t n, std::mt19937_64& rng);

/// Random unit vector with i.i.d. complex Gaussian entries.
VectorXc random_state(std::size_t dim, std::mt19937_64& rng);

/// m x n matrix with orthonormal rows (m <= n), Haar distributed.
MatrixXc random_isometry_rows(std::size_t m, std::size_t n, std::mt19937_64& rng);

/// Random Hermitian matrix with Gaussian entries (not normalized).
MatrixXc random_hermitian(std::size_t n, std::mt19937_64& rng);

/// Pauli matrices and the identity for a single qubit.
MatrixXc pauli_x();
MatrixXc pauli_y();
MatrixXc pauli_z();

}  // namespace mpsdp
