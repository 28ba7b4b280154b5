#include "mpsdp/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "mpsdp/errors.hpp"

namespace mpsdp {

Svd thin_svd(const MatrixXc& m) {
  Eigen::BDCSVD<MatrixXc> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV().adjoint()};
}

void thin_qr(const MatrixXc& m, MatrixXc& q, MatrixXc& r) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<MatrixXc> qr(m);
  q = qr.householderQ() * MatrixXc::Identity(m.rows(), k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double hermitian_defect(const MatrixXc& m) {
  if (m.rows() != m.cols()) throw ShapeError("hermitian_defect: matrix not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double operator_norm(const MatrixXc& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXc> svd(m);
  return svd.singularValues()(0);
}

double row_orthonormality_defect(const MatrixXc& rows) {
  const MatrixXc gram = rows * rows.adjoint();
  return (gram - MatrixXc::Identity(rows.rows(), rows.rows())).cwiseAbs().maxCoeff();
}

MatrixXc complete_orthonormal_rows(const MatrixXc& rows, std::size_t target) {
  const auto n = static_cast<std::size_t>(rows.cols());
  if (target > n) {
    throw ShapeError("cannot place " + std::to_string(target) +
                     " orthonormal rows in dimension " + std::to_string(n));
  }
  MatrixXc out = MatrixXc::Zero(static_cast<Eigen::Index>(target), rows.cols());
  std::size_t have = static_cast<std::size_t>(rows.rows());
  out.topRows(rows.rows()) = rows;
  for (std::size_t k = 0; k < n && have < target; ++k) {
    VectorXc v = VectorXc::Zero(rows.cols());
    v(static_cast<Eigen::Index>(k)) = 1.0;
    // Two passes of Gram-Schmidt keep the result orthogonal to machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t r = 0; r < have; ++r) {
        const VectorXc row = out.row(static_cast<Eigen::Index>(r)).transpose();
        v -= row.dot(v) * row;
      }
    }
    const double nv = v.norm();
    if (nv < 0.5) continue;
    out.row(static_cast<Eigen::Index>(have++)) = (v / nv).transpose();
  }
  return out;
}

MatrixXc random_unitary(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXc z(n, n);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = cplx(g(rng), g(rng));
  MatrixXc q, r;
  thin_qr(z, q, r);
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const cplx d = r(j, j);
    const double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

VectorXc random_state(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXc v(dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
  return v / v.norm();
}

MatrixXc random_isometry_rows(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  if (m > n) throw ShapeError("random_isometry_rows: more rows than columns");
  return random_unitary(n, rng).topRows(static_cast<Eigen::Index>(m));
}

MatrixXc random_hermitian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXc z(n, n);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (z + z.adjoint());
}

MatrixXc pauli_x() {
  MatrixXc m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

MatrixXc pauli_y() {
  MatrixXc m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

MatrixXc pauli_z() {
  MatrixXc m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace mpsdp
