#include "mpsdp/mps.hpp"

#include <algorithm>
#include <cmath>

#include "mpsdp/errors.hpp"
#include "mpsdp/linalg.hpp"

namespace mpsdp {

namespace {

constexpr std::size_t kDenseLimit = std::size_t{1} << 24;
constexpr double kHermitianTol = 1e-10;

using RowMap = Eigen::Map<const RowMatrixXc>;

RowMap as_rows(const Tensor& t, std::size_t rows) {
  const std::size_t cols = rows == 0 ? 0 : t.size() / rows;
  return RowMap(t.data().data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

Tensor tensor_from_rows(const RowMatrixXc& m, Shape shape) {
  std::vector<cplx> data(m.data(), m.data() + m.size());
  return Tensor(std::move(shape), std::move(data));
}

/// sum_{l,r} <T[l,.,r]| h |T[l,.,r]> for T laid out as (L, p, R).
double window_energy(const RowMatrixXc& flat, std::size_t L, std::size_t p,
                     std::size_t R, const MatrixXc& h) {
  if (static_cast<std::size_t>(h.rows()) != p || static_cast<std::size_t>(h.cols()) != p) {
    throw ShapeError("local term of size " + std::to_string(h.rows()) +
                     " does not act on window dimension " + std::to_string(p));
  }
  const cplx* t = flat.data();
  cplx acc = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t a = 0; a < p; ++a) {
        cplx ha = 0.0;
        for (std::size_t b = 0; b < p; ++b) {
          ha += h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                t[(l * p + b) * R + r];
        }
        acc += std::conj(t[(l * p + a) * R + r]) * ha;
      }
    }
  }
  if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, std::abs(acc.real()))) {
    throw NumericalError("window energy has imaginary part " +
                         std::to_string(acc.imag()));
  }
  return acc.real();
}

void require_lambda(std::span<const double> lambda, std::size_t rows, const char* what) {
  if (lambda.size() != rows) {
    throw ShapeError(std::string(what) + ": lambda has length " +
                     std::to_string(lambda.size()) + ", tensor has " +
                     std::to_string(rows) + " rows");
  }
}

/// lambda_a B[a, i, b] as a (rows*phys) x cols row-major matrix.
RowMatrixXc scaled_rows(std::span<const double> lambda, const Tensor& b) {
  const std::size_t rows = b.extent(0);
  require_lambda(lambda, rows, "window");
  RowMatrixXc x = as_rows(b, rows);
  for (std::size_t a = 0; a < rows; ++a) x.row(static_cast<Eigen::Index>(a)) *= lambda[a];
  return x;
}

/// Matrix slice A[:, i, :] of a site tensor.
MatrixXc site_slice(const Tensor& a, std::size_t i) {
  const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
  MatrixXc m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r));
  for (std::size_t x = 0; x < l; ++x)
    for (std::size_t y = 0; y < r; ++y)
      m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = a[(x * p + i) * r + y];
  return m;
}

/// Contraction of two neighbouring site tensors into (l, p1*p2, r).
Tensor merge_sites(const Tensor& a, const Tensor& b) {
  const std::size_t l = a.extent(0), p1 = a.extent(1), m = a.extent(2);
  if (b.extent(0) != m) throw ShapeError("neighbouring site bonds do not match");
  const std::size_t p2 = b.extent(1), r = b.extent(2);
  RowMatrixXc prod = as_rows(a, l * p1) * as_rows(b, m);
  return tensor_from_rows(prod, {l, p1 * p2, r});
}

void check_site(const Tensor& t, std::size_t k) {
  if (t.rank() != 3) {
    throw ShapeError("chain site " + std::to_string(k) + " has rank " +
                     std::to_string(t.rank()) + ", expected 3");
  }
}

}  // namespace

// ---------------------------------------------------------------- CanonicalMps

std::size_t CanonicalMps::bond_dim(std::size_t j) const {
  if (j < 2 || j > n) throw RangeError("bond index " + std::to_string(j) + " out of range");
  if (j == 2) return lambda2.size();
  return b_tensors[j - 3].extent(2);
}

std::vector<std::vector<double>> CanonicalMps::lambdas() const {
  std::vector<std::vector<double>> out;
  out.reserve(n - 1);
  out.push_back(lambda2);
  for (const auto& b : b_tensors) out.push_back(mu_of(out.back(), b));
  return out;
}

void CanonicalMps::validate() const {
  if (n < 2) throw RangeError("canonical MPS needs n >= 2");
  if (D == 0 || d == 0 || d_end == 0) throw RangeError("dimensions must be positive");
  if (b_tensors.size() + 2 != n) {
    throw ShapeError("expected " + std::to_string(n - 2) + " interior tensors, got " +
                     std::to_string(b_tensors.size()));
  }
  const std::size_t d2 = lambda2.size();
  if (d2 == 0 || d2 > D) throw ShapeError("lambda_2 length must lie in [1, D]");
  for (double v : lambda2) {
    if (!std::isfinite(v) || v < 0.0) throw RangeError("lambda entries must be finite and nonnegative");
  }
  if (gamma_left.shape() != Shape{d2, d_end}) {
    throw ShapeError("gamma_left has shape " + shape_string(gamma_left.shape()) +
                     ", expected " + shape_string({d2, d_end}));
  }
  std::size_t left = d2;
  for (std::size_t k = 0; k < b_tensors.size(); ++k) {
    const auto& b = b_tensors[k];
    if (b.rank() != 3 || b.extent(0) != left || b.extent(1) != d || b.extent(2) > D ||
        b.extent(2) == 0) {
      throw ShapeError("interior tensor " + std::to_string(k) + " has shape " +
                       shape_string(b.shape()) + ", incompatible with bond " +
                       std::to_string(left) + ", d = " + std::to_string(d) +
                       ", D = " + std::to_string(D));
    }
    left = b.extent(2);
  }
  if (gamma_right.shape() != Shape{left, d_end}) {
    throw ShapeError("gamma_right has shape " + shape_string(gamma_right.shape()) +
                     ", expected " + shape_string({left, d_end}));
  }
  if (!gamma_left.all_finite() || !gamma_right.all_finite()) {
    throw RangeError("boundary tensors must be finite");
  }
}

double CanonicalReport::max_residual() const {
  double worst = std::max(boundary_left, boundary_right);
  for (double v : left) worst = std::max(worst, v);
  for (double v : right) worst = std::max(worst, v);
  for (double v : normalization) worst = std::max(worst, v);
  return worst;
}

// ------------------------------------------------------------ pair algebra

std::vector<double> mu_of(std::span<const double> lambda, const Tensor& b) {
  if (b.rank() != 3) throw ShapeError("mu_of expects a rank-3 tensor, got " + shape_string(b.shape()));
  const std::size_t rows = b.extent(0), p = b.extent(1), cols = b.extent(2);
  require_lambda(lambda, rows, "mu_of");
  std::vector<double> mu(cols, 0.0);
  for (std::size_t a = 0; a < rows; ++a) {
    const double l2 = lambda[a] * lambda[a];
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t c = 0; c < cols; ++c) mu[c] += l2 * std::norm(b[(a * p + i) * cols + c]);
  }
  for (auto& v : mu) v = std::sqrt(v);
  return mu;
}

double left_overlap_residual(std::span<const double> lambda, const Tensor& b) {
  if (b.rank() != 3) throw ShapeError("left_overlap_residual expects a rank-3 tensor");
  const std::size_t rows = b.extent(0), p = b.extent(1), cols = b.extent(2);
  require_lambda(lambda, rows, "left_overlap_residual");
  // Columns of lambda B over the joint (alpha, i) row index.
  RowMatrixXc x = as_rows(b, rows * p);
  for (std::size_t a = 0; a < rows; ++a)
    x.middleRows(static_cast<Eigen::Index>(a * p), static_cast<Eigen::Index>(p)) *= lambda[a];
  const MatrixXc gram = x.adjoint() * x;
  double worst = 0.0;
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t e = 0; e < cols; ++e)
      if (c != e)
        worst = std::max(worst, std::abs(gram(static_cast<Eigen::Index>(c),
                                              static_cast<Eigen::Index>(e))));
  return worst;
}

// ------------------------------------------------------------ windows

namespace detail {

void require_hermitian(const MatrixXc& hterm) {
  if (hterm.rows() != hterm.cols()) throw ShapeError("local term is not square");
  if (hermitian_defect(hterm) > kHermitianTol) throw RangeError("local term is not Hermitian");
}

double window_left(const Tensor& gamma_left, std::span<const double> lambda2,
                   const Tensor& b2, const MatrixXc& hterm) {
  if (gamma_left.rank() != 2 || b2.rank() != 3 || b2.extent(0) != gamma_left.extent(0)) {
    throw ShapeError("left window shapes " + shape_string(gamma_left.shape()) + ", " +
                     shape_string(b2.shape()) + " do not match");
  }
  const std::size_t D = gamma_left.extent(0), de = gamma_left.extent(1);
  require_lambda(lambda2, D, "left window");
  const RowMatrixXc x = scaled_rows(lambda2, b2);  // (alpha, k*gamma)
  RowMatrixXc gt = as_rows(gamma_left, D).transpose();  // (i, alpha)
  const RowMatrixXc t = gt * x;                    // (i, k, gamma)
  return window_energy(t, 1, de * b2.extent(1), b2.extent(2), hterm);
}

double window_interior(std::span<const double> lambda, const Tensor& b1,
                       const Tensor& b2, const MatrixXc& hterm) {
  if (b1.rank() != 3 || b2.rank() != 3 || b1.extent(2) != b2.extent(0)) {
    throw ShapeError("interior window shapes " + shape_string(b1.shape()) + ", " +
                     shape_string(b2.shape()) + " do not match");
  }
  const std::size_t l = b1.extent(0), p1 = b1.extent(1), m = b1.extent(2);
  RowMatrixXc x = scaled_rows(lambda, b1);
  x.resize(static_cast<Eigen::Index>(l * p1), static_cast<Eigen::Index>(m));
  const RowMatrixXc t = x * as_rows(b2, m);  // (alpha, i, k, gamma)
  return window_energy(t, l, p1 * b2.extent(1), b2.extent(2), hterm);
}

double window_right(std::span<const double> lambda, const Tensor& b1,
                    const Tensor& gamma_right, const MatrixXc& hterm) {
  if (b1.rank() != 3 || gamma_right.rank() != 2 || b1.extent(2) != gamma_right.extent(0)) {
    throw ShapeError("right window shapes " + shape_string(b1.shape()) + ", " +
                     shape_string(gamma_right.shape()) + " do not match");
  }
  const std::size_t l = b1.extent(0), p1 = b1.extent(1), m = b1.extent(2);
  RowMatrixXc x = scaled_rows(lambda, b1);
  x.resize(static_cast<Eigen::Index>(l * p1), static_cast<Eigen::Index>(m));
  const RowMatrixXc t = x * as_rows(gamma_right, m);  // (alpha, i, k)
  return window_energy(t, l, p1 * gamma_right.extent(1), 1, hterm);
}

}  // namespace detail

double local_energy(std::span<const double> lambda, const Tensor& b1, const Tensor& b2,
                    const MatrixXc& hterm) {
  detail::require_hermitian(hterm);
  if (b2.rank() == 2) return detail::window_right(lambda, b1, b2, hterm);
  return detail::window_interior(lambda, b1, b2, hterm);
}

double local_energy_left(const Tensor& gamma_left, std::span<const double> lambda2,
                         const Tensor& b2, const MatrixXc& hterm) {
  detail::require_hermitian(hterm);
  return detail::window_left(gamma_left, lambda2, b2, hterm);
}

double local_energy_pair(const Tensor& gamma_left, std::span<const double> lambda2,
                         const Tensor& gamma_right, const MatrixXc& hterm) {
  detail::require_hermitian(hterm);
  if (gamma_left.rank() != 2 || gamma_right.rank() != 2 ||
      gamma_left.extent(0) != gamma_right.extent(0)) {
    throw ShapeError("boundary tensors do not share a bond");
  }
  const std::size_t D = gamma_left.extent(0);
  require_lambda(lambda2, D, "pair window");
  RowMatrixXc g = as_rows(gamma_left, D).transpose();
  for (std::size_t a = 0; a < D; ++a) g.col(static_cast<Eigen::Index>(a)) *= lambda2[a];
  const RowMatrixXc t = g * as_rows(gamma_right, D);
  return window_energy(t, 1, gamma_left.extent(1) * gamma_right.extent(1), 1, hterm);
}

double local_energy_sum(const CanonicalMps& m, const NnHamiltonian& h) {
  m.validate();
  if (h.n != m.n) throw ShapeError("Hamiltonian and MPS site counts differ");
  if (m.n == 2) return local_energy_pair(m.gamma_left, m.lambda2, m.gamma_right, h.terms[0]);
  const auto lam = m.lambdas();
  double total = local_energy_left(m.gamma_left, m.lambda2, m.b_tensors[0], h.terms[0]);
  for (std::size_t j = 0; j + 1 < m.b_tensors.size(); ++j) {
    total += local_energy(lam[j], m.b_tensors[j], m.b_tensors[j + 1], h.terms[j + 1]);
  }
  total += local_energy(lam[m.n - 3], m.b_tensors.back(), m.gamma_right, h.terms[m.n - 2]);
  return total;
}

// ------------------------------------------------------------ chains

std::vector<std::size_t> MpsChain::physical_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& s : sites) dims.push_back(s.extent(1));
  return dims;
}

MpsChain to_chain(const CanonicalMps& m) {
  m.validate();
  MpsChain c;
  const std::size_t d2 = m.lambda2.size();
  // Site 1: Gamma_left as (1, d_end, D_2), carrying lambda_2 unless site 2
  // is an interior tensor that can absorb it.
  Tensor first = m.gamma_left.permuted(std::vector<std::size_t>{1, 0}).reshaped({1, m.d_end, d2});
  if (m.n == 2) {
    for (std::size_t i = 0; i < m.d_end; ++i)
      for (std::size_t a = 0; a < d2; ++a) first[i * d2 + a] *= m.lambda2[a];
    c.sites.push_back(std::move(first));
    c.sites.push_back(m.gamma_right.reshaped({d2, m.d_end, 1}));
    return c;
  }
  c.sites.push_back(std::move(first));
  for (std::size_t k = 0; k < m.b_tensors.size(); ++k) {
    Tensor b = m.b_tensors[k];
    if (k == 0) {
      const std::size_t rest = b.size() / d2;
      for (std::size_t a = 0; a < d2; ++a)
        for (std::size_t x = 0; x < rest; ++x) b[a * rest + x] *= m.lambda2[a];
    }
    c.sites.push_back(std::move(b));
  }
  c.sites.push_back(m.gamma_right.reshaped({m.gamma_right.extent(0), m.d_end, 1}));
  return c;
}

MpsChain chain_from_dense(const VectorXc& state, std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw RangeError("a chain needs at least two sites");
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (static_cast<std::size_t>(state.size()) != total) {
    throw ShapeError("state has dimension " + std::to_string(state.size()) +
                     ", expected " + std::to_string(total));
  }
  MpsChain c;
  std::size_t left = 1;
  RowMatrixXc rest = Eigen::Map<const RowMatrixXc>(state.data(), 1, state.size());
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t rows = left * dims[k];
    const std::size_t cols = rest.size() / rows;
    RowMatrixXc m = Eigen::Map<const RowMatrixXc>(rest.data(), static_cast<Eigen::Index>(rows),
                                                  static_cast<Eigen::Index>(cols));
    MatrixXc q, r;
    thin_qr(m, q, r);
    const std::size_t kk = static_cast<std::size_t>(q.cols());
    c.sites.push_back(tensor_from_rows(q, {left, dims[k], kk}));
    rest = r;
    left = kk;
  }
  c.sites.push_back(tensor_from_rows(rest, {left, dims.back(), 1}));
  return c;
}

VectorXc chain_to_dense(const MpsChain& c) {
  if (c.size() == 0) throw RangeError("empty chain");
  std::size_t total = 1;
  for (auto d : c.physical_dims()) {
    total *= d;
    if (total > kDenseLimit) throw InfeasibleError("dense expansion exceeds the 2^24 size guard");
  }
  check_site(c.sites[0], 0);
  RowMatrixXc psi = as_rows(c.sites[0], c.sites[0].extent(0) * c.sites[0].extent(1));
  if (c.sites[0].extent(0) != 1) throw ShapeError("chain must start with a bond of dimension 1");
  for (std::size_t k = 1; k < c.size(); ++k) {
    const Tensor& a = c.sites[k];
    check_site(a, k);
    if (a.extent(0) != static_cast<std::size_t>(psi.cols())) throw ShapeError("chain bonds do not match");
    RowMatrixXc next = psi * as_rows(a, a.extent(0));
    next.resize(next.rows() * static_cast<Eigen::Index>(a.extent(1)),
                static_cast<Eigen::Index>(a.extent(2)));
    psi = std::move(next);
  }
  if (psi.cols() != 1) throw ShapeError("chain must end with a bond of dimension 1");
  return Eigen::Map<const VectorXc>(psi.data(), psi.size());
}

VectorXc to_dense(const CanonicalMps& m) {
  std::size_t total = m.d_end * m.d_end;
  for (std::size_t k = 2; k < m.n; ++k) {
    total *= m.d;
    if (total > kDenseLimit) break;
  }
  if (total > kDenseLimit) throw InfeasibleError("dense expansion exceeds the 2^24 size guard");
  return chain_to_dense(to_chain(m));
}

namespace {

/// Left environments: env[k] is the contraction of sites [0, k).
std::vector<MatrixXc> left_environments(const MpsChain& c) {
  std::vector<MatrixXc> env(c.size() + 1);
  env[0] = MatrixXc::Ones(1, 1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Tensor& a = c.sites[k];
    check_site(a, k);
    MatrixXc next = MatrixXc::Zero(static_cast<Eigen::Index>(a.extent(2)),
                                   static_cast<Eigen::Index>(a.extent(2)));
    for (std::size_t i = 0; i < a.extent(1); ++i) {
      const MatrixXc s = site_slice(a, i);
      next += s.adjoint() * env[k] * s;
    }
    env[k + 1] = std::move(next);
  }
  return env;
}

/// Right environments: env[k] is the contraction of sites [k, n), indexed
/// (bra, ket).
std::vector<MatrixXc> right_environments(const MpsChain& c) {
  std::vector<MatrixXc> env(c.size() + 1);
  env[c.size()] = MatrixXc::Ones(1, 1);
  for (std::size_t k = c.size(); k-- > 0;) {
    const Tensor& a = c.sites[k];
    check_site(a, k);
    MatrixXc next = MatrixXc::Zero(static_cast<Eigen::Index>(a.extent(0)),
                                   static_cast<Eigen::Index>(a.extent(0)));
    for (std::size_t i = 0; i < a.extent(1); ++i) {
      const MatrixXc s = site_slice(a, i);
      next += s.conjugate() * env[k + 1] * s.transpose();
    }
    env[k] = std::move(next);
  }
  return env;
}

cplx term_value(const Tensor& theta, const MatrixXc& left, const MatrixXc& right,
                const MatrixXc& op) {
  const std::size_t p = theta.extent(1);
  if (static_cast<std::size_t>(op.rows()) != p || static_cast<std::size_t>(op.cols()) != p) {
    throw ShapeError("operator of size " + std::to_string(op.rows()) +
                     " does not act on two-site dimension " + std::to_string(p));
  }
  std::vector<MatrixXc> slices;
  slices.reserve(p);
  for (std::size_t a = 0; a < p; ++a) slices.push_back(site_slice(theta, a));
  cplx total = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    MatrixXc phi = MatrixXc::Zero(slices[0].rows(), slices[0].cols());
    for (std::size_t b = 0; b < p; ++b) {
      const cplx w = op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (w != cplx(0.0)) phi += w * slices[b];
    }
    const MatrixXc sandwiched = left * phi * right.transpose();
    total += slices[a].conjugate().cwiseProduct(sandwiched).sum();
  }
  return total;
}

}  // namespace

double chain_norm(const MpsChain& c) {
  const auto env = left_environments(c);
  return std::sqrt(std::max(0.0, env.back()(0, 0).real()));
}

cplx chain_two_site_expectation(const MpsChain& c, std::size_t k, const MatrixXc& op) {
  if (k + 1 >= c.size()) throw RangeError("two-site operator position out of range");
  const auto lenv = left_environments(c);
  const auto renv = right_environments(c);
  return term_value(merge_sites(c.sites[k], c.sites[k + 1]), lenv[k], renv[k + 2], op);
}

double chain_energy(const MpsChain& c, const NnHamiltonian& h) {
  if (h.n != c.size()) {
    throw ShapeError("Hamiltonian has " + std::to_string(h.n) + " sites, state has " +
                     std::to_string(c.size()));
  }
  if (c.physical_dims() != h.dims) throw ShapeError("physical dimensions differ from the Hamiltonian");
  const auto lenv = left_environments(c);
  const auto renv = right_environments(c);
  const double nrm2 = lenv.back()(0, 0).real();
  if (!(nrm2 > 0.0)) throw NumericalError("state has zero norm");
  cplx total = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    total += term_value(merge_sites(c.sites[k], c.sites[k + 1]), lenv[k], renv[k + 2], h.terms[k]);
  }
  return total.real() / nrm2;
}

double expectation_full(const CanonicalMps& m, const NnHamiltonian& h) {
  return chain_energy(to_chain(m), h);
}

MpsChain apply_two_site(const MpsChain& c, std::size_t k, const MatrixXc& op) {
  if (k + 1 >= c.size()) throw RangeError("two-site operator position out of range");
  const Tensor& a = c.sites[k];
  const Tensor& b = c.sites[k + 1];
  const std::size_t l = a.extent(0), p1 = a.extent(1), p2 = b.extent(1), r = b.extent(2);
  const Tensor theta = merge_sites(a, b);  // (l, p1*p2, r)
  if (static_cast<std::size_t>(op.rows()) != p1 * p2 || op.cols() != op.rows()) {
    throw ShapeError("operator does not act on sites " + std::to_string(k) + ", " +
                     std::to_string(k + 1));
  }
  // Apply op on the physical pair: new[l, a, r] = sum_b op[a, b] theta[l, b, r].
  RowMatrixXc applied(static_cast<Eigen::Index>(l * p1 * p2), static_cast<Eigen::Index>(r));
  for (std::size_t x = 0; x < l; ++x) {
    RowMatrixXc block(static_cast<Eigen::Index>(p1 * p2), static_cast<Eigen::Index>(r));
    for (std::size_t q = 0; q < p1 * p2; ++q)
      for (std::size_t y = 0; y < r; ++y)
        block(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(y)) = theta[(x * p1 * p2 + q) * r + y];
    applied.middleRows(static_cast<Eigen::Index>(x * p1 * p2), static_cast<Eigen::Index>(p1 * p2)) =
        op * block;
  }
  applied.resize(static_cast<Eigen::Index>(l * p1), static_cast<Eigen::Index>(p2 * r));
  const Svd svd = thin_svd(applied);
  const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
  Eigen::Index keep = 0;
  while (keep < svd.s.size() && svd.s(keep) > 1e-15 * smax) ++keep;
  keep = std::max<Eigen::Index>(keep, 1);
  const MatrixXc us = svd.u.leftCols(keep) * svd.s.head(keep).asDiagonal();
  const MatrixXc vh = svd.vh.topRows(keep);
  MpsChain out = c;
  out.sites[k] = tensor_from_rows(us, {l, p1, static_cast<std::size_t>(keep)});
  out.sites[k + 1] = tensor_from_rows(vh, {static_cast<std::size_t>(keep), p2, r});
  return out;
}

Canonicalization canonicalize_chain(const MpsChain& input, std::size_t D, TruncationMode mode,
                                    std::size_t s) {
  const std::size_t n = input.size();
  if (n < 2) throw RangeError("canonical form needs at least two sites");
  if (D == 0) throw RangeError("bond dimension must be positive");
  for (std::size_t k = 0; k < n; ++k) check_site(input.sites[k], k);
  const auto dims = input.physical_dims();
  if (dims.front() != dims.back()) throw ShapeError("boundary sites must share one dimension");
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (dims[k] != dims[1]) throw ShapeError("interior sites must share one dimension");
  }

  // Left-orthonormal sweep.
  std::vector<Tensor> sites = input.sites;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Tensor& a = sites[k];
    const std::size_t l = a.extent(0), p = a.extent(1);
    MatrixXc q, r;
    thin_qr(as_rows(a, l * p), q, r);
    const std::size_t m = static_cast<std::size_t>(q.cols());
    sites[k] = tensor_from_rows(q, {l, p, m});
    const Tensor& b = sites[k + 1];
    RowMatrixXc next = r * as_rows(b, b.extent(0));
    sites[k + 1] = tensor_from_rows(next, {m, b.extent(1), b.extent(2)});
  }
  const double nrm = norm(sites.back());
  if (!(nrm > 1e-300) || !std::isfinite(nrm)) throw NumericalError("cannot canonicalize a zero state");
  sites.back() *= cplx(1.0 / nrm);

  Canonicalization out;
  CanonicalMps& mps = out.mps;
  mps.n = n;
  mps.d = n > 2 ? dims[1] : dims[0];
  mps.D = D;
  mps.d_end = dims.front();
  mps.s = s;
  mps.b_tensors.resize(n - 2);
  out.ranks.assign(n - 1, 0);

  // Right-to-left SVD sweep; carry = U S of the previous split.
  MatrixXc carry = MatrixXc::Ones(1, 1);
  MatrixXc last_u;
  Eigen::VectorXd last_s;
  for (std::size_t k = n - 1; k >= 1; --k) {
    const Tensor& a = sites[k];
    const std::size_t l = a.extent(0), p = a.extent(1);
    RowMatrixXc t = as_rows(a, l * p) * carry;  // (l*p, c)
    const std::size_t c = static_cast<std::size_t>(t.cols());
    t.resize(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(p * c));
    const Svd svd = thin_svd(t);
    Eigen::Index rank = 0;
    while (rank < svd.s.size() && svd.s(rank) > kSchmidtThreshold) ++rank;
    if (rank == 0) throw NumericalError("state annihilated during canonicalization");
    Eigen::Index keep = rank;
    if (static_cast<std::size_t>(rank) > D) {
      if (mode == TruncationMode::strict) {
        throw RangeError("Schmidt rank " + std::to_string(rank) + " at bond " +
                         std::to_string(k + 1) + " exceeds D = " + std::to_string(D));
      }
      keep = static_cast<Eigen::Index>(D);
      out.discarded_weight += svd.s.segment(keep, rank - keep).squaredNorm();
    }
    Eigen::VectorXd sv = svd.s.head(keep);
    if (keep < rank) sv /= sv.norm();
    const std::size_t kk = static_cast<std::size_t>(keep);
    const MatrixXc vh = svd.vh.topRows(keep);
    if (k == n - 1) {
      mps.gamma_right = tensor_from_rows(vh, {kk, p});
    } else {
      mps.b_tensors[k - 1] = tensor_from_rows(vh, {kk, p, c});
    }
    out.ranks[k - 1] = kk;
    last_u = svd.u.leftCols(keep);
    last_s = sv;
    carry = last_u * sv.asDiagonal();
    if (k == 1) break;
  }
  mps.lambda2.assign(last_s.data(), last_s.data() + last_s.size());
  // Gamma_left[alpha, i] = (A_1 U)[i, alpha].
  const Tensor& a0 = sites[0];
  const RowMatrixXc g = as_rows(a0, a0.extent(0) * a0.extent(1)) * last_u;  // (d_end, D_2)
  mps.gamma_left = tensor_from_rows(g.transpose(), {static_cast<std::size_t>(g.cols()), mps.d_end});
  mps.validate();
  if (out.discarded_weight > 0.0) {
    // Cutting one bond disturbs the bases the cuts to its right relied on,
    // so put the truncated state (all bonds now <= D) in exact canonical form.
    auto exact = canonicalize_chain(to_chain(mps), D, TruncationMode::strict, s);
    exact.discarded_weight = out.discarded_weight;
    return exact;
  }
  return out;
}

Canonicalization canonicalize_detailed(const VectorXc& state, std::size_t n, std::size_t d,
                                       std::size_t D, std::size_t d_end, TruncationMode mode) {
  if (n < 2) throw RangeError("canonical form needs at least two sites");
  if (!state.allFinite()) throw RangeError("state has non-finite entries");
  if (std::abs(state.norm() - 1.0) > 1e-8) {
    throw RangeError("state must be normalized, |v| = " + std::to_string(state.norm()));
  }
  std::vector<std::size_t> dims(n, d);
  dims.front() = d_end;
  dims.back() = d_end;
  return canonicalize_chain(chain_from_dense(state, dims), D, mode);
}

CanonicalMps canonicalize(const VectorXc& state, std::size_t n, std::size_t d, std::size_t D,
                          std::size_t d_end, TruncationMode mode) {
  return canonicalize_detailed(state, n, d, D, d_end, mode).mps;
}

CanonicalReport check_canonical(const CanonicalMps& m, double tol) {
  m.validate();
  CanonicalReport rep;
  rep.tol = tol;
  const auto lam = m.lambdas();
  for (std::size_t j = 0; j < m.b_tensors.size(); ++j) {
    const Tensor& b = m.b_tensors[j];
    rep.left.push_back(left_overlap_residual(lam[j], b));
    rep.right.push_back(row_orthonormality_defect(as_rows(b, b.extent(0))));
  }
  rep.boundary_left = row_orthonormality_defect(as_rows(m.gamma_left, m.gamma_left.extent(0)));
  rep.boundary_right = row_orthonormality_defect(as_rows(m.gamma_right, m.gamma_right.extent(0)));
  for (const auto& l : lam) {
    double s2 = 0.0;
    for (double v : l) s2 += v * v;
    rep.normalization.push_back(std::abs(s2 - 1.0));
  }
  rep.pass = rep.max_residual() <= tol;
  return rep;
}

CanonicalMps product_state(std::span<const std::size_t> basis, std::size_t d, std::size_t d_end,
                           std::size_t D, std::size_t s) {
  const std::size_t n = basis.size();
  if (n < 2) throw RangeError("product state needs at least two sites");
  CanonicalMps m;
  m.n = n;
  m.d = n > 2 ? d : d_end;
  m.D = D;
  m.d_end = d_end;
  m.s = s;
  auto check = [](std::size_t v, std::size_t dim) {
    if (v >= dim) throw RangeError("basis index " + std::to_string(v) + " out of range");
  };
  check(basis.front(), d_end);
  check(basis.back(), d_end);
  m.gamma_left = Tensor({1, d_end});
  m.gamma_left[basis.front()] = 1.0;
  m.lambda2 = {1.0};
  for (std::size_t k = 1; k + 1 < n; ++k) {
    check(basis[k], d);
    Tensor b({1, d, 1});
    b[basis[k]] = 1.0;
    m.b_tensors.push_back(std::move(b));
  }
  m.gamma_right = Tensor({1, d_end});
  m.gamma_right[basis.back()] = 1.0;
  m.validate();
  return m;
}

VectorXc align_phase(const VectorXc& v) {
  if (v.size() == 0) return v;
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  const double a = std::abs(v(idx));
  if (a == 0.0) return v;
  return v * (std::conj(v(idx)) / a);
}

double phase_aligned_distance(const VectorXc& a, const VectorXc& b) {
  if (a.size() != b.size()) throw ShapeError("vectors differ in length");
  if (a.size() == 0) return 0.0;
  Eigen::Index idx = 0;
  a.cwiseAbs().maxCoeff(&idx);
  auto unit_phase = [](cplx z) { return std::abs(z) == 0.0 ? cplx(1.0) : std::conj(z) / std::abs(z); };
  return (a * unit_phase(a(idx)) - b * unit_phase(b(idx))).norm();
}

}  // namespace mpsdp
