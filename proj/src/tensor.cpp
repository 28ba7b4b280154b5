#include "mpsdp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mpsdp/errors.hpp"

namespace mpsdp {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) s[k - 1] = s[k] * shape[k];
  return s;
}

namespace {

void require_positive_extents(const Shape& shape) {
  for (auto e : shape) {
    if (e == 0) {
      throw ShapeError("tensor extents must be positive, got " +
                       shape_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  require_positive_extents(shape_);
  data_.assign(shape_size(shape_), cplx{0.0, 0.0});
}

Tensor::Tensor(Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require_positive_extents(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("entry count " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
  if (!all_finite()) throw RangeError("tensor entries must be finite");
}

Tensor Tensor::scalar(cplx value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::from_matrix(const MatrixXc& m) {
  Tensor t(Shape{static_cast<std::size_t>(m.rows()),
                 static_cast<std::size_t>(m.cols())});
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t.data_[r * m.cols() + c] = m(r, c);
  return t;
}

Tensor Tensor::from_vector(const VectorXc& v) {
  return Tensor(Shape{static_cast<std::size_t>(v.size())},
                std::vector<cplx>(v.data(), v.data() + v.size()));
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw RangeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(shape_.size()));
  }
  return shape_[axis];
}

cplx& Tensor::at(std::span<const std::size_t> index) {
  return const_cast<cplx&>(std::as_const(*this).at(index));
}

const cplx& Tensor::at(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) +
                     " does not match tensor rank " +
                     std::to_string(shape_.size()));
  }
  std::size_t flat = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) {
      throw RangeError("index " + std::to_string(index[k]) + " out of range on axis " +
                       std::to_string(k) + " of extent " +
                       std::to_string(shape_[k]));
    }
    flat = flat * shape_[k] + index[k];
  }
  return data_[flat];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                     shape_string(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  require_positive_extents(t.shape_);
  t.data_ = data_;
  return t;
}

Tensor Tensor::permuted(std::span<const std::size_t> perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw ShapeError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) throw ShapeError("invalid axis permutation");
    seen[p] = true;
  }
  Shape out_shape(r);
  for (std::size_t k = 0; k < r; ++k) out_shape[k] = shape_[perm[k]];
  const auto in_strides = strides_of(shape_);
  // Stride in the input for each output axis.
  std::vector<std::size_t> walk(r);
  for (std::size_t k = 0; k < r; ++k) walk[k] = in_strides[perm[k]];

  Tensor out(out_shape);
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t flat = 0; flat < out.data_.size(); ++flat) {
    out.data_[flat] = data_[src];
    for (std::size_t k = r; k-- > 0;) {
      ++idx[k];
      src += walk[k];
      if (idx[k] < out_shape[k]) break;
      src -= walk[k] * idx[k];
      idx[k] = 0;
    }
  }
  return out;
}

RowMatrixXc Tensor::as_matrix(std::size_t row_axes) const {
  if (row_axes > rank()) throw ShapeError("as_matrix: too many row axes");
  std::size_t rows = 1;
  for (std::size_t k = 0; k < row_axes; ++k) rows *= shape_[k];
  const std::size_t cols = data_.size() / rows;
  return Eigen::Map<const RowMatrixXc>(data_.data(),
                                       static_cast<Eigen::Index>(rows),
                                       static_cast<Eigen::Index>(cols));
}

VectorXc Tensor::as_vector() const {
  return Eigen::Map<const VectorXc>(data_.data(),
                                    static_cast<Eigen::Index>(data_.size()));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw ShapeError("cannot add " + shape_string(other.shape_) + " to " +
                     shape_string(shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw ShapeError("cannot subtract " + shape_string(other.shape_) + " from " +
                     shape_string(shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(cplx factor) {
  for (auto& z : data_) z *= factor;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(cplx factor, Tensor a) { return a *= factor; }

Tensor contract(const Tensor& a, const Tensor& b,
                std::span<const std::size_t> axes_a,
                std::span<const std::size_t> axes_b) {
  if (axes_a.size() != axes_b.size()) {
    throw ShapeError("contract: axis lists differ in length");
  }
  auto check_unique = [](std::span<const std::size_t> axes, std::size_t rank,
                         const char* which) {
    std::vector<bool> seen(rank, false);
    for (auto ax : axes) {
      if (ax >= rank) {
        throw ShapeError(std::string("contract: axis ") + std::to_string(ax) +
                         " out of range for tensor " + which);
      }
      if (seen[ax]) {
        throw ShapeError(std::string("contract: duplicate axis ") +
                         std::to_string(ax) + " for tensor " + which);
      }
      seen[ax] = true;
    }
    return seen;
  };
  const auto used_a = check_unique(axes_a, a.rank(), "a");
  const auto used_b = check_unique(axes_b, b.rank(), "b");
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    if (a.shape()[axes_a[k]] != b.shape()[axes_b[k]]) {
      throw ShapeError("contract: extent mismatch on axis pair (" +
                       std::to_string(axes_a[k]) + ", " +
                       std::to_string(axes_b[k]) + "): " +
                       std::to_string(a.shape()[axes_a[k]]) + " vs " +
                       std::to_string(b.shape()[axes_b[k]]));
    }
  }

  // a -> (free_a, contracted), b -> (contracted, free_b), then one GEMM.
  std::vector<std::size_t> perm_a, perm_b;
  Shape out_shape;
  for (std::size_t k = 0; k < a.rank(); ++k) {
    if (!used_a[k]) {
      perm_a.push_back(k);
      out_shape.push_back(a.shape()[k]);
    }
  }
  const std::size_t free_a = perm_a.size();
  perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
  perm_b.assign(axes_b.begin(), axes_b.end());
  for (std::size_t k = 0; k < b.rank(); ++k) {
    if (!used_b[k]) {
      perm_b.push_back(k);
      out_shape.push_back(b.shape()[k]);
    }
  }
  const RowMatrixXc ma = a.permuted(perm_a).as_matrix(free_a);
  const RowMatrixXc mb = b.permuted(perm_b).as_matrix(axes_b.size());
  const RowMatrixXc prod = ma * mb;
  return Tensor(out_shape,
                std::vector<cplx>(prod.data(), prod.data() + prod.size()));
}

Tensor contract(const Tensor& a, const Tensor& b,
                std::initializer_list<std::size_t> axes_a,
                std::initializer_list<std::size_t> axes_b) {
  return contract(a, b, std::span<const std::size_t>(axes_a.begin(), axes_a.size()),
                  std::span<const std::size_t>(axes_b.begin(), axes_b.size()));
}

double norm(const Tensor& a) {
  double s = 0.0;
  for (const auto& z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

double distance(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("distance: shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

Tensor fix_index(const Tensor& a, std::size_t axis, std::size_t value) {
  const std::size_t ext = a.extent(axis);
  if (value >= ext) {
    throw RangeError("fix_index: value " + std::to_string(value) +
                     " out of range for axis " + std::to_string(axis) +
                     " of extent " + std::to_string(ext));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= a.shape()[k];
  for (std::size_t k = axis + 1; k < a.rank(); ++k) inner *= a.shape()[k];
  Shape out_shape;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (k != axis) out_shape.push_back(a.shape()[k]);
  std::vector<cplx> out(outer * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i)
      out[o * inner + i] = a[(o * ext + value) * inner + i];
  return Tensor(out_shape, std::move(out));
}

Tensor stack(std::span<const Tensor> slices, std::size_t axis) {
  if (slices.empty()) throw ShapeError("stack: no slices");
  const Shape& base = slices.front().shape();
  if (axis > base.size()) throw RangeError("stack: axis out of range");
  for (const auto& s : slices) {
    if (s.shape() != base) throw ShapeError("stack: slice shapes differ");
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= base[k];
  for (std::size_t k = axis; k < base.size(); ++k) inner *= base[k];
  Shape out_shape = base;
  out_shape.insert(out_shape.begin() + static_cast<std::ptrdiff_t>(axis),
                   slices.size());
  const std::size_t ext = slices.size();
  std::vector<cplx> out(outer * ext * inner);
  for (std::size_t v = 0; v < ext; ++v)
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < inner; ++i)
        out[(o * ext + v) * inner + i] = slices[v][o * inner + i];
  return Tensor(out_shape, std::move(out));
}

}  // namespace mpsdp
