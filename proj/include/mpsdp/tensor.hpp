#pragma once

// Dense complex tensors with an explicit shape and row-major storage.
//
// Axis order is part of the meaning of a tensor. The MPS code uses
// (left bond, physical, right bond) for site tensors and (bond, physical)
// for boundary tensors.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mpsdp {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using RowMatrixXc =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor {
 public:
  Tensor() : shape_{}, data_(1, cplx{0.0, 0.0}) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<cplx> data);

  static Tensor scalar(cplx value);
  /// Rank-2 identity of size n x n.
  static Tensor identity(std::size_t n);
  static Tensor from_matrix(const MatrixXc& m);
  static Tensor from_vector(const VectorXc& v);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t axis) const;

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }
  const std::vector<cplx>& values() const noexcept { return data_; }

  cplx& operator[](std::size_t flat) { return data_[flat]; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  cplx& at(std::span<const std::size_t> index);
  const cplx& at(std::span<const std::size_t> index) const;
  cplx& at(std::initializer_list<std::size_t> index) {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }
  const cplx& at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  /// Same entries under a new shape with identical entry count.
  Tensor reshaped(Shape shape) const;
  /// Axis permutation: result axis k is input axis perm[k].
  Tensor permuted(std::span<const std::size_t> perm) const;

  /// View as a (rows x cols) matrix after grouping the leading
  /// `row_axes` axes; the layout is row-major so no copy of order is needed.
  RowMatrixXc as_matrix(std::size_t row_axes) const;
  VectorXc as_vector() const;

  bool all_finite() const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(cplx factor);

 private:
  Shape shape_;
  std::vector<cplx> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(cplx factor, Tensor a);

/// Row-major strides for `shape`.
std::vector<std::size_t> strides_of(const Shape& shape);

/// Sum over paired axes of a and b. Output axes: the remaining axes of a
/// in order, then the remaining axes of b in order.
Tensor contract(const Tensor& a, const Tensor& b,
                std::span<const std::size_t> axes_a,
                std::span<const std::size_t> axes_b);
Tensor contract(const Tensor& a, const Tensor& b,
                std::initializer_list<std::size_t> axes_a,
                std::initializer_list<std::size_t> axes_b);

/// L2 norm over all entries.
double norm(const Tensor& a);
/// norm(a - b) for tensors of identical shape.
double distance(const Tensor& a, const Tensor& b);

/// Restriction of `a` with axis `axis` fixed to `value`; rank drops by one.
Tensor fix_index(const Tensor& a, std::size_t axis, std::size_t value);

/// Inverse of fix_index over every value: stacks equally shaped slices
/// along a new axis inserted at position `axis`.
Tensor stack(std::span<const Tensor> slices, std::size_t axis);

}  // namespace mpsdp
