#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bernquant {

// Dense row-major tensor of doubles. Axis 0 varies slowest. The pipeline
// mostly works with cubic tensors of extent n+1 per axis (one entry per
// multi-index 0 <= k <= n), but intermediate results of axis-wise
// contractions may have non-uniform extents.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> extents, double fill = 0.0);

  // Cubic tensor of shape (n+1)^d.
  static Tensor cube(int n, int d, double fill = 0.0);

  std::size_t rank() const { return extents_.size(); }
  const std::vector<std::size_t>& extents() const { return extents_; }
  std::size_t extent(std::size_t axis) const { return extents_[axis]; }
  std::size_t size() const { return data_.size(); }

  // True when every axis has the same extent n+1; `degree()` returns n.
  bool is_cube() const;
  int degree() const;

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  // Distance in the flat array between neighbours along `axis`.
  std::size_t stride(std::size_t axis) const;

  double inf_norm() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> extents_;
  std::vector<double> data_;
};

// Dense matrix used for axis-wise contractions.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

// out[..., i, ...] = sum_j m(i, j) * t[..., j, ...] along `axis`.
// Requires m.cols == t.extent(axis); the result has extent m.rows there.
Tensor apply_along_axis(const Tensor& t, const Matrix& m, std::size_t axis);

// Visits every multi-index of a tensor with the given extents in row-major
// order.
template <typename F>
void for_each_index(const std::vector<std::size_t>& extents, F&& f) {
  std::size_t total = 1;
  for (auto e : extents) total *= e;
  if (total == 0) return;
  std::vector<std::size_t> idx(extents.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(static_cast<const std::vector<std::size_t>&>(idx), flat);
    for (std::size_t a = extents.size(); a-- > 0;) {
      if (++idx[a] < extents[a]) break;
      idx[a] = 0;
    }
  }
}

}  // namespace bernquant
