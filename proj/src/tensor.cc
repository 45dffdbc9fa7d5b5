#include "bernquant/tensor.h"

#include <algorithm>
#include <cmath>

#include "bernquant/errors.h"

namespace bernquant {

Tensor::Tensor(std::vector<std::size_t> extents, double fill)
    : extents_(std::move(extents)) {
  std::size_t total = 1;
  for (auto e : extents_) total *= e;
  data_.assign(total, fill);
}

Tensor Tensor::cube(int n, int d, double fill) {
  if (n < 0 || d < 1) throw DomainError("Tensor::cube: need n >= 0, d >= 1");
  return Tensor(std::vector<std::size_t>(d, static_cast<std::size_t>(n) + 1),
                fill);
}

bool Tensor::is_cube() const {
  if (extents_.empty()) return false;
  return std::all_of(extents_.begin(), extents_.end(),
                     [&](std::size_t e) { return e == extents_.front(); });
}

int Tensor::degree() const {
  if (!is_cube()) throw DomainError("Tensor::degree: tensor is not cubic");
  return static_cast<int>(extents_.front()) - 1;
}

std::size_t Tensor::stride(std::size_t axis) const {
  std::size_t s = 1;
  for (std::size_t a = axis + 1; a < extents_.size(); ++a) s *= extents_[a];
  return s;
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != extents_.size())
    throw DomainError("Tensor: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < extents_.size(); ++a) {
    if (index[a] >= extents_[a]) throw DomainError("Tensor: index out of range");
    flat = flat * extents_[a] + index[a];
  }
  return flat;
}

std::vector<std::size_t> Tensor::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(extents_.size());
  for (std::size_t a = extents_.size(); a-- > 0;) {
    idx[a] = flat % extents_[a];
    flat /= extents_[a];
  }
  return idx;
}

double& Tensor::at(std::span<const std::size_t> index) {
  return data_[flat_index(index)];
}

double Tensor::at(std::span<const std::size_t> index) const {
  return data_[flat_index(index)];
}

double Tensor::inf_norm() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor apply_along_axis(const Tensor& t, const Matrix& m, std::size_t axis) {
  if (axis >= t.rank()) throw DomainError("apply_along_axis: bad axis");
  if (m.cols != t.extent(axis))
    throw DomainError("apply_along_axis: matrix/extent mismatch");
  auto out_extents = t.extents();
  out_extents[axis] = m.rows;
  Tensor out(out_extents);

  // View t as (outer, extent(axis), inner).
  std::size_t inner = t.stride(axis);
  std::size_t outer = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= t.extent(a);
  const std::size_t in_len = t.extent(axis);

  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t in_base = o * in_len * inner;
    const std::size_t out_base = o * m.rows * inner;
    for (std::size_t i = 0; i < m.rows; ++i) {
      double* dst = &out[out_base + i * inner];
      for (std::size_t j = 0; j < in_len; ++j) {
        const double w = m(i, j);
        if (w == 0.0) continue;
        const double* src = t.values().data() + in_base + j * inner;
        for (std::size_t q = 0; q < inner; ++q) dst[q] += w * src[q];
      }
    }
  }
  return out;
}

}  // namespace bernquant
