#include "bernquant/sigma_delta.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bernquant/errors.h"
#include "bernquant/parallel.h"

namespace bernquant {

Alphabet::Alphabet(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw DomainError("alphabet must be non-empty");
  std::sort(levels_.begin(), levels_.end());
  if (std::adjacent_find(levels_.begin(), levels_.end()) != levels_.end())
    throw DomainError("alphabet levels must be distinct");
  for (double v : levels_) {
    if (!std::isfinite(v)) throw DomainError("alphabet levels must be finite");
    if (!std::binary_search(levels_.begin(), levels_.end(), -v))
      throw DomainError("alphabet must be symmetric about 0");
  }
}

Alphabet Alphabet::one_bit() { return Alphabet({-1.0, 1.0}); }
Alphabet Alphabet::two_bit() { return Alphabet({-1.0, -0.5, 0.5, 1.0}); }
Alphabet Alphabet::three_bit() {
  return Alphabet({-2.0, -1.0, -0.5, 0.5, 1.0, 2.0});
}

bool Alphabet::contains(double v) const {
  return std::binary_search(levels_.begin(), levels_.end(), v);
}

std::size_t Alphabet::code_of(double v) const {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), v);
  if (it == levels_.end() || *it != v) {
    std::ostringstream msg;
    msg << "value " << v << " is not an alphabet level";
    throw AlphabetViolation(msg.str());
  }
  return static_cast<std::size_t>(it - levels_.begin());
}

double Alphabet::round(double v) const {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), v);
  if (it == levels_.begin()) return *it;
  if (it == levels_.end()) return levels_.back();
  const double hi = *it;
  const double lo = *(it - 1);
  return (hi - v <= v - lo) ? hi : lo;
}

namespace {

std::vector<double> signed_binomials(int r) {
  // c_j = (-1)^{j-1} C(r,j), j = 1..r
  std::vector<double> c(r + 1, 0.0);
  double b = 1.0;
  for (int j = 1; j <= r; ++j) {
    b = b * (r - j + 1) / j;
    c[j] = (j % 2) ? b : -b;
  }
  return c;
}

// Runs the recursion on a strided view; returns max |u|.
double run_fiber(const double* y, double* q, double* u, std::size_t len,
                 std::size_t stride, int r, const std::vector<double>& c,
                 const Alphabet& alphabet, double u_bound, std::size_t fiber) {
  double max_u = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    double v = y[k * stride];
    for (int j = 1; j <= r && static_cast<std::size_t>(j) <= k; ++j)
      v += c[j] * u[(k - j) * stride];
    const double qk = alphabet.round(v);
    const double uk = v - qk;
    q[k * stride] = qk;
    u[k * stride] = uk;
    max_u = std::max(max_u, std::abs(uk));
    if (!(std::abs(uk) <= u_bound)) {
      std::ostringstream msg;
      msg << "sigma-delta state |u| = " << std::abs(uk) << " exceeded bound "
          << u_bound << " (order " << r << ", fiber " << fiber << ", step " << k
          << ")";
      throw StabilityOverflow(msg.str(), fiber, k, uk);
    }
  }
  return max_u;
}

void check_order(int r) {
  if (r < 1) throw DomainError("sigma-delta order must be >= 1");
}

}  // namespace

SdResult quantize_1d(std::span<const double> y, int r, const Alphabet& alphabet,
                     double u_bound) {
  check_order(r);
  SdResult res{Tensor({y.size()}), {Tensor({y.size()}), 0.0, r, 1}};
  const auto c = signed_binomials(r);
  res.state.max_abs_u =
      run_fiber(y.data(), &res.q[0], &res.state.u[0], y.size(), 1, r, c,
                alphabet, u_bound, 0);
  return res;
}

SdResult quantize_directional(const CoeffTensor& a, int r, int ell,
                              const Alphabet& alphabet, double u_bound) {
  check_order(r);
  const Tensor& y = a.values;
  if (ell < 1 || ell > static_cast<int>(y.rank()))
    throw DomainError("quantize_directional: direction out of range");
  const std::size_t axis = static_cast<std::size_t>(ell - 1);
  const std::size_t len = y.extent(axis);
  const std::size_t stride = y.stride(axis);
  std::size_t outer = 1;
  for (std::size_t j = 0; j < axis; ++j) outer *= y.extent(j);
  const std::size_t fibers = outer * stride;

  SdResult res{Tensor(y.extents()), {Tensor(y.extents()), 0.0, r, ell}};
  const auto c = signed_binomials(r);
  std::vector<double> fiber_max(fibers, 0.0);

  // Fiber f = o * stride + i starts at o * len * stride + i; f also equals
  // the lexicographic index of the fixed coordinates.
  parallel_for(fibers, [&](std::size_t f) {
    const std::size_t o = f / stride;
    const std::size_t i = f % stride;
    const std::size_t base = o * len * stride + i;
    fiber_max[f] = run_fiber(y.values().data() + base, &res.q[base], &res.state.u[base], len,
                             stride, r, c, alphabet, u_bound, f);
  });
  for (double m : fiber_max)
    res.state.max_abs_u = std::max(res.state.max_abs_u, m);
  return res;
}

Tensor apply_difference(const Tensor& u, int r, int ell) {
  if (ell < 1 || ell > static_cast<int>(u.rank()))
    throw DomainError("apply_difference: direction out of range");
  const std::size_t axis = static_cast<std::size_t>(ell - 1);
  const std::size_t len = u.extent(axis);
  const std::size_t stride = u.stride(axis);
  Tensor cur = u;
  for (int it = 0; it < r; ++it) {
    Tensor next = cur;
    for (std::size_t flat = 0; flat < cur.size(); ++flat) {
      const std::size_t k = (flat / stride) % len;
      if (k > 0) next[flat] = cur[flat] - cur[flat - stride];
    }
    cur = std::move(next);
  }
  return cur;
}

double quantization_error_envelope(int n, int r, int ell, double mu,
                                   const EvalPoint& x) {
  (void)mu;  // the r >= 2 shape carries no (r, mu)-dependent constant
  if (n < 1 || r < 1) throw DomainError("envelope: need n >= 1, r >= 1");
  if (ell < 1 || ell > static_cast<int>(x.size()))
    throw DomainError("envelope: direction out of range");
  check_unit_point(x);
  const double t = x[ell - 1];
  const double X = t * (1.0 - t);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (r == 1) {
    const double v = X > 0.0 ? 1.0 / std::sqrt((n + 1.0) * X) : inf;
    return std::min(2.0, v);
  }
  const double v = X > 0.0 ? std::pow(n, -0.5 * r) * std::pow(X, -r) : inf;
  return std::min(1.0, v);
}

}  // namespace bernquant
