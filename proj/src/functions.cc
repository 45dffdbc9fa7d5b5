#include "bernquant/functions.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "bernquant/errors.h"
#include "bernquant/parallel.h"

namespace bernquant {

namespace {

using std::numbers::pi;

double prod(std::span<const double> x, const std::function<double(double)>& g) {
  double p = 1.0;
  for (double t : x) p *= g(t);
  return p;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"constant", "sine", "poly", "bilinear", "gauss", "tent"};
}

TargetFunction make_builtin(const std::string& name, int d, const BuiltinParams& p) {
  if (d < 1) throw DomainError("builtin function needs d >= 1");
  const double A = p.scale;
  const double absA = std::abs(A);
  TargetFunction f;
  f.name = name;
  f.d = d;

  if (name == "constant") {
    f.eval = [A](std::span<const double>) { return A; };
    f.sup_norm = absA;
    f.lip = 0.0;
    f.c2_norm = absA;
  } else if (name == "sine") {
    const double w = p.freq * pi;
    if (!(p.freq > 0.0)) throw DomainError("sine: freq must be positive");
    f.eval = [A, w](std::span<const double> x) {
      return A * prod(x, [w](double t) { return std::sin(w * t); });
    };
    // sup of |sin(w t)| on [0,1]
    const double s1 = p.freq >= 0.5 ? 1.0 : std::sin(w);
    f.sup_norm = absA * std::pow(s1, d);
    // |grad|^2 = (A w)^2 sum_j cos_j^2 prod_{i != j} sin_i^2 <= (A w)^2,
    // attained at a face x_j = 0 when freq >= 1/2.
    f.lip = absA * w;
    const double second = d == 1 ? absA * w * w * s1 : absA * w * w * std::pow(s1, d - 2);
    f.c2_norm = std::max(f.sup_norm, second);
  } else if (name == "poly") {
    f.eval = [A](std::span<const double> x) {
      return A * prod(x, [](double t) { return 4.0 * t * (1.0 - t); });
    };
    f.sup_norm = absA;
    f.lip = 4.0 * absA;
    f.c2_norm = (d == 1 ? 8.0 : 16.0) * absA;
  } else if (name == "bilinear") {
    f.eval = [A](std::span<const double> x) {
      return A * prod(x, [](double t) { return t; });
    };
    f.sup_norm = absA;
    f.lip = absA * std::sqrt(static_cast<double>(d));
    f.c2_norm = absA;
  } else if (name == "gauss") {
    const double w = p.width;
    if (!(w > 0.0 && w <= 0.5)) throw DomainError("gauss: width must lie in (0, 1/2]");
    f.eval = [A, w](std::span<const double> x) {
      double r2 = 0.0;
      for (double t : x) r2 += (t - 0.5) * (t - 0.5);
      return A * std::exp(-r2 / (2.0 * w * w));
    };
    f.sup_norm = absA;
    f.lip = absA / (w * std::sqrt(std::numbers::e));
    // Pure second derivatives peak at the centre with |A|/w^2; mixed ones
    // stay below |A|/(e w^2).
    f.c2_norm = std::max(absA, absA / (w * w));
  } else if (name == "tent") {
    f.eval = [A, d](std::span<const double> x) {
      double m = 0.0;
      for (double t : x) m += t;
      m /= d;
      return A * (1.0 - std::abs(2.0 * m - 1.0));
    };
    f.sup_norm = absA;
    f.lip = 2.0 * absA / std::sqrt(static_cast<double>(d));
    f.c2_norm = std::numeric_limits<double>::infinity();
  } else {
    throw ValidationError("unknown builtin function '" + name + "'");
  }
  return f;
}

Tensor sample_on_axes(const TargetFunction& f,
                      const std::vector<std::vector<double>>& axes) {
  if (static_cast<int>(axes.size()) != f.d)
    throw DomainError("sample_on_axes: " + std::to_string(axes.size()) +
                      " axes for a function of " + std::to_string(f.d) + " variables");
  std::vector<std::size_t> extents;
  for (const auto& ax : axes) extents.push_back(ax.size());
  Tensor out(extents);
  parallel_for(out.size(), [&](std::size_t flat) {
    const auto idx = out.unflatten(flat);
    std::vector<double> x(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) x[j] = axes[j][idx[j]];
    out[flat] = f(x);
  });
  return out;
}

GridSamples sample_on_grid(const TargetFunction& f, int n) {
  if (n < 1) throw DomainError("sample_on_grid: n must be >= 1");
  std::vector<double> axis(n + 1);
  for (int k = 0; k <= n; ++k) axis[k] = static_cast<double>(k) / n;
  return GridSamples{sample_on_axes(f, std::vector<std::vector<double>>(f.d, axis))};
}

TargetFunction from_samples(const GridSamples& samples, std::string name) {
  const Tensor& v = samples.values;
  if (!v.is_cube() || v.rank() == 0)
    throw ValidationError("sample tensor must have shape (n+1)^d");
  const int n = samples.n();
  const int d = samples.d();
  if (n < 1) throw ValidationError("sample tensor needs n >= 1");

  TargetFunction f;
  f.name = std::move(name);
  f.d = d;
  f.norms_estimated = true;
  f.eval = [v, n, d](std::span<const double> x) {
    check_unit_point(x);
    // Multilinear interpolation over the cell containing x.
    std::vector<std::size_t> lo(d);
    std::vector<double> t(d);
    for (int j = 0; j < d; ++j) {
      const double s = x[j] * n;
      const int c = std::min(static_cast<int>(std::floor(s)), n - 1);
      lo[j] = static_cast<std::size_t>(c);
      t[j] = s - c;
    }
    double acc = 0.0;
    std::vector<std::size_t> idx(d);
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
      double w = 1.0;
      for (int j = 0; j < d; ++j) {
        const bool up = (corner >> j) & 1u;
        idx[j] = lo[j] + (up ? 1 : 0);
        w *= up ? t[j] : 1.0 - t[j];
      }
      if (w != 0.0) acc += w * v.at(idx);
    }
    return acc;
  };

  f.sup_norm = v.inf_norm();
  const double h = 1.0 / n;
  std::vector<double> max_d1(d, 0.0);
  double max_d2 = 0.0;
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    const auto idx = v.unflatten(flat);
    for (int j = 0; j < d; ++j) {
      const std::size_t sj = v.stride(j);
      if (idx[j] + 1 <= static_cast<std::size_t>(n))
        max_d1[j] = std::max(max_d1[j], std::abs(v[flat + sj] - v[flat]) / h);
      if (idx[j] >= 1 && idx[j] + 1 <= static_cast<std::size_t>(n))
        max_d2 = std::max(max_d2, std::abs(v[flat + sj] - 2.0 * v[flat] + v[flat - sj]) / (h * h));
      for (int i = j + 1; i < d; ++i) {
        const std::size_t si = v.stride(i);
        if (idx[j] + 1 <= static_cast<std::size_t>(n) && idx[i] + 1 <= static_cast<std::size_t>(n))
          max_d2 = std::max(max_d2, std::abs(v[flat + sj + si] - v[flat + sj] -
                                             v[flat + si] + v[flat]) / (h * h));
      }
    }
  }
  double lip2 = 0.0;
  for (double g : max_d1) lip2 += g * g;
  f.lip = std::sqrt(lip2);
  f.c2_norm = std::max(f.sup_norm, max_d2);
  return f;
}

}  // namespace bernquant
