#include "bernquant/smoothing.h"

#include <cmath>
#include <sstream>

#include "bernquant/errors.h"

namespace bernquant {

namespace {

Tensor axpy(double alpha, const Tensor& x, Tensor y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
  return y;
}

double binomial(int r, int j) {
  double b = 1.0;
  for (int i = 0; i < j; ++i) b = b * (r - i) / (i + 1);
  return b;
}

void check_order(int r) {
  if (r < 1) throw DomainError("iteration order r must be >= 1");
}

}  // namespace

void SmoothnessSpec::validate() const {
  if (s < 1) throw ValidationError("smoothness s must be >= 1");
  if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("mu must lie in (0,1)");
  if (!(c2_norm >= 0.0)) throw ValidationError("C^2 norm must be non-negative");
}

double pr_poly_eval(int r, double t) {
  if (r < 2) throw DomainError("pr_poly_eval: r must be >= 2");
  double sum = 0.0;
  double tp = 1.0, up = 1.0;
  for (int j = 0; j <= r - 2; ++j) {
    sum += tp + up;
    tp *= t;
    up *= 1.0 - t;
  }
  return sum;
}

Tensor auxiliary_samples(const GridSamples& samples, int r, CoeffPath path) {
  check_order(r);
  const Tensor& f = samples.values;
  if (r == 1) return f;
  const Matrix op = grid_operator_matrix(samples.n());
  auto B = [&](const Tensor& t) { return grid_operator_apply(t, op); };

  if (path == CoeffPath::kBinomial) {
    Tensor acc(f.extents());
    Tensor power = f;  // B^{j-1} f
    for (int j = 1; j <= r; ++j) {
      const double c = ((j - 1) % 2 ? -1.0 : 1.0) * binomial(r, j);
      acc = axpy(c, power, std::move(acc));
      if (j < r) power = B(power);
    }
    return acc;
  }

  // B^{r-1} f + sum_{j=0}^{r-2} (B^j + (I-B)^j) g with g = (I-B) f.
  Tensor bf = B(f);
  Tensor g = axpy(-1.0, bf, f);
  Tensor acc(f.extents());
  Tensor b_pow = g;  // B^j g
  Tensor c_pow = g;  // (I-B)^j g
  for (int j = 0; j <= r - 2; ++j) {
    acc = axpy(1.0, b_pow, std::move(acc));
    acc = axpy(1.0, c_pow, std::move(acc));
    if (j < r - 2) {
      b_pow = B(b_pow);
      c_pow = axpy(-1.0, B(c_pow), c_pow);
    }
  }
  Tensor lead = f;
  for (int j = 0; j < r - 1; ++j) lead = B(lead);
  return axpy(1.0, lead, std::move(acc));
}

Tensor iterated_operator_grid(const GridSamples& samples, int r) {
  check_order(r);
  const Matrix op = grid_operator_matrix(samples.n());
  Tensor acc(samples.values.extents());
  Tensor power = samples.values;
  for (int j = 1; j <= r; ++j) {
    power = grid_operator_apply(power, op);
    const double c = ((j - 1) % 2 ? -1.0 : 1.0) * binomial(r, j);
    acc = axpy(c, power, std::move(acc));
  }
  return acc;
}

CoeffTensor iterated_coeffs(const GridSamples& samples,
                            const SmoothnessSpec& spec, CoeffPath path) {
  spec.validate();
  CoeffTensor a(auxiliary_samples(samples, spec.r(), path));
  const double norm = a.inf_norm();
  if (!(norm < 1.0)) {
    std::ostringstream msg;
    msg << "coefficient sup-norm " << norm
        << " >= 1; increase n (minimum for this function is "
        << minimum_degree(spec, samples.d()) << ")";
    throw CoefficientOverflow(msg.str(), norm);
  }
  return a;
}

int minimum_degree(const SmoothnessSpec& spec, int d) {
  spec.validate();
  const double bound =
      spec.s * static_cast<double>(d) * d * spec.c2_norm / (2.0 * (1.0 - spec.mu));
  return std::max(1, static_cast<int>(std::ceil(bound - 1e-12)));
}

double eval_combination(const CoeffTensor& a, const EvalPoint& x) {
  const int n = a.n();
  const std::size_t d = a.values.rank();
  if (x.size() != d) throw DomainError("eval_combination: dimension mismatch");
  std::vector<std::vector<double>> rows;
  rows.reserve(d);
  for (double xj : x) rows.push_back(basis_row(n, xj));
  double sum = 0.0;
  for_each_index(a.values.extents(), [&](const std::vector<std::size_t>& k,
                                         std::size_t flat) {
    double w = a.values[flat];
    for (std::size_t j = 0; j < d && w != 0.0; ++j) w *= rows[j][k[j]];
    sum += w;
  });
  return sum;
}

Tensor eval_combination_grid(const Tensor& coeffs,
                             const std::vector<std::vector<double>>& axes) {
  if (axes.size() != coeffs.rank())
    throw DomainError("eval_combination_grid: dimension mismatch");
  const int n = coeffs.degree();
  Tensor out = coeffs;
  for (std::size_t j = 0; j < axes.size(); ++j)
    out = apply_along_axis(out, basis_matrix(n, axes[j]), j);
  return out;
}

}  // namespace bernquant
