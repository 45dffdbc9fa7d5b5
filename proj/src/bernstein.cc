#include "bernquant/bernstein.h"

#include <cmath>
#include <string>

#include "bernquant/errors.h"

namespace bernquant {

namespace {

void check_degree(int n) {
  if (n < 1) throw DomainError("Bernstein degree must be >= 1, got " + std::to_string(n));
}

void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("evaluation point outside [0,1]: " + std::to_string(x));
}

}  // namespace

void check_unit_point(std::span<const double> x) {
  for (double v : x) check_unit(v);
}

std::vector<double> basis_row(int n, double x) {
  check_degree(n);
  check_unit(x);
  const double y = 1.0 - x;
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
  row[0] = 1.0;
  for (int m = 0; m < n; ++m) {
    // In place, right to left: row[k] <- x row[k-1] + (1-x) row[k].
    row[m + 1] = x * row[m];
    for (int k = m; k >= 1; --k) row[k] = x * row[k - 1] + y * row[k];
    row[0] = y * row[0];
  }
  return row;
}

double eval_basis_1d(int n, int k, double x) {
  check_degree(n);
  check_unit(x);
  if (k < 0 || k > n) return 0.0;
  return basis_row(n, x)[k];
}

double eval_basis_md(int n, const MultiIndex& k, const EvalPoint& x) {
  check_degree(n);
  if (k.size() != x.size())
    throw DomainError("eval_basis_md: index has " + std::to_string(k.size()) +
                      " entries but point has " + std::to_string(x.size()));
  check_unit_point(x);
  double prod = 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (k[j] < 0 || k[j] > n) return 0.0;
    prod *= eval_basis_1d(n, k[j], x[j]);
  }
  return prod;
}

double central_moment(int n, int s, double x) {
  if (s < 0) throw DomainError("central_moment: s must be >= 0");
  const auto row = basis_row(n, x);
  const double mean = n * x;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) sum += std::pow(k - mean, s) * row[k];
  return sum;
}

double central_moment_closed_form(int n, int s, double x) {
  check_degree(n);
  check_unit(x);
  const double X = x * (1.0 - x);
  switch (s) {
    case 0: return 1.0;
    case 1: return 0.0;
    case 2: return n * X;
    case 3: return n * (1.0 - 2.0 * x) * X;
    case 4: return 3.0 * n * n * X * X + n * (X - 6.0 * X * X);
    default:
      throw DomainError("central_moment_closed_form: only s <= 4 is tabulated");
  }
}

Matrix grid_operator_matrix(int n) {
  check_degree(n);
  Matrix m(n + 1, n + 1);
  for (int j = 0; j <= n; ++j) {
    const auto row = basis_row(n, static_cast<double>(j) / n);
    for (int k = 0; k <= n; ++k) m(j, k) = row[k];
  }
  return m;
}

Tensor grid_operator_apply(const Tensor& values, const Matrix& op) {
  Tensor out = values;
  for (std::size_t axis = 0; axis < values.rank(); ++axis)
    out = apply_along_axis(out, op, axis);
  return out;
}

GridSamples grid_operator_apply(const GridSamples& samples) {
  const Matrix op = grid_operator_matrix(samples.n());
  return {grid_operator_apply(samples.values, op)};
}

std::vector<double> adjoint_difference(int n, int r, double x) {
  if (r < 0) throw DomainError("adjoint_difference: r must be >= 0");
  const auto row = basis_row(n, x);
  auto p = [&](int k) { return (k < 0 || k > n) ? 0.0 : row[k]; };
  // (Delta^* v)_k = v_k - v_{k+1}; r-fold application expands binomially.
  std::vector<double> out(static_cast<std::size_t>(n + r) + 1, 0.0);
  for (int k = -r; k <= n; ++k) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= r; ++j) {
      acc += ((j % 2) ? -binom : binom) * p(k + j);
      binom = binom * (r - j) / (j + 1);
    }
    out[k + r] = acc;
  }
  return out;
}

double variation(int n, int r, int ell, const EvalPoint& x) {
  if (r < 1) throw DomainError("variation: r must be >= 1");
  if (ell < 1 || ell > static_cast<int>(x.size()))
    throw DomainError("variation: direction out of range");
  check_unit_point(x);
  double sum = 0.0;
  for (double v : adjoint_difference(n, r, x[ell - 1])) sum += std::abs(v);
  return sum;
}

Matrix basis_matrix(int n, std::span<const double> points) {
  Matrix g(points.size(), n + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = basis_row(n, points[i]);
    for (int k = 0; k <= n; ++k) g(i, k) = row[k];
  }
  return g;
}

}  // namespace bernquant
