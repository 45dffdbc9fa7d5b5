#pragma once

#include <span>
#include <vector>

#include "bernquant/bernstein.h"
#include "bernquant/tensor.h"

namespace bernquant {

// Bernstein coefficients a_k, 0 <= k <= n, of a polynomial in the
// multivariate basis.
struct CoeffTensor {
  Tensor values;

  CoeffTensor() = default;
  explicit CoeffTensor(Tensor t) : values(std::move(t)) {}

  int n() const { return values.degree(); }
  int d() const { return static_cast<int>(values.rank()); }
  double inf_norm() const { return values.inf_norm(); }
};

// Smoothness data of a target function. `c2_norm` is ||f||_{C^2} or an
// upper bound for it.
struct SmoothnessSpec {
  int s = 1;
  double mu = 0.5;
  double c2_norm = 0.0;

  int r() const { return (s + 1) / 2; }
  void validate() const;
};

// P_{r-2}(t) = sum_{j=0}^{r-2} (t^j + (1-t)^j), r >= 2.
double pr_poly_eval(int r, double t);

enum class CoeffPath {
  kBinomial,   // sum_{j=1}^r (-1)^{j-1} C(r,j) B_n^{j-1} f
  kAuxiliary,  // B_n^{r-1} f + P_{r-2}(B_n)(I - B_n) f
};

// Grid values of f_{n,r}, the function whose plain Bernstein polynomial is
// the iterated approximant: B_n(f_{n,r}) = U_{n,r}(f) = (I - (I-B_n)^r) f.
// These are the coefficients handed to the quantizer. For r = 1 they are
// the samples themselves.
Tensor auxiliary_samples(const GridSamples& samples, int r,
                         CoeffPath path = CoeffPath::kBinomial);

// Grid values U_{n,r}(f)(j/n) through the binomial expansion
// sum_{j=1}^r (-1)^{j-1} C(r,j) B_n^j f.
Tensor iterated_operator_grid(const GridSamples& samples, int r);

// Coefficients of the iterated approximant for smoothness spec.s. Throws
// CoefficientOverflow when ||a||_inf >= 1.
CoeffTensor iterated_coeffs(const GridSamples& samples,
                            const SmoothnessSpec& spec,
                            CoeffPath path = CoeffPath::kBinomial);

// Smallest n with n >= s d^2 ||f||_{C^2} / (2 (1 - mu)).
int minimum_degree(const SmoothnessSpec& spec, int d);

// sum_k a_k p_{n,k}(x).
double eval_combination(const CoeffTensor& a, const EvalPoint& x);

// The same sum on the product grid axes[0] x ... x axes[d-1], computed by
// one basis-matrix contraction per axis. Result extents are axes[j].size().
Tensor eval_combination_grid(const Tensor& coeffs,
                             const std::vector<std::vector<double>>& axes);

}  // namespace bernquant
