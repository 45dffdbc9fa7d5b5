#pragma once

#include <span>
#include <vector>

#include "bernquant/tensor.h"

namespace bernquant {

// Multi-index k = (k_1, ..., k_d). Entries may lie outside [0, n]; such
// indices select the zero polynomial.
using MultiIndex = std::vector<int>;

// Point of the unit cube [0,1]^d.
using EvalPoint = std::vector<double>;

// Samples f(k/n) on the uniform grid, shape (n+1)^d.
struct GridSamples {
  Tensor values;

  int n() const { return values.degree(); }
  int d() const { return static_cast<int>(values.rank()); }
};

// All univariate basis values p_{n,0}(x), ..., p_{n,n}(x), built row by row
// from p_{1,.} with the Pascal recurrence
//   p_{m+1,k}(x) = x p_{m,k-1}(x) + (1-x) p_{m,k}(x).
// No binomial coefficient is ever formed.
std::vector<double> basis_row(int n, double x);

// p_{n,k}(x); zero whenever k < 0 or k > n.
double eval_basis_1d(int n, int k, double x);

// Tensor-product basis p_{n,k_1}(x_1) ... p_{n,k_d}(x_d).
double eval_basis_md(int n, const MultiIndex& k, const EvalPoint& x);

// Central moment T_{n,s}(x) = sum_k (k - n x)^s p_{n,k}(x), summed exactly.
double central_moment(int n, int s, double x);

// Closed forms of T_{n,s} for s <= 4 with X = x(1-x).
double central_moment_closed_form(int n, int s, double x);

// (n+1) x (n+1) matrix M(j, k) = p_{n,k}(j/n).
Matrix grid_operator_matrix(int n);

// Grid values of the Bernstein operator: out[j] = sum_k in[k] p_{n,k}(j/n),
// applied as one 1-D matrix product per axis.
GridSamples grid_operator_apply(const GridSamples& samples);
// Same, reusing a precomputed grid_operator_matrix.
Tensor grid_operator_apply(const Tensor& values, const Matrix& op);

// ((Delta^*)^r p_{n,.}(x))_k = sum_j (-1)^j C(r,j) p_{n,k+j}(x) for one
// coordinate, returned for k = -r, ..., n (index 0 of the result is k=-r).
std::vector<double> adjoint_difference(int n, int r, double x);

// r-th order variation of the basis in direction `ell` (1-based). By the
// tensor structure only x[ell-1] matters.
double variation(int n, int r, int ell, const EvalPoint& x);

// Matrix G(i, k) = p_{n,k}(points[i]); contracting a coefficient tensor with
// one such matrix per axis evaluates sum_k a_k p_{n,k} on a product grid.
Matrix basis_matrix(int n, std::span<const double> points);

// Throws DomainError unless every coordinate lies in [0,1].
void check_unit_point(std::span<const double> x);

}  // namespace bernquant
