#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bernquant/bernstein.h"
#include "bernquant/smoothing.h"
#include "bernquant/tensor.h"

namespace bernquant {

// Finite set of quantization levels, symmetric about zero.
class Alphabet {
 public:
  explicit Alphabet(std::vector<double> levels);

  static Alphabet one_bit();    // {-1, 1}
  static Alphabet two_bit();    // {+-1/2, +-1}
  static Alphabet three_bit();  // {+-1/2, +-1, +-2}

  const std::vector<double>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  bool contains(double v) const;
  // Position of `v` in levels(); throws AlphabetViolation if absent.
  std::size_t code_of(double v) const;

  // Closest level; on a tie the larger level wins.
  double round(double v) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<double> levels_;
};

// State sequence u of a sigma-delta run. For a directional run `u` has the
// shape of the input tensor; the r zero entries before index 0 are implicit.
struct SdState {
  Tensor u;
  double max_abs_u = 0.0;
  int order = 1;
  int direction = 1;  // 1-based axis
};

struct SdResult {
  Tensor q;  // quantized values, same shape as the input
  SdState state;
};

// One-dimensional r-th order greedy sigma-delta:
//   v_k = sum_{j=1}^r (-1)^{j-1} C(r,j) u_{k-j} + y_k,
//   q_k = round(v_k),  u_k = v_k - q_k,
// so that y - q = Delta^r u. Throws StabilityOverflow as soon as
// |u_k| > u_bound.
SdResult quantize_1d(std::span<const double> y, int r, const Alphabet& alphabet,
                     double u_bound = 50.0);

// Runs quantize_1d independently on every fiber along axis `ell` (1-based).
// Fibers are visited in lexicographic order of the remaining indices; that
// order is also the fiber number reported by StabilityOverflow.
SdResult quantize_directional(const CoeffTensor& a, int r, int ell,
                              const Alphabet& alphabet, double u_bound = 50.0);

// (Delta_ell^r u) with u extended by zeros before index 0.
Tensor apply_difference(const Tensor& u, int r, int ell);

// Pointwise error envelope. r = 1: the explicit bound
// min(2, ((n+1) x (1-x))^{-1/2}); r >= 2: the shape
// min(1, n^{-r/2} x^{-r} (1-x)^{-r}) with no constant.
double quantization_error_envelope(int n, int r, int ell, double mu,
                                   const EvalPoint& x);

}  // namespace bernquant
