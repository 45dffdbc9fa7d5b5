#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bernquant/bernstein.h"
#include "bernquant/tensor.h"

namespace bernquant {

// A target function on [0,1]^d together with the norms the error bounds
// need. For built-ins the norms are closed forms; for sampled functions they
// are finite-difference estimates and `norms_estimated` is set.
struct TargetFunction {
  std::string name;
  int d = 1;
  std::function<double(std::span<const double>)> eval;
  double sup_norm = 0.0;  // ||f||_inf
  double lip = 0.0;       // |f|_Lip, Euclidean
  double c2_norm = 0.0;   // max(||f||_inf, max_{|alpha|=2} ||D^alpha f||_inf); inf if not C^2
  bool norms_estimated = false;

  double operator()(std::span<const double> x) const { return eval(x); }
};

struct BuiltinParams {
  double scale = 1.0;
  double freq = 1.0;    // sine: sin(freq * pi * t)
  double width = 0.25;  // gauss: standard deviation, at most 1/2
};

// Built-ins:
//   constant   A
//   sine       A prod_j sin(freq pi x_j)
//   poly       A prod_j 4 x_j (1 - x_j)
//   bilinear   A prod_j x_j
//   gauss      A exp(-|x - c|^2 / (2 width^2)), c = (1/2, ..., 1/2)
//   tent       A (1 - |2 mean(x) - 1|), Lipschitz but not C^2
std::vector<std::string> builtin_names();
TargetFunction make_builtin(const std::string& name, int d,
                            const BuiltinParams& params = {});

// f(k/n) for 0 <= k <= n.
GridSamples sample_on_grid(const TargetFunction& f, int n);
// f on the product grid axes[0] x ... x axes[d-1].
Tensor sample_on_axes(const TargetFunction& f,
                      const std::vector<std::vector<double>>& axes);

// Multilinear interpolant of grid samples, with norms estimated from
// first and second differences (second differences need n >= 2).
TargetFunction from_samples(const GridSamples& samples, std::string name = "samples");

}  // namespace bernquant
