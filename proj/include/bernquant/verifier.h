#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bernquant/config.h"
#include "bernquant/functions.h"
#include "bernquant/qnn.h"
#include "bernquant/sigma_delta.h"
#include "bernquant/smoothing.h"

namespace bernquant {

// Grid points per axis of an evaluation region: `resolution` equispaced
// points of [0,1] or [1/4,3/4], endpoints included.
std::vector<double> region_axis(Region region, int resolution);

// f, f_B = sum a_k p_{n,k}, f_Q = sum sigma_k p_{n,k} and f_NN on one
// product grid. The three error terms are differences of these tensors.
struct ErrorFields {
  std::vector<std::vector<double>> axes;
  Tensor f, f_b, f_q, f_nn;
};

struct ErrorReport {
  int n = 0;
  int d = 0;
  double approx_sup = 0.0;  // ||f - f_B||
  double quant_sup = 0.0;   // ||f_B - f_Q||
  double impl_sup = 0.0;    // ||f_Q - f_NN||
  double total_sup = 0.0;   // ||f - f_NN||
  std::string region;
  int grid_resolution = 0;
  double max_abs_u = 0.0;
  double coeff_inf_norm = 0.0;
  SizeTriple net_size;
};

// Throws ResourceLimit if (nodes + edges) x points exceeds eval_budget.
ErrorFields error_fields(const TargetFunction& f, const CoeffTensor& a,
                         const Tensor& sigma, const QuantNet& net, Region region,
                         int grid_resolution, double eval_budget = 2e10);
ErrorReport decompose_error(const TargetFunction& f, const CoeffTensor& a,
                            const Tensor& sigma, const QuantNet& net, Region region,
                            int grid_resolution, double eval_budget = 2e10);

struct RateFit {
  std::vector<int> n_values;   // points used in the fit
  std::vector<double> errors;
  std::vector<int> excluded;   // n whose error sat at machine precision
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares of log(error) on log(n). Errors <= floor are treated as
// saturated and dropped (listed in `excluded`); at least 4 points must
// remain. n must be strictly increasing.
RateFit fit_rate(const std::vector<int>& n_values, const std::vector<double>& errors,
                 double floor = 1e-13);

// Constants of the two explicit Bernstein bounds
//   ||f - B_n f|| <= lip * |f|_Lip sqrt(d/n),   ||f - B_n f|| <= c2 * d^2/n * ||f||_{C^2}.
struct BoundConstants {
  double lip = 0.5;
  double c2 = 0.25;
};

struct BoundCheck {
  std::string check;  // lipschitz, c2, sd_first_order, iterate_identity_r2, ...
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  EvalPoint witness;  // where lhs - rhs is largest
};

// Evaluates every explicit inequality for each n on a `grid_resolution`^d
// grid of the full cube. The first-order sigma-delta row is only produced
// when ||f||_inf <= 1.
std::vector<BoundCheck> certify_explicit_bounds(const TargetFunction& f,
                                                const std::vector<int>& n_values,
                                                int grid_resolution,
                                                const BoundConstants& constants = {});

// Everything one pipeline run produces.
struct RunResult {
  ErrorReport report;
  CoeffTensor coeffs;
  SdResult sd;
  QuantNet net;  // with the sign layer attached
  bool norms_estimated = false;
};

// samples -> coefficients -> order-s sigma-delta along ell -> network ->
// sign layer -> error decomposition, for degree n.
RunResult run_binary_bernstein(const Config& config, const TargetFunction& f, int n);

struct SweepResult {
  std::vector<ErrorReport> reports;
  std::optional<RateFit> approx_fit, quant_fit, total_fit;
  bool norms_estimated = false;
};

// Runs every n of the config; fits rates when at least 4 degrees usable.
// `on_run` sees each run before its network is dropped.
SweepResult run_sweep(const Config& config,
                      const std::function<void(const RunResult&)>& on_run = {});

nlohmann::json report_to_json(const ErrorReport& r);
nlohmann::json fit_to_json(const RateFit& f);
nlohmann::json sweep_to_json(const Config& config, const SweepResult& s);
// Columns: n, approx_sup, quant_sup, impl_sup, total_sup, max_abs_u, L, N, P.
std::string sweep_csv(const std::vector<ErrorReport>& reports);
std::string bounds_csv(const std::vector<BoundCheck>& checks);

}  // namespace bernquant
