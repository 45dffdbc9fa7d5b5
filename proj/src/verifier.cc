#include "bernquant/verifier.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bernquant/errors.h"
#include "bernquant/quad_builder.h"
#include "bernquant/relu_builder.h"

namespace bernquant {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

EvalPoint point_at(const std::vector<std::vector<double>>& axes,
                   const std::vector<std::size_t>& idx) {
  EvalPoint x(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) x[j] = axes[j][idx[j]];
  return x;
}

// sup |a - b| and its flat position.
std::pair<double, std::size_t> sup_diff(const Tensor& a, const Tensor& b) {
  double best = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = std::abs(a[i] - b[i]);
    if (e > best || std::isnan(e)) {
      best = e;
      at = i;
      if (std::isnan(e)) break;
    }
  }
  return {best, at};
}

std::vector<std::vector<double>> cube_axes(Region region, int resolution, int d) {
  return std::vector<std::vector<double>>(d, region_axis(region, resolution));
}

}  // namespace

std::vector<double> region_axis(Region region, int resolution) {
  if (resolution < 2) throw DomainError("grid resolution must be >= 2");
  const double lo = region == Region::kInterior ? 0.25 : 0.0;
  const double hi = region == Region::kInterior ? 0.75 : 1.0;
  std::vector<double> axis(resolution);
  for (int i = 0; i < resolution; ++i)
    axis[i] = lo + (hi - lo) * static_cast<double>(i) / (resolution - 1);
  axis.back() = hi;
  return axis;
}

ErrorFields error_fields(const TargetFunction& f, const CoeffTensor& a,
                         const Tensor& sigma, const QuantNet& net, Region region,
                         int grid_resolution, double eval_budget) {
  const int d = a.d();
  if (f.d != d) throw DomainError("function and coefficients differ in dimension");
  if (sigma.extents() != a.values.extents())
    throw DomainError("sign tensor shape differs from the coefficient shape");
  if (net.input_arity() != d || net.outputs().size() != 1)
    throw DomainError("network must map R^" + std::to_string(d) + " to R");

  ErrorFields out;
  out.axes = cube_axes(region, grid_resolution, d);
  const double points = std::pow(static_cast<double>(grid_resolution), d);
  const double work = points * static_cast<double>(net.nodes().size() + net.edges().size());
  if (work > eval_budget)
    throw ResourceLimit("network evaluation needs about " + fmt(work) +
                        " operations, above the budget " + fmt(eval_budget) +
                        "; lower grid_resolution");

  out.f = sample_on_axes(f, out.axes);
  out.f_b = eval_combination_grid(a.values, out.axes);
  out.f_q = eval_combination_grid(sigma, out.axes);

  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(points) * d);
  for (std::size_t flat = 0; flat < out.f.size(); ++flat) {
    const auto idx = out.f.unflatten(flat);
    for (int j = 0; j < d; ++j) xs.push_back(out.axes[j][idx[j]]);
  }
  const auto values = net.evaluate_batch(xs);
  out.f_nn = Tensor(out.f.extents());
  for (std::size_t i = 0; i < values.size(); ++i) out.f_nn[i] = values[i];
  return out;
}

ErrorReport decompose_error(const TargetFunction& f, const CoeffTensor& a,
                            const Tensor& sigma, const QuantNet& net, Region region,
                            int grid_resolution, double eval_budget) {
  const ErrorFields e = error_fields(f, a, sigma, net, region, grid_resolution, eval_budget);
  ErrorReport r;
  r.n = a.n();
  r.d = a.d();
  r.approx_sup = sup_diff(e.f, e.f_b).first;
  r.quant_sup = sup_diff(e.f_b, e.f_q).first;
  r.impl_sup = sup_diff(e.f_q, e.f_nn).first;
  r.total_sup = sup_diff(e.f, e.f_nn).first;
  r.region = region_name(region);
  r.grid_resolution = grid_resolution;
  r.coeff_inf_norm = a.inf_norm();
  r.net_size = net.size();
  return r;
}

RateFit fit_rate(const std::vector<int>& n_values, const std::vector<double>& errors,
                 double floor) {
  if (n_values.size() != errors.size())
    throw ValidationError("fit_rate: " + std::to_string(n_values.size()) + " degrees but " +
                          std::to_string(errors.size()) + " errors");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw ValidationError("fit_rate: degrees must be strictly increasing");
  RateFit fit;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(errors[i] > floor)) {
      fit.excluded.push_back(n_values[i]);
    } else {
      fit.n_values.push_back(n_values[i]);
      fit.errors.push_back(errors[i]);
    }
  }
  const std::size_t m = fit.n_values.size();
  if (m < 4)
    throw ValidationError("fit_rate: " + std::to_string(m) +
                          " usable points after dropping saturated errors; need 4");
  double sx = 0, sy = 0;
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(static_cast<double>(fit.n_values[i]));
    ly[i] = std::log(fit.errors[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<BoundCheck> certify_explicit_bounds(const TargetFunction& f,
                                                const std::vector<int>& n_values,
                                                int grid_resolution,
                                                const BoundConstants& constants) {
  const int d = f.d;
  const auto axes = cube_axes(Region::kFull, grid_resolution, d);
  const Tensor exact = sample_on_axes(f, axes);
  std::vector<BoundCheck> rows;

  for (int n : n_values) {
    const GridSamples samples = sample_on_grid(f, n);
    const Tensor bf = eval_combination_grid(samples.values, axes);
    const auto [sup, at] = sup_diff(exact, bf);
    const EvalPoint where = point_at(axes, exact.unflatten(at));

    const double lip_rhs = constants.lip * f.lip * std::sqrt(static_cast<double>(d) / n);
    rows.push_back({"lipschitz", n, sup, lip_rhs, sup <= lip_rhs + 1e-12, where});
    const double c2_rhs = constants.c2 * d * d / static_cast<double>(n) * f.c2_norm;
    rows.push_back({"c2", n, sup, c2_rhs, sup <= c2_rhs + 1e-12, where});

    if (samples.values.inf_norm() <= 1.0) {
      const CoeffTensor a(samples.values);
      const SdResult sd = quantize_directional(a, 1, 1, Alphabet::one_bit());
      Tensor diff = samples.values;
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= sd.q[i];
      const Tensor err = eval_combination_grid(diff, axes);
      double worst = -std::numeric_limits<double>::infinity();
      BoundCheck row{"sd_first_order", n, 0, 0, true, {}};
      for (std::size_t i = 0; i < err.size(); ++i) {
        const EvalPoint x = point_at(axes, err.unflatten(i));
        const double env = quantization_error_envelope(n, 1, 1, 0.0, x);
        const double gap = std::abs(err[i]) - env;
        if (gap > worst) {
          worst = gap;
          row.lhs = std::abs(err[i]);
          row.rhs = env;
          row.witness = x;
        }
      }
      row.pass = worst <= 1e-10;
      rows.push_back(row);
    }

    for (int r : {2, 3}) {
      const Tensor binom = iterated_operator_grid(samples, r);
      const Tensor aux = grid_operator_apply(
          GridSamples{auxiliary_samples(samples, r, CoeffPath::kAuxiliary)}).values;
      const auto [gap, pos] = sup_diff(binom, aux);
      const double tol = 1e-10 * std::max(1.0, f.sup_norm);
      EvalPoint x;
      for (std::size_t k : binom.unflatten(pos)) x.push_back(static_cast<double>(k) / n);
      rows.push_back({"iterate_identity_r" + std::to_string(r), n, gap, tol, gap <= tol, x});
    }
  }
  return rows;
}

RunResult run_binary_bernstein(const Config& config, const TargetFunction& f, int n) {
  const int d = config.d;
  if (f.d != d) throw ValidationError("function dimension differs from config.d");
  SmoothnessSpec spec{config.s, config.mu, f.c2_norm};
  spec.validate();
  if (!std::isfinite(f.c2_norm))
    throw ValidationError("function '" + f.name + "' is not C^2; the pipeline needs ||f||_{C^2}");
  if (f.sup_norm > config.mu * (1.0 + 1e-12))
    throw ValidationError("||f||_inf = " + fmt(f.sup_norm) + " exceeds mu = " + fmt(config.mu));
  const int min_n = minimum_degree(spec, d);
  if (n < min_n)
    throw ValidationError("n = " + std::to_string(n) + " is below the minimum degree " +
                          std::to_string(min_n) + " = ceil(s d^2 ||f||_C2 / (2 (1 - mu)))");

  const GridSamples samples = sample_on_grid(f, n);
  CoeffTensor coeffs = iterated_coeffs(samples, spec);
  SdResult sd = quantize_directional(coeffs, config.s, config.ell, Alphabet::one_bit(),
                                     config.u_bound);

  auto build = [&]() {
    if (config.activation == "quad")
      return attach_sign_layer(build_bernstein_quad(n, d, nullptr, config.max_outputs), sd.q);
    const double eps = config.eps ? *config.eps
                                  : std::pow(n + 1.0, -d) * std::pow(n, -config.s / 2.0);
    return attach_sign_layer_relu(build_bernstein_relu(n, d, eps, {}, config.max_outputs),
                                  sd.q);
  };
  QuantNet net = build();
  RunResult out{ErrorReport{}, std::move(coeffs), std::move(sd), std::move(net),
                f.norms_estimated};
  out.report = decompose_error(f, out.coeffs, out.sd.q, out.net, config.region,
                               config.grid_resolution, config.eval_budget);
  out.report.max_abs_u = out.sd.state.max_abs_u;
  return out;
}

SweepResult run_sweep(const Config& config,
                      const std::function<void(const RunResult&)>& on_run) {
  const TargetFunction f = make_target(config);
  SweepResult out;
  out.norms_estimated = f.norms_estimated;
  for (int n : config.n_values) {
    const RunResult run = run_binary_bernstein(config, f, n);
    if (on_run) on_run(run);
    out.reports.push_back(run.report);
  }
  if (out.reports.size() >= 4) {
    std::vector<int> ns;
    std::vector<double> ea, eq, et;
    for (const auto& r : out.reports) {
      ns.push_back(r.n);
      ea.push_back(r.approx_sup);
      eq.push_back(r.quant_sup);
      et.push_back(r.total_sup);
    }
    auto try_fit = [&](const std::vector<double>& e) -> std::optional<RateFit> {
      try {
        return fit_rate(ns, e);
      } catch (const ValidationError&) {
        return std::nullopt;
      }
    };
    out.approx_fit = try_fit(ea);
    out.quant_fit = try_fit(eq);
    out.total_fit = try_fit(et);
  }
  return out;
}

json report_to_json(const ErrorReport& r) {
  return {{"n", r.n},
          {"d", r.d},
          {"approx_sup", r.approx_sup},
          {"quant_sup", r.quant_sup},
          {"impl_sup", r.impl_sup},
          {"total_sup", r.total_sup},
          {"region", r.region},
          {"grid_resolution", r.grid_resolution},
          {"max_abs_u", r.max_abs_u},
          {"coeff_inf_norm", r.coeff_inf_norm},
          {"net_size", {{"L", r.net_size.layers}, {"N", r.net_size.neurons}, {"P", r.net_size.params}}}};
}

json fit_to_json(const RateFit& f) {
  return {{"n_values", f.n_values}, {"errors", f.errors}, {"excluded", f.excluded},
          {"slope", f.slope},       {"intercept", f.intercept}, {"r2", f.r2}};
}

json sweep_to_json(const Config& config, const SweepResult& s) {
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(report_to_json(r));
  json fits = json::object();
  if (s.approx_fit) fits["approx"] = fit_to_json(*s.approx_fit);
  if (s.quant_fit) fits["quant"] = fit_to_json(*s.quant_fit);
  if (s.total_fit) fits["total"] = fit_to_json(*s.total_fit);
  return {{"format", "bernquant-report"},
          {"format_version", 1},
          {"config", config_to_json(config)},
          {"norms_estimated", s.norms_estimated},
          {"direction_note", "quantization runs along axis ell = " + std::to_string(config.ell) +
                                 "; its error envelope depends on x_ell only"},
          {"reports", reports},
          {"fits", fits}};
}

std::string sweep_csv(const std::vector<ErrorReport>& reports) {
  std::ostringstream os;
  os << "n,approx_sup,quant_sup,impl_sup,total_sup,max_abs_u,L,N,P\n";
  for (const auto& r : reports)
    os << r.n << ',' << fmt(r.approx_sup) << ',' << fmt(r.quant_sup) << ','
       << fmt(r.impl_sup) << ',' << fmt(r.total_sup) << ',' << fmt(r.max_abs_u) << ','
       << r.net_size.layers << ',' << r.net_size.neurons << ',' << r.net_size.params << '\n';
  return os.str();
}

std::string bounds_csv(const std::vector<BoundCheck>& checks) {
  std::ostringstream os;
  os << "check,n,lhs,rhs,pass,witness\n";
  for (const auto& c : checks) {
    os << c.check << ',' << c.n << ',' << fmt(c.lhs) << ',' << fmt(c.rhs) << ','
       << (c.pass ? "pass" : "fail") << ',';
    for (std::size_t j = 0; j < c.witness.size(); ++j)
      os << (j ? " " : "") << fmt(c.witness[j]);
    os << '\n';
  }
  return os.str();
}

}  // namespace bernquant
