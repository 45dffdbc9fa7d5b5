// Command-line front end: coeffs, quantize, build, eval, verify, rates,
// report. Exit status 0 on success, 2 on invalid input, 3 when the
// coefficients or the quantizer state overflow.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bernquant/config.h"
#include "bernquant/errors.h"
#include "bernquant/functions.h"
#include "bernquant/quad_builder.h"
#include "bernquant/relu_builder.h"
#include "bernquant/sigma_delta.h"
#include "bernquant/smoothing.h"
#include "bernquant/tensor_io.h"
#include "bernquant/verifier.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bernquant;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitOverflow = 3;

// Command-line values that override config fields.
struct Overrides {
  std::string config_path;
  std::vector<int> n;
  std::optional<int> s, ell, grid, d;
  std::optional<double> mu, eps;
  std::optional<std::string> activation, out, region, builtin;
  std::optional<double> scale, freq, width;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--n", o.n, "degree, or several for a sweep");
  cmd->add_option("--s", o.s, "smoothness order");
  cmd->add_option("--mu", o.mu, "bound on ||f||_inf, in (0,1)");
  cmd->add_option("--d", o.d, "dimension");
  cmd->add_option("--activation", o.activation, "quad or relu");
  cmd->add_option("--ell", o.ell, "quantization direction (1-based)");
  cmd->add_option("--grid", o.grid, "evaluation points per axis");
  cmd->add_option("--region", o.region, "interior or full");
  cmd->add_option("--eps", o.eps, "ReLU accuracy override");
  cmd->add_option("--function", o.builtin, "builtin target function");
  cmd->add_option("--scale", o.scale, "amplitude of the builtin");
  cmd->add_option("--freq", o.freq, "frequency of the sine builtin");
  cmd->add_option("--width", o.width, "width of the gauss builtin");
  cmd->add_option("--out", o.out, "output directory");
}

Config resolve_config(const Overrides& o) {
  Config c;
  if (!o.config_path.empty()) {
    c = parse_config(o.config_path);
  } else {
    c.function.builtin = "sine";
    c.function.params.scale = 0.4;
    c.function.params.freq = 2.0;
  }
  const int old_d = c.d;
  if (o.d) c.d = *o.d;
  if (!o.n.empty()) c.n_values = o.n;
  if (o.s) c.s = *o.s;
  if (o.mu) c.mu = *o.mu;
  if (o.ell) c.ell = *o.ell;
  if (o.activation) c.activation = *o.activation;
  if (o.eps) c.eps = *o.eps;
  if (o.region) c.region = parse_region(*o.region);
  if (o.out) c.output_dir = *o.out;
  if (o.builtin) {
    if (*o.builtin != c.function.builtin) c.function.params = BuiltinParams{};
    c.function.builtin = *o.builtin;
    c.function.sample_file.clear();
  }
  if (o.scale) c.function.params.scale = *o.scale;
  if (o.freq) c.function.params.freq = *o.freq;
  if (o.width) c.function.params.width = *o.width;
  if (o.grid)
    c.grid_resolution = *o.grid;
  else if (o.config_path.empty() || c.d != old_d)
    c.grid_resolution = default_grid_resolution(c.d);
  validate_config(c);
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::vector<std::vector<double>> parse_points(const std::string& text) {
  std::vector<std::vector<double>> pts;
  std::stringstream rows(text);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::stringstream cols(row);
    std::string cell;
    std::vector<double> p;
    while (std::getline(cols, cell, ',')) {
      try {
        std::size_t used = 0;
        p.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r\n", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError("cannot parse coordinate '" + cell + "'");
      }
    }
    if (!p.empty()) pts.push_back(std::move(p));
  }
  return pts;
}

int cmd_coeffs(const Overrides& o, const std::string& samples_path, const std::string& out_file) {
  GridSamples samples;
  SmoothnessSpec spec;
  if (!samples_path.empty()) {
    samples.values = load_tensor(samples_path);
    if (!samples.values.is_cube()) throw ValidationError("sample tensor must have shape (n+1)^d");
    spec.s = o.s.value_or(2);
    spec.mu = o.mu.value_or(0.5);
  } else {
    const Config c = resolve_config(o);
    samples = sample_on_grid(make_target(c), c.n_values.front());
    spec.s = c.s;
    spec.mu = c.mu;
  }
  spec.validate();
  const CoeffTensor a = iterated_coeffs(samples, spec);
  save_tensor(a.values, out_file);
  std::cout << json{{"n", a.n()}, {"d", a.d()}, {"r", spec.r()}, {"inf_norm", a.inf_norm()}}.dump()
            << "\n";
  return 0;
}

int cmd_quantize(const std::string& coeffs_path, int r, int ell, double u_bound,
                 const std::string& out_file) {
  const CoeffTensor a(load_tensor(coeffs_path));
  if (!a.values.is_cube()) throw ValidationError("coefficient tensor must have shape (n+1)^d");
  const SdResult sd = quantize_directional(a, r, ell, Alphabet::one_bit(), u_bound);
  save_tensor(sd.q, out_file);
  std::cout << json{{"n", a.n()},
                    {"d", a.d()},
                    {"order", sd.state.order},
                    {"direction", sd.state.direction},
                    {"max_abs_u", sd.state.max_abs_u}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_build(const std::string& activation, int n, int d, std::optional<double> eps,
              const std::string& signs_path, bool inline_weights, bool two_bit,
              const std::string& out_file) {
  QuantNet net = [&] {
    if (activation == "quad") return build_bernstein_quad(n, d);
    if (activation == "relu") {
      const double e = eps.value_or(std::pow(n + 1.0, -d) / n);
      ReluOptions opt;
      opt.two_bit = two_bit;
      return build_bernstein_relu(n, d, e, opt);
    }
    throw ValidationError("activation must be 'quad' or 'relu', got '" + activation + "'");
  }();
  if (two_bit && activation != "relu") throw ValidationError("--two-bit needs --activation relu");
  if (!signs_path.empty()) {
    const Tensor sigma = load_tensor(signs_path);
    if (sigma.extents() != std::vector<std::size_t>(d, n + 1))
      throw ValidationError("sign tensor shape does not match (n+1)^d");
    net = activation == "quad" ? attach_sign_layer(net, sigma) : attach_sign_layer_relu(net, sigma);
  }
  save_net(net, out_file, !inline_weights);
  const SizeTriple s = net.size();
  std::cout << json{{"L", s.layers}, {"N", s.neurons}, {"P", s.params},
                    {"outputs", net.outputs().size()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_eval(const std::string& net_path, const std::string& points, const std::string& points_file) {
  const QuantNet net = load_net(net_path);
  std::string text = points;
  if (!points_file.empty()) {
    std::ifstream in(points_file);
    if (!in) throw ValidationError("cannot open " + points_file);
    std::stringstream ss;
    for (std::string line; std::getline(in, line);) ss << line << ';';
    text = ss.str();
  }
  const auto pts = parse_points(text);
  if (pts.empty()) throw ValidationError("no evaluation points given");
  for (const auto& p : pts) {
    if (static_cast<int>(p.size()) != net.input_arity())
      throw ValidationError("point has " + std::to_string(p.size()) +
                            " coordinates, network expects " + std::to_string(net.input_arity()));
    check_unit_point(p);
  }
  for (const auto& p : pts) {
    const auto y = net.evaluate(p);
    for (std::size_t i = 0; i < y.size(); ++i) std::printf(i ? ",%.17g" : "%.17g", y[i]);
    std::printf("\n");
  }
  return 0;
}

int cmd_verify(const Overrides& o, bool save_nets) {
  const Config c = resolve_config(o);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  const SweepResult sweep = run_sweep(c, [&](const RunResult& run) {
    if (save_nets) save_net(run.net, (dir / ("net_n" + std::to_string(run.report.n) + ".qnn")).string());
  });
  const json report = sweep_to_json(c, sweep);
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "errors.csv", sweep_csv(sweep.reports));
  if (!c.function.builtin.empty()) {
    const TargetFunction f = make_target(c);
    write_text(dir / "bounds.csv", bounds_csv(certify_explicit_bounds(f, c.n_values, c.grid_resolution)));
  }
  for (const auto& r : sweep.reports)
    std::printf("n=%d approx=%.3e quant=%.3e impl=%.3e total=%.3e max|u|=%.3f size=%s\n", r.n,
                r.approx_sup, r.quant_sup, r.impl_sup, r.total_sup, r.max_abs_u,
                to_string(r.net_size).c_str());
  if (sweep.total_fit) std::printf("total-error slope %.3f (r2 %.3f)\n", sweep.total_fit->slope, sweep.total_fit->r2);
  std::printf("wrote %s\n", (dir / "report.json").string().c_str());
  return 0;
}

int cmd_rates(const Overrides& o) {
  const Config c = resolve_config(o);
  if (c.n_values.size() < 4) throw ValidationError("rates needs at least 4 degrees (--n or n_sweep)");
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  const SweepResult sweep = run_sweep(c);
  write_text(dir / "rates.json", sweep_to_json(c, sweep).dump(2) + "\n");
  write_text(dir / "rates.csv", sweep_csv(sweep.reports));
  auto show = [](const char* name, const std::optional<RateFit>& f) {
    if (f)
      std::printf("%-7s slope %.3f  r2 %.4f  points %zu  saturated %zu\n", name, f->slope, f->r2,
                  f->n_values.size(), f->excluded.size());
    else
      std::printf("%-7s no fit (saturated at machine precision)\n", name);
  };
  show("approx", sweep.approx_fit);
  show("quant", sweep.quant_fit);
  show("total", sweep.total_fit);
  return 0;
}

int cmd_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open report " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  if (j.value("format", "") != "bernquant-report") throw ValidationError(path + ": not a report file");
  const json& c = j.at("config");
  std::printf("function  %s\n", c.at("function").dump().c_str());
  std::printf("d=%d s=%d mu=%g ell=%d activation=%s region=%s grid=%d\n", c.at("d").get<int>(),
              c.at("s").get<int>(), c.at("mu").get<double>(), c.at("ell").get<int>(),
              c.at("activation").get<std::string>().c_str(), c.at("region").get<std::string>().c_str(),
              c.at("grid_resolution").get<int>());
  if (j.value("norms_estimated", false)) std::printf("norms estimated from samples\n");
  std::printf("%s\n\n", j.at("direction_note").get<std::string>().c_str());
  std::printf("%6s %12s %12s %12s %12s %8s %8s %10s %10s\n", "n", "approx", "quant", "impl",
              "total", "max|u|", "L", "N", "P");
  for (const auto& r : j.at("reports")) {
    auto num = [&](const char* k) { return r.at(k).is_null() ? NAN : r.at(k).get<double>(); };
    std::printf("%6d %12.4e %12.4e %12.4e %12.4e %8.4f %8lld %10lld %10lld\n", r.at("n").get<int>(),
                num("approx_sup"), num("quant_sup"), num("impl_sup"), num("total_sup"),
                num("max_abs_u"), r.at("net_size").at("L").get<long long>(),
                r.at("net_size").at("N").get<long long>(), r.at("net_size").at("P").get<long long>());
  }
  for (const auto& [name, fit] : j.at("fits").items())
    std::printf("%s: slope %.3f over %zu degrees (r2 %.4f)\n", name.c_str(),
                fit.at("slope").get<double>(), fit.at("n_values").size(), fit.at("r2").get<double>());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized Bernstein network toolkit"};
  app.require_subcommand(1);

  Overrides o;
  std::string samples_path, coeffs_path, signs_path, net_path, points, points_file, report_path;
  std::string out_file;
  int r = 2, ell = 1, n = 8, d = 1;
  double u_bound = 50.0;
  std::string activation = "quad";
  std::optional<double> eps;
  bool inline_weights = false, two_bit = false, no_nets = false;

  auto* coeffs = app.add_subcommand("coeffs", "samples -> coefficient tensor");
  add_override_flags(coeffs, o);
  coeffs->add_option("--samples", samples_path, "tensor file of f(k/n)");
  coeffs->add_option("--out-file,-o", out_file, "coefficient tensor to write")->required();

  auto* quantize = app.add_subcommand("quantize", "coefficient tensor -> sign tensor");
  quantize->add_option("--coeffs", coeffs_path, "coefficient tensor file")->required();
  quantize->add_option("--r", r, "sigma-delta order");
  quantize->add_option("--ell", ell, "direction (1-based)");
  quantize->add_option("--u-bound", u_bound, "abort when |u| exceeds this");
  quantize->add_option("--out-file,-o", out_file, "sign tensor to write")->required();

  auto* build = app.add_subcommand("build", "build a Bernstein network (.qnn)");
  build->add_option("--activation", activation, "quad or relu");
  build->add_option("--n", n, "degree");
  build->add_option("--d", d, "dimension");
  build->add_option("--eps", eps, "ReLU accuracy");
  build->add_option("--signs", signs_path, "attach a sign layer from this tensor file");
  build->add_flag("--inline-weights", inline_weights, "store weights in the JSON header");
  build->add_flag("--two-bit", two_bit, "ReLU network over {+-1/2, +-1} (x+x instead of 2x)");
  build->add_option("--out-file,-o", out_file, "network file to write")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a network at points");
  eval->add_option("--net", net_path, "network file")->required();
  eval->add_option("--points", points, "points as 'x1,x2;x1,x2;...'");
  eval->add_option("--points-file", points_file, "one comma-separated point per line");

  auto* verify = app.add_subcommand("verify", "run the pipeline; write report.json and errors.csv");
  add_override_flags(verify, o);
  verify->add_flag("--no-nets", no_nets, "do not save the networks");

  auto* rates = app.add_subcommand("rates", "degree sweep with slope fits");
  add_override_flags(rates, o);

  auto* report = app.add_subcommand("report", "summarize a report.json");
  report->add_option("--report", report_path, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*coeffs) return cmd_coeffs(o, samples_path, out_file);
    if (*quantize) return cmd_quantize(coeffs_path, r, ell, u_bound, out_file);
    if (*build) return cmd_build(activation, n, d, eps, signs_path, inline_weights, two_bit, out_file);
    if (*eval) return cmd_eval(net_path, points, points_file);
    if (*verify) return cmd_verify(o, !no_nets);
    if (*rates) return cmd_rates(o);
    if (*report) return cmd_report(report_path);
  } catch (const StabilityOverflow& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOverflow;
  } catch (const CoefficientOverflow& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOverflow;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const AlphabetViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const GraphError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const ResourceLimit& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
