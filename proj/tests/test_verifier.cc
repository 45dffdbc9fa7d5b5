#include <cmath>
#include <random>

#include "doctest.h"

#include "bernquant/errors.h"
#include "bernquant/quad_builder.h"
#include "bernquant/verifier.h"

using namespace bernquant;

namespace {

Config sine_config(double scale, double freq, std::vector<int> ns, int s = 2) {
  Config c;
  c.function.builtin = "sine";
  c.function.params = {scale, freq, 0.25};
  c.n_values = std::move(ns);
  c.s = s;
  c.mu = 0.5;
  validate_config(c);
  return c;
}

bool all_pass(const std::vector<BoundCheck>& rows, const std::string& check) {
  bool ok = true;
  for (const auto& r : rows)
    if (r.check == check) ok = ok && r.pass;
  return ok;
}

}  // namespace

TEST_CASE("region axes") {
  const auto full = region_axis(Region::kFull, 5);
  CHECK(full == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto in = region_axis(Region::kInterior, 3);
  CHECK(in == std::vector<double>{0.25, 0.5, 0.75});
  CHECK_THROWS_AS(region_axis(Region::kFull, 1), DomainError);
}

TEST_CASE("rate fits") {
  const std::vector<int> ns = {16, 32, 64, 128, 256};
  std::vector<double> e;
  for (int n : ns) e.push_back(3.0 * std::pow(n, -2.0));
  auto fit = fit_rate(ns, e);
  CHECK(std::abs(fit.slope + 2.0) <= 1e-6);
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)));
  CHECK(fit.r2 == doctest::Approx(1.0));

  fit = fit_rate(ns, std::vector<double>(5, 0.1));
  CHECK(std::abs(fit.slope) <= 1e-12);

  // Saturated entries are dropped and listed.
  fit = fit_rate({4, 8, 16, 32, 64}, {1e-2, 1e-3, 1e-4, 1e-5, 0.0});
  CHECK(fit.excluded == std::vector<int>{64});
  CHECK(fit.n_values.size() == 4);
  CHECK_THROWS_AS(fit_rate({4, 8, 16, 32}, {1e-2, 1e-3, 1e-16, 1e-5}), ValidationError);
  CHECK_THROWS_AS(fit_rate({4, 8, 8, 32}, {1, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(fit_rate({4, 8, 16}, {1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(fit_rate({4, 8, 16, 32}, {1, 1, 1}), ValidationError);
}

TEST_CASE("error decomposition") {
  const auto f = make_builtin("sine", 1, {0.4, 2.0});
  const int n = 64;
  const auto a = iterated_coeffs(sample_on_grid(f, n), {2, 0.5, f.c2_norm});
  const auto sd = quantize_directional(a, 2, 1, Alphabet::one_bit());
  const QuantNet net = attach_sign_layer(build_bernstein_quad(n, 1), sd.q);

  const auto fields = error_fields(f, a, sd.q, net, Region::kFull, 401);
  for (std::size_t i = 0; i < fields.f.size(); ++i) {
    const double lhs = fields.f[i] - fields.f_nn[i];
    const double rhs = (fields.f[i] - fields.f_b[i]) + (fields.f_b[i] - fields.f_q[i]) +
                       (fields.f_q[i] - fields.f_nn[i]);
    CHECK(std::abs(lhs - rhs) <= 1e-14);
  }
  const auto r = decompose_error(f, a, sd.q, net, Region::kInterior, 401);
  CHECK(r.impl_sup <= 1e-9);
  CHECK(r.total_sup <= r.approx_sup + r.quant_sup + r.impl_sup + 1e-12);
  CHECK(r.quant_sup > r.approx_sup);
  CHECK(r.region == "interior");
  CHECK(r.net_size == net.size());

  // Pass-through sign tensor: no quantization error.
  const QuantNet exact = attach_sign_layer(build_bernstein_quad(4, 1), Tensor::cube(4, 1, 1.0));
  const CoeffTensor ones(Tensor::cube(4, 1, 1.0));
  const auto one = make_builtin("constant", 1, {1.0});
  const auto r1 = decompose_error(one, ones, ones.values, exact, Region::kFull, 101);
  CHECK(r1.quant_sup == 0.0);
  CHECK(r1.approx_sup <= 1e-14);
  CHECK(r1.total_sup <= 1e-9);

  CHECK_THROWS_AS(error_fields(f, a, sd.q, net, Region::kFull, 401, 1e3), ResourceLimit);
  CHECK_THROWS_AS(error_fields(make_builtin("sine", 2), a, sd.q, net, Region::kFull, 11),
                  DomainError);
}

TEST_CASE("explicit bounds hold for every built-in") {
  std::vector<int> ns;
  for (int n = 4; n <= 256; n *= 2) ns.push_back(n);
  for (const auto& name : builtin_names())
    for (int d = 1; d <= 2; ++d) {
      const auto f = make_builtin(name, d, {0.5, 1.0, 0.25});
      const auto rows = certify_explicit_bounds(f, ns, d == 1 ? 401 : 101);
      for (const auto& r : rows) {
        INFO(name << " d=" << d << " " << r.check << " n=" << r.n << " lhs=" << r.lhs
                  << " rhs=" << r.rhs);
        CHECK(r.pass);
      }
    }
}

TEST_CASE("constant function has no error") {
  const auto f = make_builtin("constant", 2, {0.3});
  for (const auto& r : certify_explicit_bounds(f, {4, 8}, 21)) {
    if (r.check == "sd_first_order") continue;
    CHECK(r.lhs <= 1e-14);
  }
}

TEST_CASE("negative controls: wrong constants fail with a witness") {
  std::vector<int> ns;
  for (int n = 4; n <= 256; n *= 2) ns.push_back(n);
  // Half the C^2 constant: quadratics meet the true one with equality.
  const auto poly = make_builtin("poly", 1, {0.5});
  const auto rows = certify_explicit_bounds(poly, ns, 401, {0.5, 1.0 / 16});
  CHECK_FALSE(all_pass(rows, "c2"));
  for (const auto& r : rows)
    if (r.check == "c2" && !r.pass) {
      REQUIRE(r.witness.size() == 1);
      CHECK(r.witness[0] == doctest::Approx(0.5));
    }
  CHECK(all_pass(certify_explicit_bounds(poly, ns, 401), "c2"));

  // A quarter of the Lipschitz constant fails on the tent.
  const auto tent = make_builtin("tent", 1, {0.5});
  CHECK_FALSE(all_pass(certify_explicit_bounds(tent, ns, 401, {1.0 / 8, 0.25}), "lipschitz"));
  CHECK(all_pass(certify_explicit_bounds(tent, ns, 401), "lipschitz"));
}

TEST_CASE("pipeline runs") {
  SUBCASE("quadratic, s = 2") {
    const Config c = sine_config(0.4, 2.0, {64});
    const auto f = make_target(c);
    const RunResult run = run_binary_bernstein(c, f, 64);
    CHECK(run.report.impl_sup <= 1e-9);
    CHECK(run.report.quant_sup > run.report.approx_sup);
    CHECK(run.report.max_abs_u > 0.0);
    CHECK(run.report.max_abs_u <= c.u_bound);
    CHECK(run.report.coeff_inf_norm < 1.0);
    CHECK_NOTHROW(audit_alphabet(run.net, Alphabet::one_bit()));
    CHECK(run.net.outputs().size() == 1);
  }
  SUBCASE("s = 1 first-order envelope holds pointwise") {
    const Config c = sine_config(0.5, 1.0, {32}, 1);
    const auto f = make_target(c);
    const RunResult run = run_binary_bernstein(c, f, 32);
    const auto axis = region_axis(Region::kFull, 401);
    Tensor diff = run.coeffs.values;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= run.sd.q[i];
    const Tensor err = eval_combination_grid(diff, {axis});
    for (std::size_t i = 0; i < axis.size(); ++i)
      CHECK(std::abs(err[i]) <= quantization_error_envelope(32, 1, 1, c.mu, {axis[i]}) + 1e-10);
  }
  SUBCASE("ReLU path") {
    Config c = sine_config(0.5, 1.0, {16});
    c.activation = "relu";
    c.grid_resolution = 101;
    const auto f = make_target(c);
    const RunResult run = run_binary_bernstein(c, f, 16);
    CHECK(run.report.impl_sup <= std::pow(16.0, -1.0));
    CHECK_NOTHROW(audit_alphabet(run.net, Alphabet::three_bit()));
  }
  SUBCASE("preconditions") {
    const Config c = sine_config(0.4, 2.0, {16});
    const auto f = make_target(c);
    try {
      run_binary_bernstein(c, f, 16);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("minimum degree 32") != std::string::npos);
    }
    Config big = sine_config(0.8, 1.0, {64});
    CHECK_THROWS_AS(run_binary_bernstein(big, make_target(big), 64), ValidationError);
    Config tent = c;
    tent.function.builtin = "tent";
    CHECK_THROWS_AS(run_binary_bernstein(tent, make_target(tent), 64), ValidationError);
  }
}

TEST_CASE("second-order envelope: frozen constant") {
  // Interior ratio |f_B - f_Q| / (n^{-1} X^{-2}) stays below a constant
  // calibrated once on this sweep.
  constexpr double kFrozen = 0.2;  // calibrated 0.1008
  double worst = 0.0;
  for (int n : {32, 64, 128, 256}) {
    const Config c = sine_config(0.4, 2.0, {n});
    const RunResult run = run_binary_bernstein(c, make_target(c), n);
    const auto axis = region_axis(Region::kFull, 201);
    Tensor diff = run.coeffs.values;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= run.sd.q[i];
    const Tensor err = eval_combination_grid(diff, {axis});
    for (std::size_t i = 1; i + 1 < axis.size(); ++i) {
      const double X = axis[i] * (1 - axis[i]);
      worst = std::max(worst, std::abs(err[i]) * n * X * X);
    }
  }
  MESSAGE("worst second-order envelope ratio " << worst);
  CHECK(worst <= kFrozen);
}

TEST_CASE("sweeps and artifacts") {
  const Config c = sine_config(0.5, 1.0, {16, 32, 64, 128, 256});
  int seen = 0;
  const SweepResult s = run_sweep(c, [&](const RunResult&) { ++seen; });
  CHECK(seen == 5);
  REQUIRE(s.total_fit);
  CHECK(s.total_fit->slope <= -0.8);
  REQUIRE(s.approx_fit);
  CHECK(s.approx_fit->slope <= -0.75);
  const auto j = sweep_to_json(c, s);
  CHECK(j["format"] == "bernquant-report");
  CHECK(j["reports"].size() == 5);
  CHECK(j["fits"].contains("total"));
  const std::string csv = sweep_csv(s.reports);
  CHECK(csv.rfind("n,approx_sup,quant_sup,impl_sup,total_sup,max_abs_u,L,N,P\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  // Deterministic.
  CHECK(sweep_to_json(c, run_sweep(c)).dump() == j.dump());

  const Config short_sweep = sine_config(0.5, 1.0, {16, 32});
  CHECK_FALSE(run_sweep(short_sweep).total_fit);

  const auto rows = certify_explicit_bounds(make_builtin("poly", 1, {0.5}), {8}, 11);
  const std::string b = bounds_csv(rows);
  CHECK(b.rfind("check,n,lhs,rhs,pass,witness\n", 0) == 0);
  CHECK(b.find("c2,8,") != std::string::npos);
}
