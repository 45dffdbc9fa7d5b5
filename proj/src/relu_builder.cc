#include "bernquant/relu_builder.h"

#include <cmath>
#include <string>

#include "bernquant/errors.h"

namespace bernquant {

namespace {

constexpr auto kRelu = Activation::kRelu;

void check_eps(double eps, const char* who) {
  if (!(eps > 0.0 && eps < 1.0))
    throw DomainError(std::string(who) + ": accuracy must lie in (0,1)");
}

// Terms for weight 2 * src, split into two unit connections in two-bit mode.
void push_scaled(std::vector<Term>& terms, NodeId src, double w,
                 const ReluOptions& opt) {
  if (opt.two_bit && std::abs(w) == 2.0) {
    terms.push_back({src, w / 2});
    terms.push_back({src, w / 2});
  } else {
    terms.push_back({src, w});
  }
}

}  // namespace

int squaring_terms(double eps) {
  check_eps(eps, "squaring_terms");
  return std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / eps) / 2.0 - 1e-12)));
}

NodeId emit_phi(NetBuilder& b, NodeId x, const ReluOptions& opt) {
  // relu(2 relu(x) - 2 relu(x - 1/2) - 2 relu(x - 1/2))
  const NodeId h1 = b.add(kRelu, {{x, 1.0}});
  const NodeId h2 = b.add(kRelu, {{x, 1.0}}, -0.5);
  const NodeId h3 = b.add(kRelu, {{x, 1.0}}, -0.5);
  std::vector<Term> terms;
  push_scaled(terms, h1, 2.0, opt);
  push_scaled(terms, h2, -2.0, opt);
  push_scaled(terms, h3, -2.0, opt);
  return b.add(kRelu, terms);
}

NodeId emit_squaring(NetBuilder& b, NodeId t, int m_terms, const ReluOptions& opt) {
  if (m_terms < 1) throw DomainError("squaring needs at least one term");
  std::vector<NodeId> phi(m_terms);
  phi[0] = emit_phi(b, t, opt);
  for (int k = 1; k < m_terms; ++k) phi[k] = emit_phi(b, phi[k - 1], opt);
  // Horner: c_m = phi_m, c_k = phi_k + c_{k+1}/4; the tent sum is c_1/4.
  NodeId c = phi[m_terms - 1];
  for (int k = m_terms - 2; k >= 0; --k) {
    const NodeId half = b.add(kRelu, {{c, 0.5}});
    c = b.add(kRelu, {{half, 0.5}, {phi[k], 1.0}});
  }
  const NodeId half = b.add(kRelu, {{c, 0.5}});
  // relu(t - c_1/4) = t - sum_k phi^k(t)/4^k, close to t^2.
  return b.add(kRelu, {{t, 1.0}, {half, -0.5}});
}

NodeId emit_scale_pow2(NetBuilder& b, NodeId x, int e, const ReluOptions& opt) {
  NodeId cur = x;
  for (int i = 0; i < std::abs(e); ++i) {
    std::vector<Term> terms;
    push_scaled(terms, cur, e > 0 ? 2.0 : 0.5, opt);
    cur = b.add(kRelu, terms);
  }
  return cur;
}

NodeId emit_mult2_relu(NetBuilder& b, NodeId x, NodeId y, double eps, int k,
                       const ReluOptions& opt) {
  check_eps(eps, "mult2_relu");
  if (k < 0) throw DomainError("mult2_relu: range exponent must be >= 0");
  const double delta = eps * std::ldexp(1.0, -2 * k - 2) / 3.0;
  const int m = squaring_terms(delta);
  // x/2^{k+1}, y/2^{k+1}, (x+y)/2^{k+1}: the first halving step reads the
  // inputs directly.
  const NodeId sx = emit_scale_pow2(b, b.add(kRelu, {{x, 0.5}}), -k, opt);
  const NodeId sy = emit_scale_pow2(b, b.add(kRelu, {{y, 0.5}}), -k, opt);
  const NodeId sxy = emit_scale_pow2(b, b.add(kRelu, {{x, 0.5}, {y, 0.5}}), -k, opt);
  const NodeId qxy = emit_squaring(b, sxy, m, opt);
  const NodeId qx = emit_squaring(b, sx, m, opt);
  const NodeId qy = emit_squaring(b, sy, m, opt);
  const NodeId diff = b.add(kRelu, {{qxy, 1.0}, {qx, -1.0}, {qy, -1.0}});
  return emit_scale_pow2(b, diff, 2 * k + 1, opt);
}

ReluBuildParams multd_params(double eps, int k, int d) {
  check_eps(eps, "multd_params");
  if (d < 2) throw DomainError("multd_params: need d >= 2");
  if (k < 0) throw DomainError("multd_params: range exponent must be >= 0");
  ReluBuildParams p;
  p.epsilon = eps;
  p.k_range = k;
  if (k == 0) {
    p.delta = eps / (d - 1);
    p.ell_cap = 1;
  } else {
    p.delta = (std::ldexp(1.0, k) - 1.0) * std::ldexp(1.0, -k * (d - 1)) * eps;
    p.ell_cap = k * (d - 1) + 1;
  }
  p.m_terms = squaring_terms(p.delta * std::ldexp(1.0, -2 * p.ell_cap - 2) / 3.0);
  return p;
}

void check_multd_feasible(const ReluBuildParams& p, int d) {
  if (!(p.delta > 0.0 && p.delta < 1.0))
    throw DomainError("d-ary product: delta must lie in (0,1)");
  if (p.k_range > p.ell_cap)
    throw DomainError("d-ary product: inputs exceed the inner product range");
  // Intermediate chain values u_2..u_{d-1} must stay in [0, 2^ell].
  double geo = 0.0;
  for (int i = 0; i <= d - 3; ++i) geo += std::ldexp(1.0, i * p.k_range);
  const double u_max = geo * p.delta + std::ldexp(1.0, p.k_range * (d - 1));
  if (d >= 3 && u_max > std::ldexp(1.0, p.ell_cap))
    throw DomainError("d-ary product: (delta, ell) infeasible, chain values reach " +
                      std::to_string(u_max) + " > 2^" + std::to_string(p.ell_cap));
  double err = 0.0;
  for (int i = 0; i <= d - 2; ++i) err += std::ldexp(1.0, i * p.k_range);
  if (err * p.delta > p.epsilon * (1.0 + 1e-12))
    throw DomainError("d-ary product: accumulated error exceeds epsilon");
}

NodeId emit_multd_relu(NetBuilder& b, std::span<const NodeId> xs,
                       const ReluBuildParams& params, const ReluOptions& opt) {
  const int d = static_cast<int>(xs.size());
  check_multd_feasible(params, d);
  NodeId u = xs[d - 1];
  for (int j = d - 2; j >= 0; --j)
    u = emit_mult2_relu(b, xs[j], u, params.delta, params.ell_cap, opt);
  return u;
}

QuantNet build_phi_block(const ReluOptions& opt) {
  NetBuilder b(opt.alphabet(), 1);
  b.set_outputs({emit_phi(b, b.input(0), opt)});
  b.set_metadata("builder", "phi_block");
  return b.build();
}

QuantNet build_squaring_terms(int m_terms, const ReluOptions& opt) {
  NetBuilder b(opt.alphabet(), 1);
  b.set_outputs({emit_squaring(b, b.input(0), m_terms, opt)});
  b.set_metadata("builder", "squaring");
  b.set_metadata("m_terms", std::to_string(m_terms));
  return b.build();
}

QuantNet build_squaring(double eps, const ReluOptions& opt) {
  return build_squaring_terms(squaring_terms(eps), opt);
}

QuantNet build_mult2_relu(double eps, int k, const ReluOptions& opt) {
  NetBuilder b(opt.alphabet(), 2);
  b.set_outputs({emit_mult2_relu(b, b.input(0), b.input(1), eps, k, opt)});
  b.set_metadata("builder", "mult2_relu");
  return b.build();
}

QuantNet build_multd_relu(double eps, int k, int d, const ReluOptions& opt,
                          std::optional<ReluBuildParams> override_params) {
  const ReluBuildParams p = override_params ? *override_params : multd_params(eps, k, d);
  NetBuilder b(opt.alphabet(), d);
  std::vector<NodeId> xs(d);
  for (int j = 0; j < d; ++j) xs[j] = b.input(j);
  b.set_outputs({emit_multd_relu(b, xs, p, opt)});
  b.set_metadata("builder", "multd_relu");
  return b.build();
}

namespace {

// Appends the univariate approximate triangle for input x; returns
// b_{n,0..n}.
std::vector<NodeId> emit_bernstein_relu_1d(NetBuilder& b, NodeId x, int n,
                                           double eps, const ReluOptions& opt) {
  const NodeId one_minus = b.add(kRelu, {{x, -1.0}}, 1.0);  // b_{1,0} = 1-x
  std::vector<NodeId> row = {one_minus, b.add(kRelu, {{x, 1.0}})};
  if (n == 1) return row;
  check_eps(eps, "bernstein_relu");
  const double delta = eps / (2.0 * (n - 1));
  constexpr int ell = 1;  // every b_{m,k} stays below 1 + eps < 2
  for (int m = 1; m < n; ++m) {
    std::vector<NodeId> next(m + 2);
    next[0] = emit_mult2_relu(b, one_minus, row[0], delta, ell, opt);
    for (int k = 1; k <= m; ++k) {
      const NodeId left = emit_mult2_relu(b, x, row[k - 1], delta, ell, opt);
      const NodeId right = emit_mult2_relu(b, one_minus, row[k], delta, ell, opt);
      next[k] = b.add(kRelu, {{left, 1.0}, {right, 1.0}});
    }
    next[m + 1] = emit_mult2_relu(b, x, row[m], delta, ell, opt);
    row = std::move(next);
  }
  return row;
}

}  // namespace

QuantNet build_bernstein_relu_1d(int n, double eps, const ReluOptions& opt) {
  if (n < 1) throw DomainError("bernstein_relu_1d: n must be >= 1");
  NetBuilder b(opt.alphabet(), 1);
  b.set_outputs(emit_bernstein_relu_1d(b, b.input(0), n, eps, opt));
  b.set_metadata("builder", "bernstein_relu");
  b.set_metadata("n", std::to_string(n));
  b.set_metadata("d", "1");
  return b.build();
}

QuantNet build_bernstein_relu(int n, int d, double eps, const ReluOptions& opt,
                              long long output_cap) {
  if (n < 1 || d < 1) throw DomainError("bernstein_relu: need n >= 1, d >= 1");
  check_eps(eps, "bernstein_relu");
  if (d == 1) return build_bernstein_relu_1d(n, eps, opt);
  long long total = 1;
  for (int j = 0; j < d; ++j) {
    total *= n + 1;
    if (total > output_cap)
      throw ResourceLimit("(n+1)^d exceeds the output cap " + std::to_string(output_cap));
  }
  const double gamma = eps / (d * std::ldexp(1.0, d));
  const ReluBuildParams prod = multd_params(eps / 2.0, 1, d);

  NetBuilder b(opt.alphabet(), d);
  std::vector<std::vector<NodeId>> uni(d);
  for (int j = 0; j < d; ++j) uni[j] = emit_bernstein_relu_1d(b, b.input(j), n, gamma, opt);
  std::vector<NodeId> outs;
  outs.reserve(static_cast<std::size_t>(total));
  const std::vector<std::size_t> extents(d, static_cast<std::size_t>(n) + 1);
  std::vector<NodeId> operands(d);
  for_each_index(extents, [&](const std::vector<std::size_t>& k, std::size_t) {
    for (int j = 0; j < d; ++j) operands[j] = uni[j][k[j]];
    outs.push_back(emit_multd_relu(b, operands, prod, opt));
  });
  b.set_outputs(std::move(outs));
  b.set_metadata("builder", "bernstein_relu");
  b.set_metadata("n", std::to_string(n));
  b.set_metadata("d", std::to_string(d));
  return b.build();
}

QuantNet attach_sign_layer_relu(const QuantNet& net, const Tensor& sigma) {
  if (!net.alphabet().contains(1.0) || !net.alphabet().contains(-1.0))
    throw AlphabetViolation("network alphabet does not contain +-1");
  return attach_sign_layer(net, sigma);
}

}  // namespace bernquant
