#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bernquant/qnn.h"
#include "bernquant/quad_builder.h"
#include "bernquant/tensor.h"

namespace bernquant {

// Parameters behind one approximate-product block.
struct ReluBuildParams {
  double epsilon = 0.0;  // accuracy of the block
  int k_range = 0;       // inputs lie in [0, 2^k_range]
  int m_terms = 0;       // tent compositions kept by each squaring
  int ell_cap = 0;       // range exponent of the inner binary products (d-ary)
  double delta = 0.0;    // accuracy of each sub-block
};

struct ReluOptions {
  // Replace every weight 2 by two unit connections so the whole network
  // lives in {+-1/2, +-1}. Off by default.
  bool two_bit = false;

  Alphabet alphabet() const {
    return two_bit ? Alphabet::two_bit() : Alphabet::three_bit();
  }
};

// ceil(log2(1/eps) / 2), at least 1: tail of the tent series is <= 4^-m.
int squaring_terms(double eps);

// Node-level emitters; all return the output node.
NodeId emit_phi(NetBuilder& b, NodeId x, const ReluOptions& opt = {});
NodeId emit_squaring(NetBuilder& b, NodeId t, int m_terms,
                     const ReluOptions& opt = {});
// relu(2^e * x) for e > 0, relu(x / 2^|e|) for e < 0, as an |e|-node chain.
NodeId emit_scale_pow2(NetBuilder& b, NodeId x, int e, const ReluOptions& opt = {});
NodeId emit_mult2_relu(NetBuilder& b, NodeId x, NodeId y, double eps, int k,
                       const ReluOptions& opt = {});
// u_d = x_d, u_j = P_{delta,ell}(x_j, u_{j+1}); returns u_1.
NodeId emit_multd_relu(NetBuilder& b, std::span<const NodeId> xs,
                       const ReluBuildParams& params, const ReluOptions& opt = {});

// Tent function on [0,1], size (2,4,6).
QuantNet build_phi_block(const ReluOptions& opt = {});
// S with |S(x) - x^2| <= eps on [0,1].
QuantNet build_squaring(double eps, const ReluOptions& opt = {});
QuantNet build_squaring_terms(int m_terms, const ReluOptions& opt = {});
// P with |P(x,y) - xy| <= eps on [0,2^k]^2.
QuantNet build_mult2_relu(double eps, int k, const ReluOptions& opt = {});

// Parameters for the d-ary chain with accuracy eps on [0,2^k]^d. Returns
// delta = (2^k-1) 2^{-k(d-1)} eps and ell = k(d-1)+1 for k >= 1, and
// delta = eps/(d-1), ell = 1 for k = 0.
ReluBuildParams multd_params(double eps, int k, int d);
// Throws DomainError if the inner products could see inputs above 2^ell or
// the accumulated error could exceed eps.
void check_multd_feasible(const ReluBuildParams& params, int d);
QuantNet build_multd_relu(double eps, int k, int d, const ReluOptions& opt = {},
                          std::optional<ReluBuildParams> override_params = {});

// Approximate univariate basis b_{n,0..n} with ||b_{n,k} - p_{n,k}|| <= eps.
QuantNet build_bernstein_relu_1d(int n, double eps, const ReluOptions& opt = {});
// Multivariate version: d univariate nets at accuracy eps/(d 2^d) feeding
// one d-ary product at accuracy eps/2 per output.
QuantNet build_bernstein_relu(int n, int d, double eps, const ReluOptions& opt = {},
                              long long output_cap = kDefaultOutputCap);

// Same contract as attach_sign_layer for ReLU networks.
QuantNet attach_sign_layer_relu(const QuantNet& net, const Tensor& sigma);

}  // namespace bernquant
