#pragma once

#include <vector>

#include "bernquant/qnn.h"
#include "bernquant/tensor.h"

namespace bernquant {

// Default cap on the number of basis outputs (n+1)^d a builder will emit.
inline constexpr long long kDefaultOutputCap = 1LL << 20;

// a1 * a2 = rho(a1 + a2) - rho(a1) - rho(a2) with rho(t) = t^2/2. Appends
// three quadratic nodes and one identity node; returns the latter.
NodeId emit_mult2_quad(NetBuilder& b, NodeId a1, NodeId a2);

// Two-input {+-1} product block, size (2,4,7).
QuantNet build_mult2_quad();

// Measured sizes of the pieces of the Pascal construction.
struct QuadBuildTrace {
  struct Row {
    int m = 0;                  // the row computes degree m+1 from degree m
    SizeTriple total;           // whole row
    SizeTriple interior_block;  // one p_{m+1,k}, 1 <= k <= m (zero if m = 0)
    SizeTriple edge_block;      // p_{m+1,0}
  };
  std::vector<Row> rows;         // rows of the first variable's triangle
  SizeTriple one_minus_x;        // the shared 1-x node of one variable
  SizeTriple triangles;          // all d univariate triangles
  SizeTriple product_chain;      // one d-ary product (zero when d = 1)
  SizeTriple product_stage;      // all (n+1)^d chains
};

// {+-1}-quantized quadratic network with (n+1)^d outputs; output number
// flat(k) (row-major over k) equals p_{n,k}(x) up to roundoff.
QuantNet build_bernstein_quad(int n, int d, QuadBuildTrace* trace = nullptr,
                              long long output_cap = kDefaultOutputCap);

// Appends one identity node computing sum_k sigma_k * output_k. `sigma`
// must have one +-1 entry per output (row-major). Adds exactly
// (1, 1, outputs) to the size.
QuantNet attach_sign_layer(const QuantNet& net, const Tensor& sigma);

}  // namespace bernquant
