#include "bernquant/quad_builder.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bernquant/errors.h"

namespace bernquant {

namespace {

constexpr auto kQuad = Activation::kQuadratic;
constexpr auto kId = Activation::kIdentity;

long long checked_outputs(int n, int d, long long cap) {
  if (n < 1 || d < 1) throw DomainError("Bernstein network needs n >= 1, d >= 1");
  long long total = 1;
  for (int j = 0; j < d; ++j) {
    total *= n + 1;
    if (total > cap)
      throw ResourceLimit("(n+1)^d = " + std::to_string(n + 1) + "^" +
                          std::to_string(d) + " exceeds the output cap " +
                          std::to_string(cap));
  }
  return total;
}

// Size of what was appended between two snapshots; layers measured as the
// depth of `out` above the deepest operand.
SizeTriple block_size(const NetBuilder& b, const SizeTriple& before, NodeId out,
                      int operand_layer) {
  const SizeTriple now = b.size();
  return {b.layer(out) - operand_layer, now.neurons - before.neurons,
          now.params - before.params};
}

}  // namespace

NodeId emit_mult2_quad(NetBuilder& b, NodeId a1, NodeId a2) {
  const NodeId sum = b.add(kQuad, {{a1, 1.0}, {a2, 1.0}});
  const NodeId sq1 = b.add(kQuad, {{a1, 1.0}});
  const NodeId sq2 = b.add(kQuad, {{a2, 1.0}});
  return b.add(kId, {{sum, 1.0}, {sq1, -1.0}, {sq2, -1.0}});
}

QuantNet build_mult2_quad() {
  NetBuilder b(Alphabet::one_bit(), 2);
  b.set_outputs({emit_mult2_quad(b, b.input(0), b.input(1))});
  b.set_metadata("builder", "mult2_quad");
  return b.build();
}

QuantNet build_bernstein_quad(int n, int d, QuadBuildTrace* trace,
                              long long output_cap) {
  const long long outputs = checked_outputs(n, d, output_cap);
  NetBuilder b(Alphabet::one_bit(), d);
  QuadBuildTrace local;
  QuadBuildTrace& tr = trace ? *trace : local;
  tr = QuadBuildTrace{};

  // Univariate triangles, one per variable.
  std::vector<std::vector<NodeId>> uni(d);
  for (int v = 0; v < d; ++v) {
    const NodeId x = b.input(v);
    SizeTriple before = b.size();
    const NodeId one_minus = b.add(kId, {{x, -1.0}}, 1.0);
    if (v == 0) tr.one_minus_x = block_size(b, before, one_minus, 0);

    std::vector<NodeId> row = {one_minus, x};
    if (n == 1 && d == 1) row[1] = b.add(kId, {{x, 1.0}});
    for (int m = 1; m < n; ++m) {
      const SizeTriple row_before = b.size();
      int prev_layer = 0;
      for (NodeId id : row) prev_layer = std::max(prev_layer, b.layer(id));

      std::vector<NodeId> next(m + 2);
      QuadBuildTrace::Row info;
      info.m = m;

      SizeTriple s = b.size();
      next[0] = emit_mult2_quad(b, one_minus, row[0]);
      info.edge_block = block_size(b, s, next[0], b.layer(row[0]));

      for (int k = 1; k <= m; ++k) {
        s = b.size();
        const NodeId left = emit_mult2_quad(b, x, row[k - 1]);
        const NodeId right = emit_mult2_quad(b, one_minus, row[k]);
        next[k] = b.add(kId, {{left, 1.0}, {right, 1.0}});
        if (k == 1) {
          const int op_layer = std::max(b.layer(row[0]), b.layer(row[1]));
          info.interior_block = block_size(b, s, next[k], op_layer);
        }
      }
      next[m + 1] = emit_mult2_quad(b, x, row[m]);

      int new_layer = 0;
      for (NodeId id : next) new_layer = std::max(new_layer, b.layer(id));
      const SizeTriple after = b.size();
      info.total = {new_layer - prev_layer, after.neurons - row_before.neurons,
                    after.params - row_before.params};
      if (v == 0) tr.rows.push_back(info);
      row = std::move(next);
    }
    uni[v] = std::move(row);
  }
  tr.triangles = b.size();

  std::vector<NodeId> outs;
  if (d == 1) {
    outs = uni[0];
  } else {
    outs.reserve(static_cast<std::size_t>(outputs));
    const SizeTriple stage_before = b.size();
    const std::vector<std::size_t> extents(d, static_cast<std::size_t>(n) + 1);
    bool first = true;
    for_each_index(extents, [&](const std::vector<std::size_t>& k, std::size_t) {
      const SizeTriple s = b.size();
      // Left-to-right chain ((a1 a2) a3) ... ad.
      NodeId acc = uni[0][k[0]];
      for (int j = 1; j < d; ++j) acc = emit_mult2_quad(b, acc, uni[j][k[j]]);
      if (first) {
        // Depth measured from the first product's operands.
        const int l0 = std::max(b.layer(uni[0][k[0]]), b.layer(uni[1][k[1]]));
        tr.product_chain = block_size(b, s, acc, l0);
        first = false;
      }
      outs.push_back(acc);
    });
    const SizeTriple after = b.size();
    tr.product_stage = {after.layers - stage_before.layers,
                        after.neurons - stage_before.neurons,
                        after.params - stage_before.params};
  }
  b.set_outputs(std::move(outs));
  b.set_metadata("builder", "bernstein_quad");
  b.set_metadata("n", std::to_string(n));
  b.set_metadata("d", std::to_string(d));
  return b.build();
}

QuantNet attach_sign_layer(const QuantNet& net, const Tensor& sigma) {
  if (sigma.size() != net.outputs().size())
    throw DomainError("attach_sign_layer: " + std::to_string(sigma.size()) +
                      " signs for " + std::to_string(net.outputs().size()) +
                      " outputs");
  NetBuilder b(net.alphabet(), net.input_arity());
  std::vector<NodeId> inputs(net.input_arity());
  std::iota(inputs.begin(), inputs.end(), 0);
  const auto outs = b.embed(net, inputs);
  std::vector<Term> terms;
  terms.reserve(outs.size());
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const double s = sigma[i];
    if (s != 1.0 && s != -1.0)
      throw AlphabetViolation("sign layer entries must be +-1, got " +
                              std::to_string(s));
    terms.push_back({outs[i], s});
  }
  b.set_outputs({b.add(kId, terms)});
  for (const auto& [k, v] : net.metadata()) b.set_metadata(k, v);
  b.set_metadata("sign_layer", "1");
  return b.build();
}

}  // namespace bernquant
