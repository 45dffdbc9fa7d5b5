#include <cstring>
#include <random>

#include <zlib.h>

#include "doctest.h"
#include "json.hpp"

#include "bernquant/errors.h"
#include "bernquant/qnn.h"
#include "bernquant/quad_builder.h"
#include "bernquant/relu_builder.h"

using namespace bernquant;
using nlohmann::json;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// Hand-assembled container with inline weights and a valid checksum.
std::vector<std::uint8_t> container(const json& header) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out = {'Q', 'N', 'N', '1'};
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  put_u32(out, 0);
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + 4, static_cast<uInt>(out.size() - 4));
  put_u32(out, static_cast<std::uint32_t>(crc));
  return out;
}

json copy_header(double weight) {
  return {{"format_version", 1},
          {"alphabet", {-1.0, 1.0}},
          {"input_arity", 1},
          {"nodes", {{1, 0, 0.0}}},
          {"weights", "inline"},
          {"edges", {{0, 1, weight}}},
          {"outputs", {1}},
          {"metadata", json::object()}};
}

}  // namespace

TEST_CASE("single identity node copies its input") {
  NetBuilder b(Alphabet::one_bit(), 1);
  const NodeId o = b.add(Activation::kIdentity, {{b.input(0), 1.0}});
  b.set_outputs({o});
  const QuantNet net = b.build();
  for (double x : {-2.5, 0.0, 0.7}) CHECK(net.evaluate(std::vector<double>{x})[0] == x);
  CHECK(net.size() == SizeTriple{1, 1, 1});
}

TEST_CASE("activations") {
  CHECK(activate(Activation::kRelu, -1.0) == 0.0);
  CHECK(activate(Activation::kRelu, 2.0) == 2.0);
  CHECK(activate(Activation::kQuadratic, -3.0) == 4.5);
  CHECK(activate(Activation::kIdentity, -3.0) == -3.0);
}

TEST_CASE("quadratic product block") {
  const QuantNet p = build_mult2_quad();
  CHECK(p.size() == SizeTriple{2, 4, 7});
  CHECK(p.evaluate(std::vector<double>{2.0, 3.0})[0] == 6.0);
  CHECK(p.evaluate(std::vector<double>{-1.5, -2.0})[0] == 3.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double a = U(rng), c = U(rng);
    CHECK(p.evaluate(std::vector<double>{a, 0.0})[0] == doctest::Approx(0.0));
    CHECK(p.evaluate(std::vector<double>{a, c})[0] == doctest::Approx(a * c).epsilon(1e-13));
  }
}

TEST_CASE("tent block") {
  const QuantNet phi = build_phi_block();
  CHECK(phi.size() == SizeTriple{2, 4, 6});
  CHECK(phi.evaluate(std::vector<double>{0.25})[0] == doctest::Approx(0.5));
  CHECK(phi.evaluate(std::vector<double>{0.5})[0] == doctest::Approx(1.0));
  CHECK(phi.evaluate(std::vector<double>{0.75})[0] == doctest::Approx(0.5));
  CHECK(phi.evaluate(std::vector<double>{1.0})[0] == doctest::Approx(0.0));
}

TEST_CASE("sizes add under composition") {
  const QuantNet p = build_mult2_quad();
  NetBuilder b(Alphabet::one_bit(), 2);
  const NodeId s = b.add(Activation::kIdentity, {{b.input(0), 1.0}, {b.input(1), 1.0}});
  const NodeId t = b.add(Activation::kIdentity, {{b.input(0), 1.0}, {b.input(1), -1.0}});
  b.set_outputs({s, t});
  const QuantNet first = b.build();
  const QuantNet c = compose(first, p);
  CHECK(c.size() == first.size() + p.size());
  // (a+b)(a-b)
  CHECK(c.evaluate(std::vector<double>{3.0, 2.0})[0] == doctest::Approx(5.0));
  CHECK_THROWS_AS(compose(p, p), GraphError);
}

TEST_CASE("skip connections count once and need no carry nodes") {
  NetBuilder b(Alphabet::one_bit(), 1);
  const NodeId h1 = b.add(Activation::kQuadratic, {{b.input(0), 1.0}});
  const NodeId h2 = b.add(Activation::kQuadratic, {{h1, 1.0}});
  const NodeId o = b.add(Activation::kIdentity, {{h2, 1.0}, {b.input(0), -1.0}});
  b.set_outputs({o});
  const QuantNet net = b.build();
  CHECK(net.size() == SizeTriple{3, 3, 4});
  CHECK(net.nodes()[o].layer == 3);
  // x = 2: h1 = 2, h2 = 2, out = 0.
  CHECK(net.evaluate(std::vector<double>{2.0})[0] == 0.0);
}

TEST_CASE("d-ary quadratic chain sizes") {
  for (int d = 2; d <= 5; ++d) {
    QuadBuildTrace t;
    build_bernstein_quad(1, d, &t);
    CHECK(t.product_chain == SizeTriple{2 * d - 2, 4 * d - 4, 7 * d - 7});
  }
}

TEST_CASE("construction-time checks") {
  NetBuilder b(Alphabet::one_bit(), 1);
  CHECK_THROWS_AS(b.add(Activation::kIdentity, {{b.input(0), 0.5}}), AlphabetViolation);
  CHECK_THROWS_AS(b.add(Activation::kIdentity, {{b.input(0), 1.0}}, 2.0), AlphabetViolation);
  CHECK_THROWS_AS(b.add(Activation::kIdentity, {{7, 1.0}}), GraphError);
  CHECK_THROWS_AS(b.input(1), DomainError);
  // Zero weights are dropped, zero bias means "no bias".
  const NodeId o = b.add(Activation::kIdentity, {{b.input(0), 1.0}, {b.input(0), 0.0}}, 0.0);
  b.set_outputs({o});
  CHECK(b.build().edges().size() == 1);

  // Same-layer edge and dangling edge rejected by the validating constructor.
  std::vector<Node> nodes = {Node{}, Node{1, Activation::kIdentity, 0.0},
                             Node{1, Activation::kIdentity, 0.0}};
  CHECK_THROWS_AS(make_net(Alphabet::one_bit(), 1, nodes, {{0, 1, 1.0}, {1, 2, 1.0}}, {2}),
                  GraphError);
  CHECK_THROWS_AS(make_net(Alphabet::one_bit(), 1, nodes, {{0, 9, 1.0}}, {2}), GraphError);
  CHECK_THROWS_AS(make_net(Alphabet::one_bit(), 1, nodes, {{0, 1, 1.0}}, {0}), GraphError);
  CHECK_THROWS_AS(make_net(Alphabet::one_bit(), 1, nodes, {{0, 1, -0.5}}, {1}),
                  AlphabetViolation);
}

TEST_CASE("audit") {
  const QuantNet relu = build_squaring(1e-2);
  CHECK_NOTHROW(audit_alphabet(relu, Alphabet::three_bit()));
  CHECK_THROWS_AS(audit_alphabet(relu, Alphabet::one_bit()), AlphabetViolation);
  CHECK_NOTHROW(audit_alphabet(build_bernstein_quad(4, 2), Alphabet::one_bit()));
}

TEST_CASE("evaluation is deterministic and batch equals single") {
  const QuantNet net = build_bernstein_quad(6, 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> xs(2 * 64);
  for (auto& v : xs) v = U(rng);
  const auto batch = net.evaluate_batch(xs);
  const std::size_t outs = net.outputs().size();
  REQUIRE(batch.size() == 64 * outs);
  for (std::size_t i = 0; i < 64; ++i) {
    const auto one = net.evaluate(std::span<const double>(xs.data() + 2 * i, 2));
    for (std::size_t k = 0; k < outs; ++k) CHECK(one[k] == batch[i * outs + k]);
  }
  CHECK_THROWS_AS(net.evaluate(std::vector<double>{0.5}), DomainError);
}

TEST_CASE("serialization round trip") {
  std::vector<QuantNet> nets = {build_mult2_quad(),
                                build_phi_block(),
                                build_bernstein_quad(5, 2),
                                build_squaring(1e-3),
                                build_mult2_relu(1e-2, 1),
                                build_multd_relu(1e-2, 0, 3),
                                build_bernstein_relu(3, 2, 1e-1)};
  Tensor sigma = Tensor::cube(4, 1);
  for (std::size_t k = 0; k < 5; ++k) sigma[k] = k % 2 ? -1.0 : 1.0;
  nets.push_back(attach_sign_layer(build_bernstein_quad(4, 1), sigma));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const QuantNet& net : nets) {
    for (bool packed : {true, false}) {
      const auto bytes = serialize_net(net, packed);
      const QuantNet back = deserialize_net(bytes);
      CHECK(back == net);
      CHECK(serialize_net(back, packed) == bytes);
      for (int t = 0; t < 10; ++t) {
        std::vector<double> x(net.input_arity());
        for (auto& v : x) v = U(rng);
        const auto a = net.evaluate(x), b = back.evaluate(x);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);
      }
    }
  }
}

TEST_CASE("corrupted files are rejected") {
  const auto good = serialize_net(build_bernstein_quad(3, 1));
  auto bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_net(bad), FormatError);
  bad = good;
  bad[good.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(deserialize_net(bad), FormatError);
  bad.assign(good.begin(), good.begin() + good.size() - 3);
  CHECK_THROWS_AS(deserialize_net(bad), FormatError);
  CHECK_THROWS_AS(deserialize_net(std::vector<std::uint8_t>{}), FormatError);

  CHECK_NOTHROW(deserialize_net(container(copy_header(1.0))));
  auto v2 = copy_header(1.0);
  v2["format_version"] = 2;
  CHECK_THROWS_AS(deserialize_net(container(v2)), FormatError);
}

TEST_CASE("weight outside the alphabet is rejected on load") {
  CHECK_THROWS_AS(deserialize_net(container(copy_header(0.3))), AlphabetViolation);
  auto h = copy_header(1.0);
  h["nodes"] = {{1, 0, 0.5}};
  CHECK_THROWS_AS(deserialize_net(container(h)), AlphabetViolation);
}
