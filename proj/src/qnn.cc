#include "bernquant/qnn.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "bernquant/errors.h"
#include "bernquant/parallel.h"
#include "json.hpp"

namespace bernquant {

using nlohmann::json;

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kQuadratic: return "quadratic";
  }
  return "?";
}

double activate(Activation a, double t) {
  switch (a) {
    case Activation::kIdentity: return t;
    case Activation::kRelu: return t > 0.0 ? t : 0.0;
    case Activation::kQuadratic: return 0.5 * t * t;
  }
  return t;
}

std::string to_string(const SizeTriple& s) {
  std::ostringstream out;
  out << "(" << s.layers << "," << s.neurons << "," << s.params << ")";
  return out.str();
}

namespace {

void check_level(const Alphabet& alphabet, double v, const char* what,
                 NodeId node) {
  if (!alphabet.contains(v)) {
    std::ostringstream msg;
    msg << what << " " << v << " at node " << node
        << " is not in the network alphabet";
    throw AlphabetViolation(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// QuantNet

void QuantNet::finalize() {
  const auto count = static_cast<NodeId>(nodes_.size());
  if (input_arity_ < 0 || input_arity_ > count)
    throw GraphError("input arity exceeds node count");
  for (NodeId i = 0; i < count; ++i) {
    const Node& nd = nodes_[i];
    if (i < input_arity_) {
      if (nd.layer != 0 || nd.activation != Activation::kIdentity || nd.bias != 0.0)
        throw GraphError("input slot " + std::to_string(i) + " is malformed");
      continue;
    }
    if (nd.layer < 1)
      throw GraphError("node " + std::to_string(i) + " has layer < 1");
    if (nd.bias != 0.0) check_level(alphabet_, nd.bias, "bias", i);
  }
  for (const Edge& e : edges_) {
    if (e.src < 0 || e.src >= count || e.dst < 0 || e.dst >= count)
      throw GraphError("dangling edge " + std::to_string(e.src) + " -> " +
                       std::to_string(e.dst));
    if (e.dst < input_arity_)
      throw GraphError("edge into input slot " + std::to_string(e.dst));
    if (nodes_[e.src].layer >= nodes_[e.dst].layer)
      throw GraphError("edge " + std::to_string(e.src) + " -> " +
                       std::to_string(e.dst) +
                       " does not go to a strictly later layer");
    check_level(alphabet_, e.weight, "weight", e.dst);
  }
  for (NodeId o : outputs_)
    if (o < input_arity_ || o >= count)
      throw GraphError("output id " + std::to_string(o) + " is not a neuron");

  order_.resize(nodes_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](NodeId a, NodeId b) {
    return nodes_[a].layer < nodes_[b].layer;
  });

  in_offsets_.assign(nodes_.size() + 1, 0);
  for (const Edge& e : edges_) ++in_offsets_[e.dst + 1];
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  in_edges_.assign(edges_.size(), 0);
  auto fill = in_offsets_;
  for (std::size_t i = 0; i < edges_.size(); ++i)
    in_edges_[fill[edges_[i].dst]++] = i;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    std::stable_sort(in_edges_.begin() + in_offsets_[v],
                     in_edges_.begin() + in_offsets_[v + 1],
                     [&](std::size_t a, std::size_t b) {
                       return edges_[a].src < edges_[b].src;
                     });
  }
}

std::vector<double> QuantNet::evaluate(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(input_arity_))
    throw DomainError("network expects " + std::to_string(input_arity_) +
                      " inputs, got " + std::to_string(x.size()));
  std::vector<double> value(nodes_.size(), 0.0);
  for (NodeId v : order_) {
    if (v < input_arity_) {
      value[v] = x[v];
      continue;
    }
    double acc = 0.0;
    for (std::size_t i = in_offsets_[v]; i < in_offsets_[v + 1]; ++i) {
      const Edge& e = edges_[in_edges_[i]];
      acc += e.weight * value[e.src];
    }
    acc += nodes_[v].bias;
    value[v] = activate(nodes_[v].activation, acc);
  }
  std::vector<double> out(outputs_.size());
  for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = value[outputs_[i]];
  return out;
}

std::vector<double> QuantNet::evaluate_batch(std::span<const double> xs) const {
  const std::size_t arity = static_cast<std::size_t>(input_arity_);
  if (arity == 0 || xs.size() % arity != 0)
    throw DomainError("evaluate_batch: input length is not a multiple of arity");
  const std::size_t count = xs.size() / arity;
  const std::size_t outs = outputs_.size();
  std::vector<double> result(count * outs);
  parallel_for(count, [&](std::size_t i) {
    auto y = evaluate(xs.subspan(i * arity, arity));
    std::copy(y.begin(), y.end(), result.begin() + i * outs);
  });
  return result;
}

SizeTriple QuantNet::size() const {
  SizeTriple s;
  for (std::size_t i = input_arity_; i < nodes_.size(); ++i)
    s.layers = std::max<long long>(s.layers, nodes_[i].layer);
  s.neurons = static_cast<long long>(nodes_.size()) - input_arity_;
  s.params = static_cast<long long>(edges_.size());
  return s;
}

QuantNet make_net(Alphabet alphabet, int input_arity, std::vector<Node> nodes,
                  std::vector<Edge> edges, std::vector<NodeId> outputs,
                  std::map<std::string, std::string> metadata) {
  QuantNet net(std::move(alphabet));
  net.input_arity_ = input_arity;
  net.nodes_ = std::move(nodes);
  net.edges_ = std::move(edges);
  net.outputs_ = std::move(outputs);
  net.metadata_ = std::move(metadata);
  net.finalize();
  return net;
}

// ---------------------------------------------------------------------------
// NetBuilder

NetBuilder::NetBuilder(Alphabet alphabet, int input_arity)
    : alphabet_(std::move(alphabet)), input_arity_(input_arity) {
  if (input_arity < 0) throw DomainError("negative input arity");
  nodes_.assign(input_arity, Node{});
}

NodeId NetBuilder::input(int i) const {
  if (i < 0 || i >= input_arity_) throw DomainError("input slot out of range");
  return i;
}

NodeId NetBuilder::add(Activation activation, std::span<const Term> terms,
                       double bias) {
  const auto id = static_cast<NodeId>(nodes_.size());
  int layer = 0;
  for (const Term& t : terms) {
    if (t.src < 0 || t.src >= id) throw GraphError("edge from unknown node");
    layer = std::max(layer, nodes_[t.src].layer);
  }
  if (bias != 0.0) check_level(alphabet_, bias, "bias", id);
  for (const Term& t : terms) {
    if (t.weight == 0.0) continue;
    check_level(alphabet_, t.weight, "weight", id);
    edges_.push_back({t.src, id, t.weight});
  }
  nodes_.push_back({layer + 1, activation, bias});
  ++neurons_;
  max_layer_ = std::max(max_layer_, layer + 1);
  return id;
}

std::vector<NodeId> NetBuilder::embed(const QuantNet& sub,
                                      std::span<const NodeId> operands) {
  if (operands.size() != static_cast<std::size_t>(sub.input_arity()))
    throw GraphError("embed: operand count does not match sub-network arity");
  std::vector<NodeId> map(sub.nodes().size());
  for (int i = 0; i < sub.input_arity(); ++i) map[i] = operands[i];
  // Group sub-network edges by destination; ids of a valid net are already
  // in a topological order when sorted by layer.
  std::vector<std::vector<Term>> incoming(sub.nodes().size());
  for (const Edge& e : sub.edges()) incoming[e.dst].push_back({e.src, e.weight});
  std::vector<NodeId> order(sub.nodes().size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return sub.nodes()[a].layer < sub.nodes()[b].layer;
  });
  for (NodeId v : order) {
    if (v < sub.input_arity()) continue;
    std::vector<Term> terms;
    for (const Term& t : incoming[v]) terms.push_back({map[t.src], t.weight});
    map[v] = add(sub.nodes()[v].activation, terms, sub.nodes()[v].bias);
  }
  std::vector<NodeId> outs;
  for (NodeId o : sub.outputs()) outs.push_back(map[o]);
  return outs;
}

SizeTriple NetBuilder::size() const {
  return {max_layer_, neurons_, static_cast<long long>(edges_.size())};
}

QuantNet NetBuilder::build() const {
  return make_net(alphabet_, input_arity_, nodes_, edges_, outputs_, metadata_);
}

QuantNet compose(const QuantNet& first, const QuantNet& second) {
  if (first.outputs().size() != static_cast<std::size_t>(second.input_arity()))
    throw GraphError("compose: output/input arity mismatch");
  NetBuilder b(first.alphabet(), first.input_arity());
  std::vector<NodeId> inputs(first.input_arity());
  std::iota(inputs.begin(), inputs.end(), 0);
  auto mid = b.embed(first, inputs);
  auto outs = b.embed(second, mid);
  b.set_outputs(outs);
  for (const auto& [k, v] : first.metadata()) b.set_metadata(k, v);
  return b.build();
}

void audit_alphabet(const QuantNet& net, const Alphabet& alphabet) {
  for (const Edge& e : net.edges()) check_level(alphabet, e.weight, "weight", e.dst);
  for (std::size_t i = net.input_arity(); i < net.nodes().size(); ++i)
    if (net.nodes()[i].bias != 0.0)
      check_level(alphabet, net.nodes()[i].bias, "bias", static_cast<NodeId>(i));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'Q', 'N', 'N', '1'};
constexpr int kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw FormatError("truncated .qnn data");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t len = std::min<std::size_t>(data.size() - pos, 1u << 30);
    crc = crc32(crc, data.data() + pos, static_cast<uInt>(len));
    pos += len;
  }
  return static_cast<std::uint32_t>(crc);
}

unsigned code_bits(std::size_t levels) {
  return std::max(1u, static_cast<unsigned>(std::bit_width(levels - 1)));
}

Activation activation_from_code(int c) {
  if (c < 0 || c > 2) throw FormatError("unknown activation code " + std::to_string(c));
  return static_cast<Activation>(c);
}

}  // namespace

std::vector<std::uint8_t> serialize_net(const QuantNet& net, bool packed) {
  json header;
  header["format_version"] = kFormatVersion;
  header["alphabet"] = net.alphabet().levels();
  header["input_arity"] = net.input_arity();
  json nodes = json::array();
  for (std::size_t i = net.input_arity(); i < net.nodes().size(); ++i) {
    const Node& nd = net.nodes()[i];
    nodes.push_back({nd.layer, static_cast<int>(nd.activation), nd.bias});
  }
  header["nodes"] = std::move(nodes);
  json edges = json::array();
  std::vector<std::uint8_t> payload;
  if (packed) {
    const unsigned bits = code_bits(net.alphabet().size());
    payload.assign((net.edges().size() * bits + 7) / 8, 0);
    std::size_t bitpos = 0;
    for (const Edge& e : net.edges()) {
      edges.push_back({e.src, e.dst});
      const auto code = net.alphabet().code_of(e.weight);
      for (unsigned b = 0; b < bits; ++b, ++bitpos)
        if ((code >> b) & 1u) payload[bitpos / 8] |= static_cast<std::uint8_t>(1u << (bitpos % 8));
    }
    header["weights"] = "packed";
    header["packed_bits"] = bits;
    header["packed_crc32"] = crc32_of(payload);
  } else {
    for (const Edge& e : net.edges()) edges.push_back({e.src, e.dst, e.weight});
    header["weights"] = "inline";
  }
  header["edges"] = std::move(edges);
  header["outputs"] = net.outputs();
  header["metadata"] = net.metadata();

  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc = crc32_of(std::span(out).subspan(4));
  put_u32(out, crc);
  return out;
}

QuantNet deserialize_net(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw FormatError("not a .qnn file (bad magic)");
  const std::size_t body_end = bytes.size() - 4;
  std::size_t pos = body_end;
  const std::uint32_t stored_crc = get_u32(bytes, pos);
  if (crc32_of(bytes.subspan(4, body_end - 4)) != stored_crc)
    throw FormatError(".qnn checksum mismatch");

  pos = 4;
  const std::uint32_t header_len = get_u32(bytes, pos);
  if (pos + header_len > body_end) throw FormatError("truncated .qnn header");
  const std::string text(bytes.begin() + pos, bytes.begin() + pos + header_len);
  pos += header_len;
  const std::uint32_t payload_len = get_u32(bytes, pos);
  if (pos + payload_len != body_end) throw FormatError("bad .qnn payload length");
  const auto payload = bytes.subspan(pos, payload_len);

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad .qnn header: ") + e.what());
  }
  try {
    if (header.at("format_version").get<int>() != kFormatVersion)
      throw FormatError("unsupported .qnn format version " +
                        header.at("format_version").dump());
    Alphabet alphabet(header.at("alphabet").get<std::vector<double>>());
    const int arity = header.at("input_arity").get<int>();
    if (arity < 0) throw FormatError("negative input arity");
    std::vector<Node> nodes(arity);
    for (const auto& jn : header.at("nodes"))
      nodes.push_back({jn.at(0).get<int>(), activation_from_code(jn.at(1).get<int>()),
                       jn.at(2).get<double>()});
    std::vector<Edge> edges;
    const std::string mode = header.at("weights").get<std::string>();
    const auto& jedges = header.at("edges");
    if (mode == "packed") {
      const unsigned bits = header.at("packed_bits").get<unsigned>();
      if (bits != code_bits(alphabet.size()))
        throw FormatError("packed code width does not match alphabet");
      if (header.at("packed_crc32").get<std::uint32_t>() != crc32_of(payload))
        throw FormatError("packed weight section checksum mismatch");
      if (payload.size() != (jedges.size() * bits + 7) / 8)
        throw FormatError("packed weight section has wrong length");
      std::size_t bitpos = 0;
      for (const auto& je : jedges) {
        std::size_t code = 0;
        for (unsigned b = 0; b < bits; ++b, ++bitpos)
          if ((payload[bitpos / 8] >> (bitpos % 8)) & 1u) code |= std::size_t{1} << b;
        if (code >= alphabet.size())
          throw AlphabetViolation("packed weight code " + std::to_string(code) +
                                  " outside the alphabet");
        edges.push_back({je.at(0).get<NodeId>(), je.at(1).get<NodeId>(),
                         alphabet.levels()[code]});
      }
    } else if (mode == "inline") {
      if (!payload.empty()) throw FormatError("unexpected packed section");
      for (const auto& je : jedges)
        edges.push_back({je.at(0).get<NodeId>(), je.at(1).get<NodeId>(),
                         je.at(2).get<double>()});
    } else {
      throw FormatError("unknown weight storage mode '" + mode + "'");
    }
    return make_net(std::move(alphabet), arity, std::move(nodes), std::move(edges),
                    header.at("outputs").get<std::vector<NodeId>>(),
                    header.at("metadata").get<std::map<std::string, std::string>>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed .qnn header: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid .qnn alphabet: ") + e.what());
  }
}

void save_net(const QuantNet& net, const std::string& path, bool packed) {
  const auto bytes = serialize_net(net, packed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path);
}

QuantNet load_net(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open network file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_net(bytes);
}

}  // namespace bernquant
