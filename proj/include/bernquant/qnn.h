#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bernquant/sigma_delta.h"

namespace bernquant {

enum class Activation : std::uint8_t {
  kIdentity = 0,
  kRelu = 1,
  kQuadratic = 2,  // t -> t^2 / 2
};

const char* activation_name(Activation a);
double activate(Activation a, double t);

using NodeId = std::int32_t;

// Nodes [0, input_arity) are the input slots: layer 0, never counted in the
// size. Every other node sits one layer above its deepest source.
struct Node {
  int layer = 0;
  Activation activation = Activation::kIdentity;
  double bias = 0.0;  // 0 means "no bias", even if 0 is not a level

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// (L, N, P): layers, neurons (non-input nodes) and parameters. Parameters
// are the nonzero connections between nodes, skips included; biases are
// not counted. Sizes add under sequential composition.
struct SizeTriple {
  long long layers = 0;
  long long neurons = 0;
  long long params = 0;

  SizeTriple& operator+=(const SizeTriple& o) {
    layers += o.layers;
    neurons += o.neurons;
    params += o.params;
    return *this;
  }
  friend SizeTriple operator+(SizeTriple a, const SizeTriple& b) { return a += b; }
  friend SizeTriple operator-(const SizeTriple& a, const SizeTriple& b) {
    return {a.layers - b.layers, a.neurons - b.neurons, a.params - b.params};
  }
  friend bool operator==(const SizeTriple&, const SizeTriple&) = default;
};

std::string to_string(const SizeTriple& s);

// Immutable alphabet-constrained feed-forward graph. Build one with
// NetBuilder or deserialize_net.
class QuantNet {
 public:
  const Alphabet& alphabet() const { return alphabet_; }
  int input_arity() const { return input_arity_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& outputs() const { return outputs_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  std::vector<double> evaluate(std::span<const double> x) const;
  // Evaluates many inputs (row-major, input_arity values each) in parallel.
  std::vector<double> evaluate_batch(std::span<const double> xs) const;

  SizeTriple size() const;

  // Structural equality; evaluation caches are ignored.
  friend bool operator==(const QuantNet& a, const QuantNet& b) {
    return a.alphabet_ == b.alphabet_ && a.input_arity_ == b.input_arity_ &&
           a.nodes_ == b.nodes_ && a.edges_ == b.edges_ &&
           a.outputs_ == b.outputs_ && a.metadata_ == b.metadata_;
  }

 private:
  friend class NetBuilder;
  friend QuantNet make_net(Alphabet, int, std::vector<Node>, std::vector<Edge>,
                           std::vector<NodeId>, std::map<std::string, std::string>);

  QuantNet(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}
  // Checks every invariant and builds the evaluation schedule.
  void finalize();

  Alphabet alphabet_;
  int input_arity_ = 0;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<NodeId> outputs_;
  std::map<std::string, std::string> metadata_;

  // Evaluation schedule: nodes by (layer, id), incoming edges by (src, edge
  // index) in CSR form.
  std::vector<NodeId> order_;
  std::vector<std::size_t> in_offsets_;
  std::vector<std::size_t> in_edges_;
};

// Validating constructor used by deserialization.
QuantNet make_net(Alphabet alphabet, int input_arity, std::vector<Node> nodes,
                  std::vector<Edge> edges, std::vector<NodeId> outputs,
                  std::map<std::string, std::string> metadata = {});

struct Term {
  NodeId src;
  double weight;
};

class NetBuilder {
 public:
  NetBuilder(Alphabet alphabet, int input_arity);

  NodeId input(int i) const;
  int input_arity() const { return input_arity_; }
  const Alphabet& alphabet() const { return alphabet_; }

  // Adds activation(sum weight * src + bias). Zero weights are dropped.
  // Weights and nonzero biases must be alphabet levels.
  NodeId add(Activation activation, std::span<const Term> terms,
             double bias = 0.0);
  NodeId add(Activation activation, std::initializer_list<Term> terms,
             double bias = 0.0) {
    return add(activation, std::span<const Term>(terms.begin(), terms.size()),
               bias);
  }

  // Copies `sub` into this graph, wiring its inputs to `operands`; returns
  // the ids of its outputs.
  std::vector<NodeId> embed(const QuantNet& sub, std::span<const NodeId> operands);

  int layer(NodeId id) const { return nodes_.at(id).layer; }
  std::size_t node_count() const { return nodes_.size(); }
  // Size of everything built so far.
  SizeTriple size() const;

  void set_outputs(std::vector<NodeId> outputs) { outputs_ = std::move(outputs); }
  void set_metadata(const std::string& key, const std::string& value) {
    metadata_[key] = value;
  }

  QuantNet build() const;

 private:
  Alphabet alphabet_;
  int input_arity_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<NodeId> outputs_;
  std::map<std::string, std::string> metadata_;
  long long neurons_ = 0;
  int max_layer_ = 0;
};

// Feeds the outputs of `first` into the inputs of `second`. The result uses
// first's alphabet and its size is size(first) + size(second).
QuantNet compose(const QuantNet& first, const QuantNet& second);

// Throws AlphabetViolation naming the first weight or bias outside the
// alphabet.
void audit_alphabet(const QuantNet& net, const Alphabet& alphabet);

// `.qnn` container: "QNN1", u32 header length, JSON header, u32 packed
// length, packed weight codes, u32 CRC-32 of everything after the magic.
// With `packed`, edge weights are stored as ceil(log2 |alphabet|)-bit codes.
std::vector<std::uint8_t> serialize_net(const QuantNet& net, bool packed = true);
QuantNet deserialize_net(std::span<const std::uint8_t> bytes);

void save_net(const QuantNet& net, const std::string& path, bool packed = true);
QuantNet load_net(const std::string& path);

}  // namespace bernquant
