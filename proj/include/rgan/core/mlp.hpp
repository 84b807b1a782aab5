#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rgan/core/graph.hpp"
#include "rgan/core/matrix.hpp"
#include "rgan/core/rng.hpp"

namespace rgan::core {

enum class OutputActivation { identity, leaky_relu, sigmoid };

struct Layer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
};

/// Fully connected network; hidden layers use leaky-relu, the last layer uses
/// `output`.
struct MlpParams {
  std::vector<Layer> layers;
  double slope = 0.01;
  OutputActivation output = OutputActivation::identity;

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  std::size_t parameter_count() const;
  /// Throws ShapeError when consecutive layers do not chain.
  void validate() const;
};

/// Glorot-uniform weights, zero biases. `sizes` lists every layer width
/// including input and output.
MlpParams init_mlp(std::span<const std::size_t> sizes, SeededRng& rng, double slope = 0.01,
                   OutputActivation output = OutputActivation::identity);

/// Same shapes as `like`, all zeros.
MlpParams zeros_like(const MlpParams& like);

/// Sum of all parameters weighted by position; cheap change detector for tests.
double checksum(const MlpParams& params);

/// Plain evaluation, no tape.
Matrix forward_mlp(const MlpParams& params, const Matrix& input);

/// Parameter nodes of an MLP recorded into a graph.
struct BoundMlp {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
  double slope = 0.01;
  OutputActivation output = OutputActivation::identity;
};

/// Records the parameters; `trainable` selects variable or constant leaves.
BoundMlp bind(Graph& graph, const MlpParams& params, bool trainable);

/// Records a forward pass through a bound MLP.
NodeId forward(Graph& graph, const BoundMlp& mlp, NodeId input);

/// Forward pass that also hands back the tape.
struct RecordedForward {
  Matrix output;
  std::optional<Graph> graph;
  BoundMlp bound;
  NodeId input = 0;
  NodeId output_node = 0;
};
RecordedForward forward_mlp(const MlpParams& params, const Matrix& input, bool record);

/// Gradient of a scalar loss node with respect to bound parameters, as values.
MlpParams grad_wrt_params(Graph& graph, NodeId loss, const BoundMlp& mlp, const MlpParams& shape);

/// Same, for several bound networks at once (one backward pass).
std::vector<MlpParams> grad_wrt_params(Graph& graph, NodeId loss,
                                       std::span<const BoundMlp* const> mlps,
                                       std::span<const MlpParams* const> shapes);

/// Per-row input gradient of a per-row score, recorded as a differentiable node.
NodeId grad_wrt_input_as_node(Graph& graph, NodeId output, NodeId input);

}  // namespace rgan::core
