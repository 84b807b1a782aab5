#include "rgan/core/mlp.hpp"

#include <cmath>
#include <string>

#include "rgan/core/error.hpp"

namespace rgan::core {

std::size_t MlpParams::in_dim() const { return layers.empty() ? 0 : layers.front().weight.rows(); }

std::size_t MlpParams::out_dim() const { return layers.empty() ? 0 : layers.back().weight.cols(); }

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void MlpParams::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols())
      throw ShapeError("layer " + std::to_string(i) + ": bias does not match weight columns");
    if (i > 0 && layers[i - 1].weight.cols() != l.weight.rows())
      throw ShapeError("layer " + std::to_string(i) + ": input width " +
                       std::to_string(l.weight.rows()) + " does not chain with previous output " +
                       std::to_string(layers[i - 1].weight.cols()));
  }
}

MlpParams init_mlp(std::span<const std::size_t> sizes, SeededRng& rng, double slope,
                   OutputActivation output) {
  if (sizes.size() < 2) throw ContractError("an MLP needs at least input and output widths");
  MlpParams p;
  p.slope = slope;
  p.output = output;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes[i] + sizes[i + 1]));
    Layer l{Matrix(sizes[i], sizes[i + 1]), Matrix(1, sizes[i + 1])};
    for (double& w : l.weight.values()) w = (2.0 * rng.uniform() - 1.0) * limit;
    p.layers.push_back(std::move(l));
  }
  return p;
}

MlpParams zeros_like(const MlpParams& like) {
  MlpParams z = like;
  for (auto& l : z.layers) {
    l.weight = Matrix(l.weight.rows(), l.weight.cols());
    l.bias = Matrix(l.bias.rows(), l.bias.cols());
  }
  return z;
}

double checksum(const MlpParams& params) {
  double s = 0.0;
  double k = 1.0;
  for (const auto& l : params.layers) {
    for (double v : l.weight.values()) s += v * (k += 1.0);
    for (double v : l.bias.values()) s += v * (k += 1.0);
  }
  return s;
}

namespace {

void check_input(const MlpParams& params, std::size_t cols) {
  params.validate();
  if (params.layers.empty()) throw ShapeError("MLP has no layers");
  if (params.in_dim() != cols)
    throw ShapeError("layer 0: input has " + std::to_string(cols) + " columns, expected " +
                     std::to_string(params.in_dim()));
}

}  // namespace

Matrix forward_mlp(const MlpParams& params, const Matrix& input) {
  check_input(params, input.cols());
  Matrix h = input;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    h = add_row_vector(matmul(h, params.layers[i].weight), params.layers[i].bias);
    const bool last = i + 1 == params.layers.size();
    if (!last || params.output == OutputActivation::leaky_relu)
      h = leaky_relu(h, params.slope);
    else if (params.output == OutputActivation::sigmoid)
      h = sigmoid(h);
  }
  return h;
}

BoundMlp bind(Graph& graph, const MlpParams& params, bool trainable) {
  params.validate();
  BoundMlp b;
  b.slope = params.slope;
  b.output = params.output;
  for (const auto& l : params.layers) {
    b.weights.push_back(trainable ? graph.variable(l.weight) : graph.constant(l.weight));
    b.biases.push_back(trainable ? graph.variable(l.bias) : graph.constant(l.bias));
  }
  return b;
}

NodeId forward(Graph& graph, const BoundMlp& mlp, NodeId input) {
  if (mlp.weights.empty()) throw ShapeError("MLP has no layers");
  const auto& w0 = graph.value(mlp.weights.front());
  if (graph.value(input).cols() != w0.rows())
    throw ShapeError("layer 0: input has " + std::to_string(graph.value(input).cols()) +
                     " columns, expected " + std::to_string(w0.rows()));
  NodeId h = input;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    h = graph.add_bias(graph.matmul(h, mlp.weights[i]), mlp.biases[i]);
    const bool last = i + 1 == mlp.weights.size();
    if (!last || mlp.output == OutputActivation::leaky_relu)
      h = graph.leaky_relu(h, mlp.slope);
    else if (mlp.output == OutputActivation::sigmoid)
      h = graph.sigmoid(h);
  }
  return h;
}

RecordedForward forward_mlp(const MlpParams& params, const Matrix& input, bool record) {
  RecordedForward r;
  if (!record) {
    r.output = forward_mlp(params, input);
    return r;
  }
  check_input(params, input.cols());
  Graph g;
  r.input = g.constant(input);
  r.bound = bind(g, params, true);
  r.output_node = forward(g, r.bound, r.input);
  r.output = g.value(r.output_node);
  r.graph = std::move(g);
  return r;
}

std::vector<MlpParams> grad_wrt_params(Graph& graph, NodeId loss,
                                       std::span<const BoundMlp* const> mlps,
                                       std::span<const MlpParams* const> shapes) {
  const Matrix& lv = graph.value(loss);
  if (lv.rows() != 1 || lv.cols() != 1)
    throw ContractError("loss node must be scalar, got " + std::to_string(lv.rows()) + "x" +
                        std::to_string(lv.cols()));
  if (mlps.size() != shapes.size()) throw ContractError("bound/shape list length mismatch");
  std::vector<NodeId> wrt;
  for (const BoundMlp* m : mlps) {
    for (std::size_t i = 0; i < m->weights.size(); ++i) {
      wrt.push_back(m->weights[i]);
      wrt.push_back(m->biases[i]);
    }
  }
  const auto grads = graph.gradients(loss, wrt);
  std::vector<MlpParams> out;
  std::size_t k = 0;
  for (std::size_t j = 0; j < mlps.size(); ++j) {
    MlpParams g = *shapes[j];
    for (auto& l : g.layers) {
      l.weight = graph.value(grads[k++]);
      l.bias = graph.value(grads[k++]);
    }
    out.push_back(std::move(g));
  }
  return out;
}

MlpParams grad_wrt_params(Graph& graph, NodeId loss, const BoundMlp& mlp, const MlpParams& shape) {
  const BoundMlp* m[] = {&mlp};
  const MlpParams* s[] = {&shape};
  return std::move(grad_wrt_params(graph, loss, m, s).front());
}

NodeId grad_wrt_input_as_node(Graph& graph, NodeId output, NodeId input) {
  const Matrix& out = graph.value(output);
  if (out.cols() != 1 || out.rows() != graph.value(input).rows())
    throw ContractError("input gradient needs one scalar output per batch row");
  const auto missing = graph.ops_without_second_order(input, output);
  if (!missing.empty()) {
    std::string names;
    for (Op op : missing) names += (names.empty() ? "" : ", ") + std::string(op_name(op));
    throw CapabilityError("no second-order rule for primitive(s): " + names);
  }
  const NodeId wrt[] = {input};
  return graph.gradients(output, wrt).front();
}

}  // namespace rgan::core
