#include "rgan/core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rgan/core/error.hpp"

namespace rgan::core {

namespace {

Matrix map(const Matrix& x, auto&& f) {
  Matrix out = x;
  for (double& v : out.values()) v = f(v);
  return out;
}

Matrix zip(const Matrix& a, const Matrix& b, const char* what, auto&& f) {
  if (!same_shape(a, b))
    throw ShapeError(std::string(what) + ": operand shapes " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + " differ");
  Matrix out = a;
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(ov[i], bv[i]);
  return out;
}

double total(const Matrix& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return s;
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::constant: return "constant";
    case Op::variable: return "variable";
    case Op::matmul: return "matmul";
    case Op::transpose: return "transpose";
    case Op::add_bias: return "add_bias";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::scale: return "scale";
    case Op::add_scalar: return "add_scalar";
    case Op::square: return "square";
    case Op::leaky_relu: return "leaky_relu";
    case Op::leaky_relu_grad: return "leaky_relu_grad";
    case Op::sigmoid: return "sigmoid";
    case Op::sigmoid_grad: return "sigmoid_grad";
    case Op::mean: return "mean";
    case Op::sum: return "sum";
    case Op::broadcast_scalar: return "broadcast_scalar";
    case Op::sum_rows: return "sum_rows";
    case Op::broadcast_rows: return "broadcast_rows";
    case Op::sum_cols: return "sum_cols";
    case Op::broadcast_cols: return "broadcast_cols";
    case Op::row_norm: return "row_norm";
    case Op::safe_inverse: return "safe_inverse";
    case Op::concat_cols: return "concat_cols";
    case Op::slice_cols: return "slice_cols";
    case Op::pad_cols: return "pad_cols";
  }
  return "unknown";
}

bool has_second_order_rule(Op op) {
  return op != Op::sigmoid && op != Op::sigmoid_grad;
}

int Graph::arity(Op op) const {
  switch (op) {
    case Op::constant:
    case Op::variable: return 0;
    case Op::matmul:
    case Op::add_bias:
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::leaky_relu_grad:
    case Op::sigmoid_grad:
    case Op::concat_cols: return 2;
    default: return 1;
  }
}

void Graph::check(NodeId id) const {
  if (id >= nodes_.size()) throw ContractError("node id " + std::to_string(id) + " not in graph");
}

NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId Graph::unary(Op op, NodeId x, Matrix value, double s, std::size_t i0, std::size_t i1) {
  Node n{op, x, 0, s, i0, i1, nodes_[x].live, std::move(value)};
  return push(std::move(n));
}

NodeId Graph::binary(Op op, NodeId a, NodeId b, Matrix value, double s) {
  Node n{op, a, b, s, 0, 0, nodes_[a].live || nodes_[b].live, std::move(value)};
  return push(std::move(n));
}

NodeId Graph::constant(Matrix value) {
  return push(Node{Op::constant, 0, 0, 0.0, 0, 0, false, std::move(value)});
}

NodeId Graph::variable(Matrix value) {
  return push(Node{Op::variable, 0, 0, 0.0, 0, 0, true, std::move(value)});
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  check(a), check(b);
  return binary(Op::matmul, a, b, core::matmul(nodes_[a].value, nodes_[b].value));
}

NodeId Graph::transpose(NodeId x) {
  check(x);
  return unary(Op::transpose, x, core::transpose(nodes_[x].value));
}

NodeId Graph::add_bias(NodeId x, NodeId bias) {
  check(x), check(bias);
  return binary(Op::add_bias, x, bias, add_row_vector(nodes_[x].value, nodes_[bias].value));
}

NodeId Graph::add(NodeId a, NodeId b) {
  check(a), check(b);
  return binary(Op::add, a, b,
                zip(nodes_[a].value, nodes_[b].value, "add", [](double p, double q) { return p + q; }));
}

NodeId Graph::sub(NodeId a, NodeId b) {
  check(a), check(b);
  return binary(Op::sub, a, b,
                zip(nodes_[a].value, nodes_[b].value, "sub", [](double p, double q) { return p - q; }));
}

NodeId Graph::mul(NodeId a, NodeId b) {
  check(a), check(b);
  return binary(Op::mul, a, b,
                zip(nodes_[a].value, nodes_[b].value, "mul", [](double p, double q) { return p * q; }));
}

NodeId Graph::scale(NodeId x, double c) {
  check(x);
  return unary(Op::scale, x, map(nodes_[x].value, [c](double v) { return v * c; }), c);
}

NodeId Graph::add_scalar(NodeId x, double c) {
  check(x);
  return unary(Op::add_scalar, x, map(nodes_[x].value, [c](double v) { return v + c; }), c);
}

NodeId Graph::square(NodeId x) {
  check(x);
  return unary(Op::square, x, map(nodes_[x].value, [](double v) { return v * v; }));
}

NodeId Graph::leaky_relu(NodeId x, double slope) {
  check(x);
  return unary(Op::leaky_relu, x, core::leaky_relu(nodes_[x].value, slope), slope);
}

NodeId Graph::leaky_relu_grad(NodeId g, NodeId x, double slope) {
  check(g), check(x);
  return binary(Op::leaky_relu_grad, g, x,
                zip(nodes_[g].value, nodes_[x].value, "leaky_relu_grad",
                    [slope](double gv, double xv) { return xv > 0.0 ? gv : gv * slope; }),
                slope);
}

NodeId Graph::sigmoid(NodeId x) {
  check(x);
  return unary(Op::sigmoid, x, core::sigmoid(nodes_[x].value));
}

NodeId Graph::sigmoid_grad(NodeId g, NodeId y) {
  check(g), check(y);
  return binary(Op::sigmoid_grad, g, y,
                zip(nodes_[g].value, nodes_[y].value, "sigmoid_grad",
                    [](double gv, double yv) { return gv * yv * (1.0 - yv); }));
}

NodeId Graph::mean(NodeId x) {
  check(x);
  const Matrix& v = nodes_[x].value;
  if (v.empty()) throw ContractError("mean of an empty matrix");
  return unary(Op::mean, x, Matrix(1, 1, total(v) / static_cast<double>(v.size())));
}

NodeId Graph::sum(NodeId x) {
  check(x);
  return unary(Op::sum, x, Matrix(1, 1, total(nodes_[x].value)));
}

NodeId Graph::broadcast_scalar(NodeId x, std::size_t rows, std::size_t cols) {
  check(x);
  const Matrix& v = nodes_[x].value;
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("broadcast_scalar expects a 1x1 operand");
  return unary(Op::broadcast_scalar, x, Matrix(rows, cols, v(0, 0)), 0.0, rows, cols);
}

NodeId Graph::sum_rows(NodeId x) {
  check(x);
  const Matrix& v = nodes_[x].value;
  Matrix out(1, v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) out(0, c) += v(r, c);
  return unary(Op::sum_rows, x, std::move(out));
}

NodeId Graph::broadcast_rows(NodeId x, std::size_t rows) {
  check(x);
  const Matrix& v = nodes_[x].value;
  if (v.rows() != 1) throw ShapeError("broadcast_rows expects a row vector");
  Matrix out(rows, v.cols());
  for (std::size_t r = 0; r < rows; ++r)
    std::copy(v.row(0).begin(), v.row(0).end(), out.row(r).begin());
  return unary(Op::broadcast_rows, x, std::move(out), 0.0, rows);
}

NodeId Graph::sum_cols(NodeId x) {
  check(x);
  const Matrix& v = nodes_[x].value;
  Matrix out(v.rows(), 1);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (double e : v.row(r)) out(r, 0) += e;
  return unary(Op::sum_cols, x, std::move(out));
}

NodeId Graph::broadcast_cols(NodeId x, std::size_t cols) {
  check(x);
  const Matrix& v = nodes_[x].value;
  if (v.cols() != 1) throw ShapeError("broadcast_cols expects a column vector");
  Matrix out(v.rows(), cols);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = v(r, 0);
  return unary(Op::broadcast_cols, x, std::move(out), 0.0, cols);
}

NodeId Graph::row_norm(NodeId x) {
  check(x);
  const Matrix& v = nodes_[x].value;
  Matrix out(v.rows(), 1);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double s = 0.0;
    for (double e : v.row(r)) s += e * e;
    out(r, 0) = std::sqrt(s);
  }
  return unary(Op::row_norm, x, std::move(out));
}

NodeId Graph::safe_inverse(NodeId x) {
  check(x);
  return unary(Op::safe_inverse, x,
               map(nodes_[x].value, [](double v) { return v == 0.0 ? 0.0 : 1.0 / v; }));
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
  check(a), check(b);
  return binary(Op::concat_cols, a, b, hconcat(nodes_[a].value, nodes_[b].value));
}

NodeId Graph::slice_cols(NodeId x, std::size_t offset, std::size_t width) {
  check(x);
  return unary(Op::slice_cols, x, core::slice_cols(nodes_[x].value, offset, width), 0.0, offset,
               width);
}

NodeId Graph::pad_cols(NodeId x, std::size_t offset, std::size_t total_cols) {
  check(x);
  const Matrix& v = nodes_[x].value;
  if (offset + v.cols() > total_cols) throw ShapeError("pad_cols target too narrow");
  Matrix out(v.rows(), total_cols);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) out(r, offset + c) = v(r, c);
  return unary(Op::pad_cols, x, std::move(out), 0.0, offset, total_cols);
}

double Graph::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (v.rows() != 1 || v.cols() != 1) throw ContractError("node is not a scalar");
  return v(0, 0);
}

NodeId Graph::vjp(NodeId id, int which, NodeId g) {
  // Copy: appending nodes below may reallocate the tape.
  const Node n{nodes_[id].op, nodes_[id].a, nodes_[id].b, nodes_[id].scalar,
               nodes_[id].i0, nodes_[id].i1, false, Matrix()};
  switch (n.op) {
    case Op::matmul:
      return which == 0 ? matmul(g, transpose(n.b)) : matmul(transpose(n.a), g);
    case Op::transpose:
      return transpose(g);
    case Op::add_bias:
      return which == 0 ? g : sum_rows(g);
    case Op::add:
      return g;
    case Op::sub:
      return which == 0 ? g : scale(g, -1.0);
    case Op::mul:
      return which == 0 ? mul(g, n.b) : mul(g, n.a);
    case Op::scale:
      return scale(g, n.scalar);
    case Op::add_scalar:
      return g;
    case Op::square:
      return mul(g, scale(n.a, 2.0));
    case Op::leaky_relu:
      return leaky_relu_grad(g, n.a, n.scalar);
    case Op::leaky_relu_grad:
      // The mask is piecewise constant in x: zero derivative almost everywhere.
      return which == 0 ? leaky_relu_grad(g, n.b, n.scalar) : none;
    case Op::sigmoid:
      return sigmoid_grad(g, id);
    case Op::sigmoid_grad:
      throw CapabilityError("no backward rule registered for primitive(s): sigmoid_grad");
    case Op::mean: {
      const Matrix& x = nodes_[n.a].value;
      return broadcast_scalar(scale(g, 1.0 / static_cast<double>(x.size())), x.rows(), x.cols());
    }
    case Op::sum: {
      const Matrix& x = nodes_[n.a].value;
      return broadcast_scalar(g, x.rows(), x.cols());
    }
    case Op::broadcast_scalar:
      return sum(g);
    case Op::sum_rows:
      return broadcast_rows(g, nodes_[n.a].value.rows());
    case Op::broadcast_rows:
      return sum_rows(g);
    case Op::sum_cols:
      return broadcast_cols(g, nodes_[n.a].value.cols());
    case Op::broadcast_cols:
      return sum_cols(g);
    case Op::row_norm: {
      const std::size_t k = nodes_[n.a].value.cols();
      return mul(n.a, broadcast_cols(mul(g, safe_inverse(id)), k));
    }
    case Op::safe_inverse:
      return scale(mul(g, mul(id, id)), -1.0);
    case Op::concat_cols: {
      const std::size_t left = nodes_[n.a].value.cols();
      return which == 0 ? slice_cols(g, 0, left)
                        : slice_cols(g, left, nodes_[n.b].value.cols());
    }
    case Op::slice_cols:
      return pad_cols(g, n.i0, nodes_[n.a].value.cols());
    case Op::pad_cols:
      return slice_cols(g, n.i0, nodes_[n.a].value.cols());
    case Op::constant:
    case Op::variable:
      return none;
  }
  return none;
}

std::vector<NodeId> Graph::gradients(NodeId output, std::span<const NodeId> wrt) {
  check(output);
  return backward(output, wrt, constant(Matrix(value(output).rows(), value(output).cols(), 1.0)));
}

std::vector<NodeId> Graph::gradients(NodeId output, std::span<const NodeId> wrt, NodeId seed) {
  check(output), check(seed);
  if (!same_shape(value(output), value(seed))) throw ShapeError("backward seed shape mismatch");
  return backward(output, wrt, seed);
}

std::vector<NodeId> Graph::backward(NodeId output, std::span<const NodeId> wrt, NodeId seed) {
  const std::size_t n = output + 1;
  std::vector<char> reach(n, 0);
  NodeId first = n;
  for (NodeId w : wrt) {
    check(w);
    if (w < n) {
      reach[w] = 1;
      first = std::min(first, w);
    }
  }
  for (NodeId i = first; i < n; ++i) {
    if (reach[i]) continue;
    const int ar = arity(nodes_[i].op);
    if ((ar >= 1 && reach[nodes_[i].a]) || (ar == 2 && reach[nodes_[i].b])) reach[i] = 1;
  }

  std::vector<NodeId> adj(n, none);
  adj[output] = seed;
  for (NodeId i = n; i-- > first;) {
    if (adj[i] == none || !reach[i]) continue;
    const int ar = arity(nodes_[i].op);
    for (int k = 0; k < ar; ++k) {
      const NodeId arg = k == 0 ? nodes_[i].a : nodes_[i].b;
      if (!reach[arg]) continue;
      const NodeId c = vjp(i, k, adj[i]);
      if (c == none) continue;
      adj[arg] = adj[arg] == none ? c : add(adj[arg], c);
    }
  }

  std::vector<NodeId> out;
  out.reserve(wrt.size());
  for (NodeId w : wrt) {
    if (w < n && adj[w] != none)
      out.push_back(adj[w]);
    else
      out.push_back(constant(Matrix(value(w).rows(), value(w).cols())));
  }
  return out;
}

std::vector<Op> Graph::ops_without_second_order(NodeId from, NodeId to) const {
  check(from), check(to);
  std::vector<Op> missing;
  if (from > to) return missing;
  const std::size_t n = to + 1;
  std::vector<char> fwd(n, 0), bwd(n, 0);
  fwd[from] = 1;
  for (NodeId i = from + 1; i < n; ++i) {
    const int ar = arity(nodes_[i].op);
    fwd[i] = (ar >= 1 && fwd[nodes_[i].a]) || (ar == 2 && fwd[nodes_[i].b]);
  }
  bwd[to] = 1;
  for (NodeId i = n; i-- > from;) {
    if (!bwd[i] || !fwd[i]) continue;
    const int ar = arity(nodes_[i].op);
    if (ar >= 1) bwd[nodes_[i].a] = 1;
    if (ar == 2) bwd[nodes_[i].b] = 1;
    if (!has_second_order_rule(nodes_[i].op) &&
        std::find(missing.begin(), missing.end(), nodes_[i].op) == missing.end())
      missing.push_back(nodes_[i].op);
  }
  return missing;
}

}  // namespace rgan::core
