#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rgan/core/matrix.hpp"

namespace rgan::core {

using NodeId = std::size_t;

/// Primitive operations a graph can record.
enum class Op : std::uint8_t {
  constant,
  variable,
  matmul,
  transpose,
  add_bias,        // x + broadcast row vector
  add,
  sub,
  mul,             // elementwise
  scale,           // x * c
  add_scalar,      // x + c
  square,
  leaky_relu,
  leaky_relu_grad, // g * leaky_relu'(x)
  sigmoid,
  sigmoid_grad,    // g * y * (1 - y), y = sigmoid output
  mean,            // all entries -> 1x1
  sum,             // all entries -> 1x1
  broadcast_scalar,
  sum_rows,        // n x k -> 1 x k
  broadcast_rows,  // 1 x k -> n x k
  sum_cols,        // n x k -> n x 1
  broadcast_cols,  // n x 1 -> n x k
  row_norm,        // n x k -> n x 1, Euclidean norm of each row
  safe_inverse,    // 1 / x, with 1/0 := 0
  concat_cols,
  slice_cols,
  pad_cols,        // embed into a wider zero matrix
};

std::string_view op_name(Op op);

/// True when the backward rule of `op` is itself built from differentiable
/// primitives, so a recorded backward pass through it can be differentiated again.
bool has_second_order_rule(Op op);

/// Eagerly evaluated tape of matrix-valued primitives.
///
/// Every node is computed when it is appended, so node ids are a topological
/// order. Backward passes append their adjoint computations to the same tape,
/// which lets a gradient be differentiated again (double backward).
class Graph {
 public:
  NodeId constant(Matrix value);
  /// Leaf that gradients can be taken with respect to.
  NodeId variable(Matrix value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId x);
  NodeId add_bias(NodeId x, NodeId bias);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId x, double c);
  NodeId add_scalar(NodeId x, double c);
  NodeId square(NodeId x);
  NodeId leaky_relu(NodeId x, double slope);
  NodeId leaky_relu_grad(NodeId g, NodeId x, double slope);
  NodeId sigmoid(NodeId x);
  NodeId sigmoid_grad(NodeId g, NodeId y);
  NodeId mean(NodeId x);
  NodeId sum(NodeId x);
  NodeId broadcast_scalar(NodeId x, std::size_t rows, std::size_t cols);
  NodeId sum_rows(NodeId x);
  NodeId broadcast_rows(NodeId x, std::size_t rows);
  NodeId sum_cols(NodeId x);
  NodeId broadcast_cols(NodeId x, std::size_t cols);
  NodeId row_norm(NodeId x);
  NodeId safe_inverse(NodeId x);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId slice_cols(NodeId x, std::size_t offset, std::size_t width);
  NodeId pad_cols(NodeId x, std::size_t offset, std::size_t total);

  const Matrix& value(NodeId id) const { return nodes_.at(id).value; }
  double scalar(NodeId id) const;
  Op op(NodeId id) const { return nodes_.at(id).op; }
  /// Operand `which` (0 or 1) of a recorded node.
  NodeId operand(NodeId id, int which) const { return which == 0 ? nodes_.at(id).a : nodes_.at(id).b; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool depends_on_variable(NodeId id) const { return nodes_.at(id).live; }

  /// Reverse-mode pass from `output`, seeded with `seed` (same shape as the
  /// output) or with ones when `seed` is omitted. Adjoints are appended as
  /// nodes; a target the output does not depend on gets a zero constant.
  std::vector<NodeId> gradients(NodeId output, std::span<const NodeId> wrt);
  std::vector<NodeId> gradients(NodeId output, std::span<const NodeId> wrt, NodeId seed);

  /// Ops on every path from `from` to `to` that lack a second-order rule.
  std::vector<Op> ops_without_second_order(NodeId from, NodeId to) const;

 private:
  struct Node {
    Op op;
    NodeId a = 0;
    NodeId b = 0;
    double scalar = 0.0;
    std::size_t i0 = 0;
    std::size_t i1 = 0;
    bool live = false;  // depends on some variable
    Matrix value;
  };

  NodeId push(Node node);
  NodeId unary(Op op, NodeId x, Matrix value, double s = 0.0, std::size_t i0 = 0, std::size_t i1 = 0);
  NodeId binary(Op op, NodeId a, NodeId b, Matrix value, double s = 0.0);
  std::vector<NodeId> backward(NodeId output, std::span<const NodeId> wrt, NodeId seed);
  /// Adjoint contribution of node `id` to its operand number `which`;
  /// returns `none` when the contribution is identically zero.
  NodeId vjp(NodeId id, int which, NodeId g);
  int arity(Op op) const;
  void check(NodeId id) const;

  static constexpr NodeId none = static_cast<NodeId>(-1);

  std::vector<Node> nodes_;
};

}  // namespace rgan::core
