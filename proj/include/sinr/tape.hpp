#pragma once

#include <cstdint>
#include <vector>

#include "sinr/matrix.hpp"

namespace sinr {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
  friend bool operator==(Var, Var) = default;
};

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kAddBias,
  kSine,
  kRelu,
  kSigmoid,
  kElemProd,
  kRowMeanPool,
  kScale,
};

/// Records a forward computation over the fixed primitive set and
/// differentiates it in reverse mode.
///
/// Nodes are appended in creation order, which is a topological order, and
/// backward() walks them strictly in reverse. A tape is single-owner; use one
/// tape per worker.
class Tape {
 public:
  /// Leaf that receives a gradient.
  Var parameter(Matrix value);
  /// Leaf treated as a constant.
  Var constant(Matrix value);

  Var matmul(Var a, Var b);
  Var add_bias(Var x, Var bias);
  Var sine(Var x);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var elem_prod(Var a, Var b);
  Var row_mean_pool(Var x);
  Var scale(Var x, double factor);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  Op op(Var v) const { return nodes_.at(v.id).op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Fills gradients of `loss` with respect to every node that depends on a
  /// parameter. Throws ContractError unless `loss` is 1x1.
  void backward(Var loss);

  /// d loss / d v after backward(). Parameters that the loss does not depend
  /// on get an all-zero gradient.
  const Matrix& grad(Var v) const;

  /// Node ids in the order the last backward() visited them.
  const std::vector<std::uint32_t>& backward_order() const noexcept { return backward_order_; }

  /// Recomputes every node from the leaves without touching recorded values.
  std::vector<Matrix> replay() const;

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::uint32_t lhs = 0;
    std::uint32_t rhs = 0;
    double factor = 0.0;
    bool needs_grad = false;
    Matrix value;
    Matrix grad;
  };

  Var push(Op op, Var lhs, Var rhs, double factor, Matrix value);
  Matrix evaluate(const Node& n, const std::vector<Matrix>& values) const;
  static void add_into(Matrix& grad, const Matrix& contribution);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> backward_order_;
};

}  // namespace sinr
