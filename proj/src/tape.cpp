#include "sinr/tape.hpp"

#include <cmath>
#include <string>

#include "sinr/errors.hpp"

namespace sinr {

Var Tape::push(Op op, Var lhs, Var rhs, double factor, Matrix value) {
  Node n;
  n.op = op;
  n.lhs = lhs.id;
  n.rhs = rhs.id;
  n.factor = factor;
  n.value = std::move(value);
  n.needs_grad = nodes_[lhs.id].needs_grad || nodes_[rhs.id].needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.needs_grad = true;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::matmul(Var a, Var b) {
  return push(Op::kMatMul, a, b, 0.0, sinr::matmul(value(a), value(b)));
}
Var Tape::add_bias(Var x, Var bias) {
  return push(Op::kAddBias, x, bias, 0.0, sinr::add_bias(value(x), value(bias)));
}
Var Tape::sine(Var x) { return push(Op::kSine, x, x, 0.0, sinr::sine(value(x))); }
Var Tape::relu(Var x) { return push(Op::kRelu, x, x, 0.0, sinr::relu(value(x))); }
Var Tape::sigmoid(Var x) { return push(Op::kSigmoid, x, x, 0.0, sinr::sigmoid(value(x))); }
Var Tape::elem_prod(Var a, Var b) {
  return push(Op::kElemProd, a, b, 0.0, sinr::elem_prod(value(a), value(b)));
}
Var Tape::row_mean_pool(Var x) {
  return push(Op::kRowMeanPool, x, x, 0.0, sinr::row_mean_pool(value(x)));
}
Var Tape::scale(Var x, double factor) {
  return push(Op::kScale, x, x, factor, sinr::scale(value(x), factor));
}

void Tape::add_into(Matrix& grad, const Matrix& contribution) {
  if (grad.empty()) {
    grad = contribution;
  } else {
    accumulate(grad, contribution);
  }
}

void Tape::backward(Var loss) {
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + std::to_string(lv.rows()) + "x" +
                        std::to_string(lv.cols()));
  }
  for (auto& n : nodes_) n.grad = Matrix();
  for (auto& n : nodes_) {
    if (n.op == Op::kLeaf && n.needs_grad) n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  backward_order_.clear();
  nodes_[loss.id].grad = Matrix(1, 1, 1.0);

  for (std::int64_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || n.grad.empty() || n.op == Op::kLeaf) continue;
    backward_order_.push_back(static_cast<std::uint32_t>(i));
    const Matrix& dy = n.grad;
    Node& a = nodes_[n.lhs];
    Node& b = nodes_[n.rhs];

    switch (n.op) {
      case Op::kMatMul:
        if (a.needs_grad) add_into(a.grad, matmul_nt(dy, b.value));
        if (b.needs_grad) add_into(b.grad, matmul_tn(a.value, dy));
        break;
      case Op::kAddBias:
        if (a.needs_grad) add_into(a.grad, dy);
        if (b.needs_grad) {
          if (b.value.same_shape(dy)) {
            add_into(b.grad, dy);
          } else {
            Matrix db(dy.rows(), 1);
            for (std::size_t r = 0; r < dy.rows(); ++r) {
              double sum = 0.0;
              for (double v : dy.row(r)) sum += v;
              db(r, 0) = sum;
            }
            add_into(b.grad, db);
          }
        }
        break;
      case Op::kSine:
        add_into(a.grad, sinr::elem_prod(dy, sinr::cosine(a.value)));
        break;
      case Op::kRelu: {
        Matrix dx(dy.rows(), dy.cols());
        auto x = a.value.data();
        auto g = dy.data();
        auto o = dx.data();
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = x[j] > 0.0 ? g[j] : 0.0;
        add_into(a.grad, dx);
        break;
      }
      case Op::kSigmoid: {
        Matrix dx(dy.rows(), dy.cols());
        auto y = n.value.data();
        auto g = dy.data();
        auto o = dx.data();
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = g[j] * y[j] * (1.0 - y[j]);
        add_into(a.grad, dx);
        break;
      }
      case Op::kElemProd:
        if (a.value.same_shape(b.value)) {
          if (a.needs_grad) add_into(a.grad, sinr::elem_prod(dy, b.value));
          if (b.needs_grad) add_into(b.grad, sinr::elem_prod(dy, a.value));
        } else {
          if (a.needs_grad) {
            Matrix da(a.value.rows(), 1);
            for (std::size_t r = 0; r < dy.rows(); ++r) {
              auto g = dy.row(r);
              auto bv = b.value.row(r);
              double sum = 0.0;
              for (std::size_t c = 0; c < g.size(); ++c) sum += g[c] * bv[c];
              da(r, 0) = sum;
            }
            add_into(a.grad, da);
          }
          if (b.needs_grad) add_into(b.grad, sinr::elem_prod(a.value, dy));
        }
        break;
      case Op::kRowMeanPool: {
        const std::size_t m = a.value.cols();
        const double count = static_cast<double>(m);
        Matrix dx(a.value.rows(), m);
        for (std::size_t r = 0; r < dx.rows(); ++r) {
          const double share = dy(r, 0) / count;
          for (double& v : dx.row(r)) v = share;
        }
        add_into(a.grad, dx);
        break;
      }
      case Op::kScale:
        add_into(a.grad, sinr::scale(dy, n.factor));
        break;
      case Op::kLeaf:
        break;
    }
    // Interior gradients are dead once propagated.
    if (i != static_cast<std::int64_t>(loss.id)) n.grad = Matrix();
  }
}

const Matrix& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.op != Op::kLeaf || !n.needs_grad) {
    throw ContractError("grad: node " + std::to_string(v.id) + " is not a parameter");
  }
  return n.grad;
}

Matrix Tape::evaluate(const Node& n, const std::vector<Matrix>& values) const {
  const Matrix& a = values[n.lhs];
  const Matrix& b = values[n.rhs];
  switch (n.op) {
    case Op::kMatMul: return sinr::matmul(a, b);
    case Op::kAddBias: return sinr::add_bias(a, b);
    case Op::kSine: return sinr::sine(a);
    case Op::kRelu: return sinr::relu(a);
    case Op::kSigmoid: return sinr::sigmoid(a);
    case Op::kElemProd: return sinr::elem_prod(a, b);
    case Op::kRowMeanPool: return sinr::row_mean_pool(a);
    case Op::kScale: return sinr::scale(a, n.factor);
    case Op::kLeaf: break;
  }
  return n.value;
}

std::vector<Matrix> Tape::replay() const {
  std::vector<Matrix> values;
  values.reserve(nodes_.size());
  for (const auto& n : nodes_) values.push_back(evaluate(n, values));
  return values;
}

}  // namespace sinr
