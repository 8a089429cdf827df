/**
 * @file tensor.cpp
 */

#include "melotrans/mgm/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace melotrans::mgm {
namespace {

thread_local bool g_grad_enabled = true;

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": " + detail);
}

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

// Builds a result node. The backward closure is kept only when some parent
// needs a gradient; it receives the finished node (value and grad).
Var make(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (!g_grad_enabled) return node;
  for (const auto& p : parents) node->requires_grad = node->requires_grad || p->requires_grad;
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return node;
}

}  // namespace

void Node::accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Var constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return node;
}

Var parameter(Matrix value) {
  auto node = constant(std::move(value));
  node->requires_grad = true;
  return node;
}

Var matmul(const Var& a, const Var& b) {
  require(a->value.cols() == b->value.rows(), "matmul", shape(a->value) + " * " + shape(b->value));
  Node* pa = a.get();
  Node* pb = b.get();
  return make(a->value * b->value, {a, b}, [pa, pb](Node& out) {
    if (pa->requires_grad) pa->accumulate(out.grad * pb->value.transpose());
    if (pb->requires_grad) pb->accumulate(pa->value.transpose() * out.grad);
  });
}

Var matmul_bt(const Var& a, const Var& b) {
  require(a->value.cols() == b->value.cols(), "matmul_bt", shape(a->value) + " * " + shape(b->value) + "^T");
  Node* pa = a.get();
  Node* pb = b.get();
  return make(a->value * b->value.transpose(), {a, b}, [pa, pb](Node& out) {
    if (pa->requires_grad) pa->accumulate(out.grad * pb->value);
    if (pb->requires_grad) pb->accumulate(out.grad.transpose() * pa->value);
  });
}

Var add(const Var& a, const Var& b) {
  require(a->value.rows() == b->value.rows() && a->value.cols() == b->value.cols(), "add",
          shape(a->value) + " + " + shape(b->value));
  Node* pa = a.get();
  Node* pb = b.get();
  return make(a->value + b->value, {a, b}, [pa, pb](Node& out) {
    pa->accumulate(out.grad);
    pb->accumulate(out.grad);
  });
}

Var add_row(const Var& a, const Var& bias) {
  require(bias->value.rows() == 1 && bias->value.cols() == a->value.cols(), "add_row",
          shape(a->value) + " + row " + shape(bias->value));
  Node* pa = a.get();
  Node* pb = bias.get();
  Matrix v = a->value;
  v.rowwise() += bias->value.row(0);
  return make(std::move(v), {a, bias}, [pa, pb](Node& out) {
    pa->accumulate(out.grad);
    if (pb->requires_grad) pb->accumulate(out.grad.colwise().sum());
  });
}

Var add_const(const Var& a, const Matrix& c) {
  require(a->value.rows() == c.rows() && a->value.cols() == c.cols(), "add_const",
          shape(a->value) + " + " + shape(c));
  Node* pa = a.get();
  return make(a->value + c, {a}, [pa](Node& out) { pa->accumulate(out.grad); });
}

Var scale(const Var& a, double s) {
  Node* pa = a.get();
  return make(a->value * s, {a}, [pa, s](Node& out) { pa->accumulate(out.grad * s); });
}

Var scale_rows(const Var& a, const Vector& gate) {
  require(gate.size() == a->value.rows(), "scale_rows", shape(a->value) + " with " + std::to_string(gate.size()) + " gates");
  Node* pa = a.get();
  return make(gate.asDiagonal() * a->value, {a}, [pa, gate](Node& out) { pa->accumulate(gate.asDiagonal() * out.grad); });
}

Var gelu(const Var& a) {
  Node* pa = a.get();
  const Matrix& x = a->value;
  Matrix v = x.unaryExpr([](double t) { return 0.5 * t * (1.0 + std::erf(t * M_SQRT1_2)); });
  return make(std::move(v), {a}, [pa](Node& out) {
    const Matrix d = pa->value.unaryExpr([](double t) {
      const double pdf = std::exp(-0.5 * t * t) * 0.5 * M_2_SQRTPI * M_SQRT1_2;
      return 0.5 * (1.0 + std::erf(t * M_SQRT1_2)) + t * pdf;
    });
    pa->accumulate(out.grad.cwiseProduct(d));
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& shift, double eps) {
  const Eigen::Index n = x->value.cols();
  require(gain->value.rows() == 1 && gain->value.cols() == n && shift->value.rows() == 1 && shift->value.cols() == n,
          "layer_norm", shape(x->value) + " with gain " + shape(gain->value));
  const Vector mean = x->value.rowwise().mean();
  Matrix xhat = x->value.colwise() - mean;
  const Vector inv_std = (xhat.array().square().rowwise().mean() + eps).rsqrt().matrix();
  xhat = inv_std.asDiagonal() * xhat;
  Matrix y = xhat.array().rowwise() * gain->value.row(0).array();
  y.rowwise() += shift->value.row(0);
  Node* px = x.get();
  Node* pg = gain.get();
  Node* pb = shift.get();
  return make(std::move(y), {x, gain, shift}, [px, pg, pb, xhat, inv_std](Node& out) {
    if (pg->requires_grad) pg->accumulate(out.grad.cwiseProduct(xhat).colwise().sum());
    if (pb->requires_grad) pb->accumulate(out.grad.colwise().sum());
    if (px->requires_grad) {
      const Matrix dxhat = out.grad.array().rowwise() * pg->value.row(0).array();
      const Vector m1 = dxhat.rowwise().mean();
      const Vector m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
      Matrix dx = dxhat.colwise() - m1;
      dx -= m2.asDiagonal() * xhat;
      px->accumulate(inv_std.asDiagonal() * dx);
    }
  });
}

Var masked_softmax(const Var& a, const Matrix* mask) {
  Matrix z = a->value;
  if (mask != nullptr) {
    require(mask->rows() == z.rows() && mask->cols() == z.cols(), "masked_softmax", shape(z) + " mask " + shape(*mask));
    z += *mask;
  }
  const Vector mx = z.rowwise().maxCoeff();
  Matrix p = (z.colwise() - mx).array().exp().matrix();
  const Vector sums = p.rowwise().sum();
  p = sums.cwiseInverse().asDiagonal() * p;
  Node* pa = a.get();
  Matrix probs = p;
  return make(std::move(p), {a}, [pa, probs](Node& out) {
    const Vector dot = out.grad.cwiseProduct(probs).rowwise().sum();
    pa->accumulate(probs.cwiseProduct(out.grad.colwise() - dot));
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a->value.cols(), "slice_cols",
          shape(a->value) + " [" + std::to_string(start) + "," + std::to_string(start + count) + ")");
  Node* pa = a.get();
  return make(a->value.middleCols(start, count), {a}, [pa, start, count](Node& out) {
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    g.middleCols(start, count) = out.grad;
    pa->accumulate(g);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const Eigen::Index rows = parts[0]->value.rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    require(p->value.rows() == rows, "concat_cols", "row mismatch " + shape(p->value));
    cols += p->value.cols();
  }
  Matrix v(rows, cols);
  std::vector<Node*> raw;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p->value.cols()) = p->value;
    at += p->value.cols();
    raw.push_back(p.get());
  }
  return make(std::move(v), parts, [raw](Node& out) {
    Eigen::Index at = 0;
    for (Node* p : raw) {
      if (p->requires_grad) p->accumulate(out.grad.middleCols(at, p->value.cols()));
      at += p->value.cols();
    }
  });
}

Var gather_rows(const Var& table, const std::vector<int>& ids) {
  Matrix v(static_cast<Eigen::Index>(ids.size()), table->value.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < table->value.rows(), "gather_rows", "id " + std::to_string(ids[i]) + " out of range");
    v.row(static_cast<Eigen::Index>(i)) = table->value.row(ids[i]);
  }
  Node* pt = table.get();
  return make(std::move(v), {table}, [pt, ids](Node& out) {
    Matrix g = Matrix::Zero(pt->value.rows(), pt->value.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) g.row(ids[i]) += out.grad.row(static_cast<Eigen::Index>(i));
    pt->accumulate(g);
  });
}

Var cross_entropy(const Var& logits, const std::vector<int>& targets) {
  const Matrix& z = logits->value;
  require(static_cast<std::size_t>(z.rows()) == targets.size() && !targets.empty(), "cross_entropy",
          shape(z) + " with " + std::to_string(targets.size()) + " targets");
  const Vector mx = z.rowwise().maxCoeff();
  Matrix p = (z.colwise() - mx).array().exp().matrix();
  const Vector sums = p.rowwise().sum();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    require(t >= 0 && t < z.cols(), "cross_entropy", "target " + std::to_string(t) + " out of range");
    loss -= z(i, t) - mx(i) - std::log(sums(i));
  }
  const double n = static_cast<double>(z.rows());
  p = sums.cwiseInverse().asDiagonal() * p;
  Node* pl = logits.get();
  return make(Matrix::Constant(1, 1, loss / n), {logits}, [pl, p, targets, n](Node& out) {
    Matrix g = p;
    for (std::size_t i = 0; i < targets.size(); ++i) g(static_cast<Eigen::Index>(i), targets[i]) -= 1.0;
    pl->accumulate(g * (out.grad(0, 0) / n));
  });
}

void backward(const Var& loss) {
  if (loss->value.size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad.size() != 0) node->backward(*node);
  }
}

}  // namespace melotrans::mgm
