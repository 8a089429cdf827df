/**
 * @file tensor.hpp
 * @brief Minimal reverse-mode autodiff over dense double matrices.
 *
 * Every op returns a new node that remembers its parents and how to push its
 * gradient back to them. Graphs are built per example and dropped after
 * backward(); parameters are long-lived leaf nodes whose gradients
 * accumulate until an optimizer clears them.
 */

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace melotrans::mgm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Node {
  Matrix value;
  Matrix grad;  ///< empty until something flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Matrix& g);
};

using Var = std::shared_ptr<Node>;

/// While alive, ops record no parents or backward closures (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

Var constant(Matrix value);
Var parameter(Matrix value);

Var matmul(const Var& a, const Var& b);
/// a * b^T
Var matmul_bt(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
/// Adds the 1 x n row `bias` to every row of `a`.
Var add_row(const Var& a, const Var& bias);
/// Adds a constant matrix (no gradient flows into it).
Var add_const(const Var& a, const Matrix& c);
Var scale(const Var& a, double s);
/// Multiplies row i of `a` by gate[i].
Var scale_rows(const Var& a, const Vector& gate);
/// Exact (erf-based) GELU.
Var gelu(const Var& a);
/// Row-wise normalization with learned 1 x n gain and shift.
Var layer_norm(const Var& x, const Var& gain, const Var& shift, double eps = 1e-5);
/// Row softmax of a + mask, where mask holds 0 or -infinity.
Var masked_softmax(const Var& a, const Matrix* mask);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var concat_cols(const std::vector<Var>& parts);
/// Rows of `table` picked by ids.
Var gather_rows(const Var& table, const std::vector<int>& ids);
/// Mean negative log-likelihood of targets under row-wise softmax(logits).
Var cross_entropy(const Var& logits, const std::vector<int>& targets);

/// Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure once.
void backward(const Var& loss);

}  // namespace melotrans::mgm
