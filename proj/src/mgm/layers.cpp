/**
 * @file layers.cpp
 */

#include "melotrans/mgm/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace melotrans::mgm {

Var ParamStore::add(const std::string& name, Matrix value) {
  for (const auto& [existing, var] : params_) {
    if (existing == name) throw std::logic_error("duplicate parameter name " + name);
  }
  params_.emplace_back(name, parameter(std::move(value)));
  return params_.back().second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, var] : params_) n += static_cast<std::size_t>(var->value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, var] : params_) var->grad.resize(0, 0);
}

Matrix xavier(int rows, int cols, ttmm::Rng& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = (2.0 * rng.uniform01() - 1.0) * a;
  }
  return m;
}

Linear::Linear(ParamStore& store, const std::string& name, int in, int out, ttmm::Rng& rng)
    : w(store.add(name + ".w", xavier(in, out, rng))), b(store.add(name + ".b", Matrix::Zero(1, out))) {}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, int d)
    : gain(store.add(name + ".gain", Matrix::Ones(1, d))), shift(store.add(name + ".shift", Matrix::Zero(1, d))) {}

Matrix causal_mask(Eigen::Index n) {
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = -std::numeric_limits<double>::infinity();
  }
  return m;
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name, int d, int heads_, ttmm::Rng& rng)
    : q(store, name + ".q", d, d, rng),
      k(store, name + ".k", d, d, rng),
      v(store, name + ".v", d, d, rng),
      o(store, name + ".o", d, d, rng),
      heads(heads_) {
  if (heads < 1 || d % heads != 0) throw std::invalid_argument("d_model must be divisible by the head count");
}

Var MultiHeadAttention::operator()(const Var& queries, const Var& keys_values, const Matrix* mask) const {
  const Var qs = q(queries);
  const Var ks = k(keys_values);
  const Var vs = v(keys_values);
  const Eigen::Index d = qs->value.cols();
  const Eigen::Index dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  for (int h = 0; h < heads; ++h) {
    const Var qh = slice_cols(qs, h * dh, dh);
    const Var kh = slice_cols(ks, h * dh, dh);
    const Var vh = slice_cols(vs, h * dh, dh);
    const Var weights = masked_softmax(scale(matmul_bt(qh, kh), inv_sqrt), mask);
    outs.push_back(matmul(weights, vh));
  }
  return o(heads == 1 ? outs[0] : concat_cols(outs));
}

FeedForward::FeedForward(ParamStore& store, const std::string& name, int d, int d_ff, ttmm::Rng& rng)
    : in(store, name + ".in", d, d_ff, rng), out(store, name + ".out", d_ff, d, rng) {}

EncoderLayer::EncoderLayer(ParamStore& store, const std::string& name, int d, int heads, int d_ff, ttmm::Rng& rng)
    : norm_attn(store, name + ".norm_attn", d),
      norm_ff(store, name + ".norm_ff", d),
      attn(store, name + ".attn", d, heads, rng),
      ff(store, name + ".ff", d, d_ff, rng) {}

Var EncoderLayer::operator()(const Var& x) const {
  const Var n = norm_attn(x);
  const Var h = add(x, attn(n, n, nullptr));
  return add(h, ff(norm_ff(h)));
}

DecoderLayer::DecoderLayer(ParamStore& store, const std::string& name, int d, int heads, int d_ff, ttmm::Rng& rng)
    : norm_self(store, name + ".norm_self", d),
      norm_cross(store, name + ".norm_cross", d),
      norm_ff(store, name + ".norm_ff", d),
      self_attn(store, name + ".self", d, heads, rng),
      cross_attn(store, name + ".cross", d, heads, rng),
      ff(store, name + ".ff", d, d_ff, rng) {}

Var DecoderLayer::operator()(const Var& x, const Var& enc, const Matrix& causal) const {
  const Var n = norm_self(x);
  const Var h1 = add(x, self_attn(n, n, &causal));
  const Var h2 = add(h1, cross_attn(norm_cross(h1), enc, nullptr));
  return add(h2, ff(norm_ff(h2)));
}

GatedDecoderLayer::GatedDecoderLayer(ParamStore& store, const std::string& name, int d, int heads, int d_ff,
                                     ttmm::Rng& rng)
    : norm_cross(store, name + ".norm_cross", d),
      norm_self(store, name + ".norm_self", d),
      norm_ff(store, name + ".norm_ff", d),
      self_attn(store, name + ".self", d, heads, rng),
      cross_attn(store, name + ".cross", d, heads, rng),
      ff(store, name + ".ff", d, d_ff, rng) {}

Var GatedDecoderLayer::gated_attention(const Var& xc, const Var& xs, const Var& enc, const Vector& region,
                                       const Matrix& causal) const {
  if (xc->value.rows() != xs->value.rows() || region.size() != xc->value.rows()) {
    throw std::invalid_argument("gated attention: streams and region mask disagree in length");
  }
  const Var cross = cross_attn(norm_cross(xc), enc, nullptr);
  const Var ns = norm_self(xs);
  const Var self = self_attn(ns, ns, &causal);
  const Vector rest = Vector::Ones(region.size()) - region;
  return add(scale_rows(cross, region), scale_rows(self, rest));
}

Var GatedDecoderLayer::operator()(const Var& xc, const Var& xs, const Var& enc, const Vector& region,
                                  const Matrix& causal) const {
  const Vector rest = Vector::Ones(region.size()) - region;
  const Var base = add(scale_rows(xc, region), scale_rows(xs, rest));
  const Var h = add(base, gated_attention(xc, xs, enc, region, causal));
  return add(h, ff(norm_ff(h)));
}

}  // namespace melotrans::mgm
