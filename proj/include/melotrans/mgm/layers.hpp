/**
 * @file layers.hpp
 * @brief Transformer building blocks on top of the autodiff nodes.
 *
 * All blocks use pre-normalization residuals. The gated decoder layer mixes
 * cross- and self-attention per row with a 0/1 region gate.
 */

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "melotrans/mgm/tensor.hpp"
#include "melotrans/ttmm/rng.hpp"

namespace melotrans::mgm {

/// Named parameter registry; names give checkpoints a stable layout.
class ParamStore {
 public:
  Var add(const std::string& name, Matrix value);
  const std::vector<std::pair<std::string, Var>>& all() const { return params_; }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Var>> params_;
};

/// Uniform(-a, a) with a = sqrt(6 / (rows + cols)).
Matrix xavier(int rows, int cols, ttmm::Rng& rng);

struct Linear {
  Var w, b;
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, int in, int out, ttmm::Rng& rng);
  Var operator()(const Var& x) const { return add_row(matmul(x, w), b); }
};

struct LayerNorm {
  Var gain, shift;
  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, int d);
  Var operator()(const Var& x) const { return layer_norm(x, gain, shift); }
};

/// Additive mask (0 / -inf) letting row i see columns 0..i.
Matrix causal_mask(Eigen::Index n);

struct MultiHeadAttention {
  Linear q, k, v, o;
  int heads = 1;
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, int d, int heads, ttmm::Rng& rng);
  Var operator()(const Var& queries, const Var& keys_values, const Matrix* mask) const;
};

struct FeedForward {
  Linear in, out;
  FeedForward() = default;
  FeedForward(ParamStore& store, const std::string& name, int d, int d_ff, ttmm::Rng& rng);
  Var operator()(const Var& x) const { return out(gelu(in(x))); }
};

struct EncoderLayer {
  LayerNorm norm_attn, norm_ff;
  MultiHeadAttention attn;
  FeedForward ff;
  EncoderLayer() = default;
  EncoderLayer(ParamStore& store, const std::string& name, int d, int heads, int d_ff, ttmm::Rng& rng);
  Var operator()(const Var& x) const;
};

/// Self-attention, then cross-attention, then feed-forward.
struct DecoderLayer {
  LayerNorm norm_self, norm_cross, norm_ff;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ff;
  DecoderLayer() = default;
  DecoderLayer(ParamStore& store, const std::string& name, int d, int heads, int d_ff, ttmm::Rng& rng);
  Var operator()(const Var& x, const Var& enc, const Matrix& causal) const;
};

/// Rows with gate 1 take cross-attention of the aligned stream over the
/// encoder; rows with gate 0 take causal self-attention of the plain stream.
struct GatedDecoderLayer {
  LayerNorm norm_cross, norm_self, norm_ff;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ff;
  GatedDecoderLayer() = default;
  GatedDecoderLayer(ParamStore& store, const std::string& name, int d, int heads, int d_ff, ttmm::Rng& rng);

  /// r * CrossAttn(xc, enc) + (1 - r) * SelfAttn(xs), before any residual.
  Var gated_attention(const Var& xc, const Var& xs, const Var& enc, const Vector& region, const Matrix& causal) const;
  /// Gated residual around gated_attention, then a feed-forward block.
  Var operator()(const Var& xc, const Var& xs, const Var& enc, const Vector& region, const Matrix& causal) const;
};

}  // namespace melotrans::mgm
