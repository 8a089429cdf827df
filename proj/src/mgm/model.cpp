/**
 * @file model.cpp
 */

#include "melotrans/mgm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace melotrans::mgm {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.layers_enc = 6;
  c.layers_dec = 6;
  c.heads = 8;
  c.d_model = 256;
  c.d_ff = 2048;
  c.lr = 2e-4;
  c.epochs = 1000;
  return c;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("model config: " + msg); };
  if (layers_enc < 1 || layers_dec < 1) fail("layer counts must be positive");
  if (heads < 1 || d_model < 1 || d_model % heads != 0) fail("d_model must be a positive multiple of heads");
  if (d_ff < 1) fail("d_ff must be positive");
  if (max_len < 8) fail("max_len must be at least 8");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) fail("betas must lie in [0,1)");
  if (batch < 1 || epochs < 1) fail("batch and epochs must be positive");
}

EncoderDecoder::EncoderDecoder(const ModelConfig& config, ModelKind kind) : config_(config), kind_(kind) {
  config_.validate();
  ttmm::Rng rng(config_.seed);
  const int d = config_.d_model;
  const int vocab = remi::Vocabulary::instance().size();
  embedding_ = params_.add("embedding", xavier(vocab, d, rng));
  for (int l = 0; l < config_.layers_enc; ++l) {
    encoder_.emplace_back(params_, "enc" + std::to_string(l), d, config_.heads, config_.d_ff, rng);
  }
  encoder_norm_ = LayerNorm(params_, "enc.norm", d);
  for (int l = 0; l < config_.layers_dec; ++l) {
    const std::string name = "dec" + std::to_string(l);
    if (kind_ == ModelKind::kBranch) {
      decoder_.emplace_back(params_, name, d, config_.heads, config_.d_ff, rng);
    } else {
      gated_.emplace_back(params_, name, d, config_.heads, config_.d_ff, rng);
    }
  }
  decoder_norm_ = LayerNorm(params_, "dec.norm", d);
  head_ = Linear(params_, "head", d, vocab, rng);
}

void EncoderDecoder::check_length(std::size_t n, const char* what) const {
  if (n == 0) throw std::invalid_argument(std::string(what) + " is empty");
  if (n > static_cast<std::size_t>(config_.max_len)) {
    throw std::invalid_argument(std::string(what) + " holds " + std::to_string(n) + " tokens; max_len is " +
                                std::to_string(config_.max_len));
  }
}

Var EncoderDecoder::embed(const TokenSeq& seq) const {
  return scale(gather_rows(embedding_, remi::Vocabulary::instance().to_indices(seq)),
               std::sqrt(static_cast<double>(config_.d_model)));
}

Var EncoderDecoder::encode(const TokenSeq& src) const {
  check_length(src.size(), "encoder input");
  Var x = add_const(embed(src), positional_encoding(src.size(), config_.d_model));
  for (const auto& layer : encoder_) x = layer(x);
  return encoder_norm_(x);
}

Var EncoderDecoder::decode(const Var& enc, const TokenSeq& dec_in, const EncoderLayout* layout,
                           std::vector<std::size_t>* fallback) const {
  check_length(dec_in.size(), "decoder input");
  const auto n = static_cast<Eigen::Index>(dec_in.size());
  const Matrix causal = causal_mask(n);
  const Var e = embed(dec_in);
  const Matrix pe = positional_encoding(dec_in.size(), config_.d_model);
  Var h;
  if (kind_ == ModelKind::kBranch) {
    h = add_const(e, pe);
    for (const auto& layer : decoder_) h = layer(h, enc, causal);
  } else {
    if (layout == nullptr) throw std::invalid_argument("phrase decoding needs an encoder layout");
    const AlignedPositions aligned = mvape_positions(dec_in, *layout, true);
    if (fallback != nullptr) fallback->insert(fallback->end(), aligned.fallback.begin(), aligned.fallback.end());
    const auto bits = build_region_mask(dec_in, true);
    Vector region(n);
    for (Eigen::Index i = 0; i < n; ++i) region(i) = bits[static_cast<std::size_t>(i)];
    const Var xc = add_const(e, mvape(aligned, config_.d_model));
    const Var xs = add_const(e, pe);
    h = gated_[0](xc, xs, enc, region, causal);
    for (std::size_t l = 1; l < gated_.size(); ++l) h = gated_[l](h, h, enc, region, causal);
  }
  return head_(decoder_norm_(h));
}

}  // namespace melotrans::mgm
