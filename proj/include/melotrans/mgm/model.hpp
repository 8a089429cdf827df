/**
 * @file model.hpp
 * @brief Encoder-decoder models: per-type variant branches and the phrase model.
 *
 * Both kinds share the encoder and output head. A branch decodes with plain
 * self- then cross-attention. The phrase model decodes with gated layers:
 * tokens inside a label region attend to the encoder with positions aligned
 * to the matching encoder span, all other tokens attend causally to the
 * decoder prefix.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "melotrans/mgm/layers.hpp"
#include "melotrans/mgm/masks.hpp"

namespace melotrans::mgm {

struct ModelConfig {
  int layers_enc = 2;
  int layers_dec = 2;
  int heads = 2;
  int d_model = 64;
  int d_ff = 128;
  int max_len = 1024;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  int batch = 4;
  int epochs = 200;
  std::uint64_t seed = 1;

  /// Small enough to train on one CPU core in minutes.
  static ModelConfig desk();
  /// 6/6 layers, 8 heads, width 256, feed-forward 2048, lr 2e-4.
  static ModelConfig full();
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

enum class ModelKind : std::uint8_t { kBranch = 0, kPhrase = 1 };

class EncoderDecoder {
 public:
  EncoderDecoder(const ModelConfig& config, ModelKind kind);

  const ModelConfig& config() const { return config_; }
  ModelKind kind() const { return kind_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Var encode(const TokenSeq& src) const;

  /// Next-token logits (one row per decoder input token). The phrase model
  /// needs the encoder layout; rows that ran past their encoder span are
  /// appended to `fallback` when given.
  Var decode(const Var& enc, const TokenSeq& dec_in, const EncoderLayout* layout = nullptr,
             std::vector<std::size_t>* fallback = nullptr) const;

  Var logits(const TokenSeq& src, const TokenSeq& dec_in, const EncoderLayout* layout = nullptr) const {
    return decode(encode(src), dec_in, layout);
  }

 private:
  Var embed(const TokenSeq& seq) const;
  void check_length(std::size_t n, const char* what) const;

  ModelConfig config_;
  ModelKind kind_;
  ParamStore params_;
  Var embedding_;
  std::vector<EncoderLayer> encoder_;
  LayerNorm encoder_norm_;
  std::vector<DecoderLayer> decoder_;
  std::vector<GatedDecoderLayer> gated_;
  LayerNorm decoder_norm_;
  Linear head_;
};

}  // namespace melotrans::mgm
