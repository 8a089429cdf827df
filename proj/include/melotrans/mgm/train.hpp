/**
 * @file train.hpp
 * @brief Teacher-forced training with Adam, and token accuracy.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "melotrans/mgm/model.hpp"

namespace melotrans::mgm {

/// One source/target pair. `target` is the whole decoder sequence
/// (BOS ... EOS); the model reads target[0..n-2] and predicts target[1..n-1].
struct Example {
  TokenSeq src;
  TokenSeq target;
  EncoderLayout layout;  ///< used by the phrase model only
};

/// Branch pair: encoder reads the motif region, decoder emits BOS variant EOS.
Example branch_example(const TokenSeq& motif_region, const TokenSeq& variant_region);

class Adam {
 public:
  Adam(ParamStore& params, double lr, double beta1, double beta2, double eps = 1e-8);
  /// Applies grads multiplied by grad_scale, then clears them.
  void step(double grad_scale = 1.0);
  int steps() const { return t_; }

 private:
  ParamStore& params_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Matrix> m_, v_;
};

struct TrainOptions {
  int epochs = 200;
  int batch = 4;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  std::uint64_t seed = 1;
  double clip_norm = 1.0;  ///< global gradient norm cap per step; <= 0 disables
  std::ostream* log = nullptr;  ///< receives "epoch<TAB>tag<TAB>nll" lines
  std::string tag = "model";
  /// Called after each epoch with (1-based epoch, mean NLL); true stops training.
  std::function<bool(int, double)> stop_when;
};

TrainOptions train_options(const ModelConfig& config);

struct TrainReport {
  std::vector<double> epoch_nll;
  int epochs_run = 0;
};

/// Mean per-token negative log-likelihood graph for one example.
Var example_loss(const EncoderDecoder& model, const Example& ex);

TrainReport train(EncoderDecoder& model, const std::vector<Example>& data, const TrainOptions& options);

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Teacher-forced argmax accuracy over all target tokens.
Accuracy token_accuracy(const EncoderDecoder& model, const std::vector<Example>& data);

}  // namespace melotrans::mgm
