/**
 * @file train.cpp
 */

#include "melotrans/mgm/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace melotrans::mgm {
namespace {

TokenSeq drop_last(const TokenSeq& s) { return TokenSeq(s.begin(), s.end() - 1); }

std::vector<int> shifted_targets(const TokenSeq& s) {
  return remi::Vocabulary::instance().to_indices(TokenSeq(s.begin() + 1, s.end()));
}

const EncoderLayout* layout_for(const EncoderDecoder& model, const Example& ex) {
  return model.kind() == ModelKind::kPhrase ? &ex.layout : nullptr;
}

}  // namespace

Example branch_example(const TokenSeq& motif_region, const TokenSeq& variant_region) {
  Example ex;
  ex.src = motif_region;
  ex.target.push_back(Token::bos());
  ex.target.insert(ex.target.end(), variant_region.begin(), variant_region.end());
  ex.target.push_back(Token::eos());
  return ex;
}

Adam::Adam(ParamStore& params, double lr, double beta1, double beta2, double eps)
    : params_(params), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& [name, var] : params_.all()) {
    m_.push_back(Matrix::Zero(var->value.rows(), var->value.cols()));
    v_.push_back(Matrix::Zero(var->value.rows(), var->value.cols()));
  }
}

void Adam::step(double grad_scale) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  const auto& all = params_.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    Node& p = *all[i].second;
    if (p.grad.size() == 0) continue;
    const Matrix g = p.grad * grad_scale;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    p.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
  params_.zero_grad();
}

TrainOptions train_options(const ModelConfig& config) {
  TrainOptions o;
  o.epochs = config.epochs;
  o.batch = config.batch;
  o.lr = config.lr;
  o.beta1 = config.beta1;
  o.beta2 = config.beta2;
  o.seed = config.seed;
  return o;
}

Var example_loss(const EncoderDecoder& model, const Example& ex) {
  if (ex.target.size() < 2) throw std::invalid_argument("training target needs at least BOS and one token");
  const Var logits = model.logits(ex.src, drop_last(ex.target), layout_for(model, ex));
  return cross_entropy(logits, shifted_targets(ex.target));
}

TrainReport train(EncoderDecoder& model, const std::vector<Example>& data, const TrainOptions& options) {
  if (data.empty()) throw std::invalid_argument("training corpus is empty");
  if (options.epochs < 1 || options.batch < 1) throw std::invalid_argument("epochs and batch must be positive");
  Adam adam(model.params(), options.lr, options.beta1, options.beta2);
  ttmm::Rng rng(options.seed ^ 0x5eedULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  model.params().zero_grad();

  TrainReport report;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double nll_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(options.batch));
      for (std::size_t k = start; k < stop; ++k) {
        const Var loss = example_loss(model, data[order[k]]);
        nll_sum += loss->value(0, 0);
        backward(loss);
      }
      double scale = 1.0 / static_cast<double>(stop - start);
      if (options.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& [name, var] : model.params().all()) {
          if (var->grad.size() != 0) sq += var->grad.squaredNorm();
        }
        const double norm = std::sqrt(sq) * scale;
        if (norm > options.clip_norm) scale *= options.clip_norm / norm;
      }
      adam.step(scale);
    }
    const double mean = nll_sum / static_cast<double>(data.size());
    report.epoch_nll.push_back(mean);
    report.epochs_run = epoch;
    if (options.log != nullptr) *options.log << epoch << '\t' << options.tag << '\t' << mean << '\n';
    if (!std::isfinite(mean)) throw std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
    if (options.stop_when && options.stop_when(epoch, mean)) break;
  }
  return report;
}

Accuracy token_accuracy(const EncoderDecoder& model, const std::vector<Example>& data) {
  NoGradGuard no_grad;
  Accuracy acc;
  for (const auto& ex : data) {
    const Var logits = model.logits(ex.src, drop_last(ex.target), layout_for(model, ex));
    const auto targets = shifted_targets(ex.target);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Eigen::Index best = 0;
      logits->value.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
      acc.correct += best == targets[i];
      ++acc.total;
    }
  }
  return acc;
}

}  // namespace melotrans::mgm
