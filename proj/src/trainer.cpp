#include "lexner/trainer.h"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lexner/error.h"
#include "lexner/eval.h"

namespace lexner {

namespace {

void mark_singletons(std::span<const Sentence> train, std::vector<EncodedSentence>& enc) {
  std::unordered_map<std::string, int> counts;
  for (const auto& s : train) {
    for (const auto& tok : s.tokens) ++counts[tok];
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto& flags = enc[i].singleton;
    for (std::size_t t = 0; t < train[i].size(); ++t) flags[t] = counts[train[i].tokens[t]] == 1;
  }
}

double score(const TaggerModel& model, std::span<const Sentence> gold,
             std::span<const EncodedSentence> encoded) {
  const auto tags = tag_corpus(model, encoded);
  std::vector<Sentence> pred(gold.begin(), gold.end());
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i].tags = tags[i];
  return evaluate(gold, pred, model.config.input_scheme).overall.f1;
}

}  // namespace

std::vector<Sentence> predict(const TaggerModel& model, std::span<const Sentence> sentences) {
  const auto encoded = encode_corpus(model, sentences, false);
  const auto tags = tag_corpus(model, encoded);
  std::vector<Sentence> out(sentences.begin(), sentences.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].tags = tags[i];
  return out;
}

double f1_score(const TaggerModel& model, std::span<const Sentence> gold) {
  return score(model, gold, encode_corpus(model, gold, false));
}

TrainResult train_tagger(std::span<const Sentence> train, std::span<const Sentence> dev,
                         const TaggerConfig& config, FeatureResources resources,
                         const TrainOptions& options) {
  TrainResult result{init_model(config, train, options.pretrained, std::move(resources), dev),
                     {}};
  TaggerModel& model = result.model;
  TrainHistory& history = result.history;

  std::vector<EncodedSentence> enc_train = encode_corpus(model, train, true);
  mark_singletons(train, enc_train);
  const std::span<const Sentence> select = dev.empty() ? train : dev;
  const std::vector<EncodedSentence> enc_select = encode_corpus(model, select, false);

  TaggerParams velocity = model.params.zeros_like();
  TaggerParams best = model.params;
  // Separate stream from the one init_model drew the weights from.
  Rng rng(Rng::mix(config.seed) ^ 0x747261696e696e67ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = config.learning_rate * std::pow(config.decay_rate, epoch);
    std::vector<const EncodedSentence*> batch;
    std::vector<std::uint64_t> seeds;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      seeds.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k) {
        batch.push_back(&enc_train[order[k]]);
        seeds.push_back(rng.fork());
      }
      const BatchGradients g = options.parallel ? nll_and_gradients(model, batch, seeds)
                                                : nll_and_gradients_serial(model, batch, seeds);
      if (!std::isfinite(g.loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      rec.loss += g.loss;
      rec.max_grad_norm =
          std::max(rec.max_grad_norm, sgd_step(model.params, g.grads, velocity, config, epoch));
    }
    rec.dev_f1 = score(model, select, enc_select);
    history.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    if (history.best_epoch < 0 || rec.dev_f1 > history.best_dev_f1) {
      history.best_epoch = epoch;
      history.best_dev_f1 = rec.dev_f1;
      best = model.params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      history.stopped_early = epoch + 1 < config.max_epochs;
      break;
    }
  }
  model.params = std::move(best);
  return result;
}

}  // namespace lexner
