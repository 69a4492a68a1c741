#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lexner/corpus.h"
#include "lexner/embed.h"
#include "lexner/tagger.h"

namespace lexner {

struct EpochRecord {
  int epoch = 0;
  double loss = 0;          // summed training NLL over the epoch
  double dev_f1 = 0;
  double learning_rate = 0;
  double max_grad_norm = 0;  // before clipping
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_dev_f1 = 0;
  bool stopped_early = false;
};

struct TrainOptions {
  const EmbeddingTable* pretrained = nullptr;
  // Batch gradients via the OpenMP kernel; false uses the serial reference.
  bool parallel = true;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  TaggerModel model;
  TrainHistory history;
};

// Mini-batch SGD with early stopping on dev F1. The returned model holds the
// parameters of the best dev epoch. An empty dev set selects on train F1.
TrainResult train_tagger(std::span<const Sentence> train, std::span<const Sentence> dev,
                         const TaggerConfig& config, FeatureResources resources,
                         const TrainOptions& options = {});

// Tags every sentence and returns copies carrying the BILOU predictions.
std::vector<Sentence> predict(const TaggerModel& model, std::span<const Sentence> sentences);

// Mention F1 of the model on tagged sentences (gold in config.input_scheme).
double f1_score(const TaggerModel& model, std::span<const Sentence> gold);

}  // namespace lexner
