#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lexner/corpus.h"
#include "lexner/gazetteer.h"

namespace lexner {

// A generated world of entity types, entity words and type-specific context
// words. Entity words of every type come from the same syllable inventory,
// so their spelling carries no type information.
struct SynthWorldConfig {
  int types = 6;  // at most 8
  int entities_per_type = 60;
  // Held-out morphological variants (entity + suffix) per type.
  int variants_per_type = 15;
  int contexts_per_type = 24;
  int fillers = 80;
  std::uint64_t seed = 1;
};

struct SynthWorld {
  TypeInventory inventory;                         // "/person", "/art/film", ...
  std::vector<std::string> ner_types;              // "PER", "FILM", ...
  std::vector<std::vector<std::string>> entities;  // lowercase, per type
  std::vector<std::vector<std::string>> variants;  // per type, absent from the corpus
  std::vector<std::vector<std::string>> contexts;  // per type
  std::vector<std::string> fillers;
};

SynthWorld make_world(const SynthWorldConfig& config);

// Distantly annotated sentences: IOB2 tags and mentions typed with inventory
// labels. Entity choice is uniform per type, so each entity appears about
// sentences * 1.2 / (types * entities_per_type) times.
std::vector<Sentence> distant_corpus(const SynthWorld& world, int sentences,
                                     std::uint64_t seed);

struct SynthNerConfig {
  int train = 1500;
  int dev = 400;
  int test = 1000;
  // Entities per type available to the training split; the rest are only
  // used by dev/test.
  int train_entities_per_type = 30;
  // Chance that a dev/test mention draws from the unseen entities.
  double unseen_rate = 0.5;
  // Chance that a sentence carries type-revealing context words.
  double cue_rate = 0.3;
  double two_token_rate = 0.2;
  std::uint64_t seed = 1;
};

struct SynthNerData {
  std::vector<Sentence> train, dev, test;  // IOB2 tags, ner_types
  std::vector<Gazetteer> gazetteers;       // training entities per type
};

SynthNerData make_ner_data(const SynthWorld& world, const SynthNerConfig& config);

// Fraction of mention tokens in `sentences` whose surface form never occurs
// in `train`.
double oov_mention_rate(const std::vector<Sentence>& train,
                        const std::vector<Sentence>& sentences);

}  // namespace lexner
