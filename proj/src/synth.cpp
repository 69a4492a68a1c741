#include "lexner/synth.h"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_set>

#include "lexner/error.h"
#include "lexner/random.h"

namespace lexner {

namespace {

constexpr std::array<const char*, 8> kLabels = {
    "/person", "/location", "/organization", "/product",
    "/event",  "/art/film", "/organization/company", "/location/city"};
constexpr std::array<const char*, 8> kNerTypes = {"PER", "LOC", "ORG", "PROD",
                                                  "EVT", "FILM", "COMP", "CITY"};
constexpr std::array<const char*, 6> kSuffixes = {"ian", "s", "ese", "ite", "ers", "ia"};

std::string syllable(Rng& rng) {
  static constexpr std::string_view kOnset = "bdfgklmnprstvz";
  static constexpr std::string_view kVowel = "aeiou";
  static constexpr std::string_view kCoda = "lnrst";
  std::string s;
  s += kOnset[rng.below(kOnset.size())];
  s += kVowel[rng.below(kVowel.size())];
  if (rng.bernoulli(0.4)) s += kCoda[rng.below(kCoda.size())];
  return s;
}

std::string fresh_word(Rng& rng, int min_syl, int max_syl, std::set<std::string>& used) {
  for (;;) {
    std::string w;
    const int n = min_syl + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_syl - min_syl + 1)));
    for (int i = 0; i < n; ++i) w += syllable(rng);
    if (used.insert(w).second) return w;
  }
}

std::string capitalized(const std::string& w) {
  std::string out = w;
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 32);
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

// Appends `n` tokens, each a context word of `type` with probability
// `cue`, otherwise a filler.
void add_context(const SynthWorld& world, int type, int n, double cue, Rng& rng,
                 std::vector<std::string>& tokens) {
  for (int i = 0; i < n; ++i) {
    if (type >= 0 && rng.bernoulli(cue)) {
      tokens.push_back(pick(world.contexts[static_cast<std::size_t>(type)], rng));
    } else {
      tokens.push_back(pick(world.fillers, rng));
    }
  }
}

}  // namespace

SynthWorld make_world(const SynthWorldConfig& config) {
  if (config.types < 1 || config.types > static_cast<int>(kLabels.size())) {
    throw DataError("synthetic worlds have 1 to 8 types");
  }
  Rng rng(config.seed);
  SynthWorld world;
  std::vector<std::string> labels(kLabels.begin(), kLabels.begin() + config.types);
  world.inventory = TypeInventory(labels);
  world.ner_types.assign(kNerTypes.begin(), kNerTypes.begin() + config.types);
  std::set<std::string> used;
  for (int i = 0; i < config.fillers; ++i) world.fillers.push_back(fresh_word(rng, 1, 2, used));
  world.contexts.resize(static_cast<std::size_t>(config.types));
  world.entities.resize(static_cast<std::size_t>(config.types));
  world.variants.resize(static_cast<std::size_t>(config.types));
  for (auto& ctx : world.contexts) {
    for (int i = 0; i < config.contexts_per_type; ++i) ctx.push_back(fresh_word(rng, 2, 2, used));
  }
  for (auto& ents : world.entities) {
    for (int i = 0; i < config.entities_per_type; ++i) ents.push_back(fresh_word(rng, 3, 4, used));
  }
  for (std::size_t t = 0; t < world.entities.size(); ++t) {
    for (int i = 0; i < config.variants_per_type; ++i) {
      const auto& base = world.entities[t][static_cast<std::size_t>(i) % world.entities[t].size()];
      std::string v = base + kSuffixes[rng.below(kSuffixes.size())];
      if (used.insert(v).second) world.variants[t].push_back(v);
    }
  }
  return world;
}

std::vector<Sentence> distant_corpus(const SynthWorld& world, int sentences,
                                     std::uint64_t seed) {
  Rng rng(seed);
  const auto types = world.entities.size();
  std::vector<Sentence> out;
  out.reserve(static_cast<std::size_t>(sentences));
  for (int n = 0; n < sentences; ++n) {
    Sentence s;
    const int segments = rng.bernoulli(0.2) ? 2 : 1;
    for (int seg = 0; seg < segments; ++seg) {
      const int type = static_cast<int>(rng.below(types));
      std::vector<std::string> ctx;
      add_context(world, type, 4 + static_cast<int>(rng.below(4)), 0.6, rng, ctx);
      const auto at = rng.below(ctx.size() + 1);
      const int start = static_cast<int>(s.tokens.size() + at);
      s.tokens.insert(s.tokens.end(), ctx.begin(), ctx.begin() + static_cast<long>(at));
      s.tokens.push_back(capitalized(pick(world.entities[static_cast<std::size_t>(type)], rng)));
      s.tokens.insert(s.tokens.end(), ctx.begin() + static_cast<long>(at), ctx.end());
      s.mentions.push_back({start, start + 1, world.inventory.label(static_cast<std::size_t>(type))});
    }
    s.tokens.push_back(".");
    s.tags = mentions_to_tags(s.mentions, s.size(), TagScheme::kIob2);
    out.push_back(std::move(s));
  }
  return out;
}

SynthNerData make_ner_data(const SynthWorld& world, const SynthNerConfig& config) {
  Rng rng(config.seed);
  const auto types = world.entities.size();
  const auto cut = static_cast<std::size_t>(config.train_entities_per_type);
  std::vector<std::vector<std::string>> seen(types), unseen(types);
  for (std::size_t t = 0; t < types; ++t) {
    const auto& ents = world.entities[t];
    const std::size_t k = std::min(cut, ents.size());
    seen[t].assign(ents.begin(), ents.begin() + static_cast<long>(k));
    unseen[t].assign(ents.begin() + static_cast<long>(k), ents.end());
    if (unseen[t].empty()) unseen[t] = seen[t];
  }

  const auto make = [&](int count, bool allow_unseen) {
    std::vector<Sentence> out;
    for (int n = 0; n < count; ++n) {
      Sentence s;
      const bool cue = rng.bernoulli(config.cue_rate);
      const int segments = rng.bernoulli(0.3) ? 2 : 1;
      for (int seg = 0; seg < segments; ++seg) {
        const int type = static_cast<int>(rng.below(types));
        const auto& pool = allow_unseen && rng.bernoulli(config.unseen_rate)
                               ? unseen[static_cast<std::size_t>(type)]
                               : seen[static_cast<std::size_t>(type)];
        add_context(world, cue ? type : -1, 1 + static_cast<int>(rng.below(3)), 0.7, rng,
                    s.tokens);
        const int start = static_cast<int>(s.tokens.size());
        s.tokens.push_back(capitalized(pick(pool, rng)));
        if (rng.bernoulli(config.two_token_rate)) s.tokens.push_back(capitalized(pick(pool, rng)));
        s.mentions.push_back({start, static_cast<int>(s.tokens.size()),
                              world.ner_types[static_cast<std::size_t>(type)]});
        add_context(world, cue ? type : -1, 1 + static_cast<int>(rng.below(3)), 0.7, rng,
                    s.tokens);
      }
      s.tokens.push_back(".");
      s.tags = mentions_to_tags(s.mentions, s.size(), TagScheme::kIob2);
      out.push_back(std::move(s));
    }
    return out;
  };

  SynthNerData data;
  data.train = make(config.train, false);
  data.dev = make(config.dev, true);
  data.test = make(config.test, true);
  for (std::size_t t = 0; t < types; ++t) {
    Gazetteer g;
    g.name = world.ner_types[t];
    for (const auto& e : seen[t]) g.add({e});
    data.gazetteers.push_back(std::move(g));
  }
  return data;
}

double oov_mention_rate(const std::vector<Sentence>& train,
                        const std::vector<Sentence>& sentences) {
  std::unordered_set<std::string> vocab;
  for (const auto& s : train) vocab.insert(s.tokens.begin(), s.tokens.end());
  std::size_t total = 0, oov = 0;
  for (const auto& s : sentences) {
    for (const auto& m : s.mentions) {
      for (int i = m.start; i < m.end; ++i) {
        ++total;
        if (!vocab.contains(s.tokens[static_cast<std::size_t>(i)])) ++oov;
      }
    }
  }
  return total == 0 ? 0.0 : double(oov) / double(total);
}

}  // namespace lexner
