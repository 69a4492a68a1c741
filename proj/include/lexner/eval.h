#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lexner/corpus.h"

namespace lexner {

struct Scores {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  // Percentages.
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  std::int64_t predicted() const { return tp + fp; }
  std::int64_t gold() const { return tp + fn; }
  // Recomputes P/R/F1 from the counts; all zero when undefined.
  void finalize();
};

struct Breakdown {
  Scores overall;
  std::map<std::string, Scores> per_type;
  std::int64_t tokens = 0;
  std::int64_t correct_tokens = 0;
};

struct EvalReport : Breakdown {
  std::map<std::string, Breakdown> per_group;
};

// Mention-level micro P/R/F1. Gold tags are decoded strictly under
// `gold_scheme`; predictions leniently (conlleval chunk rules). Throws
// DataError naming the first sentence/token where the inputs diverge.
EvalReport evaluate(std::span<const Sentence> gold, std::span<const Sentence> pred,
                    TagScheme gold_scheme = TagScheme::kBilou);

EvalReport evaluate_by_group(std::span<const Sentence> gold,
                             std::span<const Sentence> pred,
                             const std::function<std::string(std::size_t)>& group_of,
                             TagScheme gold_scheme = TagScheme::kBilou);

// conlleval's layout: a summary line, the overall line, one line per type.
std::string format_conlleval(const Breakdown& report);
// Overall, per-type and per-group blocks.
std::string format_report(const EvalReport& report);
// Flat "key = value" document with full precision.
std::string format_key_values(const EvalReport& report);

}  // namespace lexner
