#include "lexner/eval.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "lexner/error.h"

namespace lexner {

void Scores::finalize() {
  precision = predicted() > 0 ? 100.0 * double(tp) / double(predicted()) : 0.0;
  recall = gold() > 0 ? 100.0 * double(tp) / double(gold()) : 0.0;
  f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

void check_aligned(std::span<const Sentence> gold, std::span<const Sentence> pred) {
  if (gold.size() != pred.size()) {
    const std::size_t first = std::min(gold.size(), pred.size());
    throw DataError("gold has " + std::to_string(gold.size()) +
                    " sentences, prediction has " + std::to_string(pred.size()) +
                    "; first unmatched sentence " + std::to_string(first + 1));
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold[s];
    const auto& p = pred[s];
    if (g.tokens.size() != p.tokens.size()) {
      throw DataError("sentence " + std::to_string(s + 1) + ": gold has " +
                      std::to_string(g.tokens.size()) + " tokens, prediction has " +
                      std::to_string(p.tokens.size()));
    }
    for (std::size_t t = 0; t < g.tokens.size(); ++t) {
      if (g.tokens[t] != p.tokens[t]) {
        throw DataError("sentence " + std::to_string(s + 1) + " token " +
                        std::to_string(t + 1) + ": '" + g.tokens[t] + "' vs '" +
                        p.tokens[t] + "'");
      }
    }
    if (g.tags.size() != g.tokens.size() || p.tags.size() != p.tokens.size()) {
      throw DataError("sentence " + std::to_string(s + 1) + " lacks tags");
    }
  }
}

void accumulate(const Sentence& gold, const Sentence& pred, TagScheme gold_scheme,
                Breakdown* out) {
  std::vector<Mention> g;
  try {
    g = tags_to_mentions(gold.tags, gold_scheme, DecodeMode::kStrict);
  } catch (const ValidationError& e) {
    throw DataError(std::string("gold annotation invalid (sentence starting line ") +
                    std::to_string(gold.first_line) + "): " + e.what());
  }
  const auto p = tags_to_mentions(pred.tags, TagScheme::kBilou, DecodeMode::kLenient);
  const std::set<Mention> gold_set(g.begin(), g.end());
  const std::set<Mention> pred_set(p.begin(), p.end());
  for (const auto& m : pred_set) {
    auto& type = out->per_type[m.type];
    if (gold_set.count(m)) {
      ++out->overall.tp;
      ++type.tp;
    } else {
      ++out->overall.fp;
      ++type.fp;
    }
  }
  for (const auto& m : gold_set) {
    if (!pred_set.count(m)) {
      ++out->overall.fn;
      ++out->per_type[m.type].fn;
    }
  }
  const auto gt = mentions_to_tags(g, gold.size(), TagScheme::kBilou);
  const auto pt = mentions_to_tags(p, pred.size(), TagScheme::kBilou);
  out->tokens += static_cast<std::int64_t>(gold.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == pt[i]) ++out->correct_tokens;
  }
}

void finalize(Breakdown* b) {
  b->overall.finalize();
  for (auto& [_, s] : b->per_type) s.finalize();
}

}  // namespace

EvalReport evaluate(std::span<const Sentence> gold, std::span<const Sentence> pred,
                    TagScheme gold_scheme) {
  check_aligned(gold, pred);
  EvalReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    accumulate(gold[s], pred[s], gold_scheme, &report);
  }
  finalize(&report);
  return report;
}

EvalReport evaluate_by_group(std::span<const Sentence> gold,
                             std::span<const Sentence> pred,
                             const std::function<std::string(std::size_t)>& group_of,
                             TagScheme gold_scheme) {
  check_aligned(gold, pred);
  EvalReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    accumulate(gold[s], pred[s], gold_scheme, &report);
    accumulate(gold[s], pred[s], gold_scheme, &report.per_group[group_of(s)]);
  }
  finalize(&report);
  for (auto& [_, b] : report.per_group) finalize(&b);
  return report;
}

std::string format_conlleval(const Breakdown& report) {
  std::ostringstream out;
  char line[256];
  const auto& o = report.overall;
  std::snprintf(line, sizeof line,
                "processed %lld tokens with %lld phrases; found: %lld phrases; "
                "correct: %lld.\n",
                static_cast<long long>(report.tokens), static_cast<long long>(o.gold()),
                static_cast<long long>(o.predicted()), static_cast<long long>(o.tp));
  out << line;
  const double accuracy =
      report.tokens > 0 ? 100.0 * double(report.correct_tokens) / double(report.tokens)
                        : 0.0;
  std::snprintf(line, sizeof line,
                "accuracy: %6.2f%%; precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f\n",
                accuracy, o.precision, o.recall, o.f1);
  out << line;
  for (const auto& [type, s] : report.per_type) {
    std::snprintf(line, sizeof line,
                  "%17s: precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f  %lld\n",
                  type.c_str(), s.precision, s.recall, s.f1,
                  static_cast<long long>(s.predicted()));
    out << line;
  }
  return out.str();
}

std::string format_report(const EvalReport& report) {
  std::string out = format_conlleval(report);
  for (const auto& [group, b] : report.per_group) {
    out += "\n[group " + group + "]\n";
    out += format_conlleval(b);
  }
  return out;
}

namespace {

void emit_scores(std::ostringstream& out, const std::string& prefix, const Scores& s) {
  char buf[64];
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << prefix << key << " = " << buf << '\n';
  };
  put("precision", s.precision);
  put("recall", s.recall);
  put("f1", s.f1);
  out << prefix << "tp = " << s.tp << '\n';
  out << prefix << "fp = " << s.fp << '\n';
  out << prefix << "fn = " << s.fn << '\n';
}

void emit_breakdown(std::ostringstream& out, const std::string& prefix,
                    const Breakdown& b) {
  out << prefix << "tokens = " << b.tokens << '\n';
  out << prefix << "correct_tokens = " << b.correct_tokens << '\n';
  emit_scores(out, prefix + "overall.", b.overall);
  for (const auto& [type, s] : b.per_type) emit_scores(out, prefix + "type." + type + ".", s);
}

}  // namespace

std::string format_key_values(const EvalReport& report) {
  std::ostringstream out;
  emit_breakdown(out, "", report);
  for (const auto& [group, b] : report.per_group) {
    emit_breakdown(out, "group." + group + ".", b);
  }
  return out.str();
}

}  // namespace lexner
