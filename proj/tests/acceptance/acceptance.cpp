// Acceptance suite. Prints one "criterion N: PASS|FAIL ..." line per
// criterion run; exits non-zero when any of them fails.
//
//   lexner_acceptance            run all criteria
//   lexner_acceptance 3 5        run the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "lexner/corpus.h"
#include "lexner/crf.h"
#include "lexner/embed.h"
#include "lexner/eval.h"
#include "lexner/gradcheck.h"
#include "lexner/lexsim.h"
#include "lexner/random.h"
#include "lexner/synth.h"
#include "lexner/tagger.h"
#include "lexner/text.h"
#include "lexner/trainer.h"

using namespace lexner;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------------ 1

// Enumerates all L^T paths in lexicographic order.
template <typename F>
void for_each_path(int T, int L, F&& f) {
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  for (;;) {
    f(path);
    int t = T - 1;
    while (t >= 0 && ++path[static_cast<std::size_t>(t)] == L) path[static_cast<std::size_t>(t--)] = 0;
    if (t < 0) return;
  }
}

Outcome crf_oracle() {
  const auto start = Clock::now();
  Rng rng(2024);
  int instances = 0, partition_bad = 0, viterbi_bad = 0, ties = 0;
  double worst = 0;
  for (int n = 0; n < 400; ++n) {
    const int T = 1 + static_cast<int>(rng.below(6));
    const int L = 1 + static_cast<int>(rng.below(5));
    // Every other instance uses scores from {-1, 0, 1} to force ties.
    const bool quantized = n % 2 == 1;
    const auto draw = [&] {
      return quantized ? double(static_cast<int>(rng.below(3)) - 1) : rng.normal();
    };
    Eigen::MatrixXd e(T, L), tr(L + 2, L + 2);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = draw();
    for (Eigen::Index i = 0; i < tr.size(); ++i) tr.data()[i] = draw();

    std::vector<double> scores;
    std::vector<int> best_path;
    double best = -std::numeric_limits<double>::infinity();
    int at_best = 0;
    for_each_path(T, L, [&](const std::vector<int>& p) {
      const double s = crf_path_score(e, tr, p);
      scores.push_back(s);
      if (s > best) {
        best = s;
        best_path = p;
        at_best = 1;
      } else if (s == best) {
        ++at_best;
      }
    });
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0;
    for (double s : scores) sum += std::exp(s - m);
    const double brute = m + std::log(sum);
    const double err = std::abs(crf_log_partition(e, tr) - brute);
    worst = std::max(worst, err);
    if (err > 1e-8) ++partition_bad;
    if (viterbi_decode(e, tr).path != best_path) ++viterbi_bad;
    if (at_best > 1) ++ties;
    ++instances;
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = instances >= 200 && partition_bad == 0 && viterbi_bad == 0 && secs < 10;
  o.detail = fmt("%d instances (%d with tied optima), max |logZ err| %.2e, %d partition "
                 "and %d Viterbi mismatches, %.2fs",
                 instances, ties, worst, partition_bad, viterbi_bad, secs);
  return o;
}

// ------------------------------------------------------------------ 2

std::shared_ptr<LSTable> random_ls_table(const TypeInventory& inv,
                                         const std::vector<Sentence>& sentences, Rng& rng) {
  auto table = std::make_shared<LSTable>(inv);
  for (const auto& s : sentences) {
    for (const auto& tok : s.tokens) {
      std::vector<float> raw(inv.size());
      for (auto& x : raw) x = static_cast<float>(rng.uniform(-1, 1));
      table->insert(lowercase(tok), minmax_scale(raw));
    }
  }
  return table;
}

Outcome gradient_fidelity() {
  const auto start = Clock::now();
  std::vector<Sentence> batch = parse_column_file(
      "Anna B-PER\nSmith I-PER\nvisited O\nParis B-LOC\n.\tO\n\n"
      "The O\nACME B-ORG\nboard O\n\n"
      "Oslo B-LOC\nmet O\nBob B-PER\n");
  Rng rng(7);
  FeatureResources res;
  res.ls_table = random_ls_table(TypeInventory({"/person", "/location", "/organization"}),
                                 batch, rng);
  Gazetteer g;
  g.name = "cities";
  g.add({"paris"});
  g.add({"oslo"});
  res.gazetteers.push_back(g);

  TaggerConfig cfg;
  cfg.word_dim = 4;
  cfg.word_hidden = 3;
  cfg.char_emb_dim = 3;
  cfg.char_hidden = 2;
  cfg.cap_emb_dim = 2;
  cfg.features = FeatureSet::parse("word+char+cap+ls+gaz");
  cfg.seed = 11;
  TaggerModel model = init_model(cfg, batch, nullptr, res);
  // Move the transitions and the projection off their symmetric init so no
  // block sits at a stationary point.
  Rng jitter(3);
  for (auto& [name, m] : model.params.tensors()) {
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] += 0.1 * jitter.normal();
  }
  const auto encoded = encode_corpus(model, batch, true);

  GradcheckOptions opts;
  opts.step = 1e-5;
  opts.tolerance = 1e-4;
  const GradcheckResult r = gradcheck(model, encoded, opts);
  const double secs = seconds_since(start);
  std::string worst_block;
  for (const auto& b : r.blocks) {
    if (b.rel_error == r.max_rel_error) worst_block = b.name;
  }
  Outcome o;
  o.pass = r.passed && r.blocks.size() == 18 && secs < 60;
  o.detail = fmt("%zu blocks, %zu parameters, max relative error %.2e (%s), %.2fs",
                 r.blocks.size(), model.params.num_values(), r.max_rel_error,
                 worst_block.c_str(), secs);
  return o;
}

// ------------------------------------------------------------------ 3

Outcome minmax_example() {
  const std::vector<float> raw{0.095f, 0.20f, 0.76f};
  const auto s = minmax_scale(raw);
  Outcome o;
  o.pass = std::abs(s[0] + 1) < 1e-6 && std::abs(s[1] + 0.67) <= 0.01 &&
           std::abs(s[2] - 1) < 1e-6;
  o.detail = fmt("[0.095, 0.20, 0.76] -> [%.4f, %.4f, %.4f]; expected [-1, -0.67 +/- 0.01, 1]",
                 s[0], s[1], s[2]);
  if (!o.pass) o.detail += "; 2(0.20-0.095)/(0.76-0.095)-1 = -0.6842 exactly";
  return o;
}

// ------------------------------------------------------------------ 4

struct Fixture {
  const char* name;
  std::vector<std::vector<std::string>> gold, pred;  // IOB2 per sentence
  double p, r, f;
};

Outcome conlleval_parity() {
  const std::vector<Fixture> fixtures = {
      {"exact match", {{"B-PER", "I-PER", "O", "B-LOC"}}, {{"B-PER", "I-PER", "O", "B-LOC"}},
       100, 100, 100},
      {"type mismatch", {{"B-PER", "I-PER", "O"}}, {{"B-ORG", "I-ORG", "O"}}, 0, 0, 0},
      {"boundary mismatch", {{"B-PER", "I-PER", "O", "B-LOC"}}, {{"B-PER", "O", "O", "B-LOC"}},
       50, 50, 50},
      {"orphan I repaired", {{"O", "B-ORG", "I-ORG", "O", "B-PER"}},
       {{"O", "I-ORG", "I-ORG", "O", "B-PER"}}, 100, 100, 100},
      {"type switch inside chunk", {{"B-PER", "I-PER", "O"}}, {{"B-PER", "I-LOC", "O"}}, 0, 0, 0},
      {"empty prediction", {{"B-PER", "O", "B-LOC"}}, {{"O", "O", "O"}}, 0, 0, 0},
      {"two sentences", {{"B-PER", "O", "B-LOC", "I-LOC"}, {"B-ORG", "O", "B-MISC"}},
       {{"B-PER", "O", "B-LOC", "O"}, {"B-ORG", "O", "O"}}, 66.67, 50.00, 57.14},
  };
  int ok = 0;
  std::string bad;
  for (const auto& fx : fixtures) {
    std::vector<Sentence> gold, pred;
    for (std::size_t i = 0; i < fx.gold.size(); ++i) {
      Sentence g;
      for (std::size_t t = 0; t < fx.gold[i].size(); ++t) g.tokens.push_back("w" + std::to_string(t));
      g.tags = fx.gold[i];
      Sentence p = g;
      p.tags = fx.pred[i];
      gold.push_back(g);
      pred.push_back(p);
    }
    const auto rep = evaluate(gold, pred, TagScheme::kIob2).overall;
    const auto two = [](double x) { return fmt("%.2f", x); };
    if (two(rep.precision) == two(fx.p) && two(rep.recall) == two(fx.r) &&
        two(rep.f1) == two(fx.f)) {
      ++ok;
    } else {
      bad += fmt(" [%s: got %.2f/%.2f/%.2f]", fx.name, rep.precision, rep.recall, rep.f1);
    }
  }
  Outcome o;
  o.pass = ok == static_cast<int>(fixtures.size()) && fixtures.size() >= 5;
  o.detail = fmt("%d/%zu fixtures match at two decimals", ok, fixtures.size()) + bad;
  return o;
}

// ------------------------------------------------------------------ 5

Outcome scheme_round_trip() {
  Rng rng(5);
  const std::vector<std::string> types{"PER", "LOC", "ORG", "MISC"};
  int mention_ok = 0, tags_ok = 0;
  const int trials = 1000;
  for (int n = 0; n < trials; ++n) {
    const int len = 1 + static_cast<int>(rng.below(15));
    std::vector<Mention> ms;
    for (int i = 0; i < len;) {
      if (rng.bernoulli(0.4)) {
        const int l = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(4, len - i))));
        ms.push_back({i, i + l, types[rng.below(types.size())]});
        i += l;
      } else {
        ++i;
      }
    }
    const auto bilou = mentions_to_tags(ms, static_cast<std::size_t>(len), TagScheme::kBilou);
    if (tags_to_mentions(bilou, TagScheme::kBilou) == ms) ++mention_ok;
    const auto iob2 = mentions_to_tags(ms, static_cast<std::size_t>(len), TagScheme::kIob2);
    const auto there = convert_scheme(iob2, TagScheme::kIob2, TagScheme::kBilou);
    if (convert_scheme(there, TagScheme::kBilou, TagScheme::kIob2) == iob2) ++tags_ok;
  }
  Outcome o;
  o.pass = mention_ok == trials && tags_ok == trials;
  o.detail = fmt("mentions->BILOU->mentions %d/%d, IOB2->BILOU->IOB2 %d/%d", mention_ok, trials,
                 tags_ok, trials);
  return o;
}

// ------------------------------------------------------------------ 6

std::vector<std::string> dual_stream(const std::vector<Sentence>& corpus,
                                     const TypeInventory& inv) {
  std::vector<Sentence> with_mentions = corpus;
  return build_dual_corpus(with_mentions, inv);
}

std::size_t argmax(const std::vector<float>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

Outcome distant_supervision() {
  const auto start = Clock::now();
  SynthWorldConfig wc;
  wc.seed = 6;
  const SynthWorld world = make_world(wc);
  const auto corpus = distant_corpus(world, 20000, 61);
  std::map<std::string, int> freq;
  for (const auto& s : corpus) {
    for (const auto& m : s.mentions) ++freq[lowercase(s.tokens[static_cast<std::size_t>(m.start)])];
  }
  int planted = 0, min_freq = 1 << 30;
  for (const auto& ents : world.entities) {
    for (const auto& e : ents) {
      ++planted;
      min_freq = std::min(min_freq, freq[e]);
    }
  }
  EmbedConfig ec;
  ec.dim = 50;
  ec.seed = 6;
  const EmbeddingTable table = train_skipgram(dual_stream(corpus, world.inventory), ec);

  int hit = 0, oov_hit = 0, oov_total = 0, oov_in_vocab = 0;
  for (std::size_t t = 0; t < world.entities.size(); ++t) {
    for (const auto& e : world.entities[t]) {
      if (argmax(ls_raw(e, table, world.inventory)) == t) ++hit;
    }
    for (const auto& v : world.variants[t]) {
      ++oov_total;
      if (table.contains(v)) ++oov_in_vocab;
      if (argmax(ls_raw(v, table, world.inventory)) == t) ++oov_hit;
    }
  }
  const double acc = 100.0 * hit / planted;
  const double oov_acc = 100.0 * oov_hit / std::max(1, oov_total);
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = corpus.size() >= 20000 && world.inventory.size() == 6 && planted >= 60 &&
           min_freq >= 20 && oov_in_vocab == 0 && acc >= 90 && oov_acc >= 80 && secs < 900;
  o.detail = fmt("%zu sentences, %d planted words (min freq %d), top-1 %.1f%%, OOV variants "
                 "top-1 %.1f%% (%d words, %d in vocab), %.0fs",
                 corpus.size(), planted, min_freq, acc, oov_acc, oov_total, oov_in_vocab, secs);
  return o;
}

// ------------------------------------------------------------------ 7

struct LsSetup {
  SynthWorld world;
  SynthNerData ner;
  std::shared_ptr<const LSTable> ls;
  std::shared_ptr<const EmbeddingTable> embeddings;
};

LsSetup ls_setup(int distant_sentences, int dim, const SynthNerConfig& nc) {
  LsSetup s;
  SynthWorldConfig wc;
  wc.seed = 70;
  s.world = make_world(wc);
  const auto corpus = distant_corpus(s.world, distant_sentences, 71);
  EmbedConfig ec;
  ec.dim = dim;
  ec.seed = 72;
  auto table = std::make_shared<EmbeddingTable>(
      train_skipgram(dual_stream(corpus, s.world.inventory), ec));
  s.ner = make_ner_data(s.world, nc);
  std::set<std::string> vocab;
  for (const auto* split : {&s.ner.train, &s.ner.dev, &s.ner.test}) {
    for (const auto& sent : *split) {
      for (const auto& tok : sent.tokens) vocab.insert(lowercase(tok));
    }
  }
  const std::vector<std::string> words(vocab.begin(), vocab.end());
  s.ls = std::make_shared<LSTable>(build_ls_table(words, *table, s.world.inventory));
  s.embeddings = table;
  return s;
}

TaggerConfig small_tagger(std::uint64_t seed) {
  TaggerConfig c;
  c.word_dim = 50;
  c.word_hidden = 32;
  c.char_emb_dim = 16;
  c.char_hidden = 16;
  c.cap_emb_dim = 10;
  c.max_epochs = 12;
  c.patience = 4;
  c.learning_rate = 0.02;
  c.seed = seed;
  return c;
}

std::pair<double, double> mean_stdev(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, xs.size() > 1 ? std::sqrt(ss / double(xs.size() - 1)) : 0.0};
}

Outcome synthetic_ablation() {
  const auto start = Clock::now();
  SynthNerConfig nc;
  nc.seed = 73;
  const LsSetup setup = ls_setup(12000, 50, nc);
  const double oov = oov_mention_rate(setup.ner.train, setup.ner.test);
  FeatureResources res;
  res.ls_table = setup.ls;
  res.ls_fallback = setup.embeddings;

  std::map<std::string, std::vector<double>> f1;
  for (const char* features : {"word+char+cap", "word+char+cap+ls"}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TaggerConfig cfg = small_tagger(seed);
      cfg.features = FeatureSet::parse(features);
      const auto run = train_tagger(setup.ner.train, setup.ner.dev, cfg, res);
      f1[features].push_back(f1_score(run.model, setup.ner.test));
    }
  }
  const auto [base_mean, base_sd] = mean_stdev(f1["word+char+cap"]);
  const auto [ls_mean, ls_sd] = mean_stdev(f1["word+char+cap+ls"]);
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = oov >= 0.30 && ls_mean >= base_mean + 2.0 && base_sd <= 1.0 && ls_sd <= 1.0 &&
           secs < 1800;
  o.detail = fmt("test OOV entity tokens %.1f%%; word+char+cap %.2f +/- %.2f, "
                 "word+char+cap+ls %.2f +/- %.2f (5 seeds), %.0fs",
                 100 * oov, base_mean, base_sd, ls_mean, ls_sd, secs);
  return o;
}

// ------------------------------------------------------------------ 8

Outcome overfit() {
  const auto start = Clock::now();
  SynthNerConfig nc;
  nc.train = 20;
  nc.dev = 1;
  nc.test = 1;
  nc.seed = 80;
  const LsSetup setup = ls_setup(12000, 50, nc);
  FeatureResources res;
  res.ls_table = setup.ls;
  res.ls_fallback = setup.embeddings;
  const TaggerConfig cfg;  // defaults, all blocks incl. LS
  const auto run = train_tagger(setup.ner.train, setup.ner.train, cfg, res);
  const double train_f1 = f1_score(run.model, setup.ner.train);
  // Diagnostic only: the same run with early stopping out of the way.
  TaggerConfig no_stop = cfg;
  no_stop.patience = cfg.max_epochs;
  const auto full = train_tagger(setup.ner.train, setup.ner.train, no_stop, res);
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = train_f1 == 100.0 && run.history.best_epoch < 50;
  o.detail = fmt("20 sentences, default config: training F1 %.2f (best epoch %d, stopped after "
                 "%zu); without early stopping: best %.2f at epoch %d of %zu; %.0fs",
                 train_f1, run.history.best_epoch + 1, run.history.epochs.size(),
                 full.history.best_dev_f1, full.history.best_epoch + 1,
                 full.history.epochs.size(), secs);
  return o;
}

// ------------------------------------------------------------------ 9 / 10

struct PipelineRun {
  std::string ls_bytes;
  std::vector<double> embed_loss;
  std::vector<double> tagger_loss;
  std::uint64_t hash_before = 0, hash_after = 0, model_hash = 0;
  std::string ls_bytes_after;
};

PipelineRun run_pipeline() {
  PipelineRun r;
  SynthWorldConfig wc;
  wc.seed = 90;
  const SynthWorld world = make_world(wc);
  const auto corpus = distant_corpus(world, 3000, 91);
  EmbedConfig ec;
  ec.dim = 20;
  ec.epochs = 3;
  ec.seed = 92;
  ec.workers = 1;
  SkipgramStats stats;
  auto table = std::make_shared<EmbeddingTable>(
      train_skipgram(dual_stream(corpus, world.inventory), ec, {}, &stats));
  r.embed_loss = stats.epoch_loss;
  SynthNerConfig nc;
  nc.train = 60;
  nc.dev = 20;
  nc.test = 1;
  nc.seed = 93;
  const auto ner = make_ner_data(world, nc);
  std::set<std::string> vocab;
  for (const auto* split : {&ner.train, &ner.dev}) {
    for (const auto& s : *split) {
      for (const auto& tok : s.tokens) vocab.insert(lowercase(tok));
    }
  }
  const std::vector<std::string> words(vocab.begin(), vocab.end());
  auto ls = std::make_shared<LSTable>(build_ls_table(words, *table, world.inventory));
  r.ls_bytes = serialize_ls_table(*ls);
  r.hash_before = content_hash(*ls);
  FeatureResources res;
  res.ls_table = ls;
  res.ls_fallback = table;
  TaggerConfig cfg = small_tagger(94);
  cfg.max_epochs = 4;
  const auto run = train_tagger(ner.train, ner.dev, cfg, res);
  for (const auto& e : run.history.epochs) r.tagger_loss.push_back(e.loss);
  r.hash_after = content_hash(*ls);
  r.ls_bytes_after = serialize_ls_table(*ls);
  r.model_hash = run.model.ls_hash;
  return r;
}

Outcome determinism() {
  const auto start = Clock::now();
  const PipelineRun a = run_pipeline();
  const PipelineRun b = run_pipeline();
  Outcome o;
  o.pass = a.ls_bytes == b.ls_bytes && a.embed_loss == b.embed_loss &&
           a.tagger_loss == b.tagger_loss && !a.tagger_loss.empty();
  o.detail = fmt("LS table files %s (%zu bytes), embedding losses %s, tagger epoch losses %s "
                 "(%zu epochs), %.0fs",
                 a.ls_bytes == b.ls_bytes ? "identical" : "DIFFER", a.ls_bytes.size(),
                 a.embed_loss == b.embed_loss ? "identical" : "DIFFER",
                 a.tagger_loss == b.tagger_loss ? "identical" : "DIFFER", a.tagger_loss.size(),
                 seconds_since(start));
  return o;
}

Outcome frozen_features() {
  const PipelineRun r = run_pipeline();
  Outcome o;
  o.pass = r.hash_before == r.hash_after && r.ls_bytes == r.ls_bytes_after &&
           r.model_hash == r.hash_before;
  o.detail = fmt("content hash %016llx before, %016llx after, %016llx recorded in model",
                 static_cast<unsigned long long>(r.hash_before),
                 static_cast<unsigned long long>(r.hash_after),
                 static_cast<unsigned long long>(r.model_hash));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"CRF oracle equivalence", crf_oracle}},
      {2, {"gradient fidelity", gradient_fidelity}},
      {3, {"MinMax example", minmax_example}},
      {4, {"conlleval parity", conlleval_parity}},
      {5, {"scheme round trip", scheme_round_trip}},
      {6, {"synthetic distant supervision", distant_supervision}},
      {7, {"synthetic ablation", synthetic_ablation}},
      {8, {"overfit check", overfit}},
      {9, {"determinism", determinism}},
      {10, {"frozen LS features", frozen_features}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, c] : criteria) selected.push_back(id);
  }
  int failures = 0;
  for (int id : selected) {
    auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d (%s): %s: %s\n", id, it->second.first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
