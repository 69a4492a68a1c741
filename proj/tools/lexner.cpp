// lexner command-line driver.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
// Progress goes to stderr; machine output to stdout or files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexner/checkpoint.h"
#include "lexner/corpus.h"
#include "lexner/embed.h"
#include "lexner/error.h"
#include "lexner/eval.h"
#include "lexner/gazetteer.h"
#include "lexner/gradcheck.h"
#include "lexner/lexsim.h"
#include "lexner/pipeline_config.h"
#include "lexner/synth.h"
#include "lexner/tagger.h"
#include "lexner/text.h"
#include "lexner/trainer.h"

namespace fs = std::filesystem;
using namespace lexner;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void progress(const std::string& stage, const std::string& message) {
  std::cerr << '[' << stage << "] " << message << std::endl;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Options shared by commands that read a pipeline config.
struct ConfigOptions {
  std::string file;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "Pipeline config file (section.key = value)");
    app->add_option("--set", overrides, "Override a config key: section.key=value");
    app->add_option_function<std::uint64_t>(
        "--seed",
        [this](std::uint64_t s) {
          seed = s;
          seed_given = true;
        },
        "Root seed");
  }

  PipelineConfig load() const {
    PipelineConfig c = file.empty() ? PipelineConfig{} : PipelineConfig::load(file);
    for (const auto& o : overrides) c.apply_override(o);
    if (seed_given) c.seed = seed;
    return c;
  }
};

// Command-line value, else the config's paths.<key>, else an error.
fs::path resolve(const std::string& value, const PipelineConfig& config, const char* key,
                 bool required = true) {
  if (!value.empty()) return value;
  if (auto p = config.path(key)) return *p;
  if (required) throw UsageError(std::string("missing --") + key + " (or paths." + key + ")");
  return {};
}

void require_files(std::initializer_list<fs::path> paths) {
  for (const auto& p : paths) {
    if (!p.empty() && !fs::is_regular_file(p)) throw DataError("no such file: " + p.string());
  }
}

void require_writable_dir(const fs::path& out) {
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw DataError("output directory does not exist: " + dir.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

TagScheme scheme_option(const std::string& name) {
  auto s = parse_tag_scheme(name);
  if (!s) throw UsageError("unknown tag scheme '" + name + "' (iob1, iob2, bilou)");
  return *s;
}

// Resources named on the command line or in the config.
struct ResourceOptions {
  std::string ls, embeddings, pretrained, gazetteers;

  void attach(CLI::App* app, bool with_pretrained) {
    app->add_option("--ls", ls, "LS table file");
    app->add_option("--embeddings", embeddings,
                    "Joint embeddings, used to compose LS vectors of words missing from the table");
    if (with_pretrained) {
      app->add_option("--pretrained", pretrained, "Pretrained word vectors (text format)");
      app->add_option("--gazetteers", gazetteers, "Gazetteer file: name<TAB>entry per line");
    }
  }

  FeatureResources load(const PipelineConfig& config, bool need_ls) const {
    FeatureResources res;
    const fs::path ls_path = resolve(ls, config, "ls_table", false);
    const fs::path emb_path = resolve(embeddings, config, "embeddings", false);
    const fs::path gaz_path = resolve(gazetteers, config, "gazetteers", false);
    require_files({ls_path, emb_path, gaz_path});
    if (need_ls && ls_path.empty()) throw UsageError("the ls feature needs --ls (or paths.ls_table)");
    if (!ls_path.empty()) res.ls_table = std::make_shared<LSTable>(load_ls_table(ls_path));
    if (!emb_path.empty()) {
      res.ls_fallback = std::make_shared<EmbeddingTable>(load_embeddings(emb_path));
    }
    if (!gaz_path.empty()) res.gazetteers = load_gazetteers(gaz_path);
    return res;
  }

  std::shared_ptr<EmbeddingTable> load_pretrained(const PipelineConfig& config) const {
    const fs::path p = resolve(pretrained, config, "pretrained", false);
    if (p.empty()) return nullptr;
    require_files({p});
    return std::make_shared<EmbeddingTable>(load_embeddings(p, false));
  }
};

std::vector<std::string> column_vocab(const std::vector<fs::path>& files) {
  std::set<std::string> words;
  for (const auto& f : files) {
    for (const auto& line : read_lines(f)) {
      const auto toks = split_whitespace(line);
      if (toks.empty() || toks[0] == "-DOCSTART-") continue;
      words.insert(lowercase(toks[0]));
    }
  }
  return {words.begin(), words.end()};
}

// ---------------------------------------------------------------- synth

void cmd_synth(const std::string& out_dir, const SynthWorldConfig& wc, int distant,
               const SynthNerConfig& nc) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const SynthWorld world = make_world(wc);
  const auto corpus = distant_corpus(world, distant, Rng::mix(wc.seed + 1));
  world.inventory.save(dir / "inventory.txt");
  write_text(dir / "distant.conll", emit_column_text(corpus));
  const SynthNerData ner = make_ner_data(world, nc);
  write_text(dir / "train.conll", emit_column_text(ner.train));
  write_text(dir / "dev.conll", emit_column_text(ner.dev));
  write_text(dir / "test.conll", emit_column_text(ner.test));
  std::ostringstream gaz;
  for (const auto& g : ner.gazetteers) {
    for (const auto& entry : g.entries) {
      gaz << g.name << '\t';
      for (std::size_t i = 0; i < entry.size(); ++i) gaz << (i ? " " : "") << entry[i];
      gaz << '\n';
    }
  }
  write_text(dir / "gazetteers.tsv", gaz.str());
  std::ostringstream vars;
  for (std::size_t t = 0; t < world.variants.size(); ++t) {
    for (const auto& v : world.variants[t]) vars << v << '\t' << world.inventory.label(t) << '\n';
  }
  write_text(dir / "oov_variants.tsv", vars.str());
  progress("synth", std::to_string(corpus.size()) + " distant sentences, " +
                        std::to_string(ner.train.size()) + "/" + std::to_string(ner.dev.size()) +
                        "/" + std::to_string(ner.test.size()) + " NER sentences, OOV mention rate " +
                        fixed(100 * oov_mention_rate(ner.train, ner.test), 1) + "% in " +
                        dir.string());
}

// ---------------------------------------------------------------- prepare-dual

void cmd_prepare_dual(const fs::path& corpus, const fs::path& inventory_path,
                      const fs::path& out_path, TagScheme scheme) {
  require_files({corpus, inventory_path});
  require_writable_dir(out_path);
  const TypeInventory inventory = TypeInventory::load(inventory_path);
  std::ifstream in(corpus, std::ios::binary);
  std::ofstream out(out_path, std::ios::binary);
  if (!in || !out) throw DataError("cannot open input or output");
  ColumnReader reader(in);
  std::size_t n = 0;
  while (auto s = reader.next()) {
    try {
      s->mentions = tags_to_mentions(s->tags, scheme, DecodeMode::kStrict);
      const auto [v1, v2] = dual_lines(*s, inventory);
      out << v1 << '\n' << v2 << '\n';
    } catch (const DataError& e) {
      throw ParseError(e.what(), s->first_line);
    }
    if (++n % 100000 == 0) progress("prepare-dual", std::to_string(n) + " sentences");
  }
  progress("prepare-dual", std::to_string(n) + " sentences -> " + out_path.string());
}

// ---------------------------------------------------------------- train-embed

void cmd_train_embed(const fs::path& dual, const fs::path& out_path, const fs::path& inventory,
                     const PipelineConfig& config) {
  require_files({dual, inventory});
  require_writable_dir(out_path);
  const EmbedConfig ec = config.embed_config();
  ec.validate();
  std::vector<std::string> atomic;
  if (!inventory.empty()) atomic = TypeInventory::load(inventory).labels();
  const auto lines = read_lines(dual);
  progress("train-embed", std::to_string(lines.size()) + " lines, dim " + std::to_string(ec.dim) +
                              ", " + std::to_string(ec.epochs) + " epochs, seed " +
                              std::to_string(ec.seed));
  SkipgramStats stats;
  const EmbeddingTable table = train_skipgram(
      lines, ec, atomic, &stats, [&](int epoch, double loss) {
        progress("train-embed", "epoch " + std::to_string(epoch + 1) + "/" +
                                    std::to_string(ec.epochs) + " loss " + fixed(loss, 5));
      });
  save_embeddings(table, out_path);
  progress("train-embed", std::to_string(table.size()) + " words -> " + out_path.string());
}

// ---------------------------------------------------------------- build-ls

void cmd_build_ls(const fs::path& emb, const fs::path& inventory_path,
                  const std::vector<fs::path>& vocab_files, const fs::path& out_path,
                  const fs::path& text_path) {
  require_files({emb, inventory_path});
  for (const auto& v : vocab_files) require_files({v});
  require_writable_dir(out_path);
  const TypeInventory inventory = TypeInventory::load(inventory_path);
  const EmbeddingTable table = load_embeddings(emb);
  const auto vocab = column_vocab(vocab_files);
  if (vocab.empty()) throw DataError("vocabulary files contain no words");
  const auto start = std::chrono::steady_clock::now();
  const LSTable ls = build_ls_table(vocab, table, inventory);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_ls_table(ls, out_path);
  if (!text_path.empty()) save_ls_text(ls, text_path);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(content_hash(ls)));
  progress("build-ls", std::to_string(ls.size()) + " words x " + std::to_string(ls.dim()) +
                           " types in " + fixed(secs, 2) + "s, content hash " + hash + " -> " +
                           out_path.string());
}

// ---------------------------------------------------------------- inspect

void cmd_inspect(const fs::path& emb, const fs::path& inventory_path,
                 const std::vector<std::string>& words, int k) {
  require_files({emb, inventory_path});
  const TypeInventory inventory = TypeInventory::load(inventory_path);
  const EmbeddingTable table = load_embeddings(emb);
  if (k < 1 || static_cast<std::size_t>(k) > inventory.size()) {
    throw UsageError("-k must be in [1, " + std::to_string(inventory.size()) + "]");
  }
  for (const auto& w : words) {
    const bool known = table.contains(lowercase(w));
    std::cout << w << (known ? "" : "  (out of vocabulary, composed from subwords)") << '\n';
    int rank = 1;
    for (const auto& ts : top_k_types(w, static_cast<std::size_t>(k), table, inventory)) {
      char line[256];
      std::snprintf(line, sizeof line, "  %2d  %-40s %.2f\n", rank++, ts.type.c_str(),
                    ts.similarity);
      std::cout << line;
    }
  }
}

// ---------------------------------------------------------------- train-ner

std::string history_text(const TrainHistory& h, std::uint64_t seed) {
  std::ostringstream out;
  out << "# seed " << seed << ", best epoch " << h.best_epoch + 1 << ", best dev F1 "
      << fixed(h.best_dev_f1) << (h.stopped_early ? ", stopped early" : "") << '\n';
  out << "epoch\tloss\tdev_f1\tlearning_rate\tmax_grad_norm\n";
  out.precision(10);
  for (const auto& e : h.epochs) {
    out << e.epoch + 1 << '\t' << e.loss << '\t' << e.dev_f1 << '\t' << e.learning_rate << '\t'
        << e.max_grad_norm << '\n';
  }
  return out.str();
}

void cmd_train_ner(const fs::path& train_path, const fs::path& dev_path, const fs::path& out,
                   const fs::path& history_path, const ResourceOptions& ro,
                   const PipelineConfig& config) {
  require_files({train_path, dev_path});
  require_writable_dir(out);
  const TaggerConfig tc = config.tagger_config();
  tc.validate();
  const FeatureResources res = ro.load(config, tc.features.ls);
  const auto pretrained = ro.load_pretrained(config);
  const auto train = read_column_file(train_path);
  const auto dev = dev_path.empty() ? std::vector<Sentence>{} : read_column_file(dev_path);
  progress("train-ner", std::to_string(train.size()) + " train / " + std::to_string(dev.size()) +
                            " dev sentences, features " + tc.features.to_string() + ", seed " +
                            std::to_string(tc.seed));
  TrainOptions opts;
  opts.pretrained = pretrained.get();
  opts.on_epoch = [&](const EpochRecord& e) {
    progress("train-ner", "epoch " + std::to_string(e.epoch + 1) + " loss " + fixed(e.loss, 3) +
                              " dev F1 " + fixed(e.dev_f1) + " lr " + fixed(e.learning_rate, 5));
  };
  const auto result = train_tagger(train, dev, tc, res, opts);
  save_checkpoint(result.model, out);
  const fs::path hist = history_path.empty() ? fs::path(out.string() + ".history.tsv") : history_path;
  write_text(hist, history_text(result.history, tc.seed));
  progress("train-ner", "best dev F1 " + fixed(result.history.best_dev_f1) + " at epoch " +
                            std::to_string(result.history.best_epoch + 1) + " -> " + out.string());
}

// ---------------------------------------------------------------- tag

void cmd_tag(const fs::path& model_path, const fs::path& input, const fs::path& output,
             TagScheme out_scheme, const ResourceOptions& ro, const PipelineConfig& config) {
  require_files({model_path, input});
  const CheckpointInfo info = read_checkpoint_info(model_path);
  TaggerModel model = load_checkpoint(model_path, ro.load(config, info.config.features.ls));
  auto sentences = read_column_file(input);
  const auto predicted = predict(model, sentences);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto& s = sentences[i];
    // The existing tag column (if any) becomes a middle column.
    if (!s.tags.empty()) {
      s.middle_columns.resize(s.size());
      for (std::size_t t = 0; t < s.size(); ++t) s.middle_columns[t].push_back(s.tags[t]);
    }
    s.tags = convert_scheme(predicted[i].tags, TagScheme::kBilou, out_scheme, DecodeMode::kLenient);
  }
  if (output.empty()) {
    write_column_file(std::cout, sentences);
  } else {
    require_writable_dir(output);
    std::ofstream out(output, std::ios::binary);
    write_column_file(out, sentences);
  }
  progress("tag", std::to_string(sentences.size()) + " sentences tagged");
}

// ---------------------------------------------------------------- eval

void cmd_eval(const fs::path& gold_path, const fs::path& pred_path, const fs::path& combined,
              TagScheme gold_scheme, const std::string& group_by, const std::string& format) {
  std::vector<Sentence> gold, pred;
  if (!combined.empty()) {
    require_files({combined});
    pred = read_column_file(combined);
    gold = pred;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      auto& g = gold[i];
      for (std::size_t t = 0; t < g.size(); ++t) {
        if (t >= g.middle_columns.size() || g.middle_columns[t].empty()) {
          throw ParseError("combined file needs gold and predicted columns", g.first_line + t);
        }
        g.tags[t] = g.middle_columns[t].back();
      }
    }
  } else {
    if (gold_path.empty() || pred_path.empty()) {
      throw UsageError("give --gold and --pred, or --combined");
    }
    require_files({gold_path, pred_path});
    gold = read_column_file(gold_path);
    pred = read_column_file(pred_path);
  }
  EvalReport report;
  if (group_by == "document") {
    report = evaluate_by_group(
        gold, pred, [&](std::size_t i) { return "doc" + std::to_string(gold[i].document + 1); },
        gold_scheme);
  } else if (group_by.empty()) {
    report = evaluate(gold, pred, gold_scheme);
  } else {
    throw UsageError("--group-by accepts only 'document'");
  }
  if (format == "conlleval") {
    std::cout << format_conlleval(report);
  } else if (format == "kv") {
    std::cout << format_key_values(report);
  } else {
    std::cout << format_report(report);
  }
}

// ---------------------------------------------------------------- ablate

void cmd_ablate(const fs::path& train_path, const fs::path& dev_path, const fs::path& test_path,
                const ResourceOptions& ro, const PipelineConfig& config) {
  require_files({train_path, dev_path, test_path});
  std::vector<FeatureSet> sets;
  for (const auto& f : config.ablate_features) {
    try {
      sets.push_back(FeatureSet::parse(f));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  const bool any_ls = std::any_of(sets.begin(), sets.end(), [](const FeatureSet& s) { return s.ls; });
  const FeatureResources res = ro.load(config, any_ls);
  const auto pretrained = ro.load_pretrained(config);
  const auto train = read_column_file(train_path);
  const auto dev = read_column_file(dev_path);
  const auto test = read_column_file(test_path);
  const int runs = config.ablate_runs;

  std::cout << "features\tmean_f1\tstdev\truns\n";
  for (const auto& fs_ : sets) {
    std::vector<double> scores;
    for (int r = 0; r < runs; ++r) {
      TaggerConfig tc = config.tagger_config();
      tc.features = fs_;
      tc.seed = config.tagger_config().seed + static_cast<std::uint64_t>(r);
      TrainOptions opts;
      opts.pretrained = pretrained.get();
      const auto result = train_tagger(train, dev, tc, res, opts);
      scores.push_back(f1_score(result.model, test));
      progress("ablate", fs_.to_string() + " seed " + std::to_string(tc.seed) + " test F1 " +
                             fixed(scores.back()));
    }
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / runs;
    double ss = 0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    const double sd = runs > 1 ? std::sqrt(ss / (runs - 1)) : 0.0;
    std::cout << fs_.to_string() << '\t' << fixed(mean) << '\t' << fixed(sd) << '\t' << runs
              << std::endl;
  }
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const PipelineConfig& config, std::size_t samples, const std::string& corrupt) {
  const auto batch = parse_column_file(
      "Anna B-PER\nSmith I-PER\nvisited O\nParis B-LOC\n. O\n\n"
      "The O\nACME B-ORG\nboard O\n\n"
      "Oslo B-LOC\nmet O\nBob B-PER\n");
  TaggerConfig tc = config.tagger_config();
  tc.input_scheme = TagScheme::kIob2;
  FeatureResources res;
  if (tc.features.ls) {
    auto table = std::make_shared<LSTable>(TypeInventory({"/person", "/location", "/organization"}));
    Rng rng(tc.seed);
    for (const auto& s : batch) {
      for (const auto& tok : s.tokens) {
        std::vector<float> raw(3);
        for (auto& x : raw) x = static_cast<float>(rng.uniform(-1, 1));
        table->insert(lowercase(tok), minmax_scale(raw));
      }
    }
    res.ls_table = table;
  }
  if (tc.features.gazetteer) {
    Gazetteer g{"cities", {}};
    g.add({"paris"});
    g.add({"oslo"});
    res.gazetteers.push_back(g);
  }
  TaggerModel model = init_model(tc, batch, nullptr, res);
  const auto encoded = encode_corpus(model, batch, true);
  GradcheckOptions opts;
  opts.samples_per_block = samples;
  opts.seed = tc.seed;
  opts.corrupt_block = corrupt;
  progress("gradcheck", std::to_string(model.params.num_values()) + " parameters, " +
                            (samples ? std::to_string(samples) + " probes per block"
                                     : std::string("every entry")));
  const GradcheckResult r = gradcheck(model, encoded, opts);
  std::cout << format_gradcheck(r);
  return r.passed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical-similarity features and a Bi-LSTM-CRF tagger"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lexner 1.0");
  int exit_code = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic distant corpus and NER splits");
  std::string synth_out;
  SynthWorldConfig wc;
  SynthNerConfig nc;
  int distant_sentences = 20000;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", wc.seed, "Seed");
  synth->add_option("--types", wc.types, "Entity types (1-8)");
  synth->add_option("--entities", wc.entities_per_type, "Entity words per type");
  synth->add_option("--sentences", distant_sentences, "Distant corpus sentences");
  synth->add_option("--train", nc.train, "NER training sentences");
  synth->add_option("--dev", nc.dev, "NER dev sentences");
  synth->add_option("--test", nc.test, "NER test sentences");
  synth->callback([&] {
    nc.seed = Rng::mix(wc.seed + 2);
    cmd_synth(synth_out, wc, distant_sentences, nc);
  });

  // prepare-dual
  auto* dual = app.add_subcommand("prepare-dual", "Build the v1/v2 corpus from an annotated corpus");
  std::string dual_corpus, dual_inv, dual_out, dual_scheme = "iob2";
  dual->add_option("--corpus", dual_corpus, "Annotated column file (tags typed by inventory labels)")
      ->required();
  dual->add_option("--inventory", dual_inv, "Type inventory, one label per line")->required();
  dual->add_option("--out", dual_out, "Output text file")->required();
  dual->add_option("--scheme", dual_scheme, "Tag scheme of the corpus");
  dual->callback([&] {
    cmd_prepare_dual(dual_corpus, dual_inv, dual_out, scheme_option(dual_scheme));
  });

  // train-embed
  auto* embed = app.add_subcommand("train-embed", "Train joint word/type subword embeddings");
  std::string embed_corpus, embed_out, embed_inv;
  ConfigOptions embed_cfg;
  embed->add_option("--corpus", embed_corpus, "Dual corpus");
  embed->add_option("--out", embed_out, "Output embedding file")->required();
  embed->add_option("--inventory", embed_inv, "Type inventory (its labels are atomic tokens)");
  embed_cfg.attach(embed);
  embed->callback([&] {
    const auto config = embed_cfg.load();
    cmd_train_embed(resolve(embed_corpus, config, "corpus"), embed_out,
                    resolve(embed_inv, config, "inventory", false), config);
  });

  // build-ls
  auto* build = app.add_subcommand("build-ls", "Precompute the LS table");
  std::string build_emb, build_inv, build_out, build_text;
  std::vector<std::string> build_vocab;
  build->add_option("--embeddings", build_emb, "Joint embedding file")->required();
  build->add_option("--inventory", build_inv, "Type inventory")->required();
  build->add_option("--vocab", build_vocab, "Word list or column files (first column)")->required();
  build->add_option("--out", build_out, "Output LS table")->required();
  build->add_option("--text", build_text, "Also write a text dump here");
  build->callback([&] {
    std::vector<fs::path> vocab(build_vocab.begin(), build_vocab.end());
    cmd_build_ls(build_emb, build_inv, vocab, build_out, build_text);
  });

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print the most similar entity types of words");
  std::string insp_emb, insp_inv;
  std::vector<std::string> insp_words;
  int insp_k = 5;
  inspect->add_option("--embeddings", insp_emb, "Joint embedding file")->required();
  inspect->add_option("--inventory", insp_inv, "Type inventory")->required();
  inspect->add_option("-k", insp_k, "Number of types");
  inspect->add_option("words", insp_words, "Words to inspect")->required();
  inspect->callback([&] { cmd_inspect(insp_emb, insp_inv, insp_words, insp_k); });

  // train-ner
  auto* trainer = app.add_subcommand("train-ner", "Train the Bi-LSTM-CRF tagger");
  std::string tr_train, tr_dev, tr_out, tr_hist;
  ConfigOptions tr_cfg;
  ResourceOptions tr_res;
  trainer->add_option("--train", tr_train, "Training column file");
  trainer->add_option("--dev", tr_dev, "Dev column file (early stopping)");
  trainer->add_option("--out", tr_out, "Output checkpoint");
  trainer->add_option("--history", tr_hist, "Per-epoch history (default <out>.history.tsv)");
  tr_cfg.attach(trainer);
  tr_res.attach(trainer, true);
  trainer->callback([&] {
    const auto config = tr_cfg.load();
    cmd_train_ner(resolve(tr_train, config, "train"), resolve(tr_dev, config, "dev", false),
                  resolve(tr_out, config, "model"), tr_hist, tr_res, config);
  });

  // tag
  auto* tag = app.add_subcommand("tag", "Append predicted tags to a column file");
  std::string tag_model, tag_in, tag_out, tag_scheme = "bilou";
  ConfigOptions tag_cfg;
  ResourceOptions tag_res;
  tag->add_option("--model", tag_model, "Checkpoint");
  tag->add_option("--input", tag_in, "Column file")->required();
  tag->add_option("--output", tag_out, "Output file (default stdout)");
  tag->add_option("--scheme", tag_scheme, "Scheme of the predicted column");
  tag_cfg.attach(tag);
  tag_res.attach(tag, false);
  tag->callback([&] {
    const auto config = tag_cfg.load();
    cmd_tag(resolve(tag_model, config, "model"), tag_in, tag_out, scheme_option(tag_scheme),
            tag_res, config);
  });

  // eval
  auto* ev = app.add_subcommand("eval", "Mention-level P/R/F1 (conlleval-compatible)");
  std::string ev_gold, ev_pred, ev_comb, ev_scheme = "iob2", ev_group, ev_format = "conlleval";
  ev->add_option("--gold", ev_gold, "Gold column file");
  ev->add_option("--pred", ev_pred, "Predicted column file");
  ev->add_option("--combined", ev_comb, "File whose last two columns are gold and predicted");
  ev->add_option("--scheme", ev_scheme, "Scheme of the gold tags");
  ev->add_option("--group-by", ev_group, "Breakdown: document");
  ev->add_option("--format", ev_format, "conlleval, report or kv")
      ->check(CLI::IsMember({"conlleval", "report", "kv"}));
  ev->callback([&] {
    cmd_eval(ev_gold, ev_pred, ev_comb, scheme_option(ev_scheme), ev_group, ev_format);
  });

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Mean and stdev of test F1 per feature set");
  std::string ab_train, ab_dev, ab_test, ab_features;
  int ab_runs = 0;
  ConfigOptions ab_cfg;
  ResourceOptions ab_res;
  ablate->add_option("--train", ab_train, "Training column file");
  ablate->add_option("--dev", ab_dev, "Dev column file");
  ablate->add_option("--test", ab_test, "Test column file");
  ablate->add_option("--features", ab_features,
                     "Feature sets separated by ',' or ';', e.g. word;ls;word+ls");
  ablate->add_option("--runs", ab_runs, "Seeded runs per feature set");
  ab_cfg.attach(ablate);
  ab_res.attach(ablate, true);
  ablate->callback([&] {
    auto config = ab_cfg.load();
    if (!ab_features.empty()) {
      std::string list = ab_features;
      std::replace(list.begin(), list.end(), ';', ',');
      try {
        config.set("ablate.features", list);
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
    }
    if (ab_runs > 0) config.ablate_runs = ab_runs;
    cmd_ablate(resolve(ab_train, config, "train"), resolve(ab_dev, config, "dev"),
               resolve(ab_test, config, "test"), ab_res, config);
  });

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the tagger gradients");
  ConfigOptions gc_cfg;
  std::size_t gc_samples = 20;
  std::string gc_corrupt;
  gc_cfg.attach(gc);
  gc->add_option("--samples", gc_samples, "Probes per parameter block (0 = all)");
  gc->add_option("--corrupt", gc_corrupt, "Perturb this block's analytic gradient (self-test)");
  gc->callback([&] { exit_code = cmd_gradcheck(gc_cfg.load(), gc_samples, gc_corrupt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}
