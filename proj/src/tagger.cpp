#include "lexner/tagger.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "lexner/crf.h"
#include "lexner/error.h"
#include "lexner/text.h"

namespace lexner {

// ---------------------------------------------------------------- config

FeatureSet FeatureSet::parse(std::string_view text) {
  FeatureSet fs{false, false, false, false, false};
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    if (token == "word" || token == "emb") {
      fs.word = true;
    } else if (token == "char" || token == "chars") {
      fs.chars = true;
    } else if (token == "cap") {
      fs.cap = true;
    } else if (token == "ls") {
      fs.ls = true;
    } else if (token == "gaz" || token == "gazetteer") {
      fs.gazetteer = true;
    } else {
      throw DataError("unknown feature '" + token + "' (expected word, char, cap, ls, gaz)");
    }
    token.clear();
  };
  for (char c : text) {
    if (c == '+' || c == ',') {
      flush();
    } else if (c != ' ') {
      token += c;
    }
  }
  flush();
  if (!(fs.word || fs.chars || fs.cap || fs.ls || fs.gazetteer)) {
    throw DataError("feature set '" + std::string(text) + "' enables no feature block");
  }
  return fs;
}

std::string FeatureSet::to_string() const {
  std::string out;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(word, "word");
  add(chars, "char");
  add(cap, "cap");
  add(ls, "ls");
  add(gazetteer, "gaz");
  return out;
}

void TaggerConfig::validate() const {
  const auto positive = [](int v, const char* name) {
    if (v <= 0) throw DataError(std::string("tagger.") + name + " must be positive");
  };
  positive(word_dim, "word_dim");
  positive(word_hidden, "word_hidden");
  positive(char_emb_dim, "char_emb_dim");
  positive(char_hidden, "char_hidden");
  positive(cap_emb_dim, "cap_emb_dim");
  positive(batch_size, "batch_size");
  positive(max_epochs, "max_epochs");
  positive(patience, "patience");
  positive(gazetteer_max_n, "gazetteer_max_n");
  if (!(dropout >= 0 && dropout < 1)) throw DataError("tagger.dropout must be in [0, 1)");
  if (!(learning_rate > 0)) throw DataError("tagger.learning_rate must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw DataError("tagger.momentum must be in [0, 1)");
  if (!(clip_norm > 0)) throw DataError("tagger.clip_norm must be positive");
  if (!(decay_rate > 0 && decay_rate <= 1)) {
    throw DataError("tagger.decay_rate must be in (0, 1]");
  }
  if (!(unk_replace >= 0 && unk_replace <= 1)) {
    throw DataError("tagger.unk_replace must be in [0, 1]");
  }
}

std::string TaggerConfig::to_key_values() const {
  std::ostringstream out;
  out.precision(17);
  out << "word_dim = " << word_dim << '\n'
      << "word_hidden = " << word_hidden << '\n'
      << "char_emb_dim = " << char_emb_dim << '\n'
      << "char_hidden = " << char_hidden << '\n'
      << "cap_emb_dim = " << cap_emb_dim << '\n'
      << "dropout = " << dropout << '\n'
      << "batch_size = " << batch_size << '\n'
      << "learning_rate = " << learning_rate << '\n'
      << "momentum = " << momentum << '\n'
      << "clip_norm = " << clip_norm << '\n'
      << "clip_mode = " << (clip_mode == ClipMode::kGlobalNorm ? "global" : "value") << '\n'
      << "max_epochs = " << max_epochs << '\n'
      << "decay_rate = " << decay_rate << '\n'
      << "patience = " << patience << '\n'
      << "seed = " << seed << '\n'
      << "features = " << features.to_string() << '\n'
      << "bilou_mask = " << (bilou_mask ? "true" : "false") << '\n'
      << "unk_replace = " << unk_replace << '\n'
      << "gazetteer_max_n = " << gazetteer_max_n << '\n'
      << "input_scheme = " << tag_scheme_name(input_scheme) << '\n';
  return out.str();
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw DataError("bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = lowercase(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw DataError("bad boolean '" + std::string(value) + "' for " + std::string(key));
}

}  // namespace

bool TaggerConfig::set(std::string_view key, std::string_view value) {
  if (key == "word_dim") word_dim = parse_number<int>(key, value);
  else if (key == "word_hidden") word_hidden = parse_number<int>(key, value);
  else if (key == "char_emb_dim") char_emb_dim = parse_number<int>(key, value);
  else if (key == "char_hidden") char_hidden = parse_number<int>(key, value);
  else if (key == "cap_emb_dim") cap_emb_dim = parse_number<int>(key, value);
  else if (key == "dropout") dropout = parse_number<double>(key, value);
  else if (key == "batch_size") batch_size = parse_number<int>(key, value);
  else if (key == "learning_rate") learning_rate = parse_number<double>(key, value);
  else if (key == "momentum") momentum = parse_number<double>(key, value);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, value);
  else if (key == "clip_mode") {
    if (value == "global") clip_mode = ClipMode::kGlobalNorm;
    else if (value == "value") clip_mode = ClipMode::kPerValue;
    else throw DataError("clip_mode must be 'global' or 'value'");
  } else if (key == "max_epochs") max_epochs = parse_number<int>(key, value);
  else if (key == "decay_rate") decay_rate = parse_number<double>(key, value);
  else if (key == "patience") patience = parse_number<int>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "features") features = FeatureSet::parse(value);
  else if (key == "bilou_mask") bilou_mask = parse_bool(key, value);
  else if (key == "unk_replace") unk_replace = parse_number<double>(key, value);
  else if (key == "gazetteer_max_n") gazetteer_max_n = parse_number<int>(key, value);
  else if (key == "input_scheme") {
    auto s = parse_tag_scheme(value);
    if (!s) throw DataError("unknown tag scheme '" + std::string(value) + "'");
    input_scheme = *s;
  } else {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------- vocab

Vocab::Vocab(bool with_unk) : with_unk_(with_unk) {
  if (with_unk_) add(std::string(kUnkToken));
}

int Vocab::add(const std::string& item) {
  auto [it, inserted] = index_.emplace(item, size());
  if (inserted) items_.push_back(item);
  return it->second;
}

int Vocab::find(std::string_view item) const {
  auto it = index_.find(std::string(item));
  return it == index_.end() ? -1 : it->second;
}

int Vocab::id_or_unk(std::string_view item) const {
  const int id = find(item);
  return id >= 0 ? id : 0;
}

// ---------------------------------------------------------------- params

std::vector<std::pair<std::string, Eigen::MatrixXd*>> TaggerParams::tensors() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  visit(*this, [&](const char* name, Eigen::MatrixXd& m) { out.emplace_back(name, &m); });
  return out;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> TaggerParams::tensors() const {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  visit(*this,
        [&](const char* name, const Eigen::MatrixXd& m) { out.emplace_back(name, &m); });
  return out;
}

TaggerParams TaggerParams::zeros_like() const {
  TaggerParams out = *this;
  out.set_zero();
  return out;
}

void TaggerParams::set_zero() {
  visit(*this, [](const char*, Eigen::MatrixXd& m) { m.setZero(); });
}

std::size_t TaggerParams::num_values() const {
  std::size_t n = 0;
  visit(*this, [&](const char*, const Eigen::MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

// ---------------------------------------------------------------- model

int TaggerModel::ls_dim() const {
  if (!config.features.ls || !resources.ls_table) return 0;
  return static_cast<int>(resources.ls_table->dim());
}

int TaggerModel::gazetteer_dim() const {
  return config.features.gazetteer ? static_cast<int>(resources.gazetteers.size()) : 0;
}

int TaggerModel::input_dim() const {
  int d = config.features.word ? word_dim() : 0;
  if (config.features.chars) d += 2 * config.char_hidden;
  if (config.features.cap) d += config.cap_emb_dim;
  return d + ls_dim() + gazetteer_dim();
}

void TaggerModel::refresh() {
  ls_lookup_ = config.features.ls && resources.ls_table
                   ? LsLookup(resources.ls_table.get(), resources.ls_fallback.get())
                   : LsLookup();
  decode_mask_ = bilou_transition_mask(tags.items());
}

namespace {

Eigen::MatrixXd lookup_init(int rows, int cols, Rng& rng) {
  // A lookup row is a one-hot layer: fan_in 1, fan_out cols.
  const double bound = std::sqrt(6.0 / double(1 + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

}  // namespace

TaggerModel init_model(const TaggerConfig& config, std::span<const Sentence> train,
                       const EmbeddingTable* pretrained, FeatureResources resources,
                       std::span<const Sentence> extra_words) {
  config.validate();
  if (train.empty()) throw DataError("training set is empty");
  TaggerModel model;
  model.config = config;
  model.resources = std::move(resources);
  const FeatureSet& fs = config.features;
  if (fs.ls && !model.resources.ls_table) {
    throw DataError("the ls feature block needs an LS table");
  }
  if (fs.gazetteer && model.resources.gazetteers.empty()) {
    throw DataError("the gaz feature block needs at least one gazetteer");
  }

  std::set<std::string> types;
  for (const Sentence& s : train) {
    for (const auto& m : tags_to_mentions(s.tags, config.input_scheme, DecodeMode::kStrict)) {
      types.insert(m.type);
    }
    for (const auto& tok : s.tokens) {
      model.words.add(tok);
      for (char32_t cp : utf8_decode(tok)) model.chars.add(utf8_encode(cp));
    }
  }
  model.tags.add("O");
  for (const auto& t : types) {
    for (const char* p : {"B-", "I-", "L-", "U-"}) model.tags.add(p + t);
  }
  if (pretrained) {
    for (const Sentence& s : extra_words) {
      for (const auto& tok : s.tokens) {
        if (pretrained->contains(lowercase(tok))) model.words.add(tok);
      }
    }
  }

  Rng rng(config.seed);
  TaggerParams& p = model.params;
  const int d_w = pretrained ? pretrained->dim() : config.word_dim;
  if (fs.word) {
    p.word_lookup = lookup_init(model.words.size(), d_w, rng);
    if (pretrained) {
      for (int i = 0; i < model.words.size(); ++i) {
        if (auto id = pretrained->find(lowercase(model.words.item(i)))) {
          const auto row = pretrained->input_row(*id);
          for (int d = 0; d < d_w; ++d) p.word_lookup(i, d) = row[static_cast<std::size_t>(d)];
        }
      }
    }
  }
  if (fs.chars) {
    p.char_lookup = lookup_init(model.chars.size(), config.char_emb_dim, rng);
    p.char_fwd = LstmWeights::random(config.char_emb_dim, config.char_hidden, rng);
    p.char_bwd = LstmWeights::random(config.char_emb_dim, config.char_hidden, rng);
  }
  if (fs.cap) p.cap_lookup = lookup_init(kNumCapClasses, config.cap_emb_dim, rng);
  if (model.resources.ls_table) model.ls_hash = content_hash(*model.resources.ls_table);

  const int in = model.input_dim();
  const int H = config.word_hidden;
  const int L = model.num_tags();
  p.word_fwd = LstmWeights::random(in, H, rng);
  p.word_bwd = LstmWeights::random(in, H, rng);
  p.proj_w = glorot(L, 2 * H, rng);
  p.proj_b = Eigen::MatrixXd::Zero(L, 1);
  p.transitions = glorot(L + 2, L + 2, rng);
  model.refresh();
  return model;
}

// ---------------------------------------------------------------- encoding

EncodedSentence encode_sentence(const TaggerModel& model, const Sentence& sentence,
                                bool with_gold) {
  EncodedSentence enc;
  const std::size_t T = sentence.size();
  const FeatureSet& fs = model.config.features;
  enc.words.resize(T, 0);
  enc.chars.resize(T);
  enc.caps.resize(T, 0);
  enc.singleton.assign(T, false);
  enc.ls = Eigen::MatrixXd::Zero(model.ls_dim(), static_cast<Eigen::Index>(T));
  enc.gazetteer = Eigen::MatrixXd::Zero(model.gazetteer_dim(), static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) {
    const std::string& tok = sentence.tokens[t];
    if (fs.word) enc.words[t] = model.words.id_or_unk(tok);
    if (fs.chars) {
      for (char32_t cp : utf8_decode(tok)) {
        enc.chars[t].push_back(model.chars.id_or_unk(utf8_encode(cp)));
      }
    }
    enc.caps[t] = static_cast<int>(capitalization_class(tok));
    if (model.ls_dim() > 0) {
      const auto v = model.ls_lookup()(tok);
      for (int d = 0; d < model.ls_dim(); ++d) enc.ls(d, static_cast<Eigen::Index>(t)) = v[static_cast<std::size_t>(d)];
    }
  }
  if (model.gazetteer_dim() > 0) {
    const auto bits = gazetteer_features(sentence.tokens, model.resources.gazetteers,
                                         model.config.gazetteer_max_n);
    for (std::size_t t = 0; t < T; ++t) {
      for (int g = 0; g < model.gazetteer_dim(); ++g) {
        enc.gazetteer(g, static_cast<Eigen::Index>(t)) = bits[t][static_cast<std::size_t>(g)];
      }
    }
  }
  if (with_gold) {
    if (sentence.tags.size() != T) throw DataError("sentence without tags");
    const auto bilou = convert_scheme(sentence.tags, model.config.input_scheme,
                                      TagScheme::kBilou, DecodeMode::kStrict);
    for (const auto& tag : bilou) {
      const int id = model.tags.find(tag);
      if (id < 0) throw DataError("tag '" + tag + "' was not seen in training");
      enc.gold.push_back(id);
    }
  }
  return enc;
}

std::vector<EncodedSentence> encode_corpus(const TaggerModel& model,
                                           std::span<const Sentence> sentences,
                                           bool with_gold) {
  std::vector<EncodedSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(encode_sentence(model, s, with_gold));
  return out;
}

// ---------------------------------------------------------------- forward/backward

namespace {

struct CharTrace {
  LstmTrace fwd;
  LstmTrace bwd;
};

struct ForwardCache {
  std::vector<int> word_ids;  // after UNK replacement
  std::vector<CharTrace> chars;
  Eigen::MatrixXd x_mask;     // In x T, empty when no dropout
  Eigen::MatrixXd x;          // after dropout
  LstmTrace fwd;
  LstmTrace bwd;
  Eigen::MatrixXd h_mask;     // 2H x T
  Eigen::MatrixXd h;          // after dropout
  Eigen::MatrixXd emissions;  // T x L
};

Eigen::MatrixXd reverse_cols(const Eigen::MatrixXd& m) { return m.rowwise().reverse(); }

Eigen::VectorXd char_rep(const TaggerParams& p, const std::vector<int>& ids,
                         CharTrace* trace) {
  const int C = static_cast<int>(p.char_fwd.hidden());
  Eigen::MatrixXd emb(p.char_lookup.cols(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    emb.col(static_cast<Eigen::Index>(i)) = p.char_lookup.row(ids[i]).transpose();
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * C);
  if (ids.empty()) return out;
  const Eigen::MatrixXd hf = lstm_forward(p.char_fwd, emb, trace ? &trace->fwd : nullptr);
  const Eigen::MatrixXd hb =
      lstm_forward(p.char_bwd, reverse_cols(emb), trace ? &trace->bwd : nullptr);
  out.head(C) = hf.col(hf.cols() - 1);
  out.tail(C) = hb.col(hb.cols() - 1);
  return out;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.bernoulli(p) ? 0.0 : keep;
  }
  return m;
}

void forward(const TaggerModel& model, const EncodedSentence& s, Rng* rng,
             ForwardCache* cache) {
  const TaggerConfig& cfg = model.config;
  const FeatureSet& fs = cfg.features;
  const TaggerParams& p = model.params;
  const auto T = static_cast<Eigen::Index>(s.size());
  const int in = model.input_dim();
  const bool train = rng != nullptr;

  Eigen::MatrixXd x(in, T);
  cache->word_ids = s.words;
  if (fs.chars) cache->chars.resize(s.size());
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    Eigen::Index row = 0;
    if (fs.word) {
      int id = s.words[ut];
      if (train && cfg.unk_replace > 0 && ut < s.singleton.size() && s.singleton[ut] &&
          rng->bernoulli(cfg.unk_replace)) {
        id = 0;
      }
      cache->word_ids[ut] = id;
      x.block(row, t, p.word_lookup.cols(), 1) = p.word_lookup.row(id).transpose();
      row += p.word_lookup.cols();
    }
    if (fs.chars) {
      const Eigen::VectorXd rep = char_rep(p, s.chars[ut], &cache->chars[ut]);
      x.block(row, t, rep.size(), 1) = rep;
      row += rep.size();
    }
    if (fs.cap) {
      x.block(row, t, p.cap_lookup.cols(), 1) = p.cap_lookup.row(s.caps[ut]).transpose();
      row += p.cap_lookup.cols();
    }
    if (s.ls.rows() > 0) {
      x.block(row, t, s.ls.rows(), 1) = s.ls.col(t);
      row += s.ls.rows();
    }
    if (s.gazetteer.rows() > 0) {
      x.block(row, t, s.gazetteer.rows(), 1) = s.gazetteer.col(t);
    }
  }
  const bool drop = train && cfg.dropout > 0;
  if (drop) {
    cache->x_mask = dropout_mask(in, T, cfg.dropout, *rng);
    cache->x = x.cwiseProduct(cache->x_mask);
  } else {
    cache->x_mask.resize(0, 0);
    cache->x = std::move(x);
  }
  const Eigen::MatrixXd hf = lstm_forward(p.word_fwd, cache->x, &cache->fwd);
  const Eigen::MatrixXd hb =
      reverse_cols(lstm_forward(p.word_bwd, reverse_cols(cache->x), &cache->bwd));
  const int H = cfg.word_hidden;
  Eigen::MatrixXd h(2 * H, T);
  h.topRows(H) = hf;
  h.bottomRows(H) = hb;
  if (drop) {
    cache->h_mask = dropout_mask(2 * H, T, cfg.dropout, *rng);
    cache->h = h.cwiseProduct(cache->h_mask);
  } else {
    cache->h_mask.resize(0, 0);
    cache->h = std::move(h);
  }
  Eigen::MatrixXd e = p.proj_w * cache->h;
  e.colwise() += p.proj_b.col(0);
  cache->emissions = e.transpose();
}

void backward(const TaggerModel& model, const EncodedSentence& s, const ForwardCache& cache,
              const CrfLoss& crf, SentenceGradients* out) {
  const TaggerConfig& cfg = model.config;
  const FeatureSet& fs = cfg.features;
  const TaggerParams& p = model.params;
  TaggerParams& g = out->dense;
  const int H = cfg.word_hidden;

  g.transitions += crf.d_transitions;
  const Eigen::MatrixXd de = crf.d_emissions.transpose();  // L x T
  g.proj_w.noalias() += de * cache.h.transpose();
  g.proj_b.col(0) += de.rowwise().sum();
  Eigen::MatrixXd dh = p.proj_w.transpose() * de;
  if (cache.h_mask.size() > 0) dh = dh.cwiseProduct(cache.h_mask);

  Eigen::MatrixXd dx = lstm_backward(p.word_fwd, cache.fwd, dh.topRows(H), &g.word_fwd);
  dx += reverse_cols(
      lstm_backward(p.word_bwd, cache.bwd, reverse_cols(dh.bottomRows(H)), &g.word_bwd));
  if (cache.x_mask.size() > 0) dx = dx.cwiseProduct(cache.x_mask);

  const int C = cfg.char_hidden;
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto col = dx.col(static_cast<Eigen::Index>(t));
    Eigen::Index row = 0;
    if (fs.word) {
      const auto d_w = p.word_lookup.cols();
      out->word_rows.emplace_back(cache.word_ids[t], col.segment(row, d_w));
      row += d_w;
    }
    if (fs.chars) {
      const auto& ids = s.chars[t];
      const auto n = static_cast<Eigen::Index>(ids.size());
      if (n > 0) {
        Eigen::MatrixXd dhf = Eigen::MatrixXd::Zero(C, n);
        dhf.col(n - 1) = col.segment(row, C);
        const Eigen::MatrixXd demb_f =
            lstm_backward(p.char_fwd, cache.chars[t].fwd, dhf, &g.char_fwd);
        Eigen::MatrixXd dhb = Eigen::MatrixXd::Zero(C, n);
        dhb.col(n - 1) = col.segment(row + C, C);
        const Eigen::MatrixXd demb_b = reverse_cols(
            lstm_backward(p.char_bwd, cache.chars[t].bwd, dhb, &g.char_bwd));
        for (Eigen::Index i = 0; i < n; ++i) {
          g.char_lookup.row(ids[static_cast<std::size_t>(i)]) +=
              (demb_f.col(i) + demb_b.col(i)).transpose();
        }
      }
      row += 2 * C;
    }
    if (fs.cap) {
      g.cap_lookup.row(s.caps[t]) += col.segment(row, p.cap_lookup.cols()).transpose();
    }
    // LS and gazetteer blocks are frozen inputs.
  }
}

SentenceGradients make_sentence_grads(const TaggerParams& params) {
  SentenceGradients g;
  g.dense = params.zeros_like();
  g.dense.word_lookup.resize(0, 0);
  return g;
}

}  // namespace

Eigen::MatrixXd compute_emissions(const TaggerModel& model, const EncodedSentence& sentence) {
  ForwardCache cache;
  forward(model, sentence, nullptr, &cache);
  return cache.emissions;
}

double sentence_nll(const TaggerModel& model, const EncodedSentence& sentence, Rng* dropout,
                    SentenceGradients* grads) {
  if (sentence.size() == 0) return 0.0;
  if (sentence.gold.size() != sentence.size()) throw DataError("sentence has no gold tags");
  ForwardCache cache;
  forward(model, sentence, dropout, &cache);
  if (!grads) {
    return crf_log_partition(cache.emissions, model.params.transitions) -
           crf_path_score(cache.emissions, model.params.transitions, sentence.gold);
  }
  const CrfLoss crf = crf_nll(cache.emissions, model.params.transitions, sentence.gold);
  backward(model, sentence, cache, crf, grads);
  return crf.loss;
}

namespace {

BatchGradients run_batch(const TaggerModel& model,
                         std::span<const EncodedSentence* const> batch,
                         std::span<const std::uint64_t> seeds, bool parallel) {
  const auto n = static_cast<std::int64_t>(batch.size());
  std::vector<SentenceGradients> per(batch.size());
  std::vector<double> losses(batch.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    per[k] = make_sentence_grads(model.params);
    if (seeds.empty()) {
      losses[k] = sentence_nll(model, *batch[k], nullptr, &per[k]);
    } else {
      Rng rng(seeds[k]);
      losses[k] = sentence_nll(model, *batch[k], &rng, &per[k]);
    }
  }
  BatchGradients out;
  out.grads = model.params.zeros_like();
  auto total = out.grads.tensors();
  for (std::size_t k = 0; k < per.size(); ++k) {
    out.loss += losses[k];
    auto part = per[k].dense.tensors();
    for (std::size_t j = 0; j < total.size(); ++j) {
      if (part[j].second->size() > 0) *total[j].second += *part[j].second;
    }
    for (const auto& [id, row] : per[k].word_rows) {
      out.grads.word_lookup.row(id) += row.transpose();
    }
  }
  return out;
}

}  // namespace

BatchGradients nll_and_gradients(const TaggerModel& model,
                                 std::span<const EncodedSentence* const> batch,
                                 std::span<const std::uint64_t> seeds) {
  return run_batch(model, batch, seeds, true);
}

BatchGradients nll_and_gradients_serial(const TaggerModel& model,
                                        std::span<const EncodedSentence* const> batch,
                                        std::span<const std::uint64_t> seeds) {
  return run_batch(model, batch, seeds, false);
}

double sgd_step(TaggerParams& params, const TaggerParams& grads, TaggerParams& velocity,
                const TaggerConfig& config, int epoch) {
  auto p = params.tensors();
  auto g = grads.tensors();
  auto v = velocity.tensors();
  double sq = 0;
  for (const auto& [name, m] : g) {
    if (m->size() == 0) continue;
    if (!m->allFinite()) throw NumericalError("non-finite gradient in " + name);
    sq += m->squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericalError("gradient norm overflow");
  const double scale = config.clip_mode == ClipMode::kGlobalNorm && norm > config.clip_norm
                           ? config.clip_norm / norm
                           : 1.0;
  const double lr = config.learning_rate * std::pow(config.decay_rate, epoch);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].second->size() == 0) continue;
    if (config.clip_mode == ClipMode::kPerValue) {
      *v[i].second = config.momentum * *v[i].second +
                     g[i].second->cwiseMax(-config.clip_norm).cwiseMin(config.clip_norm);
    } else {
      *v[i].second = config.momentum * *v[i].second + scale * *g[i].second;
    }
    *p[i].second -= lr * *v[i].second;
  }
  return norm;
}

// ---------------------------------------------------------------- inference

std::vector<std::string> tag_encoded(const TaggerModel& model, const EncodedSentence& sentence) {
  if (sentence.size() == 0) return {};
  const Eigen::MatrixXd e = compute_emissions(model, sentence);
  const auto result = viterbi_decode(e, model.params.transitions,
                                     model.config.bilou_mask ? &model.decode_mask() : nullptr);
  std::vector<std::string> out;
  out.reserve(result.path.size());
  for (int id : result.path) out.push_back(model.tags.item(id));
  return out;
}

std::vector<std::string> tag_sentence(const TaggerModel& model, const Sentence& sentence) {
  return tag_encoded(model, encode_sentence(model, sentence, false));
}

std::vector<std::vector<std::string>> tag_corpus(const TaggerModel& model,
                                                 std::span<const EncodedSentence> sentences) {
  std::vector<std::vector<std::string>> out(sentences.size());
  const auto n = static_cast<std::int64_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = tag_encoded(model, sentences[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<std::vector<std::string>> tag_corpus_serial(
    const TaggerModel& model, std::span<const EncodedSentence> sentences) {
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(tag_encoded(model, s));
  return out;
}

Eigen::VectorXd char_represent(const TaggerModel& model, std::string_view word) {
  std::vector<int> ids;
  for (char32_t cp : utf8_decode(word)) ids.push_back(model.chars.id_or_unk(utf8_encode(cp)));
  return char_rep(model.params, ids, nullptr);
}

Eigen::VectorXd assemble_input(const TaggerModel& model, const EncodedSentence& sentence,
                               std::size_t position) {
  ForwardCache cache;
  forward(model, sentence, nullptr, &cache);
  return cache.x.col(static_cast<Eigen::Index>(position));
}

Eigen::VectorXd assemble_input(const TaggerModel& model, std::string_view token) {
  Sentence s;
  s.tokens.emplace_back(token);
  return assemble_input(model, encode_sentence(model, s, false), 0);
}

}  // namespace lexner
