#include "lexner/embed.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lexner/binary_io.h"
#include "lexner/error.h"
#include "lexner/parallel.h"
#include "lexner/random.h"
#include "lexner/text.h"

namespace lexner {

namespace {

constexpr std::string_view kSubwordMagic = "LXSW";
constexpr std::uint8_t kSubwordVersion = 1;
constexpr std::size_t kNoiseTableSize = 1u << 22;

}  // namespace

void EmbedConfig::validate() const {
  if (dim <= 0) throw DataError("embed.dim must be positive");
  if (window <= 0) throw DataError("embed.window must be positive");
  if (min_count < 1) throw DataError("embed.min_count must be >= 1");
  if (ngram_min < 1 || ngram_min > ngram_max) {
    throw DataError("embed.ngram_min must be in [1, ngram_max]");
  }
  if (bucket_count <= 0) throw DataError("embed.bucket_count must be positive");
  if (negatives < 1) throw DataError("embed.negatives must be positive");
  if (epochs < 1) throw DataError("embed.epochs must be positive");
  if (!(learning_rate > 0)) throw DataError("embed.learning_rate must be positive");
  if (subsample_threshold < 0) {
    throw DataError("embed.subsample_threshold must be non-negative");
  }
  if (workers < 1) throw DataError("embed.workers must be positive");
}

std::vector<std::string> char_ngrams(std::string_view word, int nmin, int nmax,
                                     bool atomic) {
  std::vector<std::string> out;
  if (atomic || word.empty()) return out;
  std::vector<char32_t> cps{U'<'};
  const auto body = utf8_decode(word);
  cps.insert(cps.end(), body.begin(), body.end());
  cps.push_back(U'>');
  const int len = static_cast<int>(cps.size());
  for (int n = nmin; n <= nmax && n < len; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      out.push_back(utf8_encode(std::vector<char32_t>(cps.begin() + i,
                                                      cps.begin() + i + n)));
    }
  }
  out.push_back(utf8_encode(cps));
  return out;
}

std::uint32_t hash_ngram(std::string_view ngram, std::uint32_t bucket_count) {
  return fnv1a32(ngram) % bucket_count;
}

bool looks_like_type_token(std::string_view token) {
  if (token.size() < 2 || token[0] != '/') return false;
  if (token[1] < 'a' || token[1] > 'z') return false;
  int slashes = 0;
  for (char c : token) {
    if (c == '/') {
      ++slashes;
    } else if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
                 c == '-')) {
      return false;
    }
  }
  return slashes <= 2 && token.back() != '/';
}

EmbeddingTable::EmbeddingTable(int dim, std::vector<std::string> words,
                               std::vector<std::uint64_t> counts,
                               std::vector<std::uint8_t> atomic,
                               int bucket_count, int ngram_min, int ngram_max)
    : dim_(dim),
      words_(std::move(words)),
      counts_(std::move(counts)),
      atomic_(std::move(atomic)),
      bucket_count_(bucket_count),
      ngram_min_(ngram_min),
      ngram_max_(ngram_max) {
  if (dim_ <= 0) throw DataError("embedding dimension must be positive");
  counts_.resize(words_.size(), 0);
  atomic_.resize(words_.size(), 0);
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw DataError("duplicate word in embedding table: " + words_[i]);
    }
  }
  input_.assign((words_.size() + static_cast<std::size_t>(bucket_count_)) * dim_,
                0.0f);
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> EmbeddingTable::subword_rows(std::string_view word,
                                                      bool atomic) const {
  std::vector<std::size_t> rows;
  if (!has_subwords()) return rows;
  for (const auto& g : char_ngrams(word, ngram_min_, ngram_max_, atomic)) {
    rows.push_back(size() + hash_ngram(g, static_cast<std::uint32_t>(bucket_count_)));
  }
  return rows;
}

std::vector<float> word_vector(const EmbeddingTable& table, std::string_view word) {
  const std::string query = lowercase(word);
  std::vector<float> out(static_cast<std::size_t>(table.dim()), 0.0f);
  const auto id = table.find(query);
  const bool atomic = id ? table.is_atomic(*id) : looks_like_type_token(query);
  const auto rows = table.subword_rows(query, atomic);
  if (!rows.empty()) {
    const float scale = 1.0f / static_cast<float>(rows.size());
    for (std::size_t r : rows) {
      const auto v = table.input_row(r);
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += v[d];
    }
    for (float& x : out) x *= scale;
  }
  if (id) {
    const auto v = table.input_row(*id);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += v[d];
  }
  return out;
}

EmbeddingTable train_skipgram(std::span<const std::string> lines,
                              const EmbedConfig& config,
                              std::span<const std::string> atomic_tokens,
                              SkipgramStats* stats, const ProgressFn& progress) {
  config.validate();
  if (lines.empty()) throw DataError("embedding training stream is empty");

  const std::unordered_set<std::string> atomic_set(atomic_tokens.begin(),
                                                   atomic_tokens.end());
  const auto is_atomic = [&](const std::string& w) {
    return atomic_set.empty() ? looks_like_type_token(w) : atomic_set.count(w) > 0;
  };

  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& line : lines) {
    for (auto& tok : split_whitespace(line)) ++freq[tok];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, c] : freq) {
    if (c >= static_cast<std::uint64_t>(config.min_count) || is_atomic(w)) {
      kept.emplace_back(w, c);
    }
  }
  if (kept.empty()) throw DataError("no word reaches min_count; vocabulary is empty");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint8_t> atomic;
  for (auto& [w, c] : kept) {
    atomic.push_back(is_atomic(w) ? 1 : 0);
    words.push_back(w);
    counts.push_back(c);
  }
  EmbeddingTable table(config.dim, std::move(words), std::move(counts),
                       std::move(atomic), config.bucket_count, config.ngram_min,
                       config.ngram_max);
  table.set_seed(config.seed);
  table.allocate_output();

  Rng init_rng(config.seed);
  const double bound = 1.0 / config.dim;
  for (float& x : table.input_matrix()) {
    x = static_cast<float>(init_rng.uniform(-bound, bound));
  }

  const std::size_t vocab = table.size();
  std::vector<std::vector<std::size_t>> subwords(vocab);
  for (std::size_t i = 0; i < vocab; ++i) {
    subwords[i] = table.subword_rows(table.word(i), table.is_atomic(i));
  }

  // Encoded corpus, out-of-vocabulary tokens dropped.
  std::vector<std::int32_t> corpus;
  std::vector<std::size_t> line_start{0};
  std::uint64_t total_words = 0;
  for (const auto& line : lines) {
    for (const auto& tok : split_whitespace(line)) {
      if (auto id = table.find(tok)) corpus.push_back(static_cast<std::int32_t>(*id));
    }
    line_start.push_back(corpus.size());
  }
  total_words = corpus.size();

  // Unigram^0.75 noise table.
  std::vector<std::int32_t> noise(kNoiseTableSize);
  {
    double norm = 0;
    for (std::size_t i = 0; i < vocab; ++i) norm += std::pow(double(table.count(i)), 0.75);
    std::size_t w = 0;
    double cumulative = std::pow(double(table.count(0)), 0.75) / norm;
    for (std::size_t k = 0; k < kNoiseTableSize; ++k) {
      noise[k] = static_cast<std::int32_t>(w);
      if (double(k + 1) / kNoiseTableSize > cumulative && w + 1 < vocab) {
        ++w;
        cumulative += std::pow(double(table.count(w)), 0.75) / norm;
      }
    }
  }

  std::vector<double> keep_prob(vocab, 1.0);
  if (config.subsample_threshold > 0) {
    const double t = config.subsample_threshold * double(total_words);
    for (std::size_t i = 0; i < vocab; ++i) {
      const double c = double(table.count(i));
      keep_prob[i] = std::min(1.0, (std::sqrt(c / t) + 1.0) * t / c);
    }
  }

  const std::size_t num_lines = lines.size();
  const double total_work = double(config.epochs) * double(total_words);
  std::atomic<std::uint64_t> processed{0};
  const int workers = config.workers;
  const int dim = config.dim;
  const int k_neg = config.negatives;

  Rng seeder(config.seed ^ 0x5bd1e995ULL);
  std::vector<std::uint64_t> worker_seeds(static_cast<std::size_t>(workers));
  for (auto& s : worker_seeds) s = seeder.fork();

  SkipgramStats local_stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0;
    std::uint64_t epoch_predictions = 0;

#pragma omp parallel num_threads(workers) reduction(+ : epoch_loss, epoch_predictions)
    {
      const int w = thread_index();
      Rng rng(worker_seeds[static_cast<std::size_t>(w)] + static_cast<std::uint64_t>(epoch));
      const std::size_t lo = num_lines * static_cast<std::size_t>(w) / workers;
      const std::size_t hi = num_lines * static_cast<std::size_t>(w + 1) / workers;

      std::vector<float> hidden(dim), grad_hidden(dim), accum(dim);
      std::vector<std::vector<float>> grad_out(static_cast<std::size_t>(k_neg + 1),
                                               std::vector<float>(dim));
      std::vector<std::span<const float>> outs;
      std::vector<std::span<float>> gouts;
      std::vector<std::size_t> targets;
      std::vector<std::int32_t> sentence;

      for (std::size_t li = lo; li < hi; ++li) {
        const std::uint64_t done = processed.load(std::memory_order_relaxed);
        const float lr = static_cast<float>(
            config.learning_rate * std::max(1e-4, 1.0 - double(done) / total_work));
        sentence.clear();
        for (std::size_t p = line_start[li]; p < line_start[li + 1]; ++p) {
          const auto id = corpus[p];
          if (keep_prob[id] >= 1.0 || rng.uniform() < keep_prob[id]) {
            sentence.push_back(id);
          }
        }
        processed.fetch_add(line_start[li + 1] - line_start[li],
                            std::memory_order_relaxed);
        const int n = static_cast<int>(sentence.size());
        for (int i = 0; i < n; ++i) {
          const auto center = static_cast<std::size_t>(sentence[i]);
          const auto& sub = subwords[center];
          const auto wrow = table.input_row(center);
          std::copy(wrow.begin(), wrow.end(), hidden.begin());
          if (!sub.empty()) {
            std::fill(accum.begin(), accum.end(), 0.0f);
            for (std::size_t r : sub) {
              const auto v = table.input_row(r);
              for (int d = 0; d < dim; ++d) accum[d] += v[d];
            }
            const float inv = 1.0f / static_cast<float>(sub.size());
            for (int d = 0; d < dim; ++d) hidden[d] += accum[d] * inv;
          }
          std::fill(accum.begin(), accum.end(), 0.0f);

          const int radius = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.window)));
          for (int c = std::max(0, i - radius); c <= std::min(n - 1, i + radius); ++c) {
            if (c == i) continue;
            const auto context = static_cast<std::size_t>(sentence[c]);
            targets.assign(1, context);
            for (int k = 0; k < k_neg; ++k) {
              const auto neg = static_cast<std::size_t>(noise[rng.below(kNoiseTableSize)]);
              if (neg != context) targets.push_back(neg);
            }
            outs.clear();
            gouts.clear();
            for (std::size_t j = 0; j < targets.size(); ++j) {
              outs.push_back(table.output_row(targets[j]));
              gouts.emplace_back(grad_out[j]);
            }
            epoch_loss += negative_sampling_loss<float>(hidden, outs, grad_hidden, gouts);
            ++epoch_predictions;
            for (int d = 0; d < dim; ++d) accum[d] += grad_hidden[d];
            for (std::size_t j = 0; j < targets.size(); ++j) {
              auto row = table.output_row(targets[j]);
              for (int d = 0; d < dim; ++d) row[d] -= lr * grad_out[j][d];
            }
          }
          auto center_row = table.input_row(center);
          for (int d = 0; d < dim; ++d) center_row[d] -= lr * accum[d];
          for (std::size_t r : sub) {
            auto row = table.input_row(r);
            for (int d = 0; d < dim; ++d) row[d] -= lr * accum[d];
          }
        }
      }
    }

    const double mean_loss =
        epoch_predictions ? epoch_loss / double(epoch_predictions) : 0.0;
    if (!std::isfinite(mean_loss)) {
      throw NumericalError("skipgram loss diverged in epoch " + std::to_string(epoch + 1));
    }
    local_stats.epoch_loss.push_back(mean_loss);
    if (progress) progress(epoch, mean_loss);
  }
  local_stats.tokens_processed = processed.load();
  if (stats) *stats = std::move(local_stats);
  return table;
}

std::filesystem::path subword_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".subword";
  return p;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  std::array<char, 64> buf{};
  std::string line;
  for (std::size_t i = 0; i < table.size(); ++i) {
    line = table.word(i);
    for (float v : table.input_row(i)) {
      auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
      line += ' ';
      line.append(buf.data(), end);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw DataError("write failed for " + path.string());

  if (!table.has_subwords()) {
    std::filesystem::remove(subword_path(path));
    return;
  }
  ByteWriter w;
  w.bytes(kSubwordMagic);
  w.u8(kSubwordVersion);
  w.u64(table.seed());
  w.u32(static_cast<std::uint32_t>(table.dim()));
  w.u32(static_cast<std::uint32_t>(table.size()));
  w.u32(static_cast<std::uint32_t>(table.bucket_count()));
  w.u32(static_cast<std::uint32_t>(table.ngram_min()));
  w.u32(static_cast<std::uint32_t>(table.ngram_max()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    w.u64(table.count(i));
    w.u8(table.is_atomic(i) ? 1 : 0);
  }
  for (int b = 0; b < table.bucket_count(); ++b) {
    w.f32s(table.bucket_row(static_cast<std::size_t>(b)));
  }
  write_file_bytes(subword_path(path), w.buffer());
}

namespace {

bool parse_uint(std::string_view s, std::uint64_t* out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               bool with_subwords) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  int dim = -1;
  std::uint64_t declared = 0;
  bool has_header = false;
  std::vector<std::string> words;
  std::vector<float> values;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2) {
      std::uint64_t a = 0, b = 0;
      if (parse_uint(fields[0], &a) && parse_uint(fields[1], &b)) {
        has_header = true;
        declared = a;
        dim = static_cast<int>(b);
        if (dim <= 0) throw ParseError("non-positive dimension in header", lineno);
        continue;
      }
    }
    const int row_dim = static_cast<int>(fields.size()) - 1;
    if (dim < 0) dim = row_dim;
    if (row_dim != dim || row_dim <= 0) {
      throw ParseError("expected " + std::to_string(dim) + " values, found " +
                           std::to_string(row_dim),
                       lineno);
    }
    if (!seen.insert(fields[0]).second) continue;
    words.push_back(fields[0]);
    for (int d = 1; d <= dim; ++d) {
      float v = 0;
      const auto& f = fields[static_cast<std::size_t>(d)];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v)) {
        throw ParseError("bad vector component '" + f + "'", lineno);
      }
      values.push_back(v);
    }
  }
  if (dim <= 0) throw DataError("no vectors in " + path.string());
  if (has_header && declared != words.size()) {
    throw DataError("header declares " + std::to_string(declared) + " words, file has " +
                    std::to_string(words.size()));
  }

  const auto sub = subword_path(path);
  const bool load_sub = with_subwords && std::filesystem::exists(sub);
  std::vector<std::uint64_t> counts(words.size(), 0);
  std::vector<std::uint8_t> atomic(words.size(), 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    atomic[i] = looks_like_type_token(words[i]) ? 1 : 0;
  }
  if (!load_sub) {
    EmbeddingTable table(dim, std::move(words), std::move(counts), std::move(atomic),
                         0, 3, 6);
    std::copy(values.begin(), values.end(), table.input_matrix().begin());
    return table;
  }

  const std::string bytes = read_file_bytes(sub);
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kSubwordMagic) throw FormatError("bad subword magic", 0);
  if (r.u8("version") != kSubwordVersion) throw FormatError("unsupported subword version", 4);
  const std::uint64_t seed = r.u64("seed");
  const auto sdim = r.u32("dim");
  const auto svocab = r.u32("vocab size");
  const auto buckets = r.u32("bucket count");
  const auto nmin = r.u32("ngram_min");
  const auto nmax = r.u32("ngram_max");
  if (static_cast<int>(sdim) != dim || svocab != words.size()) {
    throw FormatError("subword section does not match the text vectors", r.offset());
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    counts[i] = r.u64("word count");
    atomic[i] = r.u8("atomic flag");
  }
  EmbeddingTable table(dim, std::move(words), std::move(counts), std::move(atomic),
                       static_cast<int>(buckets), static_cast<int>(nmin),
                       static_cast<int>(nmax));
  table.set_seed(seed);
  auto& m = table.input_matrix();
  std::copy(values.begin(), values.end(), m.begin());
  r.f32s(std::span<float>(m.data() + values.size(), m.size() - values.size()),
         "bucket vectors");
  if (!r.at_end()) throw FormatError("trailing bytes in subword section", r.offset());
  return table;
}

}  // namespace lexner
