#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lexner {

struct EmbedConfig {
  int dim = 100;
  int window = 5;
  int min_count = 5;
  int ngram_min = 3;
  int ngram_max = 6;
  int bucket_count = 100000;
  int negatives = 5;
  int epochs = 5;
  // Decays linearly to zero over all tokens processed.
  double learning_rate = 0.05;
  double subsample_threshold = 1e-4;
  std::uint64_t seed = 1;
  // Asynchronous (racy) workers; 1 is bitwise deterministic.
  int workers = 1;

  void validate() const;
};

// Character n-grams of "<word>" with lengths in [nmin, nmax], shortest
// first, followed by "<word>" itself. Atomic tokens have none.
std::vector<std::string> char_ngrams(std::string_view word, int nmin, int nmax,
                                     bool atomic = false);

// FNV-1a 32-bit of the n-gram bytes, modulo bucket_count.
std::uint32_t hash_ngram(std::string_view ngram, std::uint32_t bucket_count);

// "/person", "/person/musician": the shape of an entity-type token.
bool looks_like_type_token(std::string_view token);

// Joint word / type / subword embedding table. Input rows [0, size()) are
// words, rows [size(), size() + bucket_count()) are n-gram buckets.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dim, std::vector<std::string> words,
                 std::vector<std::uint64_t> counts,
                 std::vector<std::uint8_t> atomic, int bucket_count,
                 int ngram_min, int ngram_max);

  int dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  int bucket_count() const { return bucket_count_; }
  int ngram_min() const { return ngram_min_; }
  int ngram_max() const { return ngram_max_; }
  bool has_subwords() const { return bucket_count_ > 0; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  const std::string& word(std::size_t id) const { return words_[id]; }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t count(std::size_t id) const { return counts_[id]; }
  bool is_atomic(std::size_t id) const { return atomic_[id] != 0; }

  std::span<const float> input_row(std::size_t row) const {
    return {input_.data() + row * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<float> input_row(std::size_t row) {
    return {input_.data() + row * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const float> output_row(std::size_t id) const {
    return {output_.data() + id * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<float> output_row(std::size_t id) {
    return {output_.data() + id * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const float> bucket_row(std::size_t bucket) const {
    return input_row(size() + bucket);
  }
  std::span<float> bucket_row(std::size_t bucket) { return input_row(size() + bucket); }

  const std::vector<float>& input_matrix() const { return input_; }
  std::vector<float>& input_matrix() { return input_; }
  const std::vector<float>& output_matrix() const { return output_; }
  bool has_output() const { return !output_.empty(); }
  void allocate_output() { output_.assign(words_.size() * dim_, 0.0f); }

  // Input-row indices (absolute) of the word's n-gram buckets.
  std::vector<std::size_t> subword_rows(std::string_view word, bool atomic) const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  int dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint8_t> atomic_;
  int bucket_count_ = 0;
  int ngram_min_ = 3;
  int ngram_max_ = 6;
  std::uint64_t seed_ = 0;
  std::vector<float> input_;
  std::vector<float> output_;
};

// In-vocab: word row plus the mean of its n-gram rows (atomic tokens: the
// row alone). Out-of-vocab: the mean of n-gram rows, or zeros. The query is
// lowercased.
std::vector<float> word_vector(const EmbeddingTable& table, std::string_view word);

struct SkipgramStats {
  // Mean negative-sampling loss per (center, context) prediction.
  std::vector<double> epoch_loss;
  std::uint64_t tokens_processed = 0;
};

// Called after each epoch with the 0-based epoch index and its mean loss.
using ProgressFn = std::function<void(int epoch, double loss)>;

// Trains on whitespace-tokenized lines (contexts never cross lines).
// Tokens listed in `atomic_tokens` have no n-grams and bypass min_count;
// when the list is empty, tokens that look like type labels are atomic.
EmbeddingTable train_skipgram(std::span<const std::string> lines,
                              const EmbedConfig& config,
                              std::span<const std::string> atomic_tokens = {},
                              SkipgramStats* stats = nullptr,
                              const ProgressFn& progress = {});

// Logistic negative-sampling loss for one center vector against one positive
// and k negative output vectors: -log s(h.o+) - sum log s(-h.o-).
// Writes dL/dh and dL/do_j; returns the loss.
template <typename T>
T negative_sampling_loss(std::span<const T> hidden,
                         std::span<const std::span<const T>> outputs,
                         std::span<T> grad_hidden,
                         std::span<const std::span<T>> grad_outputs) {
  const std::size_t dim = hidden.size();
  for (auto& g : grad_hidden) g = T(0);
  T loss = T(0);
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    const auto& out = outputs[j];
    T dot = T(0);
    for (std::size_t d = 0; d < dim; ++d) dot += hidden[d] * out[d];
    const T label = j == 0 ? T(1) : T(0);
    const T signed_dot = j == 0 ? dot : -dot;
    // log(1 + exp(-x)), stable for both signs.
    loss += signed_dot > T(0) ? std::log1p(std::exp(-signed_dot))
                              : -signed_dot + std::log1p(std::exp(signed_dot));
    const T sig = T(1) / (T(1) + std::exp(-dot));
    const T coeff = sig - label;
    for (std::size_t d = 0; d < dim; ++d) {
      grad_hidden[d] += coeff * out[d];
      grad_outputs[j][d] = coeff * hidden[d];
    }
  }
  return loss;
}

// Text format: "count dim" header, then "word v1 ... vdim" per line. The
// subword section goes to `<path>.subword` when the table has buckets.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// Loads a table written by save_embeddings, or any third-party text vector
// file (with or without a header line) as a plain table without subwords.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               bool with_subwords = true);

std::filesystem::path subword_path(const std::filesystem::path& path);

}  // namespace lexner
