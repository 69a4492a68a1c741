#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexner/corpus.h"
#include "lexner/embed.h"

namespace lexner {

// Zero when either vector is all zeros. Throws DataError on size mismatch.
double cosine(std::span<const float> u, std::span<const float> v);

// x -> 2 (x - min) / (max - min) - 1; a constant vector maps to zeros.
std::vector<float> minmax_scale(std::span<const float> values);

// Embeddings of the inventory labels, in inventory order. Throws DataError
// when a label has no embedding.
std::vector<std::vector<float>> type_vectors(const EmbeddingTable& table,
                                             const TypeInventory& inventory);

// Raw cosine similarity of the (lowercased) word to each entity type.
std::vector<float> ls_raw(std::string_view word, const EmbeddingTable& table,
                          const TypeInventory& inventory);
std::vector<float> ls_raw(std::span<const float> word_vec,
                          const std::vector<std::vector<float>>& types);

// Per-word scaled LS vectors. Keys are lowercased words.
class LSTable {
 public:
  LSTable() = default;
  explicit LSTable(TypeInventory inventory, std::uint64_t seed = 0)
      : inventory_(std::move(inventory)), seed_(seed) {}

  const TypeInventory& inventory() const { return inventory_; }
  std::size_t dim() const { return inventory_.size(); }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  // Lowercases the query.
  const std::vector<float>* find(std::string_view word) const;
  void insert(std::string word, std::vector<float> values);
  const std::map<std::string, std::vector<float>>& entries() const { return entries_; }

  friend bool operator==(const LSTable&, const LSTable&) = default;

 private:
  TypeInventory inventory_;
  std::map<std::string, std::vector<float>> entries_;
  std::uint64_t seed_ = 0;
};

// OpenMP over words; identical output to the serial reference.
LSTable build_ls_table(std::span<const std::string> vocab, const EmbeddingTable& table,
                       const TypeInventory& inventory);
LSTable build_ls_table_serial(std::span<const std::string> vocab,
                              const EmbeddingTable& table,
                              const TypeInventory& inventory);

struct TypeScore {
  std::string type;
  double similarity = 0;
};

// Descending raw cosine; ties keep inventory order.
std::vector<TypeScore> top_k_types(std::string_view word, std::size_t k,
                                   const EmbeddingTable& table,
                                   const TypeInventory& inventory);

// Binary format: "LSTB", version, seed, dim, labels, then records of
// (word, dim float32). All integers little-endian.
std::string serialize_ls_table(const LSTable& table);
LSTable deserialize_ls_table(std::string_view bytes);
void save_ls_table(const LSTable& table, const std::filesystem::path& path);
// With `expected`, throws when the stored inventory differs.
LSTable load_ls_table(const std::filesystem::path& path,
                      const TypeInventory* expected = nullptr);
// Debug dump: "word v1 ... vdim" per line after a label header line.
void save_ls_text(const LSTable& table, const std::filesystem::path& path);

// FNV-1a 64 over the serialized inventory and records (seed excluded).
std::uint64_t content_hash(const LSTable& table);

// LS features for the tagger: table lookup, then on-the-fly composition from
// the embedding table for misses, then zeros.
class LsLookup {
 public:
  LsLookup() = default;
  LsLookup(const LSTable* table, const EmbeddingTable* fallback);

  std::size_t dim() const { return table_ ? table_->dim() : 0; }
  std::vector<float> operator()(std::string_view word) const;
  const LSTable* table() const { return table_; }

 private:
  const LSTable* table_ = nullptr;
  const EmbeddingTable* fallback_ = nullptr;
  std::vector<std::vector<float>> type_vecs_;
};

}  // namespace lexner
