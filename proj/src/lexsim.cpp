#include "lexner/lexsim.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "lexner/binary_io.h"
#include "lexner/error.h"
#include "lexner/text.h"

namespace lexner {

namespace {

constexpr std::string_view kLsMagic = "LSTB";
constexpr std::uint8_t kLsVersion = 1;

std::vector<std::string> unique_lowercased(std::span<const std::string> vocab) {
  std::set<std::string> keys;
  for (const auto& w : vocab) keys.insert(lowercase(w));
  return {keys.begin(), keys.end()};
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw DataError("cosine of vectors with dimensions " + std::to_string(u.size()) +
                    " and " + std::to_string(v.size()));
  }
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += double(u[i]) * v[i];
    nu += double(u[i]) * u[i];
    nv += double(v[i]) * v[i];
  }
  if (nu == 0 || nv == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<float> minmax_scale(std::span<const float> values) {
  std::vector<float> out(values.size(), 0.0f);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(2.0 * (values[i] - lo) / (hi - lo) - 1.0);
  }
  return out;
}

std::vector<std::vector<float>> type_vectors(const EmbeddingTable& table,
                                             const TypeInventory& inventory) {
  std::vector<std::vector<float>> out;
  out.reserve(inventory.size());
  for (const auto& label : inventory.labels()) {
    if (!table.contains(label)) {
      throw DataError("entity type '" + label + "' has no embedding");
    }
    out.push_back(word_vector(table, label));
  }
  return out;
}

std::vector<float> ls_raw(std::span<const float> word_vec,
                          const std::vector<std::vector<float>>& types) {
  std::vector<float> out(types.size());
  for (std::size_t i = 0; i < types.size(); ++i) {
    out[i] = static_cast<float>(cosine(word_vec, types[i]));
  }
  return out;
}

std::vector<float> ls_raw(std::string_view word, const EmbeddingTable& table,
                          const TypeInventory& inventory) {
  const auto types = type_vectors(table, inventory);
  return ls_raw(word_vector(table, word), types);
}

const std::vector<float>* LSTable::find(std::string_view word) const {
  auto it = entries_.find(lowercase(word));
  return it == entries_.end() ? nullptr : &it->second;
}

void LSTable::insert(std::string word, std::vector<float> values) {
  if (values.size() != dim()) {
    throw DataError("LS vector for '" + word + "' has dimension " +
                    std::to_string(values.size()) + ", expected " +
                    std::to_string(dim()));
  }
  entries_.insert_or_assign(std::move(word), std::move(values));
}

LSTable build_ls_table(std::span<const std::string> vocab, const EmbeddingTable& table,
                       const TypeInventory& inventory) {
  if (vocab.empty()) throw DataError("LS vocabulary is empty");
  const auto types = type_vectors(table, inventory);
  const auto keys = unique_lowercased(vocab);
  std::vector<std::vector<float>> rows(keys.size());
  const auto n = static_cast<std::int64_t>(keys.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto raw = ls_raw(word_vector(table, keys[static_cast<std::size_t>(i)]), types);
    rows[static_cast<std::size_t>(i)] = minmax_scale(raw);
  }
  LSTable out(inventory, table.seed());
  for (std::size_t i = 0; i < keys.size(); ++i) out.insert(keys[i], std::move(rows[i]));
  return out;
}

LSTable build_ls_table_serial(std::span<const std::string> vocab,
                              const EmbeddingTable& table,
                              const TypeInventory& inventory) {
  if (vocab.empty()) throw DataError("LS vocabulary is empty");
  const auto types = type_vectors(table, inventory);
  LSTable out(inventory, table.seed());
  for (const auto& key : unique_lowercased(vocab)) {
    out.insert(key, minmax_scale(ls_raw(word_vector(table, key), types)));
  }
  return out;
}

std::vector<TypeScore> top_k_types(std::string_view word, std::size_t k,
                                   const EmbeddingTable& table,
                                   const TypeInventory& inventory) {
  const auto raw = ls_raw(word, table, inventory);
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });
  k = std::min(k, order.size());
  std::vector<TypeScore> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({inventory.label(order[i]), raw[order[i]]});
  }
  return out;
}

namespace {

void write_body(ByteWriter& w, const LSTable& table) {
  w.u32(static_cast<std::uint32_t>(table.dim()));
  for (const auto& label : table.inventory().labels()) w.str(label);
  w.u64(table.size());
  for (const auto& [word, values] : table.entries()) {
    w.str(word);
    w.f32s(values);
  }
}

}  // namespace

std::string serialize_ls_table(const LSTable& table) {
  ByteWriter w;
  w.bytes(kLsMagic);
  w.u8(kLsVersion);
  w.u64(table.seed());
  write_body(w, table);
  return w.take();
}

LSTable deserialize_ls_table(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kLsMagic) throw FormatError("not an LS table (bad magic)", 0);
  const auto version = r.u8("version");
  if (version != kLsVersion) {
    throw FormatError("unsupported LS table version " + std::to_string(version), 4);
  }
  const std::uint64_t seed = r.u64("seed");
  const std::uint32_t dim = r.u32("dimension");
  std::vector<std::string> labels;
  labels.reserve(dim);
  for (std::uint32_t i = 0; i < dim; ++i) labels.push_back(r.str("type label"));
  LSTable table(TypeInventory(std::move(labels)), seed);
  const std::uint64_t count = r.u64("record count");
  std::vector<float> values(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string word = r.str("record word");
    r.f32s(values, "record values");
    table.insert(std::move(word), values);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last record", r.offset());
  return table;
}

void save_ls_table(const LSTable& table, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_ls_table(table));
}

LSTable load_ls_table(const std::filesystem::path& path, const TypeInventory* expected) {
  LSTable table = deserialize_ls_table(read_file_bytes(path));
  if (expected && !(table.inventory() == *expected)) {
    throw DataError("LS table " + path.string() +
                    " was built for a different type inventory");
  }
  return table;
}

void save_ls_text(const LSTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "#";
  for (const auto& label : table.inventory().labels()) out << ' ' << label;
  out << '\n';
  char buf[32];
  for (const auto& [word, values] : table.entries()) {
    out << word;
    for (float v : values) {
      std::snprintf(buf, sizeof buf, " %.6f", v);
      out << buf;
    }
    out << '\n';
  }
}

std::uint64_t content_hash(const LSTable& table) {
  ByteWriter w;
  write_body(w, table);
  const auto& b = w.buffer();
  return fnv1a64(b.data(), b.size());
}

LsLookup::LsLookup(const LSTable* table, const EmbeddingTable* fallback)
    : table_(table), fallback_(fallback) {
  if (table_ && fallback_) type_vecs_ = type_vectors(*fallback_, table_->inventory());
}

std::vector<float> LsLookup::operator()(std::string_view word) const {
  if (!table_) return {};
  if (const auto* v = table_->find(word)) return *v;
  if (fallback_) return minmax_scale(ls_raw(word_vector(*fallback_, word), type_vecs_));
  return std::vector<float>(table_->dim(), 0.0f);
}

}  // namespace lexner
