#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace lexner {

// A named list of lowercased word n-grams.
struct Gazetteer {
  std::string name;
  std::set<std::vector<std::string>> entries;

  void add(const std::vector<std::string>& tokens);
  std::size_t longest() const;
};

// File format: "list_name<TAB>entry tokens" per line. Lists keep first-seen
// order.
std::vector<Gazetteer> load_gazetteers(const std::filesystem::path& path);

// One row per token, one column per gazetteer: 1 when the token lies inside
// an n-gram (n <= max_n) found in that list. Matching is case-insensitive.
std::vector<std::vector<std::uint8_t>> gazetteer_features(
    std::span<const std::string> tokens, std::span<const Gazetteer> gazetteers,
    int max_n);

}  // namespace lexner
