#include "lexner/gazetteer.h"

#include <algorithm>
#include <fstream>

#include "lexner/error.h"
#include "lexner/text.h"

namespace lexner {

void Gazetteer::add(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return;
  std::vector<std::string> lower;
  lower.reserve(tokens.size());
  for (const auto& t : tokens) lower.push_back(lowercase(t));
  entries.insert(std::move(lower));
}

std::size_t Gazetteer::longest() const {
  std::size_t n = 0;
  for (const auto& e : entries) n = std::max(n, e.size());
  return n;
}

std::vector<Gazetteer> load_gazetteers(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open gazetteer file " + path.string());
  std::vector<Gazetteer> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'name<TAB>entry'", lineno);
    const std::string name = line.substr(0, tab);
    auto tokens = split_whitespace(std::string_view(line).substr(tab + 1));
    if (name.empty() || tokens.empty()) throw ParseError("empty gazetteer name or entry", lineno);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Gazetteer& g) { return g.name == name; });
    if (it == out.end()) {
      out.push_back(Gazetteer{name, {}});
      it = out.end() - 1;
    }
    it->add(tokens);
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> gazetteer_features(
    std::span<const std::string> tokens, std::span<const Gazetteer> gazetteers,
    int max_n) {
  const std::size_t T = tokens.size();
  std::vector<std::vector<std::uint8_t>> bits(T, std::vector<std::uint8_t>(gazetteers.size(), 0));
  std::vector<std::string> lower;
  lower.reserve(T);
  for (const auto& t : tokens) lower.push_back(lowercase(t));
  std::vector<std::string> ngram;
  for (std::size_t g = 0; g < gazetteers.size(); ++g) {
    const auto& entries = gazetteers[g].entries;
    if (entries.empty()) continue;
    for (std::size_t s = 0; s < T; ++s) {
      ngram.clear();
      for (std::size_t n = 1; n <= static_cast<std::size_t>(max_n) && s + n <= T; ++n) {
        ngram.push_back(lower[s + n - 1]);
        if (entries.count(ngram)) {
          for (std::size_t k = s; k < s + n; ++k) bits[k][g] = 1;
        }
      }
    }
  }
  return bits;
}

}  // namespace lexner
