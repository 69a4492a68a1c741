#include "lexner/pipeline_config.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "lexner/binary_io.h"
#include "lexner/error.h"

namespace lexner {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw DataError("bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == ';') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool set_embed(EmbedConfig& c, std::string_view key, std::string_view value) {
  if (key == "dim") c.dim = number<int>(key, value);
  else if (key == "window") c.window = number<int>(key, value);
  else if (key == "min_count") c.min_count = number<int>(key, value);
  else if (key == "ngram_min") c.ngram_min = number<int>(key, value);
  else if (key == "ngram_max") c.ngram_max = number<int>(key, value);
  else if (key == "bucket_count") c.bucket_count = number<int>(key, value);
  else if (key == "negatives") c.negatives = number<int>(key, value);
  else if (key == "epochs") c.epochs = number<int>(key, value);
  else if (key == "learning_rate") c.learning_rate = number<double>(key, value);
  else if (key == "subsample_threshold") c.subsample_threshold = number<double>(key, value);
  else if (key == "seed") c.seed = number<std::uint64_t>(key, value);
  else if (key == "workers") c.workers = number<int>(key, value);
  else return false;
  return true;
}

}  // namespace

const std::vector<std::string>& PipelineConfig::path_keys() {
  static const std::vector<std::string> keys{"train",      "dev",       "test",
                                             "inventory",  "corpus",    "embeddings",
                                             "pretrained", "ls_table",  "gazetteers",
                                             "model",      "vocab"};
  return keys;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  const auto dot = key.find('.');
  const std::string_view section = dot == std::string_view::npos ? "" : key.substr(0, dot);
  const std::string_view name = dot == std::string_view::npos ? key : key.substr(dot + 1);
  bool known = false;
  if (section.empty() && name == "seed") {
    seed = number<std::uint64_t>(key, value);
    known = true;
  } else if (section == "embed") {
    known = set_embed(embed, name, value);
    if (name == "seed") embed_seed_set_ = true;
  } else if (section == "tagger") {
    known = tagger.set(name, value);
    if (name == "seed") tagger_seed_set_ = true;
  } else if (section == "ablate") {
    if (name == "runs") {
      ablate_runs = number<int>(key, value);
      if (ablate_runs < 1) throw DataError("ablate.runs must be at least 1");
      known = true;
    } else if (name == "features") {
      ablate_features = split_list(value);
      for (const auto& f : ablate_features) FeatureSet::parse(f);
      known = true;
    }
  } else if (section == "paths") {
    const auto& keys = path_keys();
    if (std::find(keys.begin(), keys.end(), name) != keys.end()) {
      paths[std::string(name)] = std::string(value);
      known = true;
    }
  }
  if (!known) throw DataError("unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw DataError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    try {
      config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return parse(read_file_bytes(path));
}

std::optional<std::filesystem::path> PipelineConfig::path(std::string_view name) const {
  auto it = paths.find(std::string(name));
  if (it == paths.end() || it->second.empty()) return std::nullopt;
  return std::filesystem::path(it->second);
}

EmbedConfig PipelineConfig::embed_config() const {
  EmbedConfig c = embed;
  if (!embed_seed_set_) c.seed = seed;
  return c;
}

TaggerConfig PipelineConfig::tagger_config() const {
  TaggerConfig c = tagger;
  if (!tagger_seed_set_) c.seed = seed;
  return c;
}

std::string PipelineConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  const EmbedConfig e = embed_config();
  out << "seed = " << seed << '\n'
      << "embed.dim = " << e.dim << '\n'
      << "embed.window = " << e.window << '\n'
      << "embed.min_count = " << e.min_count << '\n'
      << "embed.ngram_min = " << e.ngram_min << '\n'
      << "embed.ngram_max = " << e.ngram_max << '\n'
      << "embed.bucket_count = " << e.bucket_count << '\n'
      << "embed.negatives = " << e.negatives << '\n'
      << "embed.epochs = " << e.epochs << '\n'
      << "embed.learning_rate = " << e.learning_rate << '\n'
      << "embed.subsample_threshold = " << e.subsample_threshold << '\n'
      << "embed.seed = " << e.seed << '\n'
      << "embed.workers = " << e.workers << '\n';
  std::istringstream tagger_lines(tagger_config().to_key_values());
  for (std::string line; std::getline(tagger_lines, line);) out << "tagger." << line << '\n';
  out << "ablate.runs = " << ablate_runs << '\n' << "ablate.features =";
  for (const auto& f : ablate_features) out << ' ' << f;
  out << '\n';
  for (const auto& [k, v] : paths) out << "paths." << k << " = " << v << '\n';
  return out.str();
}

}  // namespace lexner
