#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexner/embed.h"
#include "lexner/tagger.h"

namespace lexner {

// Flat "section.key = value" document ('#' starts a comment). Sections:
// embed.*, tagger.*, ablate.*, paths.*, plus the root `seed`. Unknown keys
// are rejected.
struct PipelineConfig {
  std::uint64_t seed = 1;
  EmbedConfig embed;
  TaggerConfig tagger;
  int ablate_runs = 5;
  std::vector<std::string> ablate_features{"word+char+cap", "word+char+cap+ls"};
  std::map<std::string, std::string> paths;

  static const std::vector<std::string>& path_keys();

  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const std::filesystem::path& path);

  // Throws DataError for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  // "key=value" overrides, applied after the file.
  void apply_override(std::string_view assignment);

  std::optional<std::filesystem::path> path(std::string_view name) const;

  // Root seed, unless embed.seed / tagger.seed were given explicitly.
  EmbedConfig embed_config() const;
  TaggerConfig tagger_config() const;

  std::string to_text() const;

 private:
  bool embed_seed_set_ = false;
  bool tagger_seed_set_ = false;
};

}  // namespace lexner
