#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lexner/tagger.h"

namespace lexner {

// Binary model file: "LXNR", version, root seed, config echo, vocabularies,
// gazetteers, LS content hash, then named tensors as little-endian float32.
std::string serialize_checkpoint(const TaggerModel& model);

// The LS table and its fallback come from `resources`; gazetteers are taken
// from the file. Throws DataError when the LS feature is on and the supplied
// table's content hash differs from the recorded one.
TaggerModel deserialize_checkpoint(std::string_view bytes, FeatureResources resources);

void save_checkpoint(const TaggerModel& model, const std::filesystem::path& path);
TaggerModel load_checkpoint(const std::filesystem::path& path, FeatureResources resources);

// Reads only the header fields needed to locate resources.
struct CheckpointInfo {
  std::uint32_t version = 0;
  std::uint64_t seed = 0;
  TaggerConfig config;
  std::uint64_t ls_hash = 0;
};
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

}  // namespace lexner
