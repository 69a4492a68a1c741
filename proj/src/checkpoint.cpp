#include "lexner/checkpoint.h"

#include <sstream>

#include "lexner/binary_io.h"
#include "lexner/error.h"
#include "lexner/lexsim.h"

namespace lexner {

namespace {

constexpr std::string_view kMagic = "LXNR";
constexpr std::uint32_t kVersion = 1;

void write_vocab(ByteWriter& w, const Vocab& v) {
  w.u8(v.has_unk() ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& item : v.items()) w.str(item);
}

Vocab read_vocab(ByteReader& r) {
  Vocab v(r.u8("vocab flag") != 0);
  const std::uint32_t n = r.u32("vocab size");
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t at = r.offset();
    const std::string item = r.str("vocab item");
    if (v.add(item) != static_cast<int>(i)) throw FormatError("duplicate vocab item", at);
  }
  return v;
}

TaggerConfig parse_config_echo(const std::string& text) {
  TaggerConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    if (!config.set(line.substr(0, eq), line.substr(eq + 3))) {
      throw DataError("checkpoint config has unknown key '" + line.substr(0, eq) + "'");
    }
  }
  return config;
}

CheckpointInfo read_header(ByteReader& r) {
  if (r.bytes(4, "magic") != kMagic) throw FormatError("not a model checkpoint", 0);
  CheckpointInfo info;
  const std::size_t at = r.offset();
  info.version = r.u32("version");
  if (info.version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(info.version), at);
  }
  info.seed = r.u64("seed");
  info.config = parse_config_echo(r.str("config"));
  info.ls_hash = r.u64("ls hash");
  return info;
}

}  // namespace

std::string serialize_checkpoint(const TaggerModel& model) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u64(model.config.seed);
  w.str(model.config.to_key_values());
  w.u64(model.ls_hash);
  write_vocab(w, model.words);
  write_vocab(w, model.chars);
  write_vocab(w, model.tags);
  w.u32(static_cast<std::uint32_t>(model.resources.gazetteers.size()));
  for (const auto& g : model.resources.gazetteers) {
    w.str(g.name);
    w.u32(static_cast<std::uint32_t>(g.entries.size()));
    for (const auto& entry : g.entries) {
      w.u32(static_cast<std::uint32_t>(entry.size()));
      for (const auto& tok : entry) w.str(tok);
    }
  }
  const auto tensors = model.params.tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m->rows()));
    w.u32(static_cast<std::uint32_t>(m->cols()));
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) w.f32(static_cast<float>((*m)(i, j)));
    }
  }
  return w.take();
}

TaggerModel deserialize_checkpoint(std::string_view bytes, FeatureResources resources) {
  ByteReader r(bytes);
  const CheckpointInfo info = read_header(r);
  TaggerModel model;
  model.config = info.config;
  model.config.seed = info.seed;
  model.ls_hash = info.ls_hash;
  model.words = read_vocab(r);
  model.chars = read_vocab(r);
  model.tags = read_vocab(r);
  resources.gazetteers.clear();
  const std::uint32_t num_gaz = r.u32("gazetteer count");
  for (std::uint32_t g = 0; g < num_gaz; ++g) {
    Gazetteer gaz;
    gaz.name = r.str("gazetteer name");
    const std::uint32_t n = r.u32("gazetteer size");
    for (std::uint32_t e = 0; e < n; ++e) {
      std::vector<std::string> entry(r.u32("entry length"));
      for (auto& tok : entry) tok = r.str("entry token");
      gaz.add(entry);
    }
    resources.gazetteers.push_back(std::move(gaz));
  }
  auto tensors = model.params.tensors();
  const std::size_t at = r.offset();
  if (r.u32("tensor count") != tensors.size()) throw FormatError("tensor count mismatch", at);
  for (auto& [name, m] : tensors) {
    const std::size_t name_at = r.offset();
    if (r.str("tensor name") != name) throw FormatError("expected tensor " + name, name_at);
    const std::uint32_t rows = r.u32("tensor rows");
    const std::uint32_t cols = r.u32("tensor cols");
    m->resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) (*m)(i, j) = r.f32("tensor data");
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes after tensors", r.offset());

  if (model.config.features.ls) {
    if (!resources.ls_table) throw DataError("model uses LS features; an LS table is required");
    const std::uint64_t hash = content_hash(*resources.ls_table);
    if (hash != model.ls_hash) {
      throw DataError("LS table does not match the one the model was trained with");
    }
  }
  model.resources = std::move(resources);
  model.refresh();
  if (model.params.word_fwd.wx.cols() != model.input_dim()) {
    throw DataError("checkpoint input size does not match its feature resources");
  }
  return model;
}

void save_checkpoint(const TaggerModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_checkpoint(model));
}

TaggerModel load_checkpoint(const std::filesystem::path& path, FeatureResources resources) {
  return deserialize_checkpoint(read_file_bytes(path), std::move(resources));
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  ByteReader r(bytes);
  return read_header(r);
}

}  // namespace lexner
