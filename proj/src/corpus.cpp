#include "lexner/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "lexner/error.h"
#include "lexner/text.h"

namespace lexner {

TypeInventory::TypeInventory(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::string& label = labels_[i];
    if (label.empty()) throw DataError("empty type label");
    if (label.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError("type label contains whitespace: '" + label + "'");
    }
    // "/a" or "/a/b"
    const auto levels = std::count(label.begin(), label.end(), '/');
    if (label.front() != '/' || levels < 1 || levels > 2 ||
        label.back() == '/' || label.find("//") != std::string::npos) {
      throw DataError("type label must have 1 or 2 levels: '" + label + "'");
    }
    if (!index_.emplace(label, i).second) {
      throw DataError("duplicate type label '" + label + "'");
    }
  }
}

TypeInventory TypeInventory::parse(std::string_view text) {
  std::vector<std::string> labels;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != 1) {
      throw ParseError("expected one type label per line", lineno);
    }
    labels.push_back(std::move(fields[0]));
  }
  return TypeInventory(std::move(labels));
}

TypeInventory TypeInventory::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open inventory file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void TypeInventory::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& label : labels_) out << label << '\n';
}

bool TypeInventory::contains(std::string_view label) const {
  return index_.count(std::string(label)) > 0;
}

std::optional<std::size_t> TypeInventory::index_of(
    std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TagScheme> parse_tag_scheme(std::string_view name) {
  const std::string lower = lowercase(name);
  if (lower == "iob1" || lower == "iob") return TagScheme::kIob1;
  if (lower == "iob2" || lower == "bio") return TagScheme::kIob2;
  if (lower == "bilou" || lower == "bioes" || lower == "iobes") {
    return TagScheme::kBilou;
  }
  return std::nullopt;
}

std::string_view tag_scheme_name(TagScheme scheme) {
  switch (scheme) {
    case TagScheme::kIob1: return "IOB1";
    case TagScheme::kIob2: return "IOB2";
    case TagScheme::kBilou: return "BILOU";
  }
  return "?";
}

TagParts split_tag(std::string_view tag) {
  if (tag == "O" || tag.empty()) return {};
  TagParts parts;
  if (tag.size() >= 2 && tag[1] == '-') {
    char p = tag[0];
    if (p == 'E') p = 'L';
    if (p == 'S') p = 'U';
    if (p == 'B' || p == 'I' || p == 'L' || p == 'U') {
      parts.prefix = p;
      parts.type = std::string(tag.substr(2));
      if (!parts.type.empty()) return parts;
    }
  }
  throw DataError("malformed tag '" + std::string(tag) + "'");
}

std::string_view cap_class_name(CapClass c) {
  switch (c) {
    case CapClass::kAllUpper: return "allUpper";
    case CapClass::kAllLower: return "allLower";
    case CapClass::kUpperFirst: return "upperFirst";
    case CapClass::kUpperNotFirst: return "upperNotFirst";
    case CapClass::kNumeric: return "numeric";
    case CapClass::kNoAlphaNum: return "noAlphaNum";
  }
  return "?";
}

CapClass capitalization_class(std::string_view token) {
  const auto cps = utf8_decode(token);
  bool any_digit = false;
  bool any_letter = false;
  bool all_upper = true;
  bool all_lower = true;
  for (char32_t cp : cps) {
    switch (classify_char(cp)) {
      case CharCase::kDigit:
        any_digit = true;
        break;
      case CharCase::kUpper:
        any_letter = true;
        all_lower = false;
        break;
      case CharCase::kLower:
      case CharCase::kCaseless:
        any_letter = true;
        all_upper = false;
        break;
      case CharCase::kOther:
        break;
    }
  }
  if (!any_letter && !any_digit) return CapClass::kNoAlphaNum;
  if (!any_letter) return CapClass::kNumeric;
  if (all_upper) return CapClass::kAllUpper;
  if (all_lower) return CapClass::kAllLower;
  if (!cps.empty() && classify_char(cps.front()) == CharCase::kUpper) {
    return CapClass::kUpperFirst;
  }
  return CapClass::kUpperNotFirst;
}

std::optional<Sentence> ColumnReader::next() {
  Sentence sentence;
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    auto fields = split_whitespace(line);
    if (fields.empty()) {
      if (!sentence.tokens.empty()) return sentence;
      continue;
    }
    if (fields[0] == "-DOCSTART-") {
      if (any_token_) ++document_;
      any_token_ = false;
      // A marker without a preceding blank line still ends the sentence.
      if (!sentence.tokens.empty()) return sentence;
      continue;
    }
    if (fields.size() < 2) {
      throw ParseError("missing tag column", line_);
    }
    any_token_ = true;
    if (sentence.tokens.empty()) {
      sentence.first_line = line_;
      sentence.document = document_;
    }
    sentence.tokens.push_back(fields.front());
    sentence.tags.push_back(fields.back());
    if (fields.size() > 2) {
      sentence.middle_columns.resize(sentence.tokens.size() - 1);
      sentence.middle_columns.emplace_back(fields.begin() + 1,
                                           fields.end() - 1);
    } else if (!sentence.middle_columns.empty()) {
      sentence.middle_columns.emplace_back();
    }
  }
  if (!sentence.tokens.empty()) return sentence;
  return std::nullopt;
}

std::vector<Sentence> parse_column_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  ColumnReader reader(in);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

std::vector<Sentence> read_column_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  ColumnReader reader(in);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

void write_column_file(std::ostream& out, std::span<const Sentence> sentences) {
  int document = 0;
  for (const Sentence& s : sentences) {
    if (s.document != document) {
      out << "-DOCSTART- O\n\n";
      document = s.document;
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i];
      if (i < s.middle_columns.size()) {
        for (const auto& col : s.middle_columns[i]) out << ' ' << col;
      }
      out << ' ' << (i < s.tags.size() ? s.tags[i] : std::string("O")) << '\n';
    }
    out << '\n';
  }
}

std::string emit_column_text(std::span<const Sentence> sentences) {
  std::ostringstream out;
  write_column_file(out, sentences);
  return out.str();
}

namespace {

void require_scheme_prefix(const TagParts& p, TagScheme scheme,
                           std::size_t pos) {
  if (scheme != TagScheme::kBilou && (p.prefix == 'L' || p.prefix == 'U')) {
    throw ValidationError(std::string("prefix ") + p.prefix + " not allowed in " +
                              std::string(tag_scheme_name(scheme)),
                          pos);
  }
}

std::vector<Mention> decode_strict(std::span<const std::string> tags,
                                   TagScheme scheme) {
  std::vector<Mention> out;
  std::optional<Mention> open;
  TagParts prev;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const TagParts p = split_tag(tags[i]);
    require_scheme_prefix(p, scheme, i);
    const int t = static_cast<int>(i);
    const bool continues_prev =
        (prev.prefix == 'B' || prev.prefix == 'I') && prev.type == p.type;
    switch (scheme) {
      case TagScheme::kBilou: {
        if (open && p.prefix != 'I' && p.prefix != 'L') {
          throw ValidationError("unterminated mention before '" + tags[i] + "'",
                                i);
        }
        if (p.prefix == 'I' || p.prefix == 'L') {
          if (!open || open->type != p.type) {
            throw ValidationError("'" + tags[i] + "' without a preceding B-" +
                                      p.type,
                                  i);
          }
          if (p.prefix == 'L') {
            open->end = t + 1;
            out.push_back(*open);
            open.reset();
          }
        } else if (p.prefix == 'B') {
          open = Mention{t, t + 1, p.type};
        } else if (p.prefix == 'U') {
          out.push_back(Mention{t, t + 1, p.type});
        }
        break;
      }
      case TagScheme::kIob2: {
        if (p.prefix == 'I') {
          if (!continues_prev) {
            throw ValidationError("'" + tags[i] + "' does not continue a mention",
                                  i);
          }
          out.back().end = t + 1;
        } else if (p.prefix == 'B') {
          out.push_back(Mention{t, t + 1, p.type});
        }
        break;
      }
      case TagScheme::kIob1: {
        if (p.prefix == 'B') {
          if (!continues_prev) {
            throw ValidationError(
                "IOB1 '" + tags[i] + "' must follow a mention of the same type",
                i);
          }
          out.push_back(Mention{t, t + 1, p.type});
        } else if (p.prefix == 'I') {
          if (continues_prev) {
            out.back().end = t + 1;
          } else {
            out.push_back(Mention{t, t + 1, p.type});
          }
        }
        break;
      }
    }
    prev = p;
  }
  if (open) {
    throw ValidationError("mention of type " + open->type + " is not closed",
                          tags.size() - 1);
  }
  return out;
}

// conlleval chunk boundaries, extended with L (E) and U (S) prefixes.
bool chunk_ends(char prev, char cur, const std::string& prev_type,
                const std::string& type) {
  if (prev == 'L' || prev == 'U') return true;
  if ((prev == 'B' || prev == 'I') &&
      (cur == 'B' || cur == 'U' || cur == 'O')) {
    return true;
  }
  return prev != 'O' && prev_type != type;
}

bool chunk_starts(char prev, char cur, const std::string& prev_type,
                  const std::string& type) {
  if (cur == 'B' || cur == 'U') return true;
  if ((prev == 'L' || prev == 'U' || prev == 'O') &&
      (cur == 'L' || cur == 'I')) {
    return true;
  }
  return cur != 'O' && prev_type != type;
}

std::vector<Mention> decode_lenient(std::span<const std::string> tags) {
  std::vector<Mention> out;
  std::optional<Mention> open;
  char prev = 'O';
  std::string prev_type;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const TagParts p = split_tag(tags[i]);
    const int t = static_cast<int>(i);
    if (open && chunk_ends(prev, p.prefix, prev_type, p.type)) {
      open->end = t;
      out.push_back(*open);
      open.reset();
    }
    if (chunk_starts(prev, p.prefix, prev_type, p.type)) {
      open = Mention{t, t + 1, p.type};
    }
    prev = p.prefix;
    prev_type = p.type;
  }
  if (open) {
    open->end = static_cast<int>(tags.size());
    out.push_back(*open);
  }
  return out;
}

}  // namespace

std::vector<Mention> tags_to_mentions(std::span<const std::string> tags,
                                      TagScheme scheme, DecodeMode mode) {
  if (mode == DecodeMode::kLenient) return decode_lenient(tags);
  return decode_strict(tags, scheme);
}

void validate_mentions(std::span<const Mention> mentions, std::size_t length) {
  std::vector<const Mention*> sorted;
  for (const Mention& m : mentions) {
    if (m.start < 0 || m.start >= m.end ||
        m.end > static_cast<int>(length)) {
      throw ValidationError("mention [" + std::to_string(m.start) + "," +
                                std::to_string(m.end) + ") out of range",
                            m.start < 0 ? 0 : static_cast<std::size_t>(m.start));
    }
    if (m.type.empty()) {
      throw ValidationError("mention without a type",
                            static_cast<std::size_t>(m.start));
    }
    sorted.push_back(&m);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Mention* a, const Mention* b) { return a->start < b->start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start < sorted[i - 1]->end) {
      throw ValidationError("overlapping mentions",
                            static_cast<std::size_t>(sorted[i]->start));
    }
  }
}

std::vector<std::string> mentions_to_tags(std::span<const Mention> mentions,
                                          std::size_t length,
                                          TagScheme scheme) {
  validate_mentions(mentions, length);
  std::vector<std::string> tags(length, "O");
  // end position -> type, for IOB1 adjacency.
  std::vector<const Mention*> ending_at(length + 1, nullptr);
  for (const Mention& m : mentions) ending_at[m.end] = &m;
  for (const Mention& m : mentions) {
    const auto s = static_cast<std::size_t>(m.start);
    const auto e = static_cast<std::size_t>(m.end);
    switch (scheme) {
      case TagScheme::kBilou:
        if (e - s == 1) {
          tags[s] = "U-" + m.type;
        } else {
          tags[s] = "B-" + m.type;
          for (std::size_t i = s + 1; i + 1 < e; ++i) tags[i] = "I-" + m.type;
          tags[e - 1] = "L-" + m.type;
        }
        break;
      case TagScheme::kIob2:
        tags[s] = "B-" + m.type;
        for (std::size_t i = s + 1; i < e; ++i) tags[i] = "I-" + m.type;
        break;
      case TagScheme::kIob1: {
        const Mention* before = ending_at[s];
        const bool adjacent_same = before != nullptr && before->type == m.type;
        tags[s] = (adjacent_same ? "B-" : "I-") + m.type;
        for (std::size_t i = s + 1; i < e; ++i) tags[i] = "I-" + m.type;
        break;
      }
    }
  }
  return tags;
}

std::vector<std::string> convert_scheme(std::span<const std::string> tags,
                                        TagScheme from, TagScheme to,
                                        DecodeMode mode) {
  const auto mentions = tags_to_mentions(tags, from, mode);
  return mentions_to_tags(mentions, tags.size(), to);
}

std::pair<std::string, std::string> dual_lines(const Sentence& sentence,
                                               const TypeInventory& inventory) {
  std::vector<Mention> mentions = sentence.mentions;
  validate_mentions(mentions, sentence.size());
  for (const Mention& m : mentions) {
    if (!inventory.contains(m.type)) {
      throw ValidationError("type '" + m.type + "' is not in the inventory",
                            static_cast<std::size_t>(m.start));
    }
  }
  std::sort(mentions.begin(), mentions.end());
  std::string v1;
  std::string v2;
  std::size_t next = 0;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const std::string lower = lowercase(sentence.tokens[i]);
    if (i) v1 += ' ';
    v1 += lower;
    if (next < mentions.size() &&
        static_cast<int>(i) >= mentions[next].start) {
      if (static_cast<int>(i) == mentions[next].start) {
        if (!v2.empty()) v2 += ' ';
        v2 += mentions[next].type;
      }
      if (static_cast<int>(i) + 1 == mentions[next].end) ++next;
      continue;
    }
    if (!v2.empty()) v2 += ' ';
    v2 += lower;
  }
  return {std::move(v1), std::move(v2)};
}

std::vector<std::string> build_dual_corpus(std::span<const Sentence> sentences,
                                           const TypeInventory& inventory) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size() * 2);
  for (const Sentence& s : sentences) {
    auto [v1, v2] = dual_lines(s, inventory);
    lines.push_back(std::move(v1));
    lines.push_back(std::move(v2));
  }
  return lines;
}

}  // namespace lexner
