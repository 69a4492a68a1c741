#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lexner {

// A typed token span [start, end).
struct Mention {
  int start = 0;
  int end = 0;
  std::string type;

  int length() const { return end - start; }
  friend auto operator<=>(const Mention&, const Mention&) = default;
};

struct Sentence {
  std::vector<std::string> tokens;
  // Same length as tokens when present.
  std::vector<std::string> tags;
  std::vector<Mention> mentions;
  // Columns between the token and the tag (e.g. POS and chunk in CoNLL-2003).
  // Empty when the file has none, else one entry per token.
  std::vector<std::vector<std::string>> middle_columns;
  // Index of the -DOCSTART- group the sentence belongs to.
  int document = 0;
  // 1-based line number of the first token in the source file.
  std::size_t first_line = 0;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Ordered entity-type labels. Position i is LS dimension i.
class TypeInventory {
 public:
  TypeInventory() = default;
  explicit TypeInventory(std::vector<std::string> labels);

  static TypeInventory load(const std::filesystem::path& path);
  static TypeInventory parse(std::string_view text);
  void save(const std::filesystem::path& path) const;

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  std::size_t size() const { return labels_.size(); }
  bool contains(std::string_view label) const;
  std::optional<std::size_t> index_of(std::string_view label) const;

  friend bool operator==(const TypeInventory& a, const TypeInventory& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class TagScheme { kIob1, kIob2, kBilou };
enum class DecodeMode { kStrict, kLenient };

std::optional<TagScheme> parse_tag_scheme(std::string_view name);
std::string_view tag_scheme_name(TagScheme scheme);

// Splits "B-PER" into ('B', "PER"); "O" gives ('O', ""). E/S prefixes are
// accepted as aliases of L/U.
struct TagParts {
  char prefix = 'O';
  std::string type;
};
TagParts split_tag(std::string_view tag);

enum class CapClass : int {
  kAllUpper = 0,
  kAllLower = 1,
  kUpperFirst = 2,
  kUpperNotFirst = 3,
  kNumeric = 4,
  kNoAlphaNum = 5,
};
inline constexpr int kNumCapClasses = 6;

std::string_view cap_class_name(CapClass c);
CapClass capitalization_class(std::string_view token);

// Streaming reader for whitespace-separated column files. The first column
// is the token and the last column is the tag.
class ColumnReader {
 public:
  explicit ColumnReader(std::istream& in) : in_(in) {}

  // Returns the next non-empty sentence, or nullopt at end of input.
  std::optional<Sentence> next();
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  int document_ = 0;
  bool any_token_ = false;
};

std::vector<Sentence> parse_column_file(std::string_view text);
std::vector<Sentence> read_column_file(const std::filesystem::path& path);

// Writes `token [middle...] tag` lines, a blank line after each sentence and
// a -DOCSTART- line whenever the document index changes.
void write_column_file(std::ostream& out, std::span<const Sentence> sentences);
std::string emit_column_text(std::span<const Sentence> sentences);

std::vector<Mention> tags_to_mentions(std::span<const std::string> tags,
                                      TagScheme scheme = TagScheme::kBilou,
                                      DecodeMode mode = DecodeMode::kStrict);

std::vector<std::string> mentions_to_tags(std::span<const Mention> mentions,
                                          std::size_t length,
                                          TagScheme scheme);

std::vector<std::string> convert_scheme(std::span<const std::string> tags,
                                        TagScheme from, TagScheme to,
                                        DecodeMode mode = DecodeMode::kStrict);

// Throws ValidationError when mentions overlap or fall outside [0, length).
void validate_mentions(std::span<const Mention> mentions, std::size_t length);

// The (v1, v2) pair for one sentence: lowercased tokens, then the same line
// with each mention collapsed to its type label.
std::pair<std::string, std::string> dual_lines(const Sentence& sentence,
                                               const TypeInventory& inventory);

std::vector<std::string> build_dual_corpus(std::span<const Sentence> sentences,
                                           const TypeInventory& inventory);

}  // namespace lexner
