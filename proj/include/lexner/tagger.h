#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lexner/corpus.h"
#include "lexner/embed.h"
#include "lexner/gazetteer.h"
#include "lexner/lexsim.h"
#include "lexner/lstm.h"
#include "lexner/random.h"

namespace lexner {

struct FeatureSet {
  bool word = true;
  bool chars = true;
  bool cap = true;
  bool ls = true;
  bool gazetteer = false;

  // "word+char+cap+ls"; names: word, char, cap, ls, gaz.
  static FeatureSet parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

enum class ClipMode { kGlobalNorm, kPerValue };

struct TaggerConfig {
  // Used when no pretrained word vectors are supplied.
  int word_dim = 100;
  int word_hidden = 128;
  int char_emb_dim = 25;
  int char_hidden = 50;
  int cap_emb_dim = 25;
  double dropout = 0.5;
  int batch_size = 10;
  double learning_rate = 0.009;
  double momentum = 0.9;
  double clip_norm = 5.0;
  ClipMode clip_mode = ClipMode::kGlobalNorm;
  int max_epochs = 50;
  double decay_rate = 0.95;
  int patience = 5;
  std::uint64_t seed = 1;
  FeatureSet features;
  bool bilou_mask = true;
  // Probability of replacing a singleton training word by UNK.
  double unk_replace = 0.5;
  int gazetteer_max_n = 4;
  // Scheme of the training/dev tag columns.
  TagScheme input_scheme = TagScheme::kIob2;

  void validate() const;
  // "key = value" lines, used as the checkpoint config echo.
  std::string to_key_values() const;
  // Applies one "tagger."-less key; false when the key is unknown.
  bool set(std::string_view key, std::string_view value);
};

// String <-> dense id, with id 0 reserved for unknowns when `with_unk`.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(bool with_unk);

  int add(const std::string& item);
  int find(std::string_view item) const;  // -1 when absent
  int id_or_unk(std::string_view item) const;
  const std::string& item(int id) const { return items_[static_cast<std::size_t>(id)]; }
  const std::vector<std::string>& items() const { return items_; }
  int size() const { return static_cast<int>(items_.size()); }
  bool has_unk() const { return with_unk_; }

 private:
  bool with_unk_ = false;
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> index_;
};

inline constexpr std::string_view kUnkToken = "<UNK>";

// Every trainable tensor of the Bi-LSTM-CRF. Disabled feature blocks hold
// empty tensors. Gradient and momentum buffers reuse this type.
struct TaggerParams {
  Eigen::MatrixXd word_lookup;  // |words| x d_w
  Eigen::MatrixXd char_lookup;  // |chars| x char_emb_dim
  LstmWeights char_fwd;
  LstmWeights char_bwd;
  Eigen::MatrixXd cap_lookup;   // 6 x cap_emb_dim
  LstmWeights word_fwd;
  LstmWeights word_bwd;
  Eigen::MatrixXd proj_w;       // L x 2H
  Eigen::MatrixXd proj_b;       // L x 1
  Eigen::MatrixXd transitions;  // (L+2) x (L+2)

  template <typename Self, typename F>
  static void visit(Self& p, F&& f) {
    f("word_lookup", p.word_lookup);
    f("char_lookup", p.char_lookup);
    f("char_fwd.wx", p.char_fwd.wx);
    f("char_fwd.wh", p.char_fwd.wh);
    f("char_fwd.b", p.char_fwd.b);
    f("char_bwd.wx", p.char_bwd.wx);
    f("char_bwd.wh", p.char_bwd.wh);
    f("char_bwd.b", p.char_bwd.b);
    f("cap_lookup", p.cap_lookup);
    f("word_fwd.wx", p.word_fwd.wx);
    f("word_fwd.wh", p.word_fwd.wh);
    f("word_fwd.b", p.word_fwd.b);
    f("word_bwd.wx", p.word_bwd.wx);
    f("word_bwd.wh", p.word_bwd.wh);
    f("word_bwd.b", p.word_bwd.b);
    f("proj_w", p.proj_w);
    f("proj_b", p.proj_b);
    f("transitions", p.transitions);
  }

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors() const;
  // Same shapes, all zeros.
  TaggerParams zeros_like() const;
  void set_zero();
  std::size_t num_values() const;
};

// Resources a model looks features up in. The LS table is frozen: the model
// only ever reads it.
struct FeatureResources {
  std::shared_ptr<const LSTable> ls_table;
  // Embedding table for LS vectors of words missing from ls_table.
  std::shared_ptr<const EmbeddingTable> ls_fallback;
  std::vector<Gazetteer> gazetteers;
};

class TaggerModel {
 public:
  TaggerConfig config;
  Vocab words{true};
  Vocab chars{true};
  Vocab tags{false};
  TaggerParams params;
  FeatureResources resources;
  std::uint64_t ls_hash = 0;

  int num_tags() const { return tags.size(); }
  int word_dim() const { return static_cast<int>(params.word_lookup.cols()); }
  int ls_dim() const;
  int gazetteer_dim() const;
  // Size of the word-LSTM input after feature assembly.
  int input_dim() const;

  // Rebuilds derived state (LS lookup, decode mask) after resources or tags change.
  void refresh();
  const LsLookup& ls_lookup() const { return ls_lookup_; }
  const Eigen::MatrixXd& decode_mask() const { return decode_mask_; }

 private:
  LsLookup ls_lookup_;
  Eigen::MatrixXd decode_mask_;
};

// Everything a sentence needs for training or tagging, precomputed once.
struct EncodedSentence {
  std::vector<int> words;
  std::vector<std::vector<int>> chars;
  std::vector<int> caps;
  Eigen::MatrixXd ls;         // ls_dim x T (frozen features)
  Eigen::MatrixXd gazetteer;  // G x T
  std::vector<int> gold;      // tag ids; empty when untagged
  // Training words seen exactly once, eligible for UNK replacement.
  std::vector<bool> singleton;

  std::size_t size() const { return words.size(); }
};

// Builds vocabularies, tag set and randomly initialised parameters from the
// training data. Pretrained vectors (when given) set d_w and initialise the
// rows of the words they cover; `extra_words` (e.g. dev tokens) are added
// when the pretrained table knows them.
TaggerModel init_model(const TaggerConfig& config, std::span<const Sentence> train,
                       const EmbeddingTable* pretrained, FeatureResources resources,
                       std::span<const Sentence> extra_words = {});

// Tags are converted from `model.config.input_scheme` to BILOU when
// `with_gold`; unknown tags throw DataError.
EncodedSentence encode_sentence(const TaggerModel& model, const Sentence& sentence,
                                bool with_gold);
std::vector<EncodedSentence> encode_corpus(const TaggerModel& model,
                                           std::span<const Sentence> sentences,
                                           bool with_gold);

// [word; char; cap; ls; gazetteer] for one token of an encoded sentence, in
// eval mode.
Eigen::VectorXd assemble_input(const TaggerModel& model, const EncodedSentence& sentence,
                               std::size_t position);
Eigen::VectorXd assemble_input(const TaggerModel& model, std::string_view token);

// Concatenated final states of the forward and backward character LSTMs.
Eigen::VectorXd char_represent(const TaggerModel& model, std::string_view word);

// T x L emission scores in eval mode.
Eigen::MatrixXd compute_emissions(const TaggerModel& model, const EncodedSentence& sentence);

// Per-sentence gradients. The word lookup is kept as sparse rows.
struct SentenceGradients {
  TaggerParams dense;  // word_lookup left empty
  std::vector<std::pair<int, Eigen::VectorXd>> word_rows;
};

// NLL of one sentence; accumulates gradients into `grads` when non-null.
// A null `dropout` runs in eval mode (no dropout, no UNK replacement).
double sentence_nll(const TaggerModel& model, const EncodedSentence& sentence,
                    Rng* dropout, SentenceGradients* grads);

struct BatchGradients {
  double loss = 0;
  TaggerParams grads;
};

// Sum of sentence NLLs and gradients over a batch. `seeds[i]` drives the
// dropout of sentence i; an empty `seeds` disables dropout. Sentences run in
// parallel and are reduced in batch order, so the result is bitwise equal to
// the serial reference.
BatchGradients nll_and_gradients(const TaggerModel& model,
                                 std::span<const EncodedSentence* const> batch,
                                 std::span<const std::uint64_t> seeds);
BatchGradients nll_and_gradients_serial(const TaggerModel& model,
                                        std::span<const EncodedSentence* const> batch,
                                        std::span<const std::uint64_t> seeds);

// Clips, applies momentum and the decayed learning rate. Returns the global
// gradient norm before clipping. Throws NumericalError on non-finite input.
double sgd_step(TaggerParams& params, const TaggerParams& grads, TaggerParams& velocity,
                const TaggerConfig& config, int epoch);

// BILOU tags for the sentence tokens, eval mode.
std::vector<std::string> tag_sentence(const TaggerModel& model, const Sentence& sentence);
std::vector<std::string> tag_encoded(const TaggerModel& model, const EncodedSentence& sentence);
// Parallel over sentences; same output as tagging one by one.
std::vector<std::vector<std::string>> tag_corpus(const TaggerModel& model,
                                                 std::span<const EncodedSentence> sentences);
std::vector<std::vector<std::string>> tag_corpus_serial(
    const TaggerModel& model, std::span<const EncodedSentence> sentences);

}  // namespace lexner
