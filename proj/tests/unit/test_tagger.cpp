#include <gtest/gtest.h>

#include <sstream>

#include "lexner/error.h"
#include "lexner/gradcheck.h"
#include "lexner/lexsim.h"
#include "lexner/random.h"
#include "lexner/tagger.h"
#include "lexner/text.h"
#include "lexner/trainer.h"

namespace lexner {
namespace {

Sentence make_sentence(std::vector<std::string> tokens, std::vector<std::string> tags) {
  Sentence s;
  s.tokens = std::move(tokens);
  s.tags = std::move(tags);
  return s;
}

std::vector<Sentence> toy_corpus() {
  return {make_sentence({"Roma", "is", "in", "Italy", "."}, {"B-LOC", "O", "O", "B-LOC", "O"}),
          make_sentence({"John", "Smith", "visited", "amoR"}, {"B-PER", "I-PER", "O", "B-LOC"}),
          make_sentence({"IBM", "hired", "Mary"}, {"B-ORG", "O", "B-PER"}),
          make_sentence({"the", "UN", "met", "in", "Paris"}, {"O", "B-ORG", "O", "O", "B-LOC"})};
}

std::shared_ptr<const LSTable> random_ls(std::size_t dim, std::span<const Sentence> data,
                                         std::uint64_t seed) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < dim; ++i) labels.push_back("/t" + std::to_string(i));
  auto table = std::make_shared<LSTable>(TypeInventory(labels));
  Rng rng(seed);
  for (const auto& s : data) {
    for (const auto& tok : s.tokens) {
      std::vector<float> v(dim);
      for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
      table->insert(lowercase(tok), v);
    }
  }
  return table;
}

TaggerConfig tiny_config() {
  TaggerConfig c;
  c.word_dim = 6;
  c.word_hidden = 5;
  c.char_emb_dim = 4;
  c.char_hidden = 3;
  c.cap_emb_dim = 2;
  c.seed = 3;
  return c;
}

FeatureResources tiny_resources(std::span<const Sentence> data) {
  FeatureResources r;
  r.ls_table = random_ls(4, data, 9);
  Gazetteer g;
  g.name = "cities";
  g.add({"paris"});
  g.add({"john", "smith"});
  r.gazetteers.push_back(g);
  return r;
}

TEST(FeatureSet, ParseAndPrint) {
  const auto f = FeatureSet::parse("word+char+cap");
  EXPECT_TRUE(f.word && f.chars && f.cap);
  EXPECT_FALSE(f.ls || f.gazetteer);
  EXPECT_EQ(FeatureSet::parse(f.to_string()), f);
  EXPECT_TRUE(FeatureSet::parse("ls,gaz").gazetteer);
  EXPECT_THROW(FeatureSet::parse("word+pos"), DataError);
  EXPECT_THROW(FeatureSet::parse(""), DataError);
}

TEST(TaggerConfig, SetAndValidate) {
  TaggerConfig c;
  EXPECT_TRUE(c.set("dropout", "0.25"));
  EXPECT_EQ(c.dropout, 0.25);
  EXPECT_TRUE(c.set("features", "word+ls"));
  EXPECT_FALSE(c.features.chars);
  EXPECT_FALSE(c.set("no_such_key", "1"));
  EXPECT_THROW(c.set("batch_size", "ten"), DataError);
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), DataError);
}

TEST(TaggerConfig, KeyValueEchoRoundTrips) {
  TaggerConfig a;
  a.learning_rate = 0.013;
  a.features = FeatureSet::parse("word+ls+gaz");
  a.clip_mode = ClipMode::kPerValue;
  TaggerConfig b;
  std::istringstream in(a.to_key_values());
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    ASSERT_NE(eq, std::string::npos) << line;
    EXPECT_TRUE(b.set(line.substr(0, eq), line.substr(eq + 3))) << line;
  }
  EXPECT_EQ(b.to_key_values(), a.to_key_values());
  EXPECT_EQ(b.learning_rate, 0.013);
}

TEST(TaggerModel, InputDimensions) {
  const auto data = toy_corpus();
  TaggerConfig c;  // d_w 100, char 2x50, cap 25
  FeatureResources r;
  r.ls_table = random_ls(120, data, 1);
  EXPECT_EQ(init_model(c, data, nullptr, r).input_dim(), 345);
  c.features.ls = false;
  EXPECT_EQ(init_model(c, data, nullptr, r).input_dim(), 225);
  c.features = FeatureSet::parse("word");
  const auto m = init_model(c, data, nullptr, r);
  EXPECT_EQ(m.input_dim(), 100);
  EXPECT_EQ(assemble_input(m, "Roma").size(), 100);
}

TEST(TaggerModel, TagSetIsBilou) {
  const auto m = init_model(tiny_config(), toy_corpus(), nullptr, tiny_resources(toy_corpus()));
  EXPECT_EQ(m.num_tags(), 13);
  EXPECT_EQ(m.tags.item(0), "O");
  EXPECT_GE(m.tags.find("U-PER"), 0);
}

TEST(TaggerModel, PretrainedRowsAreCopied) {
  EmbeddingTable pre(3, {"italy", "paris", "berlin"}, {1, 1, 1}, {0, 0, 0}, 0, 3, 6);
  for (std::size_t i = 0; i < pre.input_matrix().size(); ++i) pre.input_matrix()[i] = static_cast<float>(i);
  const auto data = toy_corpus();
  const std::vector<Sentence> dev{make_sentence({"Berlin", "Rome"}, {"B-LOC", "B-LOC"})};
  const auto m = init_model(tiny_config(), data, &pre, tiny_resources(data), dev);
  EXPECT_EQ(m.word_dim(), 3);
  const int italy = m.words.find("Italy");
  ASSERT_GE(italy, 0);
  EXPECT_EQ(m.params.word_lookup(italy, 2), 2.0);
  EXPECT_GE(m.words.find("Berlin"), 0);
  EXPECT_LT(m.words.find("Rome"), 0);
}

TEST(CharRepresent, ReversalSymmetryUnderTiedWeights) {
  auto m = init_model(tiny_config(), toy_corpus(), nullptr, tiny_resources(toy_corpus()));
  m.params.char_bwd = m.params.char_fwd;
  const auto a = char_represent(m, "Roma");
  const auto b = char_represent(m, "amoR");
  const int H = m.config.char_hidden;
  ASSERT_EQ(a.size(), 2 * H);
  for (int i = 0; i < H; ++i) {
    EXPECT_DOUBLE_EQ(a(i), b(H + i));
    EXPECT_DOUBLE_EQ(a(H + i), b(i));
  }
}

TEST(AssembleInput, DeterministicAndBlockOrder) {
  const auto data = toy_corpus();
  const auto m = init_model(tiny_config(), data, nullptr, tiny_resources(data));
  const auto a = assemble_input(m, "Paris");
  EXPECT_EQ(a, assemble_input(m, "Paris"));
  ASSERT_EQ(a.size(), m.input_dim());
  const int word = m.words.find("Paris");
  EXPECT_EQ(a.head(6), m.params.word_lookup.row(word).transpose());
  const auto ls = m.resources.ls_table->find("paris");
  for (int d = 0; d < 4; ++d) EXPECT_EQ(a(6 + 6 + 2 + d), static_cast<double>((*ls)[static_cast<std::size_t>(d)]));
}

TEST(Gradients, MatchFiniteDifferencesOnEveryBlock) {
  auto c = tiny_config();
  c.features.gazetteer = true;
  const auto data = toy_corpus();
  auto m = init_model(c, data, nullptr, tiny_resources(data));
  const auto enc = encode_corpus(m, std::span(data).subspan(0, 2), true);
  const auto r = gradcheck(m, enc);
  EXPECT_TRUE(r.passed) << format_gradcheck(r);
  EXPECT_EQ(r.blocks.size(), 18u);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Gradients, CorruptHookIsDetected) {
  const auto data = toy_corpus();
  auto m = init_model(tiny_config(), data, nullptr, tiny_resources(data));
  const auto enc = encode_corpus(m, std::span(data).subspan(0, 1), true);
  GradcheckOptions o;
  o.corrupt_block = "word_fwd.wx";
  const auto r = gradcheck(m, enc, o);
  EXPECT_FALSE(r.passed);
  for (const auto& b : r.blocks) {
    if (b.name == "word_fwd.wx") EXPECT_GT(b.rel_error, 1e-4);
  }
}

TEST(Gradients, ParallelBitwiseEqualsSerial) {
  const auto data = toy_corpus();
  const auto m = init_model(tiny_config(), data, nullptr, tiny_resources(data));
  const auto enc = encode_corpus(m, data, true);
  std::vector<const EncodedSentence*> batch;
  for (const auto& e : enc) batch.push_back(&e);
  const std::vector<std::uint64_t> seeds{11, 12, 13, 14};
  const auto a = nll_and_gradients(m, batch, seeds);
  const auto b = nll_and_gradients_serial(m, batch, seeds);
  EXPECT_EQ(a.loss, b.loss);
  const auto ta = a.grads.tensors();
  const auto tb = b.grads.tensors();
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_TRUE(*ta[i].second == *tb[i].second) << ta[i].first;
  }
  EXPECT_EQ(tag_corpus(m, enc), tag_corpus_serial(m, enc));
}

TEST(Gradients, LsTableReceivesNoUpdates) {
  const auto data = toy_corpus();
  auto res = tiny_resources(data);
  const auto before = serialize_ls_table(*res.ls_table);
  auto c = tiny_config();
  c.max_epochs = 3;
  const auto result = train_tagger(data, data, c, res);
  EXPECT_EQ(serialize_ls_table(*result.model.resources.ls_table), before);
  EXPECT_EQ(result.model.resources.ls_table.get(), res.ls_table.get());
}

TaggerParams tiny_params() {
  TaggerParams p;
  p.proj_b = Eigen::MatrixXd::Zero(2, 1);
  p.transitions = Eigen::MatrixXd::Zero(1, 1);
  return p;
}

TEST(SgdStep, ClipScalesGlobalNorm) {
  auto params = tiny_params();
  auto grads = params.zeros_like();
  auto velocity = params.zeros_like();
  grads.proj_b << 6, 8;  // norm 10
  TaggerConfig c;
  c.learning_rate = 1.0;
  c.momentum = 0.0;
  c.decay_rate = 1.0;
  c.clip_norm = 5.0;
  EXPECT_DOUBLE_EQ(sgd_step(params, grads, velocity, c, 0), 10.0);
  EXPECT_DOUBLE_EQ(params.proj_b(0), -3.0);
  EXPECT_DOUBLE_EQ(params.proj_b(1), -4.0);
}

TEST(SgdStep, PlainSgdAndMomentumRecurrence) {
  auto params = tiny_params();
  auto grads = params.zeros_like();
  auto velocity = params.zeros_like();
  grads.proj_b << 0.1, -0.2;
  TaggerConfig c;
  c.learning_rate = 0.5;
  c.momentum = 0.0;
  c.decay_rate = 1.0;
  sgd_step(params, grads, velocity, c, 7);
  EXPECT_DOUBLE_EQ(params.proj_b(0), -0.05);
  EXPECT_DOUBLE_EQ(params.proj_b(1), 0.1);

  auto v2 = params.zeros_like();
  auto p2 = tiny_params();
  c.momentum = 0.9;
  sgd_step(p2, grads, v2, c, 0);
  sgd_step(p2, grads, v2, c, 0);
  EXPECT_NEAR(v2.proj_b(0), 1.9 * 0.1, 1e-15);
  EXPECT_NEAR(v2.proj_b(1), 1.9 * -0.2, 1e-15);
}

TEST(SgdStep, LearningRateDecaysPerEpoch) {
  auto params = tiny_params();
  auto grads = params.zeros_like();
  auto velocity = params.zeros_like();
  grads.proj_b << 1, 0;
  TaggerConfig c;
  c.learning_rate = 0.1;
  c.momentum = 0.0;
  c.decay_rate = 0.5;
  c.clip_norm = 100;
  sgd_step(params, grads, velocity, c, 3);
  EXPECT_DOUBLE_EQ(params.proj_b(0), -0.1 * 0.125);
}

TEST(SgdStep, NonFiniteGradientThrows) {
  auto params = tiny_params();
  auto grads = params.zeros_like();
  auto velocity = params.zeros_like();
  grads.proj_b(0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sgd_step(params, grads, velocity, TaggerConfig{}, 0), NumericalError);
}

TEST(Tagging, EdgeCasesAndDeterminism) {
  const auto data = toy_corpus();
  const auto m = init_model(tiny_config(), data, nullptr, tiny_resources(data));
  EXPECT_TRUE(tag_sentence(m, Sentence{}).empty());
  Rng rng(2);
  for (const std::string w : {"Roma", "zzz", "UN", "42", "."}) {
    Sentence s;
    s.tokens = {w};
    const auto tags = tag_sentence(m, s);
    ASSERT_EQ(tags.size(), 1u);
    EXPECT_TRUE(tags[0] == "O" || tags[0].starts_with("U-")) << tags[0];
  }
  EXPECT_EQ(tag_sentence(m, data[1]), tag_sentence(m, data[1]));
}

TEST(Tagging, UnknownGoldTagIsDataError) {
  const auto data = toy_corpus();
  const auto m = init_model(tiny_config(), data, nullptr, tiny_resources(data));
  EXPECT_THROW(encode_sentence(m, make_sentence({"x"}, {"B-MISC"}), true), DataError);
}

TEST(Trainer, DeterministicHistory) {
  const auto data = toy_corpus();
  auto c = tiny_config();
  c.max_epochs = 4;
  const auto a = train_tagger(data, data, c, tiny_resources(data));
  const auto b = train_tagger(data, data, c, tiny_resources(data));
  ASSERT_EQ(a.history.epochs.size(), b.history.epochs.size());
  for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
    EXPECT_EQ(a.history.epochs[i].loss, b.history.epochs[i].loss);
    EXPECT_EQ(a.history.epochs[i].dev_f1, b.history.epochs[i].dev_f1);
  }
  EXPECT_TRUE(a.model.params.proj_w == b.model.params.proj_w);
  TrainOptions serial;
  serial.parallel = false;
  const auto s = train_tagger(data, data, c, tiny_resources(data), serial);
  EXPECT_TRUE(s.model.params.proj_w == a.model.params.proj_w);
}

TEST(Trainer, MemorizesTinyTrainingSet) {
  const auto data = toy_corpus();
  auto c = tiny_config();
  c.learning_rate = 0.1;
  c.max_epochs = 60;
  c.patience = 60;
  c.batch_size = 1;
  c.dropout = 0.0;
  const auto r = train_tagger(data, {}, c, tiny_resources(data));
  EXPECT_DOUBLE_EQ(f1_score(r.model, data), 100.0);
  const auto pred = predict(r.model, data);
  EXPECT_EQ(pred[2].tags, (std::vector<std::string>{"U-ORG", "O", "U-PER"}));
}

TEST(Trainer, PatienceStopsEarly) {
  const auto data = toy_corpus();
  auto c = tiny_config();
  c.learning_rate = 1e-6;
  c.max_epochs = 30;
  c.patience = 2;
  const auto r = train_tagger(data, data, c, tiny_resources(data));
  EXPECT_TRUE(r.history.stopped_early);
  EXPECT_EQ(static_cast<int>(r.history.epochs.size()), r.history.best_epoch + 1 + 2);
}

}  // namespace
}  // namespace lexner
