// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <memory>

#include "lexner/lexsim.h"
#include "lexner/random.h"
#include "lexner/synth.h"
#include "lexner/tagger.h"
#include "lexner/text.h"

namespace lexner {
namespace {

struct LsInputs {
  TypeInventory inventory;
  EmbeddingTable table;
  std::vector<std::string> vocab;
};

const LsInputs& ls_inputs() {
  static const LsInputs in = [] {
    LsInputs r;
    std::vector<std::string> names, labels;
    std::vector<std::uint8_t> atomic;
    for (int t = 0; t < 120; ++t) {
      labels.push_back("/type" + std::to_string(t));
      names.push_back(labels.back());
      atomic.push_back(1);
    }
    for (int w = 0; w < 10000; ++w) {
      r.vocab.push_back("word" + std::to_string(w));
      names.push_back(r.vocab.back());
      atomic.push_back(0);
    }
    r.inventory = TypeInventory(labels);
    r.table = EmbeddingTable(100, names, std::vector<std::uint64_t>(names.size(), 1), atomic,
                             1000, 3, 6);
    Rng rng(1);
    for (auto& v : r.table.input_matrix()) v = static_cast<float>(rng.normal());
    return r;
  }();
  return in;
}

void BM_BuildLsTable(benchmark::State& state) {
  const auto& in = ls_inputs();
  for (auto _ : state) {
    auto t = build_ls_table(in.vocab, in.table, in.inventory);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.vocab.size()));
}

void BM_BuildLsTableSerial(benchmark::State& state) {
  const auto& in = ls_inputs();
  for (auto _ : state) {
    auto t = build_ls_table_serial(in.vocab, in.table, in.inventory);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.vocab.size()));
}

struct TaggerInputs {
  TaggerModel model;
  std::vector<EncodedSentence> encoded;
};

const TaggerInputs& tagger_inputs() {
  static const TaggerInputs in = [] {
    SynthWorldConfig wc;
    wc.seed = 2;
    const auto world = make_world(wc);
    SynthNerConfig nc;
    nc.train = 200;
    nc.dev = 10;
    nc.test = 10;
    const auto data = make_ner_data(world, nc);
    TaggerConfig c;
    c.features = FeatureSet::parse("word+char+cap");
    TaggerInputs r;
    r.model = init_model(c, data.train, nullptr, {});
    r.encoded = encode_corpus(r.model, data.train, true);
    return r;
  }();
  return in;
}

template <bool Parallel>
void BM_BatchGradients(benchmark::State& state) {
  const auto& in = tagger_inputs();
  std::vector<const EncodedSentence*> batch;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    batch.push_back(&in.encoded[i]);
    seeds.push_back(i + 1);
  }
  for (auto _ : state) {
    auto g = Parallel ? nll_and_gradients(in.model, batch, seeds)
                      : nll_and_gradients_serial(in.model, batch, seeds);
    benchmark::DoNotOptimize(g);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_TagCorpus(benchmark::State& state) {
  const auto& in = tagger_inputs();
  for (auto _ : state) {
    auto tags = Parallel ? tag_corpus(in.model, in.encoded) : tag_corpus_serial(in.model, in.encoded);
    benchmark::DoNotOptimize(tags);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.encoded.size()));
}

BENCHMARK(BM_BuildLsTable)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildLsTableSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradients<true>)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradients<false>)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TagCorpus<true>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TagCorpus<false>)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lexner

BENCHMARK_MAIN();
