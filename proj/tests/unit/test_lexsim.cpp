#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "lexner/error.h"
#include "lexner/lexsim.h"
#include "lexner/random.h"

namespace lexner {
namespace {

namespace fs = std::filesystem;

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine(std::vector<float>{0, 0}, std::vector<float>{1, 1}), 0.0);
  EXPECT_THROW(cosine(std::vector<float>{1}, std::vector<float>{1, 1}), DataError);
}

TEST(Cosine, BoundedAndScaleInvariant) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<float> u(5), v(5);
    for (auto& x : u) x = static_cast<float>(rng.normal());
    for (auto& x : v) x = static_cast<float>(rng.normal());
    const double c = cosine(u, v);
    EXPECT_LE(std::abs(c), 1.0);
    auto u3 = u;
    for (auto& x : u3) x *= 3.5f;
    EXPECT_NEAR(cosine(u3, v), c, 1e-6);
  }
}

TEST(MinmaxScale, Examples) {
  const auto s = minmax_scale(std::vector<float>{0.095f, 0.20f, 0.76f});
  EXPECT_FLOAT_EQ(s[0], -1.0f);
  EXPECT_NEAR(s[1], -0.68421, 1e-4);
  EXPECT_FLOAT_EQ(s[2], 1.0f);
  EXPECT_EQ(minmax_scale(std::vector<float>{0.3f, 0.3f, 0.3f}), (std::vector<float>{0, 0, 0}));
  EXPECT_EQ(minmax_scale(std::vector<float>{-1, 0, 1}), (std::vector<float>{-1, 0, 1}));
}

TEST(MinmaxScale, Properties) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 2 + rng.below(20);
    std::vector<float> raw(n);
    for (auto& x : raw) x = static_cast<float>(rng.uniform(-1, 1));
    const auto s = minmax_scale(raw);
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    if (*lo == *hi) continue;
    EXPECT_EQ(s[static_cast<std::size_t>(lo - raw.begin())], -1.0f);
    EXPECT_EQ(s[static_cast<std::size_t>(hi - raw.begin())], 1.0f);
    for (std::size_t a = 0; a < n; ++a) {
      EXPECT_GE(s[a], -1.0f);
      EXPECT_LE(s[a], 1.0f);
      for (std::size_t b = 0; b < n; ++b) {
        if (raw[a] < raw[b]) EXPECT_LT(s[a], s[b]);
      }
    }
    EXPECT_EQ(std::max_element(raw.begin(), raw.end()) - raw.begin(),
              std::max_element(s.begin(), s.end()) - s.begin());
  }
}

// Three type rows plus a few words, with hand-set vectors and no subwords.
struct Fixture {
  TypeInventory inventory{std::vector<std::string>{"/award", "/person", "/location"}};
  EmbeddingTable table;
  Fixture() : table(3, {"/award", "/person", "/location", "prize", "tie"}, {1, 1, 1, 1, 1},
                    {1, 1, 1, 0, 0}, 0, 3, 6) {
    const float rows[5][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0.5f, 0}, {1, 1, 0}};
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t d = 0; d < 3; ++d) table.input_row(r)[d] = rows[r][d];
  }
};

TEST(LsRaw, SelfSimilarityIsMaximal) {
  Fixture f;
  const auto v = ls_raw("/award", f.table, f.inventory);
  EXPECT_FLOAT_EQ(v[0], 1.0f);
  EXPECT_EQ(std::max_element(v.begin(), v.end()) - v.begin(), 0);
}

TEST(LsRaw, OovZeroVectorAndCase) {
  Fixture f;
  EXPECT_EQ(ls_raw("never-seen", f.table, f.inventory), (std::vector<float>{0, 0, 0}));
  EXPECT_EQ(ls_raw("PRIZE", f.table, f.inventory), ls_raw("prize", f.table, f.inventory));
}

TEST(LsRaw, ScaleInvariant) {
  Fixture f;
  const auto types = type_vectors(f.table, f.inventory);
  const std::vector<float> w{0.3f, -1.2f, 0.7f}, w5{1.5f, -6.0f, 3.5f};
  const auto a = ls_raw(w, types), b = ls_raw(w5, types);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-6);
}

TEST(LsRaw, MissingTypeEmbedding) {
  Fixture f;
  const TypeInventory other({"/award", "/event"});
  EXPECT_THROW(ls_raw("prize", f.table, other), DataError);
}

TEST(TopKTypes, OrderingAndTies) {
  Fixture f;
  const auto top = top_k_types("prize", 3, f.table, f.inventory);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].type, "/award");
  EXPECT_EQ(top[1].type, "/person");
  EXPECT_EQ(top[2].type, "/location");
  // "tie" is equidistant from /award and /person: inventory order decides.
  const auto tie = top_k_types("tie", 2, f.table, f.inventory);
  EXPECT_EQ(tie[0].type, "/award");
  EXPECT_EQ(tie[1].type, "/person");
  EXPECT_DOUBLE_EQ(tie[0].similarity, tie[1].similarity);
}

TEST(TopKTypes, FullRankIsPermutation) {
  Fixture f;
  const auto all = top_k_types("prize", 3, f.table, f.inventory);
  std::set<std::string> seen;
  for (const auto& s : all) seen.insert(s.type);
  EXPECT_EQ(seen.size(), 3u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GE(all[i - 1].similarity, all[i].similarity);
}

EmbeddingTable random_table(std::size_t words, std::size_t types, int dim, std::uint64_t seed,
                            std::vector<std::string>* vocab, TypeInventory* inventory) {
  std::vector<std::string> names, labels;
  std::vector<std::uint8_t> atomic;
  for (std::size_t t = 0; t < types; ++t) {
    labels.push_back("/t" + std::to_string(t));
    names.push_back(labels.back());
    atomic.push_back(1);
  }
  for (std::size_t w = 0; w < words; ++w) {
    names.push_back("w" + std::to_string(w));
    vocab->push_back(names.back());
    atomic.push_back(0);
  }
  *inventory = TypeInventory(labels);
  EmbeddingTable t(dim, names, std::vector<std::uint64_t>(names.size(), 1), atomic, 64, 3, 6);
  Rng rng(seed);
  for (auto& v : t.input_matrix()) v = static_cast<float>(rng.normal());
  return t;
}

TEST(BuildLsTable, EntriesAreScaledRaw) {
  std::vector<std::string> vocab;
  TypeInventory inv;
  const auto t = random_table(50, 6, 8, 3, &vocab, &inv);
  const auto ls = build_ls_table(vocab, t, inv);
  EXPECT_EQ(ls.size(), 50u);
  for (const auto& w : vocab) {
    const auto* v = ls.find(w);
    ASSERT_NE(v, nullptr);
    EXPECT_EQ(*v, minmax_scale(ls_raw(w, t, inv)));
    EXPECT_EQ(*std::min_element(v->begin(), v->end()), -1.0f);
    EXPECT_EQ(*std::max_element(v->begin(), v->end()), 1.0f);
  }
}

TEST(BuildLsTable, ParallelMatchesSerial) {
  std::vector<std::string> vocab;
  TypeInventory inv;
  const auto t = random_table(300, 10, 16, 4, &vocab, &inv);
  EXPECT_TRUE(build_ls_table(vocab, t, inv) == build_ls_table_serial(vocab, t, inv));
  EXPECT_TRUE(build_ls_table(vocab, t, inv) == build_ls_table(vocab, t, inv));
}

TEST(BuildLsTable, SingleWordAndEmpty) {
  std::vector<std::string> vocab;
  TypeInventory inv;
  const auto t = random_table(1, 4, 8, 5, &vocab, &inv);
  const auto ls = build_ls_table(vocab, t, inv);
  ASSERT_EQ(ls.size(), 1u);
  EXPECT_EQ(ls.find("w0")->size(), 4u);
  EXPECT_THROW(build_ls_table(std::vector<std::string>{}, t, inv), DataError);
}

TEST(LsFiles, RoundTripAndErrors) {
  std::vector<std::string> vocab;
  TypeInventory inv;
  const auto t = random_table(20, 5, 8, 6, &vocab, &inv);
  auto ls = build_ls_table(vocab, t, inv);
  ls.set_seed(99);
  const auto path = fs::temp_directory_path() / "lexner_test_lsrt.bin";
  save_ls_table(ls, path);
  EXPECT_TRUE(load_ls_table(path, &inv) == ls);
  const TypeInventory other({"/t0", "/t1"});
  EXPECT_THROW(load_ls_table(path, &other), DataError);
  fs::remove(path);

  const auto bytes = serialize_ls_table(ls);
  const auto cut = bytes.size() - 7;
  try {
    deserialize_ls_table(std::string_view(bytes).substr(0, cut));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_GT(e.offset(), 0u);
    EXPECT_LE(e.offset(), cut);
  }
  EXPECT_THROW(deserialize_ls_table("XXXX"), FormatError);
}

TEST(LsFiles, ContentHashTracksValues) {
  std::vector<std::string> vocab;
  TypeInventory inv;
  const auto t = random_table(10, 3, 4, 7, &vocab, &inv);
  auto a = build_ls_table(vocab, t, inv);
  auto b = a;
  EXPECT_EQ(content_hash(a), content_hash(b));
  auto v = *b.find("w0");
  v[0] = 0.123f;
  b.insert("w0", v);
  EXPECT_NE(content_hash(a), content_hash(b));
}

TEST(LsLookup, StoredThenOnTheFly) {
  std::vector<std::string> vocab;
  TypeInventory inv;
  const auto t = random_table(5, 3, 4, 8, &vocab, &inv);
  const std::vector<std::string> first{"w0", "w1"};
  const auto ls = build_ls_table(first, t, inv);
  const LsLookup lookup(&ls, &t);
  EXPECT_EQ(lookup("W0"), *ls.find("w0"));
  EXPECT_EQ(lookup("w3"), minmax_scale(ls_raw("w3", t, inv)));
  const LsLookup no_fallback(&ls, nullptr);
  EXPECT_EQ(no_fallback("w3"), (std::vector<float>{0, 0, 0}));
}

}  // namespace
}  // namespace lexner
