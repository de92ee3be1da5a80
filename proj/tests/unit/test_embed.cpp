#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "mfm/embed.hpp"
#include "mfm/error.hpp"
#include "temp_dir.hpp"

using namespace mfm;
using testing_support::TempDir;

namespace {

EmbeddingStore plane() {
  EmbeddingStore s(2);
  s.add("kind", std::vector<float>{1, 0});
  s.add("fair", std::vector<float>{0, 1});
  s.add("loyal", std::vector<float>{-1, 0});
  s.add("obey", std::vector<float>{0, -1});
  s.add("pure", std::vector<float>{1, 1});
  return s;
}

Lexicon anchors_lexicon() {
  Lexicon lex("toy", LexiconKind::count);
  lex.add("kind", CountEntry{Label::care, std::nullopt});
  lex.add("fair", CountEntry{Label::fairness, std::nullopt});
  lex.add("loyal", CountEntry{Label::loyalty, std::nullopt});
  lex.add("obey", CountEntry{Label::authority, std::nullopt});
  lex.add("pure", CountEntry{Label::sanctity, std::nullopt});
  return lex;
}

}  // namespace

TEST(Vectors, HeaderAndRows) {
  TempDir tmp;
  auto s = load_vectors(tmp.write("v.txt", "2 3\na 1 2 3\nb 0.5 -1 2e-3\n"));
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.dimension(), 3u);
  EXPECT_FLOAT_EQ(s.vector(*s.index("b"))[2], 0.002f);
}

TEST(Vectors, MalformedRowsCarryLineNumbers) {
  TempDir tmp;
  struct Case {
    std::string text;
    std::size_t line;
  };
  for (const auto& c : {Case{"2 3\na 1 2 3\nb 1 2\n", 3}, Case{"2 3\na 1 2 3 4\nb 1 2 3\n", 2},
                        Case{"2 3\na 1 x 3\nb 1 2 3\n", 2}, Case{"2 3\na 1 2 3\na 1 2 3\n", 3},
                        Case{"3 3\na 1 2 3\nb 1 2 3\n", 3}, Case{"two 3\n", 1}, Case{"1 3\na 1 2 3\nb 1 2 3\n", 3}}) {
    try {
      load_vectors(tmp.write("bad.txt", c.text));
      ADD_FAILURE() << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << e.what();
    }
  }
}

TEST(Vectors, RoundTripPreservesValues) {
  TempDir tmp;
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto store = gen::gaussian_store(rng, 1 + rng.below(50), 1 + rng.below(20));
    save_vectors(store, tmp / "a.txt");
    auto once = load_vectors(tmp / "a.txt");
    save_vectors(once, tmp / "b.txt");
    auto twice = load_vectors(tmp / "b.txt");
    ASSERT_EQ(once.size(), store.size());
    for (std::size_t r = 0; r < store.size(); ++r) {
      EXPECT_EQ(once.token(r), store.token(r));
      auto a = store.vector(r), b = once.vector(r), c = twice.vector(r);
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i], b[i]);
        EXPECT_EQ(b[i], c[i]);
      }
    }
  }
}

TEST(Cosine, ZeroVectorGivesZero) {
  std::vector<double> a{0, 0}, b{1, 0};
  EXPECT_EQ(cosine(a, b), 0.0);
  std::vector<double> c{1, 1};
  EXPECT_NEAR(cosine(b, c), 1 / std::sqrt(2.0), 1e-15);
}

TEST(MeanVector, SkipsOov) {
  auto s = plane();
  auto m = mean_vector(std::vector<std::string>{"kind", "zzz", "fair"}, s);
  ASSERT_TRUE(m);
  EXPECT_DOUBLE_EQ((*m)[0], 0.5);
  EXPECT_FALSE(mean_vector(std::vector<std::string>{"zzz"}, s));
}

TEST(Semantic, SelfSimilarity) {
  auto s = plane();
  auto p = semantic_similarity_score(from_tokens(std::vector<std::string>{"kind"}), anchors_lexicon(), s);
  EXPECT_EQ(p.labels, (LabelSet{Label::care}));
  EXPECT_NEAR(p.scores[Label::care], 1.0, 1e-12);
}

TEST(Semantic, TwoDimensionalToy) {
  EmbeddingStore s(2);
  s.add("c", std::vector<float>{1, 0});
  s.add("f", std::vector<float>{0, 1});
  s.add("l", std::vector<float>{-1, 0});
  s.add("a", std::vector<float>{0, -1});
  s.add("s", std::vector<float>{-1, -1});
  s.add("doc", std::vector<float>{1, 0});
  Lexicon lex("toy", LexiconKind::count);
  for (auto [t, f] : {std::pair{"c", Label::care}, {"f", Label::fairness}, {"l", Label::loyalty},
                      {"a", Label::authority}, {"s", Label::sanctity}}) {
    lex.add(t, CountEntry{f, std::nullopt});
  }
  auto p = semantic_similarity_score(from_tokens(std::vector<std::string>{"doc"}), lex, s);
  EXPECT_EQ(p.labels, (LabelSet{Label::care}));
  EXPECT_NEAR(p.scores[Label::fairness], 0.0, 1e-12);
}

TEST(Semantic, AllOovIsUnknown) {
  auto s = plane();
  auto p = semantic_similarity_score(from_tokens(std::vector<std::string>{"x", "y"}), anchors_lexicon(), s);
  EXPECT_EQ(p.labels, (LabelSet{Label::unknown}));
}

TEST(Semantic, MissingFoundationAnchorThrows) {
  auto s = plane();
  Lexicon lex("toy", LexiconKind::count);
  lex.add("kind", CountEntry{Label::care, std::nullopt});
  lex.add("zzz", CountEntry{Label::fairness, std::nullopt});
  EXPECT_THROW(SemanticAnchors(lex, s), ValidationError);
}

TEST(Store, RejectsWrongDimensionAndDuplicates) {
  EmbeddingStore s(2);
  s.add("a", std::vector<float>{1, 2});
  EXPECT_THROW(s.add("a", std::vector<float>{1, 2}), ValidationError);
  EXPECT_THROW(s.add("b", std::vector<float>{1}), ValidationError);
  EXPECT_THROW(EmbeddingStore(0), ValidationError);
}
