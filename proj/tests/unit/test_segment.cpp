#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gen.hpp"
#include "mfm/segment.hpp"
#include "temp_dir.hpp"

using namespace mfm;

namespace {

// Independent greedy longest-match over code points.
std::vector<std::string> fmm_oracle(const std::vector<std::string>& chars, const std::set<std::string>& vocab,
                                    std::size_t max_len) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < chars.size()) {
    std::size_t take = 1;
    for (std::size_t len = std::min(max_len, chars.size() - i); len > 1; --len) {
      std::string candidate;
      for (std::size_t k = 0; k < len; ++k) candidate += chars[i + k];
      if (vocab.contains(candidate)) {
        take = len;
        break;
      }
    }
    std::string tok;
    for (std::size_t k = 0; k < take; ++k) tok += chars[i + k];
    out.push_back(tok);
    i += take;
  }
  return out;
}

}  // namespace

TEST(Tokenize, WhitespaceWordsLowercased) {
  auto t = tokenize("The cat sat", "en");
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_EQ(t.spans[1], (Span{4, 7}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("", "en").empty());
  EXPECT_TRUE(tokenize("", "zh", nullptr).empty());
}

TEST(Tokenize, PunctuationIsDropped) {
  auto t = tokenize("Kind, fair; loyal!", "en");
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"kind", "fair", "loyal"}));
}

TEST(MaxMatch, HandTrace) {
  Vocabulary v{"AB", "A", "B", "C"};
  auto t = tokenize("ABC", "zh", &v);
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"AB", "C"}));
}

TEST(MaxMatch, ChineseWithFallback) {
  Vocabulary v{"我们", "应该", "关爱", "老人"};
  auto t = segment_max_match("我们应该关爱老人啊", v);
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"我们", "应该", "关爱", "老人", "啊"}));
  EXPECT_EQ(t.spans[1], (Span{6, 12}));
}

TEST(MaxMatch, WhitespaceSeparatesRuns) {
  Vocabulary v{"AB"};
  auto t = segment_max_match("A B", v);
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"A", "B"}));
}

TEST(MaxMatch, MatchesOracleOnRandomStrings) {
  Rng rng(77);
  const std::vector<std::string> alphabet{"甲", "乙", "丙", "丁"};
  for (int trial = 0; trial < 200; ++trial) {
    std::set<std::string> words;
    Vocabulary v;
    std::size_t max_len = 1;
    for (int w = 0; w < 6; ++w) {
      std::string term;
      const auto len = 1 + rng.below(4);
      for (std::uint64_t k = 0; k < len; ++k) term += alphabet[rng.below(4)];
      words.insert(term);
      v.insert(term);
      max_len = std::max<std::size_t>(max_len, len);
    }
    std::vector<std::string> chars;
    std::string text;
    const auto n = rng.below(15);
    for (std::uint64_t k = 0; k < n; ++k) {
      chars.push_back(alphabet[rng.below(4)]);
      text += chars.back();
    }
    EXPECT_EQ(segment_max_match(text, v).tokens, fmm_oracle(chars, words, max_len)) << text;
  }
}

TEST(MaxMatch, SegmentsConcatenateToInput) {
  Rng rng(3);
  Vocabulary v{"ab", "abc", "ca", "bca"};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    for (std::uint64_t k = 0, n = rng.below(20); k < n; ++k) text += "abc"[rng.below(3)];
    auto t = segment_max_match(text, v);
    std::string joined;
    for (std::size_t i = 0; i < t.size(); ++i) {
      joined += t.tokens[i];
      EXPECT_EQ(text.substr(t.spans[i].begin, t.spans[i].end - t.spans[i].begin), t.tokens[i]);
    }
    EXPECT_EQ(joined, text);
  }
}

TEST(Vocabulary, LoadsFirstField) {
  testing_support::TempDir tmp;
  auto path = tmp.write("v.txt", "关爱 120\n公平\t33\n\n老人\n");
  auto v = Vocabulary::from_file(path);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_TRUE(v.contains("公平"));
  EXPECT_EQ(v.max_length(), 2u);
}

TEST(Language, ChineseTags) {
  EXPECT_TRUE(is_chinese("zh"));
  EXPECT_TRUE(is_chinese("zh-CN"));
  EXPECT_TRUE(is_chinese("cmn"));
  EXPECT_FALSE(is_chinese("en"));
  EXPECT_FALSE(is_chinese("it"));
}

TEST(FromTokens, SpansIndexJoinedString) {
  std::vector<std::string> toks{"ab", "c"};
  auto t = from_tokens(toks);
  EXPECT_EQ(t.spans[1], (Span{3, 4}));
}
