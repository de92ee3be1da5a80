#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "mfm/eval.hpp"
#include "mfm/lexicon.hpp"
#include "mfm/random.hpp"
#include "mfm/segment.hpp"

namespace {

std::string english_text(std::size_t words) {
  static const char* pool[] = {"the", "harm", "fair", "cheating", "loyal", "obey", "pure", "kindness",
                               "family", "rules", "betrayal", "clean", "protect", "rights", "nation"};
  mfm::Rng rng(1);
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += pool[rng.below(std::size(pool))];
  }
  return s;
}

mfm::Lexicon lexicon() {
  mfm::Lexicon lex("bench", mfm::LexiconKind::count);
  lex.add("harm*", mfm::CountEntry{mfm::Label::care, {}});
  lex.add("kind*", mfm::CountEntry{mfm::Label::care, {}});
  lex.add("fair", mfm::CountEntry{mfm::Label::fairness, {}});
  lex.add("cheat*", mfm::CountEntry{mfm::Label::fairness, {}});
  lex.add("loyal*", mfm::CountEntry{mfm::Label::loyalty, {}});
  lex.add("betray*", mfm::CountEntry{mfm::Label::loyalty, {}});
  lex.add("obey*", mfm::CountEntry{mfm::Label::authority, {}});
  lex.add("pure", mfm::CountEntry{mfm::Label::sanctity, {}});
  return lex;
}

void BM_TokenizeEnglish(benchmark::State& state) {
  const auto text = english_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mfm::tokenize_words(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_TokenizeEnglish)->Arg(32)->Arg(1024);

void BM_SegmentChinese(benchmark::State& state) {
  mfm::Vocabulary vocab{"关爱", "公平", "忠诚", "权威", "纯洁", "伤害", "欺骗", "背叛", "今天", "天气"};
  std::string text;
  for (int i = 0; i < state.range(0); ++i) text += "今天关爱公平的天气背叛纯洁";
  for (auto _ : state) benchmark::DoNotOptimize(mfm::segment_max_match(text, vocab));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_SegmentChinese)->Arg(4)->Arg(128);

void BM_ScoreCount(benchmark::State& state) {
  const auto lex = lexicon();
  const auto tokens = mfm::tokenize_words(english_text(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(mfm::score_count(tokens, lex));
}
BENCHMARK(BM_ScoreCount)->Arg(32)->Arg(1024);

void BM_Evaluate(benchmark::State& state) {
  mfm::Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<mfm::Document> docs;
  std::vector<mfm::Prediction> preds;
  for (std::size_t i = 0; i < n; ++i) {
    mfm::Document d;
    d.id = "d" + std::to_string(i);
    d.text = "x";
    d.gold = mfm::kFoundations[rng.below(5)];
    mfm::Prediction p;
    p.doc_id = d.id;
    p.labels = {mfm::kFoundations[rng.below(5)]};
    docs.push_back(std::move(d));
    preds.push_back(std::move(p));
  }
  const mfm::Dataset bench("bench", std::move(docs));
  for (auto _ : state) benchmark::DoNotOptimize(mfm::evaluate(bench, preds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
