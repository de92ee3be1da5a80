#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "gen.hpp"
#include "mfm/corpus.hpp"
#include "mfm/csv.hpp"
#include "mfm/error.hpp"
#include "mfm/prediction.hpp"
#include "temp_dir.hpp"

using namespace mfm;
using testing_support::TempDir;

namespace {

Document doc(std::string id, Label gold, std::string text = "t") {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.gold = gold;
  return d;
}

std::map<Label, std::size_t> per_class(const Dataset& d) {
  std::map<Label, std::size_t> out;
  for (const auto& doc : d.documents()) ++out[doc.gold];
  return out;
}

}  // namespace

TEST(Foundation, ParsesNamesAndPairs) {
  EXPECT_EQ(parse_label("care"), Label::care);
  EXPECT_EQ(parse_label("Care/Harm"), Label::care);
  EXPECT_EQ(parse_label("non-moral"), Label::nonmoral);
  EXPECT_EQ(parse_label("SANCTITY"), Label::sanctity);
  EXPECT_FALSE(parse_label("justice"));
  EXPECT_THROW(parse_label_or_throw("justice", "row 3"), ValidationError);
}

TEST(Foundation, LabelSetIteratesInEnumOrder) {
  LabelSet s{Label::sanctity, Label::care, Label::authority};
  auto v = s.to_vector();
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], Label::care);
  EXPECT_EQ(v[2], Label::sanctity);
  EXPECT_TRUE(s.has_foundation());
  EXPECT_FALSE(LabelSet{Label::none}.has_foundation());
  EXPECT_EQ(to_string(s), "care,authority,sanctity");
}

TEST(Csv, QuotedFieldsSpanLines) {
  auto rows = csv::parse("a,b\n\"x\ny\",\"he said \"\"hi\"\"\"\n3,4\r\n", "mem");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields[0], "x\ny");
  EXPECT_EQ(rows[1].fields[1], "he said \"hi\"");
  EXPECT_EQ(rows[2].line, 4u);
}

TEST(Csv, UnterminatedQuoteReportsLine) {
  try {
    csv::parse("a,b\n1,2\n\"open,3\n", "mem");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Csv, EscapeRoundTrips) {
  std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  std::ostringstream out;
  csv::write_row(out, fields);
  auto rows = csv::parse(out.str(), "mem");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].fields, fields);
}

TEST(Dataset, ClassCountsAreAHistogram) {
  Dataset d("x", {doc("1", Label::care), doc("2", Label::care), doc("3", Label::loyalty)});
  EXPECT_EQ(d.class_counts()[Label::care], 2u);
  EXPECT_EQ(d.class_counts()[Label::loyalty], 1u);
  EXPECT_EQ(d.class_counts().total(), 3u);
}

TEST(Dataset, RejectsDuplicatesAndPredictionLabels) {
  EXPECT_THROW(Dataset("x", {doc("1", Label::care), doc("1", Label::care)}), ValidationError);
  EXPECT_THROW(Dataset("x", {doc("1", Label::none)}), ValidationError);
  EXPECT_THROW(Dataset("x", {doc("1", Label::care, "  ")}), ValidationError);
}

TEST(Dataset, UnknownLabelInFileIsRejected) {
  TempDir tmp;
  auto path = tmp.write("d.csv", "id,text,label\n1,a,care\n2,b,justice\n");
  try {
    load_dataset(path);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown label"), std::string::npos);
  }
}

TEST(Dataset, CsvAndJsonlRoundTrip) {
  TempDir tmp;
  Document a = doc("a", Label::care, "x, \"quoted\"\nnext line");
  a.language = "zh";
  a.source = "s";
  Document b = doc("b", Label::nonmoral, "plain");
  b.source = "s";
  b.tokens = std::vector<std::string>{"pl", "ain"};
  Dataset d("rt", {a, b});

  save_dataset(d, tmp / "d.jsonl", DatasetFormat::jsonl);
  auto j = load_dataset(tmp / "d.jsonl");
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0], a);
  EXPECT_EQ(j[1], b);

  save_dataset(d, tmp / "d.csv", DatasetFormat::csv);
  auto c = load_dataset(tmp / "d.csv");
  EXPECT_EQ(c[0].text, a.text);
  EXPECT_EQ(c[0].language, "zh");
  EXPECT_EQ(c[1].gold, Label::nonmoral);
}

TEST(Dataset, MalformedJsonlCarriesLine) {
  TempDir tmp;
  auto path = tmp.write("d.jsonl", "{\"id\":\"1\",\"text\":\"a\",\"label\":\"care\"}\n\n{\"id\":\"2\",\"text\":\"b\"}\n");
  try {
    load_dataset(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Split, BoundaryFractions) {
  Rng rng(1);
  auto d = gen::bench(rng, 40);
  auto none = stratified_split(d, 0.0, 5);
  EXPECT_TRUE(none.bench.empty());
  EXPECT_EQ(none.train.size(), d.size());
  auto all = stratified_split(d, 1.0, 5);
  EXPECT_EQ(all.bench.size(), d.size());
  EXPECT_TRUE(all.train.empty());
  EXPECT_THROW(stratified_split(d, 1.5, 5), ValidationError);
}

TEST(Split, BenchTakesFloorPerClass) {
  auto d = gen::balanced({3030, 1225, 1712, 1278, 247}, "ccv-", 9);
  auto s = stratified_split(d, 0.2, 42);
  auto bench = per_class(s.bench);
  EXPECT_EQ(bench[Label::care], 606u);
  EXPECT_EQ(bench[Label::fairness], 245u);
  EXPECT_EQ(bench[Label::sanctity], 49u);
  EXPECT_EQ(s.bench.size() + s.train.size(), d.size());
  std::set<std::string> ids;
  for (const auto& x : s.bench.documents()) ids.insert(x.id);
  for (const auto& x : s.train.documents()) EXPECT_FALSE(ids.contains(x.id));
}

TEST(Split, SeedDeterminesSelection) {
  Rng rng(2);
  auto d = gen::bench(rng, 300);
  auto a = stratified_split(d, 0.3, 7);
  auto b = stratified_split(d, 0.3, 7);
  auto c = stratified_split(d, 0.3, 8);
  ASSERT_EQ(a.bench.size(), b.bench.size());
  for (std::size_t i = 0; i < a.bench.size(); ++i) EXPECT_EQ(a.bench[i].id, b.bench[i].id);
  bool differs = false;
  for (std::size_t i = 0; i < a.bench.size(); ++i) differs = differs || a.bench[i].id != c.bench[i].id;
  EXPECT_TRUE(differs);
}

TEST(Batches, FullBatchesOnly) {
  auto d = gen::balanced({440, 440, 440, 440, 440}, "", 3);
  auto batches = make_batches(d, 100, std::nullopt, 1);
  EXPECT_EQ(batches.size(), 22u);
  std::set<std::string> seen;
  for (const auto& b : batches) {
    EXPECT_EQ(b.size(), 100u);
    for (const auto& x : b.documents()) EXPECT_TRUE(seen.insert(x.id).second);
  }
  Rng rng(4);
  EXPECT_TRUE(make_batches(gen::bench(rng, 40), 100, std::nullopt, 1).empty());
}

TEST(Batches, QuotaGivesEvenClasses) {
  auto d = gen::balanced({250, 230, 260, 200, 240}, "", 5);
  auto batches = make_batches(d, 50, 10, 1);
  EXPECT_EQ(batches.size(), 20u);
  for (const auto& b : batches) {
    for (Label f : kFoundations) EXPECT_EQ(b.class_counts()[f], 10u);
  }
  EXPECT_THROW(make_batches(d, 40, 10, 1), ValidationError);
}

TEST(Undersample, MinClassAndExplicit) {
  auto d = gen::balanced({10, 4, 0, 0, 0}, "", 1);
  auto m = per_class(undersample(d, UndersampleTarget::min_class(), 1));
  EXPECT_EQ(m[Label::care], 4u);
  EXPECT_EQ(m[Label::fairness], 4u);

  auto balanced = gen::balanced({5, 5, 5, 5, 5}, "", 1);
  EXPECT_EQ(undersample(balanced, UndersampleTarget::min_class(), 3).class_counts(), balanced.class_counts());

  auto e = gen::balanced({100, 0, 30, 0, 0}, "", 1);
  auto x = undersample(e, UndersampleTarget::explicit_counts({{Label::care, 30}, {Label::loyalty, 30}}), 2);
  EXPECT_EQ(x.size(), 60u);
  EXPECT_THROW(undersample(e, UndersampleTarget::explicit_counts({{Label::loyalty, 31}}), 2), ValidationError);
}

TEST(Exchange, RoundTripKeepsEveryField) {
  Prediction p;
  p.doc_id = "x1";
  p.labels = {Label::care, Label::loyalty};
  p.scores = {{Label::care, 1.5}, {Label::loyalty, 1.5}};
  p.rationale = "because";
  p.approach = "binary:test";
  p.raw_response = "raw \"text\"";
  p.binary = std::map<Label, bool>{{Label::care, true}, {Label::fairness, false}, {Label::loyalty, true}};
  p.job_id = "binary-b003";
  EXPECT_EQ(from_json_line(to_json_line(p)), p);
}

TEST(Exchange, ValidationRules) {
  Prediction p;
  p.doc_id = "x";
  EXPECT_THROW(validate(p), ValidationError);
  p.labels = {Label::care, Label::none};
  EXPECT_THROW(validate(p), ValidationError);
  p.labels = {Label::nonmoral};
  EXPECT_THROW(validate(p), ValidationError);
  p.labels = {Label::care};
  p.binary = std::map<Label, bool>{{Label::fairness, true}};
  EXPECT_THROW(validate(p), ValidationError);
  p.binary = std::map<Label, bool>{{Label::care, true}};
  EXPECT_NO_THROW(validate(p));
}

TEST(Exchange, BadRecordsCarryLineNumbers) {
  TempDir tmp;
  auto path = tmp.write("p.jsonl", "{\"doc_id\":\"a\",\"labels\":[\"care\"]}\n{\"doc_id\":\"b\",\"labels\":[\"justice\"]}\n");
  try {
    read_predictions(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Rng, DerivedStreamsAreStable) {
  auto a = Rng::derive(42, 7);
  auto b = Rng::derive(42, 7);
  auto c = Rng::derive(42, 8);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng::derive(42, 7).next(), c.next());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    auto x = r.below(7);
    EXPECT_LT(x, 7u);
    double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
