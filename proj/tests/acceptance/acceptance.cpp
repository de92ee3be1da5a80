// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits nonzero if any check fails. argv[1], when given, is the mfm binary
// used for the command-line determinism check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "gen.hpp"
#include "json.hpp"
#include "mfm/error.hpp"
#include "mfm/eval.hpp"
#include "mfm/experiments.hpp"
#include "mfm/frameaxis.hpp"
#include "mfm/llmclient.hpp"
#include "oracle.hpp"
#include "stub_server.hpp"
#include "temp_dir.hpp"

using namespace mfm;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;

void check(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.empty() ? "" : ": ",
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

// ---- baselines ---------------------------------------------------------------

Outcome baselines() {
  Outcome o;
  struct Row {
    const char* name;
    std::array<std::size_t, 5> counts;  // care, fairness, loyalty, authority, sanctity
    double acc;
    std::optional<double> fm;
    std::vector<std::pair<Label, double>> f1;
  };
  const std::vector<Row> rows{
      {"MFV", {27, 12, 16, 25, 10}, 0.23, 0.20,
       {{Label::authority, 0.28}, {Label::care, 0.30}, {Label::fairness, 0.13}, {Label::loyalty, 0.18},
        {Label::sanctity, 0.11}}},
      {"CCS", {389, 259, 248, 331, 226}, 0.21, std::nullopt, {}},
      {"CCV", {3030, 1225, 1712, 1278, 247}, 0.27, std::nullopt, {{Label::sanctity, 0.03}}},
  };
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream summary;
  for (const auto& row : rows) {
    auto r = baseline_expected(ClassPrior::from_counts(std::span<const std::size_t, 5>(row.counts)));
    auto near = [](double a, double b) { return std::abs(a - b) <= 0.005; };
    o.require(near(r.accuracy, row.acc), std::string(row.name) + " Acc " + fmt(r.accuracy));
    o.require(near(r.f1_weighted, row.acc), std::string(row.name) + " Fw " + fmt(r.f1_weighted));
    o.require(r.coverage == 1.0, std::string(row.name) + " Cov");
    if (row.fm) o.require(near(r.f1_macro, *row.fm), std::string(row.name) + " Fm " + fmt(r.f1_macro));
    for (auto [f, v] : row.f1) {
      o.require(near(r[f].f1, v), std::string(row.name) + " " + std::string(short_name(f)) + " " + fmt(r[f].f1));
    }
    summary << row.name << " Acc=" << fmt(r.accuracy) << " ";
  }
  const auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(seconds < 1.0, "took " + fmt(seconds) + " s");
  if (o.pass) o.detail = summary.str() + "in " + fmt(seconds) + " s";
  return o;
}

// ---- metric oracle ---------------------------------------------------------

Outcome metric_oracle() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 7919);
    auto bench = gen::bench(rng, 200);
    auto preds = gen::predictions(rng, bench);
    std::vector<Label> gold;
    std::vector<LabelSet> labels;
    for (std::size_t i = 0; i < bench.size(); ++i) {
      gold.push_back(bench[i].gold);
      labels.push_back(preds[i].labels);
    }
    for (auto scope : {EvalScope::covered_only, EvalScope::all}) {
      auto got = evaluate(bench, preds, scope);
      auto want = oracle::brute_force(gold, labels, scope == EvalScope::covered_only);
      const auto tag = "seed " + std::to_string(seed) + " " + std::string(to_string(scope));
      o.require(got.accuracy == want.accuracy, tag + " accuracy");
      o.require(got.coverage == want.coverage, tag + " coverage");
      o.require(got.f1_weighted == want.fw, tag + " Fw");
      o.require(got.f1_macro == want.fm, tag + " Fm");
      for (std::size_t c = 0; c < kFoundationCount; ++c) {
        o.require(got.per_class[c].precision == want.rows[c].precision &&
                      got.per_class[c].recall == want.rows[c].recall && got.per_class[c].f1 == want.rows[c].f1 &&
                      got.per_class[c].support == want.rows[c].support,
                  tag + " class " + std::to_string(c));
      }
    }
  }
  if (o.pass) o.detail = "20 seeds x 200 documents, both scopes, exact";
  return o;
}

// ---- lexicon oracle ----------------------------------------------------------

Outcome lexicon_oracle() {
  Outcome o;
  Rng rng(4242);
  int ties = 0, misses = 0;
  for (int instance = 0; instance < 50; ++instance) {
    auto toy = gen::toy_lexicon(rng, 2 + rng.below(10));
    std::vector<std::string> tokens;
    switch (instance % 5) {
      case 0: {  // two exact hits on different foundations
        const auto& a = toy.entries[0];
        for (const auto& b : toy.entries) {
          if (b.foundation != a.foundation) {
            tokens = {a.term, b.term};
            break;
          }
        }
        if (tokens.empty()) tokens = {a.term};
        break;
      }
      case 1:
        tokens = {"zzzz", "yyy"};  // outside the generator alphabet
        break;
      default:
        tokens = gen::tokens(rng, toy, rng.below(12));
    }
    auto want_count = oracle::lexicon_score(tokens, toy.entries, false);
    auto want_prob = oracle::lexicon_score(tokens, toy.entries, true);
    auto got_count = score_count(from_tokens(tokens), toy.count);
    auto got_prob = score_prob(from_tokens(tokens), toy.probability);
    const auto tag = "instance " + std::to_string(instance);
    o.require(got_count.labels == want_count.labels, tag + " count labels");
    o.require(got_prob.labels == want_prob.labels, tag + " probability labels");
    o.require(score_tokens(tokens, toy.count).per_foundation == want_count.totals, tag + " count totals");
    o.require(score_tokens(tokens, toy.probability).per_foundation == want_prob.totals, tag + " probability sums");
    ties += want_count.labels.foundation_count() > 1 ? 1 : 0;
    misses += want_count.labels == LabelSet{Label::none} ? 1 : 0;
  }
  o.require(ties > 0, "no tie case exercised");
  o.require(misses > 0, "no no-match case exercised");
  if (o.pass) o.detail = "50 instances, " + std::to_string(ties) + " ties, " + std::to_string(misses) + " no-match";
  return o;
}

// ---- frameaxis ---------------------------------------------------------------

Lexicon pole_lexicon(std::size_t first_row, bool swapped) {
  Lexicon lex("poles", LexiconKind::count);
  for (std::size_t f = 0; f < kFoundationCount; ++f) {
    for (std::size_t k = 0; k < 3; ++k) {
      lex.add("w" + std::to_string(first_row + 6 * f + k),
              CountEntry{kFoundations[f], swapped ? Polarity::vice : Polarity::virtue});
      lex.add("w" + std::to_string(first_row + 6 * f + 3 + k),
              CountEntry{kFoundations[f], swapped ? Polarity::virtue : Polarity::vice});
    }
  }
  return lex;
}

Outcome frameaxis_properties() {
  Outcome o;
  Rng rng(99);
  double worst_antisymmetry = 0.0;
  double lo = 1.0, hi = -1.0;
  for (int instance = 0; instance < 1000; ++instance) {
    auto store = gen::gaussian_store(rng, 60, 50);
    auto frames = build_microframes(pole_lexicon(0, false), store);
    auto swapped = build_microframes(pole_lexicon(0, true), store);
    std::vector<std::string> doc;
    for (std::uint64_t i = 0, n = 1 + rng.below(30); i < n; ++i) doc.push_back("w" + std::to_string(rng.below(60)));
    for (std::size_t f = 0; f < kFoundationCount; ++f) {
      const double b = *frame_bias(doc, store, frames[f]);
      const double s = *frame_bias(doc, store, swapped[f]);
      worst_antisymmetry = std::max(worst_antisymmetry, std::abs(b + s));
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
  }
  o.require(worst_antisymmetry <= 1e-12, "antisymmetry error " + std::to_string(worst_antisymmetry));
  o.require(lo >= -1.0 && hi <= 1.0, "bias outside [-1, 1]");

  // 2-D toy: virtue (1,0), vice (0,1).
  EmbeddingStore toy(2);
  Lexicon lex("toy", LexiconKind::count);
  for (Label f : kFoundations) {
    const std::string n(to_string(f));
    toy.add("v" + n, std::vector<float>{1, 0});
    toy.add("x" + n, std::vector<float>{0, 1});
    lex.add("v" + n, CountEntry{f, Polarity::virtue});
    lex.add("x" + n, CountEntry{f, Polarity::vice});
  }
  auto frames = build_microframes(lex, toy);
  const double virtue_doc = *frame_bias(std::vector<std::string>{"vcare"}, toy, frames[0]);
  const double vice_doc = *frame_bias(std::vector<std::string>{"xcare"}, toy, frames[0]);
  o.require(std::abs(virtue_doc + 0.70710678) <= 1e-6, "toy virtue bias " + fmt(virtue_doc));
  o.require(std::abs(vice_doc - 0.70710678) <= 1e-6, "toy vice bias " + fmt(vice_doc));
  if (o.pass) {
    char err[32];
    std::snprintf(err, sizeof err, "%.1e", worst_antisymmetry);
    o.detail = std::string("max |b + b_swapped| = ") + err + ", range [" + fmt(lo) + ", " +
               fmt(hi) + "] over 1000 x 5 frames, toy " + fmt(virtue_doc) + "/" + fmt(vice_doc);
  }
  return o;
}

Outcome frameaxis_null_calibration() {
  Outcome o;
  Rng rng(2718);
  auto store = gen::gaussian_store(rng, 500, 50);
  auto frames = build_microframes(pole_lexicon(0, false), store);
  std::vector<std::string> background;
  for (std::size_t r = 0; r < store.size(); ++r) background.push_back(store.token(r));

  const std::size_t sample = 30;
  std::vector<NullModel> nulls;
  for (const auto& f : frames) nulls.push_back(build_null_model(background, store, f, sample, 2000, 17, 4));

  const int trials = 2000;
  int significant = 0;
  for (int t = 0; t < trials; ++t) {
    auto draw = Rng::derive(31337, static_cast<std::uint64_t>(t));
    std::vector<std::string> doc;
    for (std::size_t k = 0; k < sample; ++k) doc.push_back(background[draw.below(background.size())]);
    auto [score, pred] = frameaxis_score(doc, store, frames, nulls, 1.959964);
    significant += score.significant[0] ? 1 : 0;
  }
  auto [lo, hi] = oracle::binomial_interval(trials, 0.05, 0.01);
  o.require(significant >= lo && significant <= hi,
            std::to_string(significant) + " significant, interval [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]");
  if (o.pass) {
    o.detail = std::to_string(significant) + "/" + std::to_string(trials) + " significant at 0.05, 99% interval [" +
               std::to_string(lo) + ", " + std::to_string(hi) + "]";
  }
  return o;
}

// ---- parsers -----------------------------------------------------------------

template <typename F>
bool rejects_at(F&& parse, std::size_t line) {
  try {
    parse();
  } catch (const ParseError& e) {
    return e.line() == line;
  }
  return false;
}

Outcome parser_round_trips() {
  Outcome o;
  TempDir tmp;
  Rng rng(606);
  for (int trial = 0; trial < 25; ++trial) {
    auto store = gen::gaussian_store(rng, 1 + rng.below(40), 1 + rng.below(16));
    save_vectors(store, tmp / "v1.txt");
    auto once = load_vectors(tmp / "v1.txt");
    save_vectors(once, tmp / "v2.txt");
    auto twice = load_vectors(tmp / "v2.txt");
    bool same = once.size() == store.size() && twice.size() == store.size();
    for (std::size_t r = 0; same && r < store.size(); ++r) {
      auto a = store.vector(r), b = once.vector(r), c = twice.vector(r);
      same = store.token(r) == twice.token(r) && std::equal(a.begin(), a.end(), b.begin()) &&
             std::equal(b.begin(), b.end(), c.begin());
    }
    o.require(same, "word2vec trial " + std::to_string(trial));

    auto toy = gen::toy_lexicon(rng, 1 + rng.below(30));
    auto count = toy.count.with_polarity([&](const std::string&) -> std::optional<Polarity> {
      auto r = rng.below(3);
      if (r == 0) return std::nullopt;
      return r == 1 ? Polarity::virtue : Polarity::vice;
    });
    save_lexicon(count, tmp / "l1.tsv");
    auto c1 = load_lexicon(tmp / "l1.tsv", LexiconKind::count);
    save_lexicon(c1, tmp / "l2.tsv");
    auto c2 = load_lexicon(tmp / "l2.tsv", LexiconKind::count);
    o.require(c1.entries() == count.entries() && c2.entries() == c1.entries(), "TSV trial " + std::to_string(trial));

    Lexicon prob("p", LexiconKind::probability);
    for (std::size_t i = 0, n = 1 + rng.below(30); i < n; ++i) {
      FoundationArray p{};
      for (auto& x : p) x = rng.uniform();
      prob.add("t" + std::to_string(i), ProbabilityEntry{p, {}});
    }
    save_lexicon(prob, tmp / "p1.csv");
    auto p1 = load_lexicon(tmp / "p1.csv", LexiconKind::probability);
    save_lexicon(p1, tmp / "p2.csv");
    auto p2 = load_lexicon(tmp / "p2.csv", LexiconKind::probability);
    o.require(p1.entries() == prob.entries() && p2.entries() == p1.entries(), "CSV trial " + std::to_string(trial));
  }

  const std::string header = "term,care,fairness,loyalty,authority,sanctity\n";
  o.require(rejects_at([&] { load_vectors(tmp.write("b1.txt", "2 3\na 1 2 3\nb 1 2\n")); }, 3), "short vector row");
  o.require(rejects_at([&] { load_vectors(tmp.write("b2.txt", "2 3\na 1 2 3\na 4 5 6\n")); }, 3), "duplicate token");
  o.require(rejects_at([&] { load_lexicon(tmp.write("b3.tsv", "harm\tcare\ncheat\n"), LexiconKind::count); }, 2),
            "TSV arity");
  o.require(rejects_at([&] { load_lexicon(tmp.write("b4.tsv", "a\tcare\nb\tjustice\n"), LexiconKind::count); }, 2),
            "TSV foundation");
  o.require(rejects_at([&] {
              load_lexicon(tmp.write("b5.csv", header + "a,0.5,0,0,0,0\nb,1.2,0,0,0,0\n"), LexiconKind::probability);
            }, 3),
            "CSV range");
  o.require(rejects_at([&] {
              load_lexicon(tmp.write("b6.csv", header + "a,0.5,0,0,0\n"), LexiconKind::probability);
            }, 2),
            "CSV arity");
  if (o.pass) o.detail = "25 trials per format, 6 malformed inputs rejected at the right line";
  return o;
}

// ---- LLM stub endpoint ---------------------------------------------------------

Outcome llm_stub() {
  Outcome o;
  std::vector<Document> bench_docs;
  for (int i = 0; i < 30; ++i) {
    Document d;
    d.id = "b" + std::to_string(i);
    d.gold = kFoundations[i % 5];
    d.text = "benchmark item " + std::to_string(i) + " mode" + std::to_string(i % 3) + " " +
             std::string(to_string(d.gold));
    bench_docs.push_back(d);
  }
  std::vector<Shot> shots{{"t1", "training example one", {Label::care}, "harm avoided"},
                          {"t2", "training example two", {Label::authority}, "respect"}};

  testing_support::StubServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto text = testing_support::last_user_message(req.body);
    const auto label = text.substr(text.rfind(' ') + 1);
    if (text.find("mode2") != std::string::npos) {
      res.status = 500;
      return;
    }
    if (text.find("mode1") != std::string::npos) {
      res.set_content(testing_support::chat_completion("The label is " + label + ", clearly."), "application/json");
      return;
    }
    res.set_content(testing_support::chat_completion(answer_json({*parse_label(label)}, "stub")),
                    "application/json");
  });

  EndpointConfig endpoint;
  endpoint.base_url = server.url();
  endpoint.model = "stub";
  endpoint.max_parallel = 6;
  endpoint.retries = 1;
  endpoint.backoff_initial = std::chrono::milliseconds(1);
  endpoint.backoff_max = std::chrono::milliseconds(2);
  ClassifyOptions options;
  options.shots = shots;
  for (const auto& d : bench_docs) options.benchmark_ids.insert(d.id);
  auto transport = make_http_transport(endpoint.base_url, "", std::chrono::milliseconds(5000));
  auto preds = classify_batch(bench_docs, endpoint, options, *transport);

  o.require(preds.size() == bench_docs.size(), "cardinality");
  int parsed = 0, repaired = 0, unknown = 0;
  for (std::size_t i = 0; i < preds.size() && i < bench_docs.size(); ++i) {
    const auto& p = preds[i];
    o.require(p.doc_id == bench_docs[i].id, "order at " + std::to_string(i));
    switch (i % 3) {
      case 0:
        o.require(p.labels == LabelSet{bench_docs[i].gold} && !p.raw_response, "valid reply " + p.doc_id);
        parsed += 1;
        break;
      case 1:
        o.require(p.labels == LabelSet{bench_docs[i].gold} && p.raw_response.has_value(),
                  "malformed reply " + p.doc_id);
        repaired += 1;
        break;
      default:
        o.require(p.labels == LabelSet{Label::unknown}, "failing reply " + p.doc_id);
        unknown += 1;
    }
  }

  // Only the target itself may appear; shots must come from outside the benchmark.
  for (const auto& body : server.bodies()) {
    auto j = nlohmann::json::parse(body);
    const auto& messages = j["messages"];
    for (std::size_t m = 0; m + 1 < messages.size(); ++m) {
      const auto content = messages[m]["content"].get<std::string>();
      for (const auto& d : bench_docs) {
        o.require(content.find(d.text) == std::string::npos, "benchmark text leaked into a prompt");
      }
    }
  }
  const int calls_before = server.calls();
  auto leaking = options;
  leaking.shots.push_back({"b4", bench_docs[4].text, {bench_docs[4].gold}, "x"});
  bool guarded = false;
  try {
    classify_batch(bench_docs, endpoint, leaking, *transport);
  } catch (const ValidationError&) {
    guarded = true;
  }
  o.require(guarded && server.calls() == calls_before, "leakage guard did not stop a benchmark shot");
  if (o.pass) {
    o.detail = std::to_string(parsed) + " parsed, " + std::to_string(repaired) + " repaired, " +
               std::to_string(unknown) + " unknown; order kept; no leakage";
  }
  return o;
}

// ---- learning curve ----------------------------------------------------------------

Outcome learning_curve() {
  Outcome o;
  TempDir tmp;
  auto local = gen::balanced({440, 440, 440, 440, 440}, "train-", 77);
  CurvePlan plan;
  plan.base_model = "encoder";
  plan.bench_path = "bench.jsonl";
  plan.seed = 5;
  auto emitted = emit_curve_jobs(local, plan, tmp.path().string());
  o.require(emitted.jobs.size() == 22, std::to_string(emitted.jobs.size()) + " jobs");
  for (std::size_t k = 0; k < emitted.jobs.size(); ++k) {
    o.require(emitted.jobs[k].batches_used == static_cast<int>(k + 1), "batches_used sequence");
    o.require(fs::exists(tmp.path() / "jobs" / (emitted.jobs[k].job_id + ".json")), "job file");
  }

  // F1 crosses 0.70 first at job 16: errors per class shift to the next foundation.
  auto bench = gen::balanced({20, 20, 20, 20, 20}, "bench-");
  std::vector<std::string> files;
  for (const auto& job : emitted.jobs) {
    const int k = job.batches_used;
    const std::size_t errors = k < 16 ? static_cast<std::size_t>(14 - std::min(7, k / 2)) : 5;
    std::map<Label, std::size_t> seen;
    std::vector<Prediction> preds;
    for (const auto& d : bench.documents()) {
      Label l = seen[d.gold]++ < errors ? kFoundations[(index_of(d.gold) + 1) % 5] : d.gold;
      Prediction p;
      p.doc_id = d.id;
      p.labels = {l};
      std::map<Label, bool> bin;
      for (Label f : kFoundations) bin[f] = f == l;
      p.binary = bin;
      preds.push_back(p);
    }
    auto path = (tmp.path() / "predictions" / (job.job_id + ".jsonl")).string();
    write_predictions(path, preds);
    files.push_back(path);
  }
  auto ingest = ingest_curve(emitted.jobs, files, bench);
  std::optional<int> crossing;
  for (const auto& row : ingest.thresholds) {
    if (row.curve == "fused" && row.threshold == 0.70) crossing = row.batches;
  }
  o.require(crossing == 16, "crossing reported at " + (crossing ? std::to_string(*crossing) : "none"));
  if (o.pass) o.detail = "22 jobs emitted from 2200 records; 0.70 reached at 16 batches";
  return o;
}

// ---- determinism -------------------------------------------------------------------

Outcome determinism(const std::string& mfm) {
  Outcome o;
  TempDir tmp;
  const std::string fixtures = MFM_FIXTURE_DIR;
  std::vector<std::string> compared;
  for (const char* config : {"frameaxis.toml", "lexicon_zh.toml"}) {
    std::string bench = std::string(config) == std::string("frameaxis.toml") ? "/bench_en.csv" : "/bench_zh.jsonl";
    for (const char* run : {"a", "b"}) {
      const auto out = tmp / (std::string(config) + "." + run);
      if (!mfm.empty()) {
        const auto score = mfm + " -q score --config " + fixtures + "/" + config + " --seed 7 --out " + out + " > /dev/null";
        const auto eval = mfm + " -q evaluate --bench " + fixtures + bench + " --predictions " + out +
                          "/predictions.jsonl --out " + out + "/eval > /dev/null";
        o.require(std::system(score.c_str()) == 0, "score failed: " + score);
        o.require(std::system(eval.c_str()) == 0, "evaluate failed: " + eval);
      } else {
        auto c = load_config(fixtures + "/" + config);
        c.seed = 7;
        c.output_dir = out;
        auto r = mfm::run(c);
        evaluate_to_dir(load_dataset(c.bench_path), r.predictions, out + "/eval", {}, "evaluate");
      }
    }
    for (const char* f : {"predictions.jsonl", "report.csv", "report.md", "report_detail.csv", "eval/report.csv",
                          "eval/report.md", "eval/report_detail.csv"}) {
      const auto a = testing_support::slurp(tmp / (std::string(config) + ".a/" + f));
      const auto b = testing_support::slurp(tmp / (std::string(config) + ".b/" + f));
      o.require(!a.empty() && a == b, std::string(config) + " " + f + " differs");
      compared.push_back(f);
    }
  }
  if (o.pass) o.detail = std::to_string(compared.size()) + " files byte-identical across two runs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mfm = argc > 1 ? argv[1] : "";
  check("baseline_reproduction", baselines);
  check("metric_oracle", metric_oracle);
  check("lexicon_oracle", lexicon_oracle);
  check("frameaxis_properties", frameaxis_properties);
  check("frameaxis_null_calibration", frameaxis_null_calibration);
  check("parser_round_trips", parser_round_trips);
  check("llm_stub_endpoint", llm_stub);
  check("learning_curve", learning_curve);
  check("determinism", [&] { return determinism(mfm); });
  std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
