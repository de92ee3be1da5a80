#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfm/corpus.hpp"
#include "mfm/digest.hpp"
#include "mfm/error.hpp"
#include "mfm/eval.hpp"
#include "mfm/experiments.hpp"
#include "mfm/llmclient.hpp"
#include "mfm/report.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kInvalid = 3, kAuth = 4 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
  bool quiet = false;
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw mfm::Error("cannot write " + p.string());
  return f;
}

std::vector<mfm::Label> parse_label_list(const std::string& text) {
  std::vector<mfm::Label> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (!item.empty()) out.push_back(mfm::parse_label_or_throw(item, "--filter"));
  }
  return out;
}

// ---- score -------------------------------------------------------------------

int cmd_score(const Globals& g) {
  if (g.config.empty()) throw mfm::ValidationError("score needs --config");
  auto config = mfm::load_config(g.config);
  if (g.seed) config.seed = *g.seed;
  if (!g.out.empty()) config.output_dir = g.out;
  auto result = mfm::run(config);
  const auto& primary = config.scope == mfm::EvalScope::all ? result.all : result.covered;
  mfm::write_summary_markdown(std::cout, {{std::string(mfm::to_string(config.approach)), primary}});
  spdlog::info("wrote {} files to {}", result.outputs.size(), config.output_dir);
  return kOk;
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string bench;
  std::string predictions;
  std::string scope = "covered_only";
  std::string name;
  bool binary = false;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
  const auto bench = mfm::load_dataset(a.bench);
  auto predictions = mfm::read_predictions(a.predictions);
  const auto name = a.name.empty() ? fs::path(a.predictions).stem().string() : a.name;
  const auto scope = mfm::parse_scope(a.scope);
  if (!scope) throw mfm::ValidationError("--scope must be covered_only or all");
  if (a.binary) {
    std::vector<mfm::BinaryReport> reports;
    for (auto f : mfm::kReportOrder) reports.push_back(mfm::evaluate_binary(bench, predictions, f));
    mfm::write_binary_markdown(std::cout, reports);
    if (!g.out.empty()) {
      auto f = open_out(fs::path(g.out) / "binary.csv");
      mfm::write_binary_csv(f, reports);
    }
    return kOk;
  }
  if (!g.out.empty()) {
    std::map<std::string, std::string> inputs{{a.bench, mfm::sha256_file(a.bench)},
                                              {a.predictions, mfm::sha256_file(a.predictions)}};
    auto result = mfm::evaluate_to_dir(bench, std::move(predictions), g.out, inputs, name);
    mfm::write_summary_markdown(std::cout, {{name, *scope == mfm::EvalScope::all ? result.all : result.covered}});
    return kOk;
  }
  for (const auto& p : predictions) mfm::validate(p);
  auto report = mfm::evaluate(bench, predictions, *scope);
  mfm::write_summary_markdown(std::cout, {{name, report}});
  return kOk;
}

// ---- baseline ----------------------------------------------------------------

struct BaselineArgs {
  std::vector<std::string> bench;
  std::vector<std::string> counts;
};

int cmd_baseline(const Globals& g, const BaselineArgs& a) {
  std::vector<mfm::ReportRow> rows;
  for (const auto& path : a.bench) {
    auto d = mfm::load_dataset(path);
    rows.push_back({d.name(), mfm::baseline_expected(mfm::ClassPrior::from_counts(d.class_counts()))});
  }
  // NAME=care,fairness,loyalty,authority,sanctity
  for (const auto& spec : a.counts) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw mfm::ValidationError("--counts expects NAME=care,fairness,loyalty,authority,sanctity");
    std::array<std::size_t, mfm::kFoundationCount> c{};
    std::stringstream s(spec.substr(eq + 1));
    std::string item;
    std::size_t i = 0;
    while (std::getline(s, item, ',')) {
      if (i == c.size()) throw mfm::ValidationError("--counts takes five values");
      c[i++] = std::stoul(item);
    }
    if (i != c.size()) throw mfm::ValidationError("--counts takes five values");
    rows.push_back({spec.substr(0, eq), mfm::baseline_expected(mfm::ClassPrior::from_counts(c))});
  }
  if (rows.empty()) throw mfm::ValidationError("baseline needs --bench or --counts");
  mfm::write_summary_markdown(std::cout, rows);
  if (!g.out.empty()) {
    auto csv = open_out(fs::path(g.out) / "baseline.csv");
    mfm::write_summary_csv(csv, rows);
    auto md = open_out(fs::path(g.out) / "baseline.md");
    mfm::write_summary_markdown(md, rows);
  }
  return kOk;
}

// ---- curve -------------------------------------------------------------------

struct EmitArgs {
  std::string train;
  std::string task = "binary_per_foundation";
  std::string base_model;
  std::vector<std::string> base_files;
  std::vector<std::string> augment;
  std::string bench;
  std::optional<int> max_batches;
};

int cmd_emit(const Globals& g, const EmitArgs& a) {
  if (g.out.empty()) throw mfm::ValidationError("curve emit-jobs needs --out");
  auto task = mfm::parse_task(a.task);
  if (!task) throw mfm::ValidationError("--task must be binary_per_foundation or multiclass_lora");
  mfm::CurvePlan plan;
  plan.task = *task;
  plan.base_model = a.base_model;
  plan.base_train_files = a.base_files;
  plan.augmentation_files = a.augment;
  plan.bench_path = a.bench;
  plan.max_batches = a.max_batches;
  plan.seed = g.seed.value_or(0);
  auto emitted = mfm::emit_curve_jobs(mfm::load_dataset(a.train), plan, g.out);
  std::cout << emitted.jobs.size() << " jobs written to " << (fs::path(g.out) / "jobs").string() << '\n';
  for (const auto& w : emitted.warnings) std::cout << "warning: " << w << '\n';
  return kOk;
}

struct IngestArgs {
  std::string jobs_dir;
  std::vector<std::string> predictions;
  std::string predictions_dir;
  std::string bench;
};

std::vector<std::string> files_in(const std::string& dir, std::string_view ext) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_ingest(const Globals& g, const IngestArgs& a) {
  std::vector<mfm::FineTuneJobSpec> jobs;
  for (const auto& path : files_in(a.jobs_dir, ".json")) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    jobs.push_back(mfm::job_from_json(s.str(), path));
  }
  auto files = a.predictions;
  if (!a.predictions_dir.empty()) {
    auto more = files_in(a.predictions_dir, ".jsonl");
    files.insert(files.end(), more.begin(), more.end());
  }
  auto ingest = mfm::ingest_curve(jobs, files, mfm::load_dataset(a.bench));
  mfm::write_threshold_markdown(std::cout, ingest);
  if (!g.out.empty()) {
    auto csv = open_out(fs::path(g.out) / "curve.csv");
    mfm::write_curve_csv(csv, ingest);
    auto md = open_out(fs::path(g.out) / "thresholds.md");
    mfm::write_threshold_markdown(md, ingest);
  }
  return kOk;
}

// ---- sample-mislabeled -------------------------------------------------------

struct SampleArgs {
  std::string bench;
  std::string predictions;
  std::size_t n = 100;
  std::string filter;
};

int cmd_sample(const Globals& g, const SampleArgs& a) {
  const auto bench = mfm::load_dataset(a.bench);
  const auto predictions = mfm::read_predictions(a.predictions);
  std::optional<mfm::LabelSet> filter;
  if (!a.filter.empty()) {
    filter.emplace();
    for (auto l : parse_label_list(a.filter)) filter->insert(l);
  }
  auto sample = mfm::sample_mislabeled(bench, predictions, a.n, filter, g.seed.value_or(0));
  std::ostringstream out;
  for (const auto& r : sample.records) {
    nlohmann::ordered_json j;
    j["id"] = r.document.id;
    j["text"] = r.document.text;
    j["gold"] = std::string(mfm::to_string(r.document.gold));
    j["predicted"] = mfm::to_string(r.prediction.labels);
    if (r.prediction.rationale) j["rationale"] = *r.prediction.rationale;
    if (r.prediction.raw_response) j["raw"] = *r.prediction.raw_response;
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  if (g.out.empty()) {
    std::cout << out.str();
  } else {
    auto f = open_out(g.out);
    f << out.str();
  }
  if (sample.warning) std::cerr << "warning: " << *sample.warning << '\n';
  return kOk;
}

// ---- translate ---------------------------------------------------------------

struct TranslateArgs {
  std::string input;
  std::string source = "en";
  std::string target = "zh";
  std::string base_url;
  std::string auth_env;
  std::string cache;
  std::size_t chunk = 32;
};

int cmd_translate(const Globals& g, const TranslateArgs& a) {
  if (g.out.empty()) throw mfm::ValidationError("translate needs --out");
  const auto input = mfm::load_dataset(a.input);
  mfm::TranslateConfig config;
  config.base_url = a.base_url;
  config.auth_env = a.auth_env;
  config.chunk_size = a.chunk;
  auto transport = mfm::make_http_transport(config.base_url, config.auth_env, config.timeout);
  std::optional<mfm::TranslationCache> cache;
  if (!a.cache.empty()) cache.emplace(a.cache);
  std::vector<std::string> texts;
  for (const auto& d : input.documents()) texts.push_back(d.text);
  auto translated = mfm::translate_batch(texts, a.source, a.target, config, *transport, cache ? &*cache : nullptr);
  std::vector<mfm::Document> docs;
  std::size_t missing = 0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!translated[i]) {
      ++missing;
      continue;
    }
    auto d = input[i];
    d.text = *translated[i];
    d.language = a.target;
    d.tokens.reset();
    docs.push_back(std::move(d));
  }
  mfm::Dataset out(input.name() + "-" + a.target, std::move(docs));
  mfm::save_dataset(out, g.out, mfm::format_from_path(g.out));
  std::cout << out.size() << " of " << input.size() << " documents translated\n";
  if (missing) spdlog::warn("{} documents could not be translated and were left out", missing);
  return missing ? kFailure : kOk;
}

// ---- split -------------------------------------------------------------------

struct SplitArgs {
  std::string input;
  double fraction = 0.2;
};

int cmd_split(const Globals& g, const SplitArgs& a) {
  if (g.out.empty()) throw mfm::ValidationError("split needs --out");
  const auto d = mfm::load_dataset(a.input);
  const auto format = mfm::format_from_path(a.input);
  const auto ext = fs::path(a.input).extension().string();
  auto split = mfm::stratified_split(d, a.fraction, g.seed.value_or(0));
  fs::create_directories(g.out);
  for (const auto* part : {&split.train, &split.bench}) {
    auto path = fs::path(g.out) / (part->name() + ext);
    mfm::save_dataset(*part, path.string(), format);
    std::cout << path.string() << ": " << part->size() << " documents\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moral foundation measurement toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "TOML run configuration");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory or file");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Only log errors");

  std::function<int()> action;

  auto* score = app.add_subcommand("score", "Run the configured approach on a benchmark and evaluate it");
  score->callback([&] { action = [&] { return cmd_score(g); }; });

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a predictions file against a benchmark");
  evaluate->add_option("--bench", ev.bench, "Benchmark dataset")->required();
  evaluate->add_option("--predictions", ev.predictions, "Predictions JSONL")->required();
  evaluate->add_option("--scope", ev.scope, "covered_only or all");
  evaluate->add_option("--name", ev.name, "Row name in the report");
  evaluate->add_flag("--binary", ev.binary, "Per-foundation binary table");
  evaluate->callback([&] { action = [&] { return cmd_evaluate(g, ev); }; });

  BaselineArgs bl;
  auto* baseline = app.add_subcommand("baseline", "Expected metrics of label-proportional random guessing");
  baseline->add_option("--bench", bl.bench, "Benchmark datasets");
  baseline->add_option("--counts", bl.counts, "NAME=care,fairness,loyalty,authority,sanctity");
  baseline->callback([&] { action = [&] { return cmd_baseline(g, bl); }; });

  auto* curve = app.add_subcommand("curve", "Learning-curve job specs and ingestion");
  curve->require_subcommand(1);
  curve->fallthrough();
  EmitArgs em;
  auto* emit = curve->add_subcommand("emit-jobs", "Write batches and fine-tune job specs");
  emit->add_option("--train", em.train, "Local training dataset")->required();
  emit->add_option("--task", em.task, "binary_per_foundation or multiclass_lora");
  emit->add_option("--base-model", em.base_model, "Base model name")->required();
  emit->add_option("--base-file", em.base_files, "Base training file (repeatable, in order)");
  emit->add_option("--augment", em.augment, "Augmentation file (repeatable, in order)");
  emit->add_option("--bench", em.bench, "Benchmark the trainer predicts on")->required();
  emit->add_option("--max-batches", em.max_batches, "Upper bound on jobs");
  emit->callback([&] { action = [&] { return cmd_emit(g, em); }; });
  IngestArgs in;
  auto* ingest = curve->add_subcommand("ingest", "Build learning curves from trainer predictions");
  ingest->add_option("--jobs", in.jobs_dir, "Directory of job spec JSON files")->required();
  ingest->add_option("--predictions", in.predictions, "Prediction files");
  ingest->add_option("--predictions-dir", in.predictions_dir, "Directory of prediction files");
  ingest->add_option("--bench", in.bench, "Benchmark dataset")->required();
  ingest->callback([&] { action = [&] { return cmd_ingest(g, in); }; });

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample-mislabeled", "Random sample of documents the predictions miss");
  sample->add_option("--bench", sa.bench, "Benchmark dataset")->required();
  sample->add_option("--predictions", sa.predictions, "Predictions JSONL")->required();
  sample->add_option("-n,--count", sa.n, "Sample size");
  sample->add_option("--filter", sa.filter, "Comma-separated gold labels to keep");
  sample->callback([&] { action = [&] { return cmd_sample(g, sa); }; });

  TranslateArgs tr;
  auto* translate = app.add_subcommand("translate", "Machine-translate a dataset");
  translate->add_option("--input", tr.input, "Dataset to translate")->required();
  translate->add_option("--source", tr.source, "Source language");
  translate->add_option("--target", tr.target, "Target language");
  translate->add_option("--base-url", tr.base_url, "Translation endpoint")->required();
  translate->add_option("--auth-env", tr.auth_env, "Environment variable with the API token");
  translate->add_option("--cache", tr.cache, "Translation cache JSONL");
  translate->add_option("--chunk", tr.chunk, "Texts per request");
  translate->callback([&] { action = [&] { return cmd_translate(g, tr); }; });

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "Stratified train/benchmark split");
  split->add_option("--input", sp.input, "Dataset")->required();
  split->add_option("--fraction", sp.fraction, "Benchmark fraction");
  split->callback([&] { action = [&] { return cmd_split(g, sp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  auto logger = spdlog::stderr_color_mt("mfm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");
  spdlog::set_level(g.quiet ? spdlog::level::err : g.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    return action();
  } catch (const mfm::AuthError& e) {
    spdlog::error("{}", e.what());
    return kAuth;
  } catch (const mfm::ParseError& e) {
    spdlog::error("{}", e.what());
    return kInvalid;
  } catch (const mfm::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}
