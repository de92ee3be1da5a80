#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "mfm/digest.hpp"
#include "mfm/embed.hpp"
#include "mfm/error.hpp"
#include "mfm/experiments.hpp"
#include "mfm/frameaxis.hpp"
#include "mfm/report.hpp"
#include "mfm/segment.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace mfm {

DirectoryLock::DirectoryLock(const std::string& dir) : path_((fs::path(dir) / ".lock").string()) {
  fs::create_directories(dir);
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open lock " + path_ + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error("output directory " + dir + " is in use by another run");
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::unlink(path_.c_str());
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

namespace {

struct Tokenizer {
  std::optional<Vocabulary> vocabulary;
  std::string language;

  TokenSequence operator()(const Document& d) const {
    if (d.tokens) return from_tokens(*d.tokens);
    return tokenize(d.text, language.empty() ? d.language : language, vocabulary ? &*vocabulary : nullptr);
  }
};

Tokenizer make_tokenizer(const RunConfig& c) {
  Tokenizer t;
  t.language = c.language;
  if (!c.vocabulary_path.empty()) t.vocabulary = Vocabulary::from_file(c.vocabulary_path);
  return t;
}

std::vector<Prediction> score_with(const RunConfig& c, const Dataset& bench, const std::string& audit_path) {
  std::vector<Prediction> out;
  out.reserve(bench.size());
  switch (c.approach) {
    case Approach::lexicon_count:
    case Approach::lexicon_prob: {
      const auto tok = make_tokenizer(c);
      const auto lexicon = load_lexicon(c.lexicon_path, c.lexicon_kind);
      for (const auto& d : bench.documents()) {
        out.push_back(c.approach == Approach::lexicon_count ? score_count(tok(d), lexicon, d.id)
                                                            : score_prob(tok(d), lexicon, d.id));
      }
      break;
    }
    case Approach::semantic_sim: {
      const auto tok = make_tokenizer(c);
      const auto lexicon = load_lexicon(c.lexicon_path, LexiconKind::count);
      const auto store = load_vectors(c.vectors_path);
      const SemanticAnchors anchors(lexicon, store);
      for (const auto& d : bench.documents()) out.push_back(anchors.score(tok(d).tokens, d.id));
      break;
    }
    case Approach::frameaxis: {
      const auto tok = make_tokenizer(c);
      auto lexicon = load_lexicon(c.lexicon_path, LexiconKind::count);
      if (!c.sentiment_path.empty()) lexicon = assign_polarity(lexicon, load_sentiment_scores(c.sentiment_path));
      const auto store = load_vectors(c.vectors_path);
      std::vector<TokenSequence> tokens;
      for (const auto& d : bench.documents()) tokens.push_back(tok(d));
      std::vector<std::string> background;
      if (c.background == BackgroundSource::bench) {
        for (const auto& t : tokens) background.insert(background.end(), t.tokens.begin(), t.tokens.end());
      } else {
        for (std::size_t r = 0; r < store.size(); ++r) background.push_back(store.token(r));
      }
      FrameAxisParams params;
      params.z_crit = c.z_crit;
      params.bootstrap = c.bootstrap;
      params.seed = c.seed;
      params.threads = c.threads;
      const FrameAxisScorer scorer(store, build_microframes(lexicon, store), std::move(background), params,
                                   "frameaxis:" + lexicon.name());
      for (std::size_t i = 0; i < bench.size(); ++i) out.push_back(scorer.score(tokens[i].tokens, bench[i].id).second);
      break;
    }
    case Approach::llm_fewshot: {
      ClassifyOptions options;
      options.language = c.prompt_language;
      options.culture = c.culture;
      if (!c.shots_path.empty()) options.shots = load_shots(c.shots_path);
      for (const auto& d : bench.documents()) options.benchmark_ids.insert(d.id);
      options.audit_path = audit_path;
      options.seed = c.seed;
      auto transport = make_http_transport(c.endpoint.base_url, c.endpoint.auth_env, c.endpoint.timeout);
      out = classify_batch(bench.documents(), c.endpoint, options, *transport);
      break;
    }
    case Approach::exchange_ingest:
      out = read_predictions(c.predictions_path);
      break;
  }
  for (const auto& p : out) validate(p);
  return out;
}

std::string file_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out.flush()) throw Error("write failed: " + p.string());
}

void quarantine(const fs::path& out_dir, const fs::path& staging) {
  std::error_code ec;
  if (!fs::exists(staging, ec)) return;
  fs::create_directories(out_dir / "quarantine", ec);
  for (int n = 1;; ++n) {
    auto target = out_dir / "quarantine" / std::to_string(n);
    if (fs::exists(target, ec)) continue;
    fs::rename(staging, target, ec);
    if (ec) {
      spdlog::error("could not quarantine {}: {}", staging.string(), ec.message());
    } else {
      spdlog::error("partial outputs moved to {}", target.string());
    }
    return;
  }
}

using Producer = std::function<std::vector<Prediction>(const fs::path& staging)>;

RunResult staged_run(const Dataset& bench, const std::string& out_dir, const std::string& name,
                     const std::map<std::string, std::string>& inputs, const json& run_info, EvalScope scope,
                     const Producer& produce) {
  DirectoryLock lock(out_dir);
  const fs::path root(out_dir);
  const fs::path staging = root / ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    RunResult result;
    result.predictions = produce(staging);
    result.covered = evaluate(bench, result.predictions, EvalScope::covered_only);
    result.all = evaluate(bench, result.predictions, EvalScope::all);
    const auto& primary = scope == EvalScope::all ? result.all : result.covered;
    const auto& secondary = scope == EvalScope::all ? result.covered : result.all;

    write_predictions((staging / "predictions.jsonl").string(), result.predictions);
    std::ostringstream summary_csv, summary_md, detail;
    const std::vector<ReportRow> rows{{name, primary}, {name, secondary}};
    write_summary_csv(summary_csv, rows);
    write_summary_markdown(summary_md, rows);
    write_detail_csv(detail, primary);
    write_text(staging / "report.csv", summary_csv.str());
    write_text(staging / "report.md", summary_md.str());
    write_text(staging / "report_detail.csv", detail.str());

    std::vector<std::string> produced;
    for (const auto& entry : fs::directory_iterator(staging)) produced.push_back(entry.path().filename().string());
    std::sort(produced.begin(), produced.end());
    for (const auto& f : produced) result.outputs[f] = sha256_hex(file_text(staging / f));

    json manifest = run_info;
    json in = json::object();
    for (const auto& [path, digest] : inputs) in[path] = digest;
    manifest["inputs"] = std::move(in);
    json outs = json::object();
    for (const auto& [f, digest] : result.outputs) outs[f] = digest;
    manifest["outputs"] = std::move(outs);
    write_text(staging / "manifest.json", manifest.dump(2) + "\n");
    produced.push_back("manifest.json");
    result.outputs["manifest.json"] = sha256_hex(file_text(staging / "manifest.json"));

    for (const auto& f : produced) fs::rename(staging / f, root / f);
    fs::remove_all(staging);
    return result;
  } catch (...) {
    quarantine(root, staging);
    throw;
  }
}

std::map<std::string, std::string> digest_inputs(const std::vector<std::string>& paths) {
  std::map<std::string, std::string> out;
  for (const auto& p : paths) out[p] = sha256_file(p);
  return out;
}

}  // namespace

std::vector<Prediction> score_benchmark(const RunConfig& config, const Dataset& bench) {
  return score_with(config, bench, {});
}

RunResult run(const RunConfig& config) {
  validate(config);
  const auto bench = load_dataset(config.bench_path);
  const auto inputs = digest_inputs(input_paths(config));
  json info;
  info["tool"] = "mfm";
  info["approach"] = std::string(to_string(config.approach));
  info["seed"] = config.seed;
  info["scope"] = std::string(to_string(config.scope));
  info["config_hash"] = config_hash(config);
  spdlog::info("{} on {} ({} documents)", to_string(config.approach), bench.name(), bench.size());
  return staged_run(bench, config.output_dir, std::string(to_string(config.approach)), inputs, info, config.scope,
                    [&](const fs::path& staging) {
                      const auto audit = config.approach == Approach::llm_fewshot
                                             ? (staging / "audit.jsonl").string()
                                             : std::string{};
                      return score_with(config, bench, audit);
                    });
}

RunResult evaluate_to_dir(const Dataset& bench, std::vector<Prediction> predictions, const std::string& out_dir,
                          const std::map<std::string, std::string>& inputs, const std::string& name) {
  for (const auto& p : predictions) validate(p);
  json info;
  info["tool"] = "mfm";
  info["approach"] = name;
  info["scope"] = "covered_only";
  return staged_run(bench, out_dir, name, inputs, info, EvalScope::covered_only,
                    [&](const fs::path&) { return std::move(predictions); });
}

}  // namespace mfm
