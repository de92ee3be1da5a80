#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mfm/corpus.hpp"
#include "mfm/eval.hpp"
#include "mfm/lexicon.hpp"
#include "mfm/llmclient.hpp"
#include "mfm/prediction.hpp"

namespace mfm {

// ---- configuration ---------------------------------------------------------

enum class Approach { lexicon_count, lexicon_prob, semantic_sim, frameaxis, llm_fewshot, exchange_ingest };

std::string_view to_string(Approach a) noexcept;
std::optional<Approach> parse_approach(std::string_view s) noexcept;

enum class BackgroundSource { bench, vocabulary };

struct RunConfig {
  Approach approach = Approach::lexicon_count;
  std::uint64_t seed = 0;
  std::string output_dir;
  EvalScope scope = EvalScope::covered_only;

  // [data]
  std::string bench_path;
  /// Language tag for tokenization; empty means each document's own tag.
  std::string language;

  // [lexicon]
  std::string lexicon_path;
  LexiconKind lexicon_kind = LexiconKind::count;

  // [tokenizer]
  std::string vocabulary_path;

  // [embedding]
  std::string vectors_path;
  std::string sentiment_path;
  BackgroundSource background = BackgroundSource::bench;
  double z_crit = 1.96;
  std::size_t bootstrap = 1000;
  unsigned threads = 1;

  // [llm]
  EndpointConfig endpoint;
  PromptLanguage prompt_language = PromptLanguage::english;
  std::string culture;
  std::string shots_path;

  // [exchange]
  std::string predictions_path;

  /// Canonical TOML before interpolation; secrets from the environment never enter it.
  std::string canonical;
};

/// sha256 of the canonical configuration and the effective seed.
std::string config_hash(const RunConfig& config);

/// Parses TOML. `${NAME}` in string values is replaced by the environment
/// variable NAME (missing variables are an error). Relative paths resolve
/// against the config file's directory.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::string_view toml_text, const std::string& base_dir = ".",
                       const std::string& source = "<config>");

/// Replaces `${NAME}` references; throws ValidationError naming an unset variable.
std::string interpolate_env(std::string_view text);

/// Checks approach-specific required fields and that referenced files exist.
void validate(const RunConfig& config);

/// Input files the run reads, in a fixed order.
std::vector<std::string> input_paths(const RunConfig& config);

// ---- runs ------------------------------------------------------------------

struct RunResult {
  std::vector<Prediction> predictions;
  EvalReport covered;
  EvalReport all;
  /// File name -> sha256 of everything written.
  std::map<std::string, std::string> outputs;
};

/// Scores the benchmark with the configured approach (no evaluation, no I/O
/// besides reading inputs).
std::vector<Prediction> score_benchmark(const RunConfig& config, const Dataset& bench);

/// Full pipeline: validate, lock the output directory, score, evaluate, write
/// predictions.jsonl, report.csv, report.md, report_detail.csv and
/// manifest.json through a staging directory renamed into place. On failure
/// the staged files move to <out>/quarantine/<n> and the error propagates.
RunResult run(const RunConfig& config);

/// Writes the evaluation files for existing predictions into `out_dir` with
/// the same staging and manifest rules as run().
RunResult evaluate_to_dir(const Dataset& bench, std::vector<Prediction> predictions, const std::string& out_dir,
                          const std::map<std::string, std::string>& inputs, const std::string& name);

/// Exclusive advisory lock on <dir>/.lock, released on destruction or process exit.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::string& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
  std::string path_;
};

// ---- fine-tuning learning curves --------------------------------------------

enum class FineTuneTask { binary_per_foundation, multiclass_lora };

std::string_view to_string(FineTuneTask t) noexcept;
std::optional<FineTuneTask> parse_task(std::string_view s) noexcept;

struct Hyperparameters {
  double learning_rate = 2e-5;
  int epochs = 3;
  int batch_size = 16;
  double weight_decay = 0.01;
  int warmup_steps = 100;
  int max_seq_length = 512;
  /// "none" or "4bit".
  std::string quantization = "none";
  /// 0 for full fine-tuning.
  int adapter_rank = 0;
  std::vector<std::string> adapter_targets;
  /// Negatives kept per positive when under-sampling binary tasks.
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// Defaults for the task (encoder binary classifiers or LoRA instruct model).
Hyperparameters default_hyperparameters(FineTuneTask task);

struct FineTuneJobSpec {
  std::string job_id;
  std::string base_model;
  FineTuneTask task = FineTuneTask::binary_per_foundation;
  /// Ordered: base files first, then augmentation files, then batches.
  std::vector<std::string> train_files;
  std::vector<std::string> augmentation_files;
  std::vector<std::string> batch_files;
  Hyperparameters hyperparameters;
  int batches_used = 0;
  std::string predict_on;
  std::string predictions_out;

  friend bool operator==(const FineTuneJobSpec&, const FineTuneJobSpec&) = default;
};

std::string to_json(const FineTuneJobSpec& spec);
/// Throws ValidationError when a field is missing or inconsistent.
FineTuneJobSpec job_from_json(std::string_view json, const std::string& source = "<job>");
void validate(const FineTuneJobSpec& spec);

struct CurvePlan {
  FineTuneTask task = FineTuneTask::binary_per_foundation;
  std::string base_model;
  std::vector<std::string> base_train_files;
  std::vector<std::string> augmentation_files;
  std::string bench_path;
  /// Upper bound on jobs; unset means every full batch available.
  std::optional<int> max_batches;
  std::uint64_t seed = 0;
  std::optional<Hyperparameters> hyperparameters;
};

/// Batch policy for the task: 100 per batch, or 50 with 10 per foundation.
std::size_t batch_size_for(FineTuneTask task) noexcept;
std::optional<std::size_t> quota_for(FineTuneTask task) noexcept;

struct EmittedJobs {
  std::vector<FineTuneJobSpec> jobs;
  std::vector<Dataset> batches;
  std::vector<std::string> warnings;
};

/// Cuts `local` into batches and builds one job per prefix length k = 1..n.
/// Paths in the specs are relative to `out_dir` (batches/..., predictions/...).
EmittedJobs plan_curve_jobs(const Dataset& local, const CurvePlan& plan);

/// plan_curve_jobs, then writes batches/batch_NNN.jsonl and jobs/<job_id>.json
/// under `out_dir`.
EmittedJobs emit_curve_jobs(const Dataset& local, const CurvePlan& plan, const std::string& out_dir);

std::string job_id_for(FineTuneTask task, int batches_used);

struct ThresholdRow {
  std::string curve;
  double threshold = 0.0;
  std::optional<int> batches;
};

struct CurveIngest {
  /// Multiclass: one curve. Binary: one per foundation, then "average" and "fused".
  std::vector<LearningCurve> curves;
  std::vector<ThresholdRow> thresholds;
};

inline constexpr double kDefaultThresholdValues[] = {0.70, 0.80};
inline constexpr std::span<const double> kDefaultThresholds{kDefaultThresholdValues};

/// Pairs prediction files with jobs by the records' job_id (else the file
/// stem). Duplicate job ids and files for unknown jobs are errors; jobs with
/// no file become gaps.
CurveIngest ingest_curve(std::span<const FineTuneJobSpec> jobs, std::span<const std::string> prediction_files,
                         const Dataset& bench, std::span<const double> thresholds = kDefaultThresholds);

/// Long-format CSV: curve, batches_used, accuracy, coverage, f1_weighted, f1_macro.
void write_curve_csv(std::ostream& out, const CurveIngest& ingest);
void write_threshold_markdown(std::ostream& out, const CurveIngest& ingest);

}  // namespace mfm
