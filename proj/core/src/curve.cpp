#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "mfm/csv.hpp"
#include "mfm/error.hpp"
#include "mfm/experiments.hpp"
#include "mfm/report.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace mfm {

std::string_view to_string(FineTuneTask t) noexcept {
  return t == FineTuneTask::multiclass_lora ? "multiclass_lora" : "binary_per_foundation";
}

std::optional<FineTuneTask> parse_task(std::string_view s) noexcept {
  if (s == "binary_per_foundation" || s == "binary") return FineTuneTask::binary_per_foundation;
  if (s == "multiclass_lora" || s == "lora") return FineTuneTask::multiclass_lora;
  return std::nullopt;
}

Hyperparameters default_hyperparameters(FineTuneTask task) {
  Hyperparameters h;
  if (task == FineTuneTask::multiclass_lora) {
    h.batch_size = 128;
    h.warmup_steps = 0;
    h.max_seq_length = 1024;
    h.quantization = "4bit";
    h.adapter_rank = 16;
    h.adapter_targets = {"q_proj", "k_proj", "v_proj", "o_proj", "gate_proj", "up_proj", "down_proj"};
    h.seed = 3047;
  }
  return h;
}

std::size_t batch_size_for(FineTuneTask task) noexcept { return task == FineTuneTask::multiclass_lora ? 50 : 100; }

std::optional<std::size_t> quota_for(FineTuneTask task) noexcept {
  if (task == FineTuneTask::multiclass_lora) return 10;
  return std::nullopt;
}

std::string job_id_for(FineTuneTask task, int batches_used) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-b%03d", task == FineTuneTask::multiclass_lora ? "lora" : "binary", batches_used);
  return buf;
}

namespace {

std::string batch_file(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "batches/batch_%03d.jsonl", k);
  return buf;
}

json hyper_json(const Hyperparameters& h) {
  json j;
  j["learning_rate"] = h.learning_rate;
  j["epochs"] = h.epochs;
  j["batch_size"] = h.batch_size;
  j["weight_decay"] = h.weight_decay;
  j["warmup_steps"] = h.warmup_steps;
  j["max_seq_length"] = h.max_seq_length;
  j["quantization"] = h.quantization;
  j["adapter_rank"] = h.adapter_rank;
  j["adapter_targets"] = h.adapter_targets;
  j["negative_ratio"] = h.negative_ratio;
  j["seed"] = h.seed;
  return j;
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace

void validate(const FineTuneJobSpec& s) {
  const std::string where = "job " + (s.job_id.empty() ? std::string("<unnamed>") : s.job_id);
  auto fail = [&](const std::string& what) { throw ValidationError(where + ": " + what); };
  if (s.job_id.empty()) fail("job_id is empty");
  if (s.base_model.empty()) fail("base_model is empty");
  if (s.predict_on.empty()) fail("predict_on is empty");
  if (s.batches_used < 0 || static_cast<std::size_t>(s.batches_used) != s.batch_files.size()) {
    fail("batches_used does not match the number of batch files");
  }
  if (s.train_files.size() < s.batch_files.size() ||
      !std::equal(s.batch_files.begin(), s.batch_files.end(), s.train_files.end() - s.batch_files.size())) {
    fail("train_files must end with the batch files");
  }
  const auto& h = s.hyperparameters;
  if (!(h.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (h.epochs <= 0) fail("epochs must be positive");
  if (h.batch_size <= 0) fail("batch_size must be positive");
  if (h.weight_decay < 0.0) fail("weight_decay must not be negative");
  if (h.warmup_steps < 0) fail("warmup_steps must not be negative");
  if (h.max_seq_length <= 0) fail("max_seq_length must be positive");
  if (h.quantization != "none" && h.quantization != "4bit") fail("quantization must be none or 4bit");
  if (s.task == FineTuneTask::multiclass_lora) {
    if (h.adapter_rank <= 0) fail("adapter_rank must be positive for multiclass_lora");
    if (h.adapter_targets.empty()) fail("adapter_targets must not be empty for multiclass_lora");
  } else if (!(h.negative_ratio > 0.0)) {
    fail("negative_ratio must be positive");
  }
}

std::string to_json(const FineTuneJobSpec& s) {
  json j;
  j["job_id"] = s.job_id;
  j["base_model"] = s.base_model;
  j["task"] = std::string(to_string(s.task));
  j["batches_used"] = s.batches_used;
  j["train_files"] = s.train_files;
  j["augmentation_files"] = s.augmentation_files;
  j["batch_files"] = s.batch_files;
  j["hyperparameters"] = hyper_json(s.hyperparameters);
  j["predict_on"] = s.predict_on;
  j["predictions_out"] = s.predictions_out;
  return j.dump(2) + "\n";
}

FineTuneJobSpec job_from_json(std::string_view text, const std::string& source) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError(source + ": not a JSON object");
  FineTuneJobSpec s;
  s.job_id = field<std::string>(j, "job_id", source);
  s.base_model = field<std::string>(j, "base_model", source);
  auto task = parse_task(field<std::string>(j, "task", source));
  if (!task) throw ValidationError(source + ": unknown task");
  s.task = *task;
  s.batches_used = field<int>(j, "batches_used", source);
  s.train_files = field<std::vector<std::string>>(j, "train_files", source);
  s.augmentation_files = field<std::vector<std::string>>(j, "augmentation_files", source);
  s.batch_files = field<std::vector<std::string>>(j, "batch_files", source);
  s.predict_on = field<std::string>(j, "predict_on", source);
  s.predictions_out = field<std::string>(j, "predictions_out", source);
  const auto h = field<json>(j, "hyperparameters", source);
  const auto hw = source + " hyperparameters";
  auto& hp = s.hyperparameters;
  hp.learning_rate = field<double>(h, "learning_rate", hw);
  hp.epochs = field<int>(h, "epochs", hw);
  hp.batch_size = field<int>(h, "batch_size", hw);
  hp.weight_decay = field<double>(h, "weight_decay", hw);
  hp.warmup_steps = field<int>(h, "warmup_steps", hw);
  hp.max_seq_length = field<int>(h, "max_seq_length", hw);
  hp.quantization = field<std::string>(h, "quantization", hw);
  hp.adapter_rank = field<int>(h, "adapter_rank", hw);
  hp.adapter_targets = field<std::vector<std::string>>(h, "adapter_targets", hw);
  hp.negative_ratio = field<double>(h, "negative_ratio", hw);
  hp.seed = field<std::uint64_t>(h, "seed", hw);
  validate(s);
  return s;
}

EmittedJobs plan_curve_jobs(const Dataset& local, const CurvePlan& plan) {
  if (plan.base_model.empty()) throw ValidationError("curve plan needs a base model");
  if (plan.bench_path.empty()) throw ValidationError("curve plan needs a benchmark path");
  if (plan.max_batches && *plan.max_batches <= 0) throw ValidationError("max_batches must be positive");

  EmittedJobs out;
  const auto size = batch_size_for(plan.task);
  const auto quota = quota_for(plan.task);
  out.batches = make_batches(local, size, quota, plan.seed);
  const auto available = static_cast<int>(out.batches.size());

  if (quota) {
    for (Label f : kFoundations) {
      const auto limit = local.class_counts()[f] / *quota;
      if (static_cast<int>(limit) == available && (!plan.max_batches || available < *plan.max_batches)) {
        out.warnings.push_back(std::string(to_string(f)) + " has " + std::to_string(local.class_counts()[f]) +
                               " records, enough for " + std::to_string(limit) + " batches");
      }
    }
  }
  if (plan.max_batches && available < *plan.max_batches) {
    out.warnings.push_back("requested " + std::to_string(*plan.max_batches) + " batches but only " +
                           std::to_string(available) + " full batches of " + std::to_string(size) + " are available");
  }
  const auto leftover = local.size() - static_cast<std::size_t>(available) * size;
  if (leftover > 0 && !quota) {
    out.warnings.push_back(std::to_string(leftover) + " records do not fill a batch and are unused");
  }
  for (const auto& w : out.warnings) spdlog::warn("curve: {}", w);

  const int n = plan.max_batches ? std::min(*plan.max_batches, available) : available;
  out.batches.resize(static_cast<std::size_t>(n));
  auto hyper = plan.hyperparameters.value_or(default_hyperparameters(plan.task));
  if (!plan.hyperparameters && plan.task == FineTuneTask::binary_per_foundation) hyper.seed = plan.seed;

  for (int k = 1; k <= n; ++k) {
    FineTuneJobSpec s;
    s.job_id = job_id_for(plan.task, k);
    s.base_model = plan.base_model;
    s.task = plan.task;
    s.train_files = plan.base_train_files;
    s.augmentation_files = plan.augmentation_files;
    s.train_files.insert(s.train_files.end(), plan.augmentation_files.begin(), plan.augmentation_files.end());
    for (int b = 1; b <= k; ++b) s.batch_files.push_back(batch_file(b));
    s.train_files.insert(s.train_files.end(), s.batch_files.begin(), s.batch_files.end());
    s.hyperparameters = hyper;
    s.batches_used = k;
    s.predict_on = plan.bench_path;
    s.predictions_out = "predictions/" + s.job_id + ".jsonl";
    validate(s);
    out.jobs.push_back(std::move(s));
  }
  return out;
}

EmittedJobs emit_curve_jobs(const Dataset& local, const CurvePlan& plan, const std::string& out_dir) {
  auto emitted = plan_curve_jobs(local, plan);
  const fs::path root(out_dir);
  fs::create_directories(root / "batches");
  fs::create_directories(root / "jobs");
  fs::create_directories(root / "predictions");
  for (std::size_t k = 0; k < emitted.batches.size(); ++k) {
    save_dataset(emitted.batches[k], (root / batch_file(static_cast<int>(k + 1))).string(), DatasetFormat::jsonl);
  }
  for (const auto& job : emitted.jobs) {
    std::ofstream f(root / "jobs" / (job.job_id + ".json"), std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write job spec " + job.job_id);
    f << to_json(job);
  }
  return emitted;
}

CurveIngest ingest_curve(std::span<const FineTuneJobSpec> jobs, std::span<const std::string> prediction_files,
                         const Dataset& bench, std::span<const double> thresholds) {
  if (jobs.empty()) throw ValidationError("ingest_curve: no jobs");
  const auto task = jobs.front().task;
  std::map<std::string, const FineTuneJobSpec*> by_id;
  for (const auto& j : jobs) {
    if (j.task != task) throw ValidationError("ingest_curve: jobs mix tasks");
    if (!by_id.emplace(j.job_id, &j).second) throw ValidationError("ingest_curve: duplicate job " + j.job_id);
  }

  std::map<int, std::vector<Prediction>> by_batches;
  std::set<std::string> seen;
  for (const auto& path : prediction_files) {
    auto preds = read_predictions(path);
    std::string id = fs::path(path).stem().string();
    if (!preds.empty() && preds.front().job_id) id = *preds.front().job_id;
    for (const auto& p : preds) {
      if (p.job_id && *p.job_id != id) throw ValidationError(path + ": records carry different job ids");
    }
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError(path + ": no job spec for job id " + id);
    if (!seen.insert(id).second) throw ValidationError("duplicate predictions for job " + id);
    by_batches[it->second->batches_used] = std::move(preds);
  }

  std::vector<int> levels;
  for (const auto& j : jobs) levels.push_back(j.batches_used);
  std::sort(levels.begin(), levels.end());

  CurveIngest out;
  if (task == FineTuneTask::multiclass_lora) {
    out.curves.push_back({"multiclass", std::nullopt, {}, {}});
  } else {
    for (Label f : kReportOrder) out.curves.push_back({std::string(to_string(f)), f, {}, {}});
    out.curves.push_back({"average", std::nullopt, {}, {}});
    out.curves.push_back({"fused", std::nullopt, {}, {}});
  }

  for (int k : levels) {
    auto it = by_batches.find(k);
    if (it == by_batches.end()) {
      for (auto& c : out.curves) c.gaps.push_back(k);
      spdlog::warn("ingest_curve: no predictions for {} batches", k);
      continue;
    }
    const auto& preds = it->second;
    if (task == FineTuneTask::multiclass_lora) {
      out.curves[0].points.push_back(to_point(k, evaluate(bench, preds)));
      continue;
    }
    CurvePoint avg{k, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < kFoundationCount; ++i) {
      auto point = to_point(k, evaluate_binary(bench, preds, kReportOrder[i]));
      avg.accuracy += point.accuracy / kFoundationCount;
      avg.coverage += point.coverage / kFoundationCount;
      avg.f1_weighted += point.f1_weighted / kFoundationCount;
      avg.f1_macro += point.f1_macro / kFoundationCount;
      out.curves[i].points.push_back(point);
    }
    out.curves[kFoundationCount].points.push_back(avg);
    out.curves[kFoundationCount + 1].points.push_back(to_point(k, evaluate(bench, preds)));
  }

  for (const auto& c : out.curves) {
    for (double t : thresholds) {
      ThresholdRow row{c.name, t, std::nullopt};
      if (!c.points.empty()) row.batches = batches_to_threshold(c, t);
      out.thresholds.push_back(std::move(row));
    }
  }
  return out;
}

void write_curve_csv(std::ostream& out, const CurveIngest& ingest) {
  csv::write_row(out, {"curve", "batches_used", "accuracy", "coverage", "f1_weighted", "f1_macro"});
  for (const auto& c : ingest.curves) {
    for (const auto& p : c.points) {
      csv::write_row(out, {c.name, std::to_string(p.batches_used), format_fixed(p.accuracy, 6),
                           format_fixed(p.coverage, 6), format_fixed(p.f1_weighted, 6), format_fixed(p.f1_macro, 6)});
    }
    for (int g : c.gaps) csv::write_row(out, {c.name, std::to_string(g), "", "", "", ""});
  }
}

void write_threshold_markdown(std::ostream& out, const CurveIngest& ingest) {
  out << "| Curve | Threshold | Batches |\n| --- | ---: | ---: |\n";
  for (const auto& row : ingest.thresholds) {
    out << "| " << row.curve << " | " << format_fixed(row.threshold, 2) << " | "
        << (row.batches ? std::to_string(*row.batches) : std::string("not reached")) << " |\n";
  }
}

}  // namespace mfm
