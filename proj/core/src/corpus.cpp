#include "mfm/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mfm/csv.hpp"
#include "mfm/error.hpp"
#include "mfm/random.hpp"

namespace mfm {

using json = nlohmann::ordered_json;

std::size_t ClassCounts::total() const noexcept {
  std::size_t t = 0;
  for (auto n : n_) t += n;
  return t;
}

std::vector<Label> ClassCounts::present() const {
  std::vector<Label> out;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (n_[i] > 0) out.push_back(static_cast<Label>(i));
  }
  return out;
}

ClassCounts histogram(std::span<const Document> docs) {
  ClassCounts c;
  for (const auto& d : docs) ++c[d.gold];
  return c;
}

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos; }

}  // namespace

Dataset::Dataset(std::string name, std::vector<Document> documents)
    : name_(std::move(name)), docs_(std::move(documents)) {
  index_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& d = docs_[i];
    if (d.id.empty()) throw ValidationError(name_ + ": record " + std::to_string(i + 1) + " has an empty id");
    if (blank(d.text)) throw ValidationError(name_ + ": document " + d.id + " has empty text");
    if (d.gold == Label::none || d.gold == Label::unknown) {
      throw ValidationError(name_ + ": document " + d.id + " has prediction-only gold label " +
                            std::string(to_string(d.gold)));
    }
    if (!index_.emplace(d.id, i).second) {
      throw ValidationError(name_ + ": duplicate id " + d.id);
    }
    ++counts_[d.gold];
  }
}

const Document* Dataset::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &docs_[it->second];
}

bool Dataset::is_benchmark() const noexcept { return counts_[Label::nonmoral] == 0; }

DatasetFormat format_from_path(std::string_view path) {
  auto ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") return DatasetFormat::csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return DatasetFormat::jsonl;
  throw ValidationError("cannot infer dataset format from extension of " + std::string(path));
}

namespace {

std::vector<Document> read_csv_documents(const std::string& path, const LoadOptions& options) {
  auto records = csv::parse(csv::read_file(path), path);
  if (records.empty()) throw ParseError(path, 1, "missing header row");
  const auto& header = records.front().fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  auto id_col = column("id");
  auto text_col = column("text");
  auto label_col = column("label");
  if (!id_col || !text_col || !label_col) {
    throw ParseError(path, 1, "header must contain id, text and label columns");
  }
  auto lang_col = column("language");
  auto source_col = column("source");

  std::vector<Document> docs;
  docs.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    if (rec.fields.size() != header.size()) {
      throw ParseError(path, rec.line,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(rec.fields.size()));
    }
    Document d;
    d.id = rec.fields[*id_col];
    d.text = rec.fields[*text_col];
    d.gold = parse_label_or_throw(rec.fields[*label_col], path + ": record " + d.id);
    d.language = lang_col && !rec.fields[*lang_col].empty() ? rec.fields[*lang_col] : options.default_language;
    if (source_col) d.source = rec.fields[*source_col];
    docs.push_back(std::move(d));
  }
  return docs;
}

std::string json_id(const json& value, const std::string& path, std::size_t line) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ParseError(path, line, "id must be a string or integer");
}

std::vector<Document> read_jsonl_documents(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, lineno, e.what());
    }
    if (!obj.is_object()) throw ParseError(path, lineno, "expected a JSON object");
    for (const char* key : {"id", "text", "label"}) {
      if (!obj.contains(key)) throw ParseError(path, lineno, std::string("missing field ") + key);
    }
    Document d;
    d.id = json_id(obj["id"], path, lineno);
    if (!obj["text"].is_string() || !obj["label"].is_string()) {
      throw ParseError(path, lineno, "text and label must be strings");
    }
    d.text = obj["text"].get<std::string>();
    d.gold = parse_label_or_throw(obj["label"].get<std::string>(), path + ": record " + d.id);
    d.language = obj.contains("language") ? obj["language"].get<std::string>() : options.default_language;
    if (obj.contains("source")) d.source = obj["source"].get<std::string>();
    if (obj.contains("tokens")) {
      if (!obj["tokens"].is_array()) throw ParseError(path, lineno, "tokens must be an array of strings");
      std::vector<std::string> tokens;
      for (const auto& t : obj["tokens"]) {
        if (!t.is_string()) throw ParseError(path, lineno, "tokens must be an array of strings");
        tokens.push_back(t.get<std::string>());
      }
      d.tokens = std::move(tokens);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetFormat format, const LoadOptions& options) {
  auto docs = format == DatasetFormat::csv ? read_csv_documents(path, options)
                                           : read_jsonl_documents(path, options);
  std::string name = options.name.value_or(std::filesystem::path(path).stem().string());
  for (auto& d : docs) {
    if (d.source.empty()) d.source = name;
  }
  return Dataset(std::move(name), std::move(docs));
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  return load_dataset(path, format_from_path(path), options);
}

void save_dataset(const Dataset& dataset, const std::string& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  if (format == DatasetFormat::csv) {
    csv::write_row(out, {"id", "text", "label", "language", "source"});
    for (const auto& d : dataset.documents()) {
      csv::write_row(out, {d.id, d.text, std::string(to_string(d.gold)), d.language, d.source});
    }
  } else {
    for (const auto& d : dataset.documents()) {
      json obj;
      obj["id"] = d.id;
      obj["text"] = d.text;
      obj["label"] = std::string(to_string(d.gold));
      obj["language"] = d.language;
      obj["source"] = d.source;
      if (d.tokens) obj["tokens"] = *d.tokens;
      out << obj.dump() << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path);
}

namespace {

// Indices of each gold class, in input order.
std::array<std::vector<std::size_t>, kLabelCount> indices_by_class(const Dataset& d) {
  std::array<std::vector<std::size_t>, kLabelCount> by_class;
  for (std::size_t i = 0; i < d.size(); ++i) by_class[index_of(d[i].gold)].push_back(i);
  return by_class;
}

Dataset subset(const Dataset& d, std::string name, std::vector<std::size_t> indices, bool keep_order) {
  if (keep_order) std::sort(indices.begin(), indices.end());
  std::vector<Document> docs;
  docs.reserve(indices.size());
  for (auto i : indices) docs.push_back(d[i]);
  return Dataset(std::move(name), std::move(docs));
}

}  // namespace

Split stratified_split(const Dataset& d, double bench_fraction, std::uint64_t seed) {
  if (!(bench_fraction >= 0.0 && bench_fraction <= 1.0)) {
    throw ValidationError("stratified_split: fraction must lie in [0, 1]");
  }
  auto by_class = indices_by_class(d);
  std::vector<std::size_t> bench_idx;
  std::vector<std::size_t> train_idx;
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    auto rng = Rng::derive(seed, to_string(static_cast<Label>(c)));
    rng.shuffle(std::span(idx));
    // Small epsilon so products like 0.29 * 100 floor to 29, not 28.
    auto take = static_cast<std::size_t>(bench_fraction * static_cast<double>(idx.size()) + 1e-9);
    take = std::min(take, idx.size());
    bench_idx.insert(bench_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  return {subset(d, d.name() + "-train", std::move(train_idx), true),
          subset(d, d.name() + "-bench", std::move(bench_idx), true)};
}

std::vector<Dataset> make_batches(const Dataset& d, std::size_t batch_size,
                                  std::optional<std::size_t> per_class_quota, std::uint64_t seed) {
  if (batch_size == 0) throw ValidationError("make_batches: batch_size must be positive");
  std::vector<Dataset> batches;
  auto batch_name = [&](std::size_t k) {
    std::ostringstream os;
    os << d.name() << "-batch-" << (k + 1);
    return os.str();
  };

  if (!per_class_quota) {
    std::vector<std::size_t> order(d.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto rng = Rng::derive(seed, "batches");
    rng.shuffle(std::span(order));
    for (std::size_t k = 0; (k + 1) * batch_size <= order.size(); ++k) {
      std::vector<std::size_t> slice(order.begin() + static_cast<std::ptrdiff_t>(k * batch_size),
                                     order.begin() + static_cast<std::ptrdiff_t>((k + 1) * batch_size));
      batches.push_back(subset(d, batch_name(k), std::move(slice), false));
    }
    return batches;
  }

  const std::size_t quota = *per_class_quota;
  if (quota == 0) throw ValidationError("make_batches: per_class_quota must be positive");
  if (batch_size != kFoundationCount * quota) {
    throw ValidationError("make_batches: batch_size must equal 5 x per_class_quota");
  }
  auto by_class = indices_by_class(d);
  for (Label f : kFoundations) {
    auto rng = Rng::derive(seed, std::string("quota-") + std::string(to_string(f)));
    rng.shuffle(std::span(by_class[index_of(f)]));
  }
  std::size_t available = d.size();
  for (Label f : kFoundations) available = std::min(available, by_class[index_of(f)].size() / quota);
  for (std::size_t k = 0; k < available; ++k) {
    std::vector<std::size_t> slice;
    slice.reserve(batch_size);
    for (Label f : kFoundations) {
      const auto& pool = by_class[index_of(f)];
      slice.insert(slice.end(), pool.begin() + static_cast<std::ptrdiff_t>(k * quota),
                   pool.begin() + static_cast<std::ptrdiff_t>((k + 1) * quota));
    }
    batches.push_back(subset(d, batch_name(k), std::move(slice), false));
  }
  return batches;
}

Dataset undersample(const Dataset& d, const UndersampleTarget& target, std::uint64_t seed) {
  auto by_class = indices_by_class(d);
  std::map<Label, std::size_t> want;
  if (target.counts) {
    want = *target.counts;
  } else {
    auto present = d.class_counts().present();
    if (present.empty()) return Dataset(d.name() + "-undersampled", {});
    std::size_t smallest = d.size();
    for (Label l : present) smallest = std::min(smallest, d.class_counts()[l]);
    for (Label l : present) want[l] = smallest;
  }
  std::vector<std::size_t> keep;
  for (const auto& [label, n] : want) {
    auto& idx = by_class[index_of(label)];
    if (n > idx.size()) {
      throw ValidationError("undersample: target " + std::to_string(n) + " for class " +
                            std::string(to_string(label)) + " exceeds available " +
                            std::to_string(idx.size()));
    }
    auto rng = Rng::derive(seed, std::string("undersample-") + std::string(to_string(label)));
    rng.shuffle(std::span(idx));
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return subset(d, d.name() + "-undersampled", std::move(keep), true);
}

Dataset concat(std::string name, std::span<const Dataset> parts) {
  std::vector<Document> docs;
  for (const auto& p : parts) docs.insert(docs.end(), p.documents().begin(), p.documents().end());
  return Dataset(std::move(name), std::move(docs));
}

}  // namespace mfm
