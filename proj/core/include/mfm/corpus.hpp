#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mfm/foundation.hpp"

namespace mfm {

/// Histogram over the label set.
class ClassCounts {
 public:
  std::size_t& operator[](Label l) noexcept { return n_[index_of(l)]; }
  std::size_t operator[](Label l) const noexcept { return n_[index_of(l)]; }
  std::size_t total() const noexcept;
  /// Labels with a nonzero count, in enum order.
  std::vector<Label> present() const;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;

 private:
  std::array<std::size_t, kLabelCount> n_{};
};

struct Document {
  std::string id;
  std::string text;
  std::string language = "und";
  Label gold = Label::unknown;
  std::string source;
  /// Pre-tokenized input; when set, tokenizers are bypassed.
  std::optional<std::vector<std::string>> tokens;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Immutable collection of gold-labelled documents with unique ids.
class Dataset {
 public:
  Dataset() = default;
  /// Throws ValidationError on duplicate ids, empty text, or a none/unknown gold label.
  Dataset(std::string name, std::vector<Document> documents);

  const std::string& name() const noexcept { return name_; }
  std::span<const Document> documents() const noexcept { return docs_; }
  const ClassCounts& class_counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }

  const Document* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  /// Documents whose gold label is one of the five foundations.
  bool is_benchmark() const noexcept;

 private:
  std::string name_;
  std::vector<Document> docs_;
  ClassCounts counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

ClassCounts histogram(std::span<const Document> docs);

enum class DatasetFormat { csv, jsonl };

/// Infers the format from the file extension (.csv / .jsonl / .json).
DatasetFormat format_from_path(std::string_view path);

struct LoadOptions {
  /// Dataset name; defaults to the file stem.
  std::optional<std::string> name;
  /// Used for records without a language field.
  std::string default_language = "und";
};

/// CSV: header row with at least id,text,label (optional language,source).
/// JSONL: one object per line with id,text,label (optional language,source,tokens).
Dataset load_dataset(const std::string& path, DatasetFormat format, const LoadOptions& options = {});
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});

void save_dataset(const Dataset& dataset, const std::string& path, DatasetFormat format);

struct Split {
  Dataset train;
  Dataset bench;
};

/// Per-class shuffle then prefix: bench receives floor(fraction * count) of
/// every class. Both halves keep the input order.
Split stratified_split(const Dataset& d, double bench_fraction, std::uint64_t seed);

/// Disjoint full batches of `batch_size`. With a quota, each batch holds
/// exactly `per_class_quota` documents of every foundation and
/// batch_size must equal 5 * quota. Partial batches are never emitted.
std::vector<Dataset> make_batches(const Dataset& d, std::size_t batch_size,
                                  std::optional<std::size_t> per_class_quota, std::uint64_t seed);

struct UndersampleTarget {
  /// Unset means "reduce every present class to the smallest present class".
  std::optional<std::map<Label, std::size_t>> counts;

  static UndersampleTarget min_class() { return {}; }
  static UndersampleTarget explicit_counts(std::map<Label, std::size_t> c) { return {std::move(c)}; }
};

/// Sampling without replacement to the target class counts. Classes absent
/// from an explicit target are dropped. Output keeps the input order.
Dataset undersample(const Dataset& d, const UndersampleTarget& target, std::uint64_t seed);

/// Concatenation; ids must stay unique.
Dataset concat(std::string name, std::span<const Dataset> parts);

}  // namespace mfm
