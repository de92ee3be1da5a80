#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfm/foundation.hpp"

namespace mfm {

/// One approach's output for one document. This is also the record type of
/// the prediction-exchange JSONL through which external classifiers and the
/// trainer hand results to the evaluator.
struct Prediction {
  std::string doc_id;
  LabelSet labels;
  /// Per-foundation scores (match counts, probability sums, cosines, biases).
  std::map<Label, double> scores;
  std::optional<std::string> rationale;
  std::string approach;
  /// Unparsed model output, kept when the response could not be understood.
  std::optional<std::string> raw_response;
  /// Per-foundation 0/1 decisions from binary classifiers, when available.
  std::optional<std::map<Label, bool>> binary;
  std::optional<std::string> job_id;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Convenience constructors for the degenerate outcomes.
Prediction make_none(std::string doc_id, std::string approach);
Prediction make_unknown(std::string doc_id, std::string approach);

/// Throws ValidationError when the label set is empty, contains nonmoral,
/// mixes none/unknown with a foundation, or `binary` disagrees with `labels`.
void validate(const Prediction& p);

/// Exchange-format reader/writer. One JSON object per line with fields
/// doc_id, labels[], and optional scores{}, rationale, approach, raw,
/// binary{}, job_id. Errors carry line numbers.
std::vector<Prediction> read_predictions(const std::string& path);
void write_predictions(const std::string& path, const std::vector<Prediction>& predictions);

std::string to_json_line(const Prediction& p);
Prediction from_json_line(const std::string& line, const std::string& source = "<string>",
                          std::size_t lineno = 0);

}  // namespace mfm
