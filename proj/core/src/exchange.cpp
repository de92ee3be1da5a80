#include <fstream>

#include "json.hpp"
#include "mfm/error.hpp"
#include "mfm/prediction.hpp"

namespace mfm {

using json = nlohmann::ordered_json;

Prediction make_none(std::string doc_id, std::string approach) {
  Prediction p;
  p.doc_id = std::move(doc_id);
  p.labels.insert(Label::none);
  p.approach = std::move(approach);
  return p;
}

Prediction make_unknown(std::string doc_id, std::string approach) {
  Prediction p;
  p.doc_id = std::move(doc_id);
  p.labels.insert(Label::unknown);
  p.approach = std::move(approach);
  return p;
}

void validate(const Prediction& p) {
  const std::string where = "prediction for " + p.doc_id;
  if (p.doc_id.empty()) throw ValidationError("prediction with empty doc_id");
  if (p.labels.empty()) throw ValidationError(where + ": empty label set");
  if (p.labels.contains(Label::nonmoral)) throw ValidationError(where + ": nonmoral is not a prediction label");
  bool degenerate = p.labels.contains(Label::none) || p.labels.contains(Label::unknown);
  if (degenerate && p.labels.has_foundation()) {
    throw ValidationError(where + ": none/unknown cannot co-occur with a foundation label");
  }
  if (p.labels.contains(Label::none) && p.labels.contains(Label::unknown)) {
    throw ValidationError(where + ": none and unknown are mutually exclusive");
  }
  for (const auto& [label, _] : p.scores) {
    if (!is_foundation(label)) throw ValidationError(where + ": scores may only name foundations");
  }
  if (p.binary) {
    LabelSet fired;
    for (const auto& [label, on] : *p.binary) {
      if (!is_foundation(label)) throw ValidationError(where + ": binary may only name foundations");
      if (on) fired.insert(label);
    }
    if (fired.empty()) fired.insert(Label::none);
    if (!p.labels.contains(Label::unknown) && fired != p.labels) {
      throw ValidationError(where + ": fused labels disagree with binary decisions");
    }
  }
}

std::string to_json_line(const Prediction& p) {
  json obj;
  obj["doc_id"] = p.doc_id;
  json labels = json::array();
  for (Label l : p.labels.to_vector()) labels.push_back(std::string(to_string(l)));
  obj["labels"] = std::move(labels);
  if (!p.scores.empty()) {
    json scores = json::object();
    for (Label f : kFoundations) {
      if (auto it = p.scores.find(f); it != p.scores.end()) scores[std::string(to_string(f))] = it->second;
    }
    obj["scores"] = std::move(scores);
  }
  if (p.rationale) obj["rationale"] = *p.rationale;
  obj["approach"] = p.approach;
  if (p.raw_response) obj["raw"] = *p.raw_response;
  if (p.binary) {
    json bin = json::object();
    for (Label f : kFoundations) {
      if (auto it = p.binary->find(f); it != p.binary->end()) bin[std::string(to_string(f))] = it->second ? 1 : 0;
    }
    obj["binary"] = std::move(bin);
  }
  if (p.job_id) obj["job_id"] = *p.job_id;
  return obj.dump();
}

namespace {

Label foundation_key(const std::string& key, const std::string& source, std::size_t lineno) {
  auto l = parse_label(key);
  if (!l || !is_foundation(*l)) throw ParseError(source, lineno, "\"" + key + "\" is not a foundation");
  return *l;
}

}  // namespace

Prediction from_json_line(const std::string& line, const std::string& source, std::size_t lineno) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, lineno, e.what());
  }
  if (!obj.is_object()) throw ParseError(source, lineno, "expected a JSON object");
  if (!obj.contains("doc_id")) throw ParseError(source, lineno, "missing field doc_id");
  if (!obj.contains("labels")) throw ParseError(source, lineno, "missing field labels");

  Prediction p;
  try {
    const auto& id = obj["doc_id"];
    p.doc_id = id.is_number_integer() ? std::to_string(id.get<long long>()) : id.get<std::string>();
    const auto& labels = obj["labels"];
    if (!labels.is_array()) throw ParseError(source, lineno, "labels must be an array");
    for (const auto& l : labels) {
      auto parsed = parse_label(l.get<std::string>());
      if (!parsed) throw ParseError(source, lineno, "unknown label \"" + l.get<std::string>() + "\"");
      p.labels.insert(*parsed);
    }
    if (obj.contains("scores")) {
      for (const auto& [key, value] : obj["scores"].items()) {
        p.scores[foundation_key(key, source, lineno)] = value.get<double>();
      }
    }
    if (obj.contains("rationale") && !obj["rationale"].is_null()) p.rationale = obj["rationale"].get<std::string>();
    if (obj.contains("approach")) p.approach = obj["approach"].get<std::string>();
    if (obj.contains("raw") && !obj["raw"].is_null()) p.raw_response = obj["raw"].get<std::string>();
    if (obj.contains("binary")) {
      std::map<Label, bool> bin;
      for (const auto& [key, value] : obj["binary"].items()) {
        int v = value.is_boolean() ? (value.get<bool>() ? 1 : 0) : value.get<int>();
        if (v != 0 && v != 1) throw ParseError(source, lineno, "binary decisions must be 0 or 1");
        bin[foundation_key(key, source, lineno)] = v == 1;
      }
      p.binary = std::move(bin);
    }
    if (obj.contains("job_id")) p.job_id = obj["job_id"].get<std::string>();
  } catch (const json::type_error& e) {
    throw ParseError(source, lineno, e.what());
  }
  try {
    validate(p);
  } catch (const ValidationError& e) {
    throw ParseError(source, lineno, e.what());
  }
  return p;
}

std::vector<Prediction> read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(from_json_line(line, path, lineno));
  }
  return out;
}

void write_predictions(const std::string& path, const std::vector<Prediction>& predictions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& p : predictions) out << to_json_line(p) << '\n';
  if (!out) throw Error("write failed: " + path);
}

}  // namespace mfm
