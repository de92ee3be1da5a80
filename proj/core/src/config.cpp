#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mfm/digest.hpp"
#include "mfm/error.hpp"
#include "mfm/experiments.hpp"
#include "text_util.hpp"
#include "toml.hpp"

namespace fs = std::filesystem;

namespace mfm {

std::string_view to_string(Approach a) noexcept {
  switch (a) {
    case Approach::lexicon_count: return "lexicon_count";
    case Approach::lexicon_prob: return "lexicon_prob";
    case Approach::semantic_sim: return "semantic_sim";
    case Approach::frameaxis: return "frameaxis";
    case Approach::llm_fewshot: return "llm_fewshot";
    case Approach::exchange_ingest: return "exchange_ingest";
  }
  return "lexicon_count";
}

std::optional<Approach> parse_approach(std::string_view s) noexcept {
  for (auto a : {Approach::lexicon_count, Approach::lexicon_prob, Approach::semantic_sim, Approach::frameaxis,
                 Approach::llm_fewshot, Approach::exchange_ingest}) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

std::string interpolate_env(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto start = text.find("${", i);
    if (start == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, start - i));
    auto end = text.find('}', start + 2);
    if (end == std::string_view::npos) throw ValidationError("unterminated ${ in \"" + std::string(text) + "\"");
    std::string name(text.substr(start + 2, end - start - 2));
    if (name.empty()) throw ValidationError("empty ${} reference");
    const char* value = std::getenv(name.c_str());
    if (!value) throw ValidationError("environment variable " + name + " is not set");
    out.append(value);
    i = end + 1;
  }
  return out;
}

namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string base_dir, std::string source)
      : root_(root), base_(std::move(base_dir)), source_(std::move(source)) {}

  const toml::table* section(std::string_view name, std::initializer_list<std::string_view> keys) {
    seen_top_.insert(std::string(name));
    auto node = root_.get(name);
    if (!node) return nullptr;
    auto table = node->as_table();
    if (!table) fail(std::string(name) + " must be a table");
    check_keys(*table, keys, std::string(name));
    return table;
  }

  void top_level(std::initializer_list<std::string_view> keys) {
    for (auto k : keys) seen_top_.insert(std::string(k));
    for (const auto& [k, v] : root_) {
      if (!seen_top_.contains(std::string(k.str()))) fail("unknown key \"" + std::string(k.str()) + "\"");
    }
  }

  std::optional<std::string> string(const toml::table* t, std::string_view key) {
    if (!t) return std::nullopt;
    auto node = t->get(key);
    if (!node) return std::nullopt;
    auto v = node->value<std::string>();
    if (!v) fail(std::string(key) + " must be a string");
    return interpolate_env(*v);
  }

  std::optional<std::string> path(const toml::table* t, std::string_view key) {
    auto v = string(t, key);
    if (!v || v->empty()) return v;
    fs::path p(*v);
    if (p.is_relative()) p = fs::path(base_) / p;
    return p.lexically_normal().string();
  }

  template <typename T>
  std::optional<T> number(const toml::table* t, std::string_view key) {
    if (!t) return std::nullopt;
    auto node = t->get(key);
    if (!node) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
      if (auto v = node->value<double>()) return static_cast<T>(*v);
    } else {
      if (auto v = node->as_integer()) {
        if (v->get() < 0) fail(std::string(key) + " must not be negative");
        return static_cast<T>(v->get());
      }
    }
    fail(std::string(key) + " must be a number");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ValidationError(source_ + ": " + what); }

 private:
  void check_keys(const toml::table& t, std::initializer_list<std::string_view> keys, const std::string& where) {
    for (const auto& [k, v] : t) {
      bool known = false;
      for (auto allowed : keys) known = known || k.str() == allowed;
      if (!known) fail("unknown key \"" + where + "." + std::string(k.str()) + "\"");
    }
  }

  const toml::table& root_;
  std::string base_;
  std::string source_;
  std::set<std::string> seen_top_;
};

}  // namespace

RunConfig parse_config(std::string_view toml_text, const std::string& base_dir, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    throw ParseError(source, e.source().begin.line, std::string(e.description()));
  }

  Reader r(root, base_dir, source);
  RunConfig c;
  auto approach = r.string(&root, "approach");
  if (!approach) r.fail("approach is required");
  auto a = parse_approach(*approach);
  if (!a) r.fail("unknown approach \"" + *approach + "\"");
  c.approach = *a;
  if (auto seed = r.number<std::uint64_t>(&root, "seed")) c.seed = *seed;
  if (auto out = r.path(&root, "output_dir")) c.output_dir = *out;
  if (auto scope = r.string(&root, "scope")) {
    auto s = parse_scope(*scope);
    if (!s) r.fail("scope must be covered_only or all");
    c.scope = *s;
  }

  auto data = r.section("data", {"bench", "language"});
  if (auto v = r.path(data, "bench")) c.bench_path = *v;
  if (auto v = r.string(data, "language")) c.language = *v;

  auto lexicon = r.section("lexicon", {"path", "kind"});
  if (auto v = r.path(lexicon, "path")) c.lexicon_path = *v;
  c.lexicon_kind = c.approach == Approach::lexicon_prob ? LexiconKind::probability : LexiconKind::count;
  if (auto v = r.string(lexicon, "kind")) {
    if (*v == "count") c.lexicon_kind = LexiconKind::count;
    else if (*v == "probability") c.lexicon_kind = LexiconKind::probability;
    else r.fail("lexicon.kind must be count or probability");
  }

  auto tokenizer = r.section("tokenizer", {"vocabulary"});
  if (auto v = r.path(tokenizer, "vocabulary")) c.vocabulary_path = *v;

  auto embedding = r.section("embedding", {"vectors", "sentiment", "background", "z_crit", "bootstrap", "threads"});
  if (auto v = r.path(embedding, "vectors")) c.vectors_path = *v;
  if (auto v = r.path(embedding, "sentiment")) c.sentiment_path = *v;
  if (auto v = r.string(embedding, "background")) {
    if (*v == "bench") c.background = BackgroundSource::bench;
    else if (*v == "vocabulary") c.background = BackgroundSource::vocabulary;
    else r.fail("embedding.background must be bench or vocabulary");
  }
  if (auto v = r.number<double>(embedding, "z_crit")) c.z_crit = *v;
  if (auto v = r.number<std::size_t>(embedding, "bootstrap")) c.bootstrap = *v;
  if (auto v = r.number<unsigned>(embedding, "threads")) c.threads = *v;

  auto llm = r.section("llm", {"base_url", "chat_path", "model", "auth_env", "temperature", "max_tokens",
                               "timeout_ms", "max_parallel", "retries", "backoff_ms", "language", "culture", "shots"});
  if (auto v = r.string(llm, "base_url")) c.endpoint.base_url = *v;
  if (auto v = r.string(llm, "chat_path")) c.endpoint.chat_path = *v;
  if (auto v = r.string(llm, "model")) c.endpoint.model = *v;
  if (auto v = r.string(llm, "auth_env")) c.endpoint.auth_env = *v;
  if (auto v = r.number<double>(llm, "temperature")) c.endpoint.temperature = *v;
  if (auto v = r.number<int>(llm, "max_tokens")) c.endpoint.max_tokens = *v;
  if (auto v = r.number<long>(llm, "timeout_ms")) c.endpoint.timeout = std::chrono::milliseconds(*v);
  if (auto v = r.number<unsigned>(llm, "max_parallel")) c.endpoint.max_parallel = *v;
  if (auto v = r.number<unsigned>(llm, "retries")) c.endpoint.retries = *v;
  if (auto v = r.number<long>(llm, "backoff_ms")) c.endpoint.backoff_initial = std::chrono::milliseconds(*v);
  if (auto v = r.string(llm, "language")) {
    auto l = parse_prompt_language(*v);
    if (!l) r.fail("llm.language must be en, zh or it");
    c.prompt_language = *l;
  }
  if (auto v = r.string(llm, "culture")) c.culture = *v;
  if (auto v = r.path(llm, "shots")) c.shots_path = *v;

  auto exchange = r.section("exchange", {"predictions"});
  if (auto v = r.path(exchange, "predictions")) c.predictions_path = *v;
  r.top_level({"approach", "seed", "output_dir", "scope"});

  std::ostringstream canonical;
  canonical << root;
  c.canonical = canonical.str();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto base = fs::path(path).parent_path();
  return parse_config(buffer.str(), base.empty() ? "." : base.string(), path);
}

std::string config_hash(const RunConfig& config) {
  return sha256_hex(config.canonical + "\nseed=" + std::to_string(config.seed) + "\n");
}

void validate(const RunConfig& c) {
  auto need = [&](const std::string& value, std::string_view what) {
    if (value.empty()) {
      throw ValidationError(std::string(to_string(c.approach)) + " needs " + std::string(what));
    }
  };
  need(c.bench_path, "data.bench");
  need(c.output_dir, "output_dir");
  switch (c.approach) {
    case Approach::lexicon_count:
    case Approach::lexicon_prob:
      need(c.lexicon_path, "lexicon.path");
      break;
    case Approach::semantic_sim:
      need(c.lexicon_path, "lexicon.path");
      need(c.vectors_path, "embedding.vectors");
      break;
    case Approach::frameaxis:
      need(c.lexicon_path, "lexicon.path");
      need(c.vectors_path, "embedding.vectors");
      if (c.z_crit <= 0.0) throw ValidationError("embedding.z_crit must be positive");
      break;
    case Approach::llm_fewshot:
      need(c.endpoint.base_url, "llm.base_url");
      need(c.endpoint.model, "llm.model");
      if (c.endpoint.max_parallel == 0) throw ValidationError("llm.max_parallel must be positive");
      break;
    case Approach::exchange_ingest:
      need(c.predictions_path, "exchange.predictions");
      break;
  }
  if (c.approach != Approach::exchange_ingest && c.approach != Approach::llm_fewshot &&
      c.lexicon_kind != (c.approach == Approach::lexicon_prob ? LexiconKind::probability : LexiconKind::count)) {
    throw ValidationError(std::string(to_string(c.approach)) + " needs a " +
                          (c.approach == Approach::lexicon_prob ? "probability" : "count") + " lexicon");
  }
  for (const auto& p : input_paths(c)) {
    if (!fs::is_regular_file(p)) throw ValidationError("input file does not exist: " + p);
  }
}

std::vector<std::string> input_paths(const RunConfig& c) {
  std::vector<std::string> paths{c.bench_path};
  auto add = [&](const std::string& p) {
    if (!p.empty()) paths.push_back(p);
  };
  switch (c.approach) {
    case Approach::lexicon_count:
    case Approach::lexicon_prob:
      add(c.lexicon_path);
      add(c.vocabulary_path);
      break;
    case Approach::semantic_sim:
    case Approach::frameaxis:
      add(c.lexicon_path);
      add(c.vocabulary_path);
      add(c.vectors_path);
      add(c.sentiment_path);
      break;
    case Approach::llm_fewshot:
      add(c.shots_path);
      break;
    case Approach::exchange_ingest:
      add(c.predictions_path);
      break;
  }
  return paths;
}

}  // namespace mfm
