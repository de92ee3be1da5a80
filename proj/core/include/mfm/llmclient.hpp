#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mfm/corpus.hpp"
#include "mfm/foundation.hpp"
#include "mfm/prediction.hpp"

namespace mfm {

// ---- prompts ---------------------------------------------------------------

enum class PromptLanguage { english, chinese, italian };

std::string_view to_string(PromptLanguage l) noexcept;
/// Accepts en/english, zh/chinese, it/italian.
std::optional<PromptLanguage> parse_prompt_language(std::string_view s) noexcept;

/// The shipped system prompt, byte for byte. Only the English text has a
/// {culture} placeholder; the Chinese and Italian texts name their culture.
std::string_view system_prompt_template(PromptLanguage lang) noexcept;

/// Template with every {culture} replaced; an empty culture means "Chinese".
std::string system_prompt(PromptLanguage lang, std::string_view culture = {});

struct ChatMessage {
  std::string role;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// A worked example shown before the target document.
struct Shot {
  std::string id;
  std::string text;
  LabelSet labels;
  std::string rationale;
};

/// Reads shots from JSONL: {"id", "text", "labels": [...], "rationale"}.
std::vector<Shot> load_shots(const std::string& path);

/// Shots taken from a dataset by id, labelled with their gold foundation.
std::vector<Shot> shots_from_dataset(const Dataset& source, std::span<const std::string> ids);

/// The JSON answer format used for shot replies and expected from the model.
std::string answer_json(const LabelSet& labels, std::string_view rationale);

/// system, then (user, assistant) per shot, then the target as user.
/// Throws ValidationError when a shot id is in `benchmark_ids` or equals the
/// target id.
std::vector<ChatMessage> build_prompt(const Document& target, std::span<const Shot> shots,
                                      PromptLanguage lang, std::string_view culture,
                                      const std::unordered_set<std::string>& benchmark_ids);

// ---- response parsing ------------------------------------------------------

enum class ParseStatus { parsed, repaired, failed };

std::string_view to_string(ParseStatus s) noexcept;

struct ParsedResponse {
  LabelSet labels;
  std::optional<std::string> rationale;
  ParseStatus status = ParseStatus::failed;
};

inline constexpr std::size_t kMaxPredictedFoundations = 3;

/// Strict: the whole text is a JSON object with "labels" (string or list) and
/// an optional "rationale". Otherwise repaired from an embedded {...} object
/// or from foundation names appearing in the text; otherwise {unknown}.
/// Keeps at most the first three foundations; none/unknown are dropped when
/// a foundation is present. Chinese and Italian foundation names are accepted.
ParsedResponse parse_response(std::string_view text);

// ---- transport -------------------------------------------------------------

struct HttpResponse {
  /// 0 when the request never got a response (connection, timeout).
  int status = 0;
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// POSTs a JSON body to `path` (appended to the base URL path).
  virtual HttpResponse post_json(const std::string& path, const std::string& body) = 0;
};

/// Plain HTTP or HTTPS transport. The bearer token, if any, is read from the
/// environment variable `auth_env` at construction and never logged.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url, const std::string& auth_env,
                                               std::chrono::milliseconds timeout);

// ---- classification --------------------------------------------------------

struct EndpointConfig {
  std::string base_url;
  std::string chat_path = "/chat/completions";
  std::string model;
  /// Environment variable holding the API token; empty for no auth.
  std::string auth_env;
  double temperature = 0.0;
  int max_tokens = 512;
  std::chrono::milliseconds timeout{60000};
  unsigned max_parallel = 4;
  /// Retries after the first attempt, for 429, 5xx and transport failures.
  unsigned retries = 3;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};
};

struct ClassifyOptions {
  PromptLanguage language = PromptLanguage::english;
  std::string culture;
  std::vector<Shot> shots;
  std::unordered_set<std::string> benchmark_ids;
  /// JSONL log of every exchange (no credentials); skipped when empty.
  std::string audit_path;
  std::uint64_t seed = 0;
};

/// "llm:<model>:<lang>:<k>shot".
std::string llm_approach_name(const EndpointConfig& endpoint, const ClassifyOptions& options);

/// Chat request body for one document.
std::string chat_request_body(const EndpointConfig& endpoint, const std::vector<ChatMessage>& messages);

/// Extracts choices[0].message.content; nullopt when the body does not have it.
std::optional<std::string> chat_reply_text(std::string_view body);

/// One prediction per document, in input order. Unparseable replies become
/// repaired or {unknown} predictions with the raw text kept; requests that
/// keep failing become {unknown}. Throws AuthError on 401/403 (the run stops).
std::vector<Prediction> classify_batch(std::span<const Document> documents, const EndpointConfig& endpoint,
                                       const ClassifyOptions& options, Transport& transport);

// ---- translation -----------------------------------------------------------

struct TranslateConfig {
  std::string base_url;
  std::string path = "/translate";
  std::string auth_env;
  std::size_t chunk_size = 32;
  std::chrono::milliseconds timeout{60000};
  unsigned retries = 3;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};
};

/// Translations keyed by (text, source, target), persisted as JSONL.
class TranslationCache {
 public:
  TranslationCache() = default;
  /// Loads an existing cache file; a missing file is an empty cache.
  explicit TranslationCache(std::string path);

  std::optional<std::string> find(std::string_view text, std::string_view source, std::string_view target) const;
  void insert(std::string text, std::string source, std::string target, std::string translation);
  std::size_t size() const noexcept { return entries_.size(); }

  /// Appends entries added since load; no-op without a path.
  void flush();

 private:
  static std::string key(std::string_view text, std::string_view source, std::string_view target);

  std::string path_;
  std::unordered_map<std::string, std::string> entries_;
  std::vector<std::string> pending_;
};

/// POST {"q": [...], "source", "target"} -> {"translations": [...]} per chunk.
/// Identical texts are sent once. A failing chunk is retried item by item;
/// items that still fail are nullopt.
std::vector<std::optional<std::string>> translate_batch(std::span<const std::string> texts, std::string_view source,
                                                        std::string_view target, const TranslateConfig& config,
                                                        Transport& transport, TranslationCache* cache = nullptr);

}  // namespace mfm
