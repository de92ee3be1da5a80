#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "mfm/error.hpp"
#include "mfm/llmclient.hpp"
#include "retry.hpp"

namespace mfm {

namespace detail {

Attempted post_with_retry(Transport& transport, const std::string& path, const std::string& body,
                          const RetryPolicy& policy, Rng& jitter) {
  Attempted out;
  auto delay = policy.initial;
  for (unsigned attempt = 0;; ++attempt) {
    out.response = transport.post_json(path, body);
    out.attempts = attempt + 1;
    const int status = out.response.status;
    if (status == 401 || status == 403) {
      throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
    }
    if (!is_retryable(out.response) || attempt >= policy.retries) return out;
    const auto half = static_cast<std::uint64_t>(delay.count() / 2 + 1);
    const auto wait = delay + std::chrono::milliseconds(jitter.below(half));
    spdlog::debug("retrying {} after HTTP {} in {} ms", path, status, wait.count());
    std::this_thread::sleep_for(wait);
    delay = std::min(policy.max, delay * 2);
  }
}

}  // namespace detail

std::string llm_approach_name(const EndpointConfig& endpoint, const ClassifyOptions& options) {
  return "llm:" + endpoint.model + ":" + std::string(to_string(options.language)) + ":" +
         std::to_string(options.shots.size()) + "shot";
}

std::string chat_request_body(const EndpointConfig& endpoint, const std::vector<ChatMessage>& messages) {
  nlohmann::ordered_json j;
  j["model"] = endpoint.model;
  auto list = nlohmann::ordered_json::array();
  for (const auto& m : messages) list.push_back({{"role", m.role}, {"content", m.content}});
  j["messages"] = std::move(list);
  j["temperature"] = endpoint.temperature;
  j["max_tokens"] = endpoint.max_tokens;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::optional<std::string> chat_reply_text(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message")) return std::nullopt;
  const auto& message = first["message"];
  if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) return std::nullopt;
  return message["content"].get<std::string>();
}

namespace {

struct Exchange {
  unsigned attempts = 0;
  int http_status = 0;
  std::string error;
  std::optional<ParseStatus> parse_status;
  std::string raw;
};

void write_audit(const std::string& path, std::span<const Document> documents, const std::vector<Exchange>& log,
                 const std::vector<Prediction>& predictions, const std::vector<char>& done,
                 const std::string& approach) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write audit log " + path);
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (!done[i]) continue;
    nlohmann::ordered_json j;
    j["doc_id"] = documents[i].id;
    j["approach"] = approach;
    j["attempts"] = log[i].attempts;
    j["http_status"] = log[i].http_status;
    if (!log[i].error.empty()) j["error"] = log[i].error;
    j["parse"] = log[i].parse_status ? std::string(to_string(*log[i].parse_status)) : "none";
    j["raw"] = log[i].raw;
    auto labels = nlohmann::ordered_json::array();
    for (Label l : predictions[i].labels.to_vector()) labels.push_back(std::string(to_string(l)));
    j["labels"] = std::move(labels);
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

}  // namespace

std::vector<Prediction> classify_batch(std::span<const Document> documents, const EndpointConfig& endpoint,
                                       const ClassifyOptions& options, Transport& transport) {
  const auto approach = llm_approach_name(endpoint, options);
  // Build every prompt up front so a leaking shot fails before any request.
  std::vector<std::string> bodies;
  bodies.reserve(documents.size());
  for (const auto& d : documents) {
    bodies.push_back(chat_request_body(
        endpoint, build_prompt(d, options.shots, options.language, options.culture, options.benchmark_ids)));
  }

  const detail::RetryPolicy policy{endpoint.retries, endpoint.backoff_initial, endpoint.backoff_max};
  std::vector<Prediction> predictions(documents.size());
  std::vector<Exchange> log(documents.size());
  std::vector<char> done(documents.size(), 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    while (!stop) {
      const auto i = next.fetch_add(1);
      if (i >= documents.size()) return;
      try {
        auto jitter = Rng::derive(options.seed, i);
        auto attempted = detail::post_with_retry(transport, endpoint.chat_path, bodies[i], policy, jitter);
        auto& entry = log[i];
        entry.attempts = attempted.attempts;
        entry.http_status = attempted.response.status;
        entry.error = attempted.response.error;
        auto& p = predictions[i];
        std::optional<std::string> text;
        if (attempted.response.status >= 200 && attempted.response.status < 300) {
          text = chat_reply_text(attempted.response.body);
          if (!text) entry.error = "reply has no choices[0].message.content";
        } else if (entry.error.empty()) {
          entry.error = "HTTP " + std::to_string(attempted.response.status);
        }
        if (text) {
          auto parsed = parse_response(*text);
          entry.parse_status = parsed.status;
          entry.raw = *text;
          p.labels = parsed.labels;
          p.rationale = parsed.rationale;
          if (parsed.status != ParseStatus::parsed) p.raw_response = *text;
        } else {
          entry.raw = attempted.response.body;
          p = make_unknown(documents[i].id, approach);
          p.raw_response = entry.error;
        }
        p.doc_id = documents[i].id;
        p.approach = approach;
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(endpoint.max_parallel, static_cast<unsigned>(documents.size())));
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < n_workers; ++t) workers.emplace_back(work);
  }

  if (!options.audit_path.empty()) write_audit(options.audit_path, documents, log, predictions, done, approach);
  if (failure) std::rethrow_exception(failure);

  std::size_t failed = 0;
  for (const auto& e : log) failed += e.parse_status == ParseStatus::parsed ? 0 : 1;
  if (failed) spdlog::warn("{}: {} of {} replies were not strict JSON", approach, failed, documents.size());
  return predictions;
}

}  // namespace mfm
