#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "mfm/error.hpp"
#include "mfm/llmclient.hpp"
#include "retry.hpp"

namespace mfm {

TranslationCache::TranslationCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(path_, lineno, "invalid cache record");
    try {
      entries_[key(j.at("text").get<std::string>(), j.at("source").get<std::string>(),
                   j.at("target").get<std::string>())] = j.at("translation").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ParseError(path_, lineno, "cache record needs text, source, target and translation");
    }
  }
}

std::string TranslationCache::key(std::string_view text, std::string_view source, std::string_view target) {
  std::string k;
  k.reserve(text.size() + source.size() + target.size() + 2);
  k.append(source).push_back('\x1f');
  k.append(target).push_back('\x1f');
  k.append(text);
  return k;
}

std::optional<std::string> TranslationCache::find(std::string_view text, std::string_view source,
                                                  std::string_view target) const {
  auto it = entries_.find(key(text, source, target));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::insert(std::string text, std::string source, std::string target, std::string translation) {
  nlohmann::ordered_json j;
  j["source"] = source;
  j["target"] = target;
  j["text"] = text;
  j["translation"] = translation;
  auto [it, added] = entries_.insert_or_assign(key(text, source, target), std::move(translation));
  (void)it;
  if (added) pending_.push_back(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

void TranslationCache::flush() {
  if (path_.empty() || pending_.empty()) return;
  if (auto parent = std::filesystem::path(path_).parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot write translation cache " + path_);
  for (const auto& line : pending_) out << line << '\n';
  if (!out) throw Error("write failed: " + path_);
  pending_.clear();
}

namespace {

std::optional<std::vector<std::string>> request(Transport& transport, const TranslateConfig& config,
                                                std::span<const std::string* const> texts, std::string_view source,
                                                std::string_view target, Rng& jitter) {
  nlohmann::ordered_json body;
  auto q = nlohmann::ordered_json::array();
  for (const auto* t : texts) q.push_back(*t);
  body["q"] = std::move(q);
  body["source"] = source;
  body["target"] = target;
  const detail::RetryPolicy policy{config.retries, config.backoff_initial, config.backoff_max};
  auto attempted = detail::post_with_retry(transport, config.path,
                                           body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                                           policy, jitter);
  const auto& r = attempted.response;
  if (r.status < 200 || r.status >= 300) {
    spdlog::warn("translate: request failed ({})", r.error.empty() ? "HTTP " + std::to_string(r.status) : r.error);
    return std::nullopt;
  }
  auto j = nlohmann::json::parse(r.body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("translations") || !j["translations"].is_array() ||
      j["translations"].size() != texts.size()) {
    spdlog::warn("translate: malformed reply for a chunk of {}", texts.size());
    return std::nullopt;
  }
  std::vector<std::string> out;
  for (const auto& t : j["translations"]) {
    if (!t.is_string()) return std::nullopt;
    out.push_back(t.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::optional<std::string>> translate_batch(std::span<const std::string> texts, std::string_view source,
                                                        std::string_view target, const TranslateConfig& config,
                                                        Transport& transport, TranslationCache* cache) {
  if (config.chunk_size == 0) throw ValidationError("translation chunk size must be positive");
  std::vector<std::optional<std::string>> out(texts.size());
  // Unique texts still to translate, each with every position it fills.
  std::vector<std::size_t> todo;
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::vector<std::size_t>> positions;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache) out[i] = cache->find(texts[i], source, target);
    if (out[i]) continue;
    auto [it, added] = slot.emplace(texts[i], todo.size());
    if (added) {
      todo.push_back(i);
      positions.emplace_back();
    }
    positions[it->second].push_back(i);
  }

  auto jitter = Rng::derive(0, "translate");
  auto store = [&](std::size_t k, const std::string& translation) {
    if (cache) cache->insert(texts[todo[k]], std::string(source), std::string(target), translation);
    for (auto i : positions[k]) out[i] = translation;
  };
  for (std::size_t begin = 0; begin < todo.size(); begin += config.chunk_size) {
    const auto end = std::min(todo.size(), begin + config.chunk_size);
    std::vector<const std::string*> chunk;
    for (auto k = begin; k < end; ++k) chunk.push_back(&texts[todo[k]]);
    if (auto result = request(transport, config, chunk, source, target, jitter)) {
      for (auto k = begin; k < end; ++k) store(k, (*result)[k - begin]);
      continue;
    }
    for (auto k = begin; k < end; ++k) {
      const std::string* single[] = {&texts[todo[k]]};
      if (auto result = request(transport, config, single, source, target, jitter)) store(k, (*result)[0]);
    }
  }
  if (cache) cache->flush();
  return out;
}

}  // namespace mfm
