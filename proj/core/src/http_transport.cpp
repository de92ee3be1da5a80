#include <cstdlib>

#include "httplib.h"
#include "mfm/error.hpp"
#include "mfm/llmclient.hpp"

namespace mfm {

namespace {

class HttpTransport final : public Transport {
 public:
  HttpTransport(const std::string& base_url, const std::string& auth_env, std::chrono::milliseconds timeout) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("base URL needs a scheme: " + base_url);
    const auto scheme = base_url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ValidationError("unsupported URL scheme: " + scheme);
    auto path_start = base_url.find('/', scheme_end + 3);
    origin_ = base_url.substr(0, path_start);
    if (path_start != std::string::npos) prefix_ = base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();

    if (!auth_env.empty()) {
      const char* token = std::getenv(auth_env.c_str());
      if (!token || !*token) throw AuthError("environment variable " + auth_env + " is not set");
      token_ = token;
    }
    timeout_ = timeout;
    if (!httplib::Client(origin_).is_valid()) throw ValidationError("invalid base URL: " + base_url);
  }

  HttpResponse post_json(const std::string& path, const std::string& body) override {
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    // One client per request: httplib::Client is not safe for concurrent use.
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto result = client.Post(prefix_ + path, headers, body, "application/json");
    HttpResponse r;
    if (!result) {
      r.error = httplib::to_string(result.error());
      return r;
    }
    r.status = result->status;
    r.body = result->body;
    return r;
  }

 private:
  std::string origin_;
  std::string prefix_;
  std::string token_;
  std::chrono::milliseconds timeout_{};
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url, const std::string& auth_env,
                                               std::chrono::milliseconds timeout) {
  return std::make_unique<HttpTransport>(base_url, auth_env, timeout);
}

}  // namespace mfm
