#pragma once

#include <chrono>
#include <string>

#include "mfm/llmclient.hpp"
#include "mfm/random.hpp"

namespace mfm::detail {

struct RetryPolicy {
  unsigned retries = 3;
  std::chrono::milliseconds initial{500};
  std::chrono::milliseconds max{8000};
};

struct Attempted {
  HttpResponse response;
  unsigned attempts = 0;
};

inline bool is_retryable(const HttpResponse& r) noexcept { return r.status == 0 || r.status == 429 || r.status >= 500; }

/// POSTs with exponential backoff plus jitter. Throws AuthError on 401/403.
Attempted post_with_retry(Transport& transport, const std::string& path, const std::string& body,
                          const RetryPolicy& policy, Rng& jitter);

}  // namespace mfm::detail
