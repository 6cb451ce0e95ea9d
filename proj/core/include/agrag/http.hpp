#pragma once

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "agrag/error.hpp"

namespace agrag::http {

struct Request {
  std::string url;  // scheme://host[:port]/path
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{30000};
};

struct Response {
  int status = 0;  // 0 when the transport failed before a status line arrived
  std::string body;
  std::string transport_error;
};

struct Url {
  std::string scheme_host_port;
  std::string path;
};

Url split_url(const std::string& url);

Response post_json(const Request& request);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};
};

// Thrown by an attempt to request another try.
class TransientFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs attempt() up to policy.attempts times, sleeping base_delay * 2^i between
// tries. TransientFailure triggers a retry; any other exception propagates.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, const std::string& what, Fn&& attempt) -> decltype(attempt()) {
  std::string last_error = "no attempts made";
  const int attempts = std::max(policy.attempts, 1);
  for (int i = 0; i < attempts; ++i) {
    try {
      return attempt();
    } catch (const TransientFailure& e) {
      last_error = e.what();
    }
    if (i + 1 < attempts) std::this_thread::sleep_for(policy.base_delay * (1LL << i));
  }
  throw Error(ErrorCode::BackendUnavailable,
              what + " failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

// Classifies a response: 2xx returns normally, 408/429/5xx and transport
// failures throw TransientFailure, anything else throws BackendUnavailable.
void check_status(const Response& response, const std::string& what);

}  // namespace agrag::http
