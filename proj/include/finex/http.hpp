#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <type_traits>

#include "finex/error.hpp"

namespace finex {

struct RetryPolicy {
  int max_attempts = 3;
  double initial_backoff_s = 0.5;
  double max_backoff_s = 8.0;
};

/// Sleep before attempt `attempt` (1-based retry count): exponential backoff,
/// never shorter than the server's Retry-After hint.
double retry_delay_s(const RetryPolicy& policy, int attempt, double retry_after_s);

/// Calls f() and retries on TransportError up to policy.max_attempts calls in
/// total. Other exceptions propagate immediately.
template <class F>
auto with_retries(const RetryPolicy& policy, F&& f) -> std::invoke_result_t<F&> {
  for (int attempt = 1;; ++attempt) {
    try {
      return f();
    } catch (const TransportError& e) {
      if (attempt >= policy.max_attempts) throw;
      const double delay = retry_delay_s(policy, attempt, e.retry_after_s());
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
}

struct HttpEndpoint {
  /// e.g. "http://127.0.0.1:8080" or "http://gpu-3:9000/v1"
  std::string url;
  int pool_size = 4;
  double timeout_s = 60.0;
};

/// POSTs JSON bodies to one endpoint with at most pool_size requests in
/// flight. Safe for concurrent use.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(HttpEndpoint endpoint);
  ~HttpJsonClient();
  HttpJsonClient(const HttpJsonClient&) = delete;
  HttpJsonClient& operator=(const HttpJsonClient&) = delete;

  /// Body of a 200 reply. Throws ProtocolError on 4xx or other non-200
  /// answers and TransportError on 5xx, timeouts and connection failures
  /// (carrying Retry-After when the server sent one).
  std::string post(const std::string& path, const std::string& body);

  const HttpEndpoint& endpoint() const { return endpoint_; }

 private:
  HttpEndpoint endpoint_;
  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix without trailing '/'
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace finex
