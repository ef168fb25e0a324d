#include "finex/http.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "httplib.h"

namespace finex {

double retry_delay_s(const RetryPolicy& policy, int attempt, double retry_after_s) {
  const double backoff =
      std::min(policy.max_backoff_s, policy.initial_backoff_s * std::pow(2.0, attempt - 1));
  return std::max(backoff, retry_after_s);
}

namespace {

// Splits "http://host:port/prefix" into origin and prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' lacks a scheme");
  const auto slash = url.find('/', scheme + 3);
  std::string origin = url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (origin.size() <= scheme + 3) throw ConfigError("endpoint '" + url + "' lacks a host");
  return {origin, prefix};
}

double parse_retry_after(const std::string& value) {
  if (value.empty()) return 0.0;
  char* end = nullptr;
  const double s = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || !std::isfinite(s) || s < 0.0) return 0.0;
  return s;
}

struct SlotGuard {
  std::counting_semaphore<1024>& sem;
  explicit SlotGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

}  // namespace

HttpJsonClient::HttpJsonClient(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)), in_flight_(std::clamp(endpoint_.pool_size, 1, 1024)) {
  if (endpoint_.pool_size < 1) throw ConfigError("endpoint pool size must be >= 1");
  if (!(endpoint_.timeout_s > 0.0)) throw ConfigError("endpoint timeout must be positive");
  std::tie(origin_, prefix_) = split_url(endpoint_.url);
}

HttpJsonClient::~HttpJsonClient() = default;

std::string HttpJsonClient::post(const std::string& path, const std::string& body) {
  SlotGuard slot(in_flight_);
  httplib::Client cli(origin_);
  const auto secs = static_cast<time_t>(endpoint_.timeout_s);
  const auto usecs = static_cast<time_t>((endpoint_.timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);

  const std::string target = prefix_ + path;
  auto res = cli.Post(target, body, "application/json");
  if (!res) {
    throw TransportError("POST " + endpoint_.url + path + " failed: " +
                         httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 200) return res->body;
  const std::string what =
      "POST " + endpoint_.url + path + " returned " + std::to_string(status) + ": " +
      excerpt(res->body);
  if (status >= 500) throw TransportError(what, parse_retry_after(res->get_header_value("Retry-After")));
  throw ProtocolError(what);
}

}  // namespace finex
