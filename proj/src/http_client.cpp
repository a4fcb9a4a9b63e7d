#include "http_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "augpe/common.hpp"

namespace augpe::detail {

SplitUrl split_endpoint(const std::string& endpoint) {
  if (endpoint.empty()) throw ConfigError("empty endpoint URL");
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = endpoint;
  } else {
    out.scheme_host_port = endpoint.substr(0, path_start);
    out.base_path = endpoint.substr(path_start);
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  }
  return out;
}

std::string post_json_with_retry(const std::string& endpoint, const std::string& path,
                                 const std::string& body,
                                 const std::map<std::string, std::string>& extra_headers,
                                 const RetryPolicy& policy, Rng& jitter_rng,
                                 const std::string& what) {
  const SplitUrl url = split_endpoint(endpoint);

  httplib::Headers headers;
  if (const char* key = std::getenv("AUGPE_API_KEY"); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);
  for (const auto& [k, v] : extra_headers) headers.emplace(k, v);

  std::string last_error;
  for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
    if (attempt > 0) {
      const double cap = policy.backoff_base_s * static_cast<double>(1ULL << (attempt - 1));
      const double sleep_s = jitter_rng.uniform() * cap;  // full jitter
      std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
    }

    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(std::chrono::duration<double>(policy.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(policy.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(policy.timeout_s));

    auto res = client.Post(url.base_path + path, headers, body, "application/json");
    if (!res) {
      last_error = "connection error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status == 429 || res->status >= 500) {
      last_error = "http " + std::to_string(res->status);
      continue;
    }
    throw ProtocolError(what + ": http " + std::to_string(res->status) + ": " + res->body);
  }
  throw BackendError(what + ": gave up after " + std::to_string(policy.max_attempts) +
                     " attempts; last error: " + last_error);
}

}  // namespace augpe::detail
