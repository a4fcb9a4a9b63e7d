#pragma once

#include <map>
#include <string>

#include "augpe/rng.hpp"

namespace augpe::detail {

struct SplitUrl {
  std::string scheme_host_port;  // what httplib::Client wants
  std::string base_path;         // prefix for request paths, may be empty
};

SplitUrl split_endpoint(const std::string& endpoint);

struct RetryPolicy {
  int max_attempts = 5;
  double backoff_base_s = 1.0;
  double timeout_s = 120.0;
};

/// POSTs a JSON body and returns the response body. Connection failures,
/// timeouts, 429 and 5xx responses are retried with exponential backoff and
/// full jitter; other non-2xx statuses raise ProtocolError immediately.
/// Exhausting the retry budget raises BackendError tagged with `what`.
std::string post_json_with_retry(const std::string& endpoint, const std::string& path,
                                 const std::string& body,
                                 const std::map<std::string, std::string>& extra_headers,
                                 const RetryPolicy& policy, Rng& jitter_rng,
                                 const std::string& what);

}  // namespace augpe::detail
