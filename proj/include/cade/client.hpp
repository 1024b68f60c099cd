#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "cade/error.hpp"
#include "cade/types.hpp"

namespace cade::client {

struct LogitRequest {
  std::string record_id;
  ViewKind view = ViewKind::Q;
  std::vector<std::string> candidates;
  nlohmann::json payload_refs;  // opaque provenance, forwarded untouched
};

struct ClientConfig {
  int timeout_seconds = 10;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{100};  // doubles per retry
};

/// Endpoint taken from CADE_ENDPOINT when the caller passes none.
inline std::string default_endpoint() {
  const char* env = std::getenv("CADE_ENDPOINT");
  if (env == nullptr || *env == '\0')
    throw InvalidInput("no endpoint given and CADE_ENDPOINT is unset");
  return env;
}

/// POST /logits against a provider endpoint and validate the returned vector.
/// Transient failures (connection errors, 5xx) are retried with exponential
/// backoff; a malformed response fails immediately.
inline std::vector<double> fetch_view_logits(const std::string& endpoint, const LogitRequest& req,
                                             const ClientConfig& cfg = {}) {
  nlohmann::json body{{"id", req.record_id},
                      {"view", to_string(req.view)},
                      {"candidates", req.candidates},
                      {"payload_refs", req.payload_refs}};
  std::string body_str = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(cfg.backoff_base * (1 << (attempt - 1)));

    httplib::Client cli(endpoint);
    cli.set_connection_timeout(cfg.timeout_seconds, 0);
    cli.set_read_timeout(cfg.timeout_seconds, 0);
    auto res = cli.Post("/logits", body_str, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw ProtocolError("endpoint returned status " + std::to_string(res->status));

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("unparsable response: ") + e.what());
    }
    if (!j.contains("logits") || !j["logits"].is_array())
      throw ProtocolError("response missing 'logits' array");
    std::vector<double> logits;
    try {
      logits = j["logits"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("'logits' array contains non-numeric entries");
    }
    if (logits.size() != req.candidates.size())
      throw ProtocolError("logit count " + std::to_string(logits.size()) +
                          " does not match candidate count " +
                          std::to_string(req.candidates.size()));
    for (double z : logits)
      if (!std::isfinite(z)) throw ProtocolError("non-finite logit in response");
    return logits;
  }
  throw EndpointUnavailable("endpoint " + endpoint + " unavailable after " +
                            std::to_string(cfg.max_attempts) + " attempts: " + last_error);
}

}  // namespace cade::client
