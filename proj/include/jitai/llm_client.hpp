#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

// resolv.h, pulled in by httplib, leaks a `_res` object-like macro that
// corrupts later declarations using that name (notably inside Eigen).
#ifdef _res
#undef _res
#endif

#include <json.hpp>

#include "jitai/errors.hpp"
#include "jitai/llm.hpp"
#include "jitai/rng.hpp"

namespace jitai {

// OpenAI-style chat-completion endpoint. The key, if any, is read from the
// named environment variable at call time and sent as a bearer token.
struct LLMClientConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env_var;  // empty = endpoint needs no auth
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  double temperature = 0.0;
  std::chrono::milliseconds initial_backoff{200};
};

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url must start with http:// or https://: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

// Single user message, configured temperature; returns the assistant text of
// the first choice. Transport failures are retried with exponential backoff;
// after max_retries+1 attempts a TransportError carries the last detail.
inline std::string query_llm(const LLMClientConfig& cfg, const std::string& prompt) {
  if (cfg.endpoint_url.empty()) throw ConfigError("endpoint_url is not set");
  if (cfg.model_name.empty()) throw ConfigError("model_name is not set");
  if (cfg.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  std::string api_key;
  if (!cfg.api_key_env_var.empty()) {
    const char* key = std::getenv(cfg.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("API key environment variable is not set: " + cfg.api_key_env_var);
    }
    api_key = key;
  }
  const auto [base, path] = detail::split_url(cfg.endpoint_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base.rfind("https://", 0) == 0) {
    throw ConfigError("built without TLS support; use an http:// endpoint");
  }
#endif

  nlohmann::json body = {
      {"model", cfg.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", cfg.temperature},
  };
  const std::string payload = body.dump();

  std::string last_error;
  auto backoff = cfg.initial_backoff;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(base);
    client.set_connection_timeout(cfg.timeout);
    client.set_read_timeout(cfg.timeout);
    client.set_write_timeout(cfg.timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->body.empty()) {
      last_error = "empty response body";
      continue;
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      const auto& choices = reply.at("choices");
      if (!choices.is_array() || choices.empty()) {
        last_error = "response has no choices";
        continue;
      }
      return choices.at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
      continue;
    }
  }
  throw TransportError("chat completion failed after " + std::to_string(cfg.max_retries + 1) +
                       " attempts (" + last_error + ")");
}

// JSON-lines audit trail of every live exchange: day, prompt digest, raw
// response, parsed verdict.
class AuditLog {
 public:
  AuditLog() = default;

  explicit AuditLog(const std::filesystem::path& file)
      : out_(std::make_unique<std::ofstream>(file, std::ios::out | std::ios::trunc)) {
    if (!*out_) throw IoError("cannot open audit log: " + file.string());
  }

  bool enabled() const { return out_ != nullptr; }

  void record(int t, const std::string& prompt, const Decision& decision) {
    if (!out_) return;
    nlohmann::json line = {
        {"t", t},
        {"prompt_fnv1a", fnv1a(prompt)},
        {"raw", decision.raw},
        {"verdict", std::string(to_string(decision.verdict))},
    };
    *out_ << line.dump() << '\n';
    out_->flush();
  }

 private:
  std::unique_ptr<std::ofstream> out_;
};

}  // namespace jitai
