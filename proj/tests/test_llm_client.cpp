#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "jitai/llm_client.hpp"  // also provides httplib for the stub server

using namespace jitai;

namespace {

struct StubServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~StubServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }
};

LLMClientConfig fast_config(const std::string& endpoint) {
  LLMClientConfig cfg;
  cfg.endpoint_url = endpoint;
  cfg.model_name = "test-model";
  cfg.max_retries = 2;
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::milliseconds(2000);
  return cfg;
}

}  // namespace

TEST_CASE("query_llm round-trips through a stub endpoint", "[llm_client]") {
  StubServer stub;
  std::string seen_auth;
  std::string seen_model;
  std::string seen_prompt;
  double seen_temperature = -1.0;
  stub.server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                               httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    seen_model = body.at("model").get<std::string>();
    seen_prompt = body.at("messages").at(0).at("content").get<std::string>();
    seen_temperature = body.at("temperature").get<double>();
    nlohmann::json reply;
    reply["choices"][0]["message"]["content"] = "NOT SEND: user cannot walk";
    res.set_content(reply.dump(), "application/json");
  });
  stub.start();

  REQUIRE(setenv("JITAI_TEST_API_KEY", "secret-123", 1) == 0);
  auto cfg = fast_config(stub.url("/v1/chat/completions"));
  cfg.api_key_env_var = "JITAI_TEST_API_KEY";

  const auto raw = query_llm(cfg, "prompt text here");
  CHECK(raw == "NOT SEND: user cannot walk");
  CHECK(seen_auth == "Bearer secret-123");
  CHECK(seen_model == "test-model");
  CHECK(seen_prompt == "prompt text here");
  CHECK(seen_temperature == 0.0);
  CHECK(parse_decision(raw).verdict == Verdict::NotSend);
}

TEST_CASE("query_llm retries HTTP failures max_retries+1 times", "[llm_client]") {
  StubServer stub;
  std::atomic<int> attempts{0};
  stub.server.Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++attempts;
    res.status = 500;
  });
  stub.start();

  const auto cfg = fast_config(stub.url("/chat"));
  CHECK_THROWS_MATCHES(query_llm(cfg, "p"), TransportError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("3 attempts") &&
                           Catch::Matchers::ContainsSubstring("HTTP 500")));
  CHECK(attempts.load() == 3);
}

TEST_CASE("query_llm rejects degenerate responses", "[llm_client]") {
  StubServer stub;
  stub.server.Post("/empty", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("", "application/json");
  });
  stub.server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{not json", "application/json");
  });
  stub.server.Post("/nochoice", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  stub.start();

  auto cfg = fast_config(stub.url("/empty"));
  cfg.max_retries = 0;
  CHECK_THROWS_MATCHES(query_llm(cfg, "p"), TransportError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("empty response")));

  cfg.endpoint_url = stub.url("/garbage");
  CHECK_THROWS_MATCHES(query_llm(cfg, "p"), TransportError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("malformed response")));

  cfg.endpoint_url = stub.url("/nochoice");
  CHECK_THROWS_MATCHES(query_llm(cfg, "p"), TransportError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("no choices")));
}

TEST_CASE("query_llm validates configuration before any call", "[llm_client]") {
  LLMClientConfig cfg;
  CHECK_THROWS_AS(query_llm(cfg, "p"), ConfigError);  // endpoint missing

  cfg.endpoint_url = "http://127.0.0.1:1/chat";
  CHECK_THROWS_AS(query_llm(cfg, "p"), ConfigError);  // model missing

  cfg.model_name = "m";
  cfg.api_key_env_var = "JITAI_TEST_KEY_THAT_IS_UNSET";
  unsetenv("JITAI_TEST_KEY_THAT_IS_UNSET");
  CHECK_THROWS_AS(query_llm(cfg, "p"), ConfigError);

  cfg.api_key_env_var.clear();
  cfg.endpoint_url = "127.0.0.1/chat";  // no scheme
  CHECK_THROWS_AS(query_llm(cfg, "p"), ConfigError);

  cfg.endpoint_url = "http://127.0.0.1:1/chat";
  cfg.max_retries = -1;
  CHECK_THROWS_AS(query_llm(cfg, "p"), ConfigError);
}

TEST_CASE("query_llm reports connection failures as transport errors", "[llm_client]") {
  auto cfg = fast_config("http://127.0.0.1:1/chat");  // nothing listens on port 1
  cfg.max_retries = 0;
  cfg.timeout = std::chrono::milliseconds(500);
  CHECK_THROWS_MATCHES(query_llm(cfg, "p"), TransportError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("connection failure")));
}

TEST_CASE("fnv1a matches the reference vectors", "[llm_client]") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("audit log writes one json line per exchange", "[llm_client]") {
  const auto file = std::filesystem::temp_directory_path() / "jitai_audit_test.jsonl";
  {
    AuditLog log(file);
    REQUIRE(log.enabled());
    Decision d;
    d.verdict = Verdict::NotSend;
    d.raw = "not send: resting";
    log.record(3, "some prompt", d);
    d.verdict = Verdict::Send;
    d.raw = "send";
    log.record(4, "другой prompt", d);
  }
  std::ifstream in(file);
  std::string line;
  REQUIRE(std::getline(in, line));
  auto first = nlohmann::json::parse(line);
  CHECK(first.at("t").get<int>() == 3);
  CHECK(first.at("prompt_fnv1a").get<std::uint64_t>() == fnv1a("some prompt"));
  CHECK(first.at("raw").get<std::string>() == "not send: resting");
  CHECK(first.at("verdict").get<std::string>() == "not_send");
  REQUIRE(std::getline(in, line));
  auto second = nlohmann::json::parse(line);
  CHECK(second.at("t").get<int>() == 4);
  CHECK(second.at("verdict").get<std::string>() == "send");
  CHECK_FALSE(std::getline(in, line));
  std::filesystem::remove(file);

  AuditLog disabled;
  CHECK_FALSE(disabled.enabled());
  CHECK_NOTHROW(disabled.record(0, "p", Decision{}));

  CHECK_THROWS_AS(AuditLog("/nonexistent_dir_for_audit/x.jsonl"), IoError);
}
