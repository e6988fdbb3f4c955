#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "s3/common/error.hpp"
#include "s3/llm/remote_backend.hpp"

using namespace s3;
using namespace s3::llm;

namespace {

/// Local server replaying a queue of (status, body) responses.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      auto [status, body] = script_.empty() ? std::pair{500, std::string("empty script")} : script_.front();
      if (!script_.empty()) script_.pop_front();
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  void push(int status, std::string body) {
    std::lock_guard lock(mu_);
    script_.emplace_back(status, std::move(body));
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int hits() {
    std::lock_guard lock(mu_);
    return hits_;
  }
  std::string last_auth() {
    std::lock_guard lock(mu_);
    return last_auth_;
  }
  nlohmann::json last_body() {
    std::lock_guard lock(mu_);
    return nlohmann::json::parse(last_body_);
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::deque<std::pair<int, std::string>> script_;
  int hits_ = 0;
  std::string last_auth_;
  std::string last_body_;
};

std::string ok_body(std::vector<std::string> texts) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array();
  for (auto& t : texts) j["choices"].push_back({{"message", {{"role", "assistant"}, {"content", t}}}});
  return j.dump();
}

struct Harness {
  FakeServer server;
  std::vector<std::chrono::milliseconds> sleeps;
  RemoteBackend backend{make_config(), [this](std::chrono::milliseconds d) { sleeps.push_back(d); }};

  RemoteConfig make_config() {
    RemoteConfig c;
    c.base_url = server.url();
    c.api_key = "sk-test";
    c.timeout = std::chrono::milliseconds(5000);
    c.max_retries = 3;
    c.backoff_base = std::chrono::milliseconds(100);
    return c;
  }
};

GenerationRequest req(std::string prompt, int n = 1) {
  GenerationRequest r;
  r.prompt = std::move(prompt);
  r.n = n;
  return r;
}

BackendErrorKind kind_of(RemoteBackend& b, const GenerationRequest& r) {
  try {
    b.generate(r);
  } catch (const BackendError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a BackendError";
  return BackendErrorKind::protocol;
}

}  // namespace

TEST(Remote, SendsChatRequestAndParsesChoices) {
  Harness h;
  h.server.push(200, ok_body({"one", "two"}));
  auto r = req("hello", 2);
  r.temperature = 0.7;
  EXPECT_EQ(h.backend.generate(r), (std::vector<std::string>{"one", "two"}));
  EXPECT_EQ(h.server.last_auth(), "Bearer sk-test");
  const auto body = h.server.last_body();
  EXPECT_EQ(body["messages"][0]["content"], "hello");
  EXPECT_EQ(body["n"], 2);
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_EQ(h.backend.id(), "remote:gpt-3.5-turbo");
}

TEST(Remote, RetriesRateLimitsWithBackoff) {
  Harness h;
  h.server.push(429, "{}");
  h.server.push(503, "{}");
  h.server.push(200, ok_body({"fine"}));
  EXPECT_EQ(h.backend.generate(req("p")).front(), "fine");
  EXPECT_EQ(h.server.hits(), 3);
  ASSERT_EQ(h.sleeps.size(), 2u);
  EXPECT_EQ(h.sleeps[0].count(), 100);
  EXPECT_EQ(h.sleeps[1].count(), 200);
}

TEST(Remote, AuthFailureIsNotRetried) {
  Harness h;
  h.server.push(401, R"({"error":"bad key"})");
  EXPECT_EQ(kind_of(h.backend, req("p")), BackendErrorKind::auth);
  EXPECT_EQ(h.server.hits(), 1);
  EXPECT_TRUE(h.sleeps.empty());
}

TEST(Remote, PersistentServerErrorGivesUpAfterBudget) {
  Harness h;
  for (int i = 0; i < 4; ++i) h.server.push(500, "oops");
  EXPECT_EQ(kind_of(h.backend, req("p")), BackendErrorKind::http);
  EXPECT_EQ(h.server.hits(), 4);
  EXPECT_EQ(h.sleeps.size(), 3u);
}

TEST(Remote, ContextOverflowIsPromptTooLong) {
  Harness h;
  h.server.push(400, R"({"error":{"code":"context_length_exceeded"}})");
  EXPECT_EQ(kind_of(h.backend, req("p")), BackendErrorKind::prompt_too_long);
  EXPECT_EQ(h.server.hits(), 1);
}

TEST(Remote, LocalPromptLimitShortCircuits) {
  Harness h;
  RemoteConfig c = h.make_config();
  c.max_prompt_chars = 4;
  RemoteBackend b(c, [](std::chrono::milliseconds) {});
  EXPECT_EQ(kind_of(b, req("too long")), BackendErrorKind::prompt_too_long);
  EXPECT_EQ(h.server.hits(), 0);
}

TEST(Remote, WrongChoiceCountIsProtocolError) {
  Harness h;
  h.server.push(200, ok_body({"only one"}));
  EXPECT_EQ(kind_of(h.backend, req("p", 2)), BackendErrorKind::protocol);
  h.server.push(200, "not json");
  EXPECT_EQ(kind_of(h.backend, req("p")), BackendErrorKind::protocol);
}

TEST(Remote, ConfigFromEnvironment) {
  ::unsetenv(kApiKeyEnv);
  try {
    remote_config_from_env();
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::auth);
    EXPECT_NE(std::string(e.what()).find("S3_LLM_API_KEY"), std::string::npos);
  }
  ::setenv(kApiKeyEnv, "k", 1);
  ::setenv(kBaseUrlEnv, "http://localhost:1/v1", 1);
  const auto c = remote_config_from_env();
  EXPECT_EQ(c.api_key, "k");
  EXPECT_EQ(c.base_url, "http://localhost:1/v1");
  ::unsetenv(kApiKeyEnv);
  ::unsetenv(kBaseUrlEnv);
  RemoteConfig bad;
  bad.base_url = "no-scheme";
  EXPECT_THROW(RemoteBackend{bad}, ConfigError);
}
