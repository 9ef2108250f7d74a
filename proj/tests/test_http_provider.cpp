#include <cstdlib>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "battdiag/agent.hpp"

namespace battdiag {
namespace {

using nlohmann::json;

// Local completion endpoint that records the last request.
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu_);
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
      }
      if (status_ != 200) {
        res.status = status_;
        return;
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      res.set_content(reply_, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/complete"; }
  json last_body() {
    std::lock_guard lock(mu_);
    return json::parse(last_body_);
  }
  std::string last_auth() {
    std::lock_guard lock(mu_);
    return last_auth_;
  }

  std::string reply_ = R"({"text": "ok"})";
  int status_ = 200;
  int delay_ms_ = 0;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::string last_body_;
  std::string last_auth_;
};

HttpProviderConfig config_for(const FakeEndpoint& ep) {
  HttpProviderConfig cfg;
  cfg.url = ep.url();
  cfg.model = "test-model";
  cfg.auth_token_env = "BATTDIAG_TEST_TOKEN";
  cfg.timeout = std::chrono::seconds(2);
  return cfg;
}

TEST(HttpProvider, SendsPromptAndParsesLikelihoods) {
  FakeEndpoint ep;
  ep.reply_ = R"({"text": "Abnormal.", "token_likelihoods": {"Abnormal": 0.08, "Normal": 0.02}})";
  ::setenv("BATTDIAG_TEST_TOKEN", "secret-123", 1);
  const HttpProvider provider(config_for(ep));
  const auto r = provider.complete({"the prompt", true});
  ::unsetenv("BATTDIAG_TEST_TOKEN");

  EXPECT_EQ(r.text, "Abnormal.");
  EXPECT_NEAR(calibrate(r), 0.8, 1e-12);
  const json body = ep.last_body();
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["prompt"], "the prompt");
  EXPECT_EQ(body["temperature"], 0);
  EXPECT_EQ(body["logprob_tokens"], json::array({"Abnormal", "Normal"}));
  EXPECT_EQ(ep.last_auth(), "Bearer secret-123");
  EXPECT_EQ(provider.id(), "http:test-model");
}

TEST(HttpProvider, ReportOnlyRequestOmitsTokens) {
  FakeEndpoint ep;
  const HttpProvider provider(config_for(ep));
  const auto r = provider.complete({"p", false});
  EXPECT_FALSE(r.token_likelihoods.has_value());
  EXPECT_FALSE(ep.last_body().contains("logprob_tokens"));
  EXPECT_EQ(ep.last_auth(), "");
}

TEST(HttpProvider, ServerErrorsAreProviderErrors) {
  FakeEndpoint ep;
  ep.status_ = 500;
  const HttpProvider provider(config_for(ep));
  EXPECT_THROW(provider.complete({"p", true}), ProviderError);
}

TEST(HttpProvider, MalformedRepliesAreProviderErrors) {
  FakeEndpoint ep;
  const HttpProvider provider(config_for(ep));
  ep.reply_ = "not json";
  EXPECT_THROW(provider.complete({"p", true}), ProviderError);
  ep.reply_ = R"({"token_likelihoods": {}})";
  EXPECT_THROW(provider.complete({"p", true}), ProviderError);
  ep.reply_ = R"({"text": "x", "token_likelihoods": {"Abnormal": 1.5}})";
  EXPECT_THROW(provider.complete({"p", true}), ProviderError);
}

TEST(HttpProvider, TimeoutIsProviderError) {
  FakeEndpoint ep;
  ep.delay_ms_ = 2500;
  auto cfg = config_for(ep);
  cfg.timeout = std::chrono::seconds(1);
  const HttpProvider provider(cfg);
  EXPECT_THROW(provider.complete({"p", true}), ProviderError);
}

TEST(HttpProvider, UnreachableEndpoint) {
  HttpProviderConfig cfg;
  cfg.url = "http://127.0.0.1:1/v1/complete";
  cfg.timeout = std::chrono::seconds(1);
  EXPECT_THROW(HttpProvider(cfg).complete({"p", false}), ProviderError);
  cfg.url = "127.0.0.1/v1";
  EXPECT_THROW(HttpProvider{cfg}, ConfigError);
}

}  // namespace
}  // namespace battdiag
