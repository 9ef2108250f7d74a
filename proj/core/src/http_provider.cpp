#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "battdiag/agent.hpp"

namespace battdiag {

using nlohmann::json;

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const std::string& url = config_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("provider URL '" + url + "' must start with http:// or https://");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

ProviderResponse HttpProvider::complete(const CompletionRequest& request) const {
  json body = {{"model", config_.model}, {"prompt", request.prompt}, {"temperature", 0}};
  if (request.capture_likelihoods) {
    body["logprob_tokens"] = {std::string(kAbnormalToken), std::string(kNormalToken)};
  }

  httplib::Client client(scheme_host_port_);
  if (!client.is_valid()) throw ProviderError("unsupported provider URL '" + config_.url + "'");
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (const char* token = std::getenv(config_.auth_token_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderError("provider request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status));
  }

  try {
    const json doc = json::parse(res->body);
    ProviderResponse out;
    out.text = doc.at("text").get<std::string>();
    if (doc.contains("token_likelihoods") && !doc["token_likelihoods"].is_null()) {
      std::map<std::string, double> lk;
      for (const auto& [token, value] : doc["token_likelihoods"].items()) {
        const double p = value.get<double>();
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ProviderError("token likelihood for '" + token + "' outside [0, 1]");
        }
        lk[token] = p;
      }
      out.token_likelihoods = std::move(lk);
    }
    return out;
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed provider response: ") + e.what());
  }
}

}  // namespace battdiag
