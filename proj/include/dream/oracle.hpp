#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "dream/errors.hpp"
#include "dream/util.hpp"

namespace dream {

enum class OracleMode { kLive, kCachedOnly, kMock };

inline const char* to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::kLive: return "live";
    case OracleMode::kCachedOnly: return "cached_only";
    case OracleMode::kMock: return "mock";
  }
  return "mock";
}

inline OracleMode oracle_mode_from_string(std::string_view s) {
  if (s == "live") return OracleMode::kLive;
  if (s == "cached_only") return OracleMode::kCachedOnly;
  if (s == "mock") return OracleMode::kMock;
  throw ConfigError("unknown oracle mode: '" + std::string(s) + "'");
}

struct OracleConfig {
  std::string endpoint;  // base URL, e.g. https://api.openai.com/v1
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  std::size_t max_retries = 3;
  std::size_t timeout_s = 30;
  std::string cache_dir;
  OracleMode mode = OracleMode::kMock;
  std::string mock_fixture;     // response fixture file, mock mode only
  std::size_t backoff_base_ms = 250;
  double rate_limit_qps = 0.0;  // 0 = unlimited
  std::size_t concurrency = 1;  // in-flight query limit for validate()
};

inline nlohmann::json oracle_config_to_json(const OracleConfig& c) {
  return nlohmann::json{
      {"api_key_env", c.api_key_env},
      {"backoff_base_ms", c.backoff_base_ms},
      {"cache_dir", c.cache_dir},
      {"concurrency", c.concurrency},
      {"endpoint", c.endpoint},
      {"max_retries", c.max_retries},
      {"mock_fixture", c.mock_fixture},
      {"mode", to_string(c.mode)},
      {"model", c.model},
      {"rate_limit_qps", c.rate_limit_qps},
      {"temperature", c.temperature},
      {"timeout_s", c.timeout_s},
  };
}

inline OracleConfig oracle_config_from_json(const nlohmann::json& j, const char* where = "oracle config") {
  OracleConfig c;
  try {
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("backoff_base_ms")) c.backoff_base_ms = j.at("backoff_base_ms").get<std::size_t>();
    if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("concurrency")) c.concurrency = j.at("concurrency").get<std::size_t>();
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("max_retries")) c.max_retries = j.at("max_retries").get<std::size_t>();
    if (j.contains("mock_fixture")) c.mock_fixture = j.at("mock_fixture").get<std::string>();
    if (j.contains("mode")) c.mode = oracle_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("rate_limit_qps")) c.rate_limit_qps = j.at("rate_limit_qps").get<double>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("timeout_s")) c.timeout_s = j.at("timeout_s").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
  if (c.concurrency < 1) throw ConfigError(std::string(where) + ": concurrency must be >= 1");
  return c;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

namespace detail {

// Blocking token bucket; capacity one token, refilled at qps.
class TokenBucket {
 public:
  explicit TokenBucket(double qps) : qps_(qps), tokens_(1.0), last_(Clock::now()) {}

  void acquire() {
    if (qps_ <= 0.0) return;
    std::unique_lock<std::mutex> lock(mu_);
    while (true) {
      const auto now = Clock::now();
      tokens_ = std::min(1.0, tokens_ + std::chrono::duration<double>(now - last_).count() * qps_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const auto wait = std::chrono::duration<double>((1.0 - tokens_) / qps_);
      lock.unlock();
      std::this_thread::sleep_for(wait);
      lock.lock();
    }
  }

 private:
  using Clock = std::chrono::steady_clock;
  double qps_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

inline std::string iso8601_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string response_content(const nlohmann::json& body, const std::string& context) {
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    throw OracleError(context + ": response has no choices");
  const nlohmann::json& msg = body["choices"][0];
  if (!msg.contains("message") || !msg["message"].contains("content") || !msg["message"]["content"].is_string())
    throw OracleError(context + ": response has no message content");
  return msg["message"]["content"].get<std::string>();
}

}  // namespace detail

struct OracleStats {
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t mock_hits = 0;
  std::size_t retries = 0;
};

// Chat-completions client with deterministic replay: identical requests hash
// to identical cache keys regardless of mode.
class OracleClient {
 public:
  explicit OracleClient(OracleConfig config) : config_(std::move(config)), bucket_(config_.rate_limit_qps) {
    switch (config_.mode) {
      case OracleMode::kLive: {
        if (config_.endpoint.empty()) throw ConfigError("oracle: live mode requires an endpoint");
        const char* key = config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0')
          throw ConfigError("oracle: live mode requires API key in environment variable '" + config_.api_key_env +
                            "'");
        api_key_ = key;
        break;
      }
      case OracleMode::kCachedOnly:
        if (config_.cache_dir.empty()) throw ConfigError("oracle: cached_only mode requires a cache path");
        break;
      case OracleMode::kMock: {
        if (config_.mock_fixture.empty()) throw ConfigError("oracle: mock mode requires a response fixture file");
        try {
          fixture_ = nlohmann::json::parse(read_file(config_.mock_fixture));
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError("oracle: invalid mock fixture: " + std::string(e.what()));
        }
        break;
      }
    }
  }

  const OracleConfig& config() const { return config_; }

  OracleStats stats() const {
    return {network_calls_.load(), cache_hits_.load(), mock_hits_.load(), retries_.load()};
  }

  // id identifies the triple for error messages and mock lookup.
  std::string query(const std::string& system_text, const std::string& user_text, const std::string& id) {
    const nlohmann::json request = {
        {"messages",
         {{{"content", system_text}, {"role", "system"}}, {{"content", user_text}, {"role", "user"}}}},
        {"model", config_.model},
        {"temperature", config_.temperature},
    };
    const std::string canonical = request.dump();
    const std::string hash = sha256_hex(canonical);

    if (config_.mode == OracleMode::kMock) {
      if (fixture_.contains("by_hash") && fixture_["by_hash"].contains(hash)) {
        ++mock_hits_;
        return fixture_["by_hash"][hash].get<std::string>();
      }
      if (fixture_.contains("by_id") && fixture_["by_id"].contains(id)) {
        ++mock_hits_;
        return fixture_["by_id"][id].get<std::string>();
      }
      throw OracleError("oracle: mock fixture has no response for '" + id + "' (hash " + hash + ")");
    }

    if (!config_.cache_dir.empty()) {
      const std::filesystem::path path = cache_path(hash);
      std::error_code ec;
      if (std::filesystem::exists(path, ec)) {
        nlohmann::json entry;
        try {
          entry = nlohmann::json::parse(read_file(path.string()));
        } catch (const nlohmann::json::exception& e) {
          throw OracleError("oracle: corrupt cache entry " + path.string() + ": " + e.what());
        }
        ++cache_hits_;
        return detail::response_content(entry.at("response"), "oracle cache " + hash);
      }
    }
    if (config_.mode == OracleMode::kCachedOnly)
      throw OracleError("oracle: cache miss for '" + id + "' (hash " + hash + ")");

    const nlohmann::json body = post_with_retries(canonical, id);
    const std::string content = detail::response_content(body, "oracle response for '" + id + "'");
    if (!config_.cache_dir.empty()) {
      const nlohmann::json entry = {
          {"request", request}, {"response", body}, {"timestamp", detail::iso8601_now()}};
      const std::lock_guard<std::mutex> lock(cache_mu_);
      write_file(cache_path(hash).string(), entry.dump() + "\n");
    }
    return content;
  }

 private:
  std::filesystem::path cache_path(const std::string& hash) const {
    return std::filesystem::path(config_.cache_dir) / (hash + ".json");
  }

  nlohmann::json post_with_retries(const std::string& body, const std::string& id) {
    std::string host;
    std::string prefix;
    const std::size_t scheme = config_.endpoint.find("://");
    const std::size_t slash =
        config_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash == std::string::npos) {
      host = config_.endpoint;
    } else {
      host = config_.endpoint.substr(0, slash);
      prefix = config_.endpoint.substr(slash);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    const std::string path = prefix + "/chat/completions";

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        ++retries_;
        std::this_thread::sleep_for(
            std::chrono::milliseconds(config_.backoff_base_ms * (std::size_t{1} << (attempt - 1))));
      }
      bucket_.acquire();
      ++network_calls_;
      httplib::Client client(host);
      client.set_connection_timeout(static_cast<time_t>(config_.timeout_s), 0);
      client.set_read_timeout(static_cast<time_t>(config_.timeout_s), 0);
      client.set_write_timeout(static_cast<time_t>(config_.timeout_s), 0);
      if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);
      const httplib::Result res = client.Post(path, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300)
        throw OracleError("oracle: HTTP " + std::to_string(res->status) + " for '" + id + "': " + res->body);
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw OracleError("oracle: invalid response body for '" + id + "': " + e.what());
      }
    }
    throw OracleError("oracle: giving up on '" + id + "' after " + std::to_string(config_.max_retries + 1) +
                      " attempts (" + last_error + ")");
  }

  OracleConfig config_;
  std::string api_key_;
  nlohmann::json fixture_;
  detail::TokenBucket bucket_;
  std::mutex cache_mu_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> mock_hits_{0};
  std::atomic<std::size_t> retries_{0};
};

}  // namespace dream
