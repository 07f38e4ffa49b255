#pragma once

// Model endpoint client.  Talks HTTP(S) through cpp-httplib; tests swap in a
// Transport double so nothing here needs the network to be exercised.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "benchmark.hpp"
#include "errors.hpp"
#include "numformat.hpp"
#include "png.hpp"
#include "prediction.hpp"
#include "render.hpp"
#include "table.hpp"

namespace fc2t {

// ---- prompts ---------------------------------------------------------------------

enum class PromptVariant { Plain, YAxisHint };

inline constexpr std::array kPromptVariants{PromptVariant::Plain, PromptVariant::YAxisHint};

inline std::string_view to_string(PromptVariant v) { return v == PromptVariant::Plain ? "plain" : "hint"; }

inline PromptVariant prompt_variant_from_string(std::string_view s) {
  return detail::enum_from_string(s, kPromptVariants, "prompt variant");
}

inline constexpr const char* kBasePrompt = "Generate underlying data table for the chart.";

inline std::string build_prompt(const BenchmarkItem& item, PromptVariant variant) {
  std::string prompt = kBasePrompt;
  if (variant == PromptVariant::Plain) return prompt;
  if (item.axis.tick_values.empty()) throw ConfigError("hint prompt needs the item's axis ticks ('" + item.id + "')");
  prompt += " Hint: y-axis major ticks are ";
  for (std::size_t i = 0; i < item.axis.tick_values.size(); ++i) {
    if (i) prompt += ", ";
    prompt += format_tick(item.axis.tick_values[i], FormatKind::Scientific);
  }
  return prompt;
}

// ---- endpoint configuration ------------------------------------------------------

enum class RequestShape { OpenAIChat, Gemini, GenericMultipart };

inline constexpr std::array kRequestShapes{RequestShape::OpenAIChat, RequestShape::Gemini, RequestShape::GenericMultipart};

inline std::string_view to_string(RequestShape s) {
  switch (s) {
    case RequestShape::OpenAIChat: return "openai";
    case RequestShape::Gemini: return "gemini";
    case RequestShape::GenericMultipart: return "multipart";
  }
  return "?";
}

inline RequestShape request_shape_from_string(std::string_view s) {
  return detail::enum_from_string(s, kRequestShapes, "request shape");
}

struct RetryPolicy {
  int max_attempts = 3;
  std::vector<int> backoff_ms{2000, 8000, 30000};  // last entry repeats

  int delay_before(int attempt) const {  // attempt is 2-based: delay ahead of the second call, ...
    if (backoff_ms.empty()) return 0;
    const auto k = static_cast<std::size_t>(std::max(0, attempt - 2));
    return backoff_ms[std::min(k, backoff_ms.size() - 1)];
  }
};

struct EndpointConfig {
  std::string name;
  std::string base_url;  // full request URL
  std::string auth_env;  // environment variable holding the key; empty = no auth
  std::string model_id;
  RequestShape request_shape = RequestShape::OpenAIChat;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  double rate_limit_rpm = 60;
  RetryPolicy retry;
  int timeout_seconds = 120;
};

inline void to_json(json& j, const EndpointConfig& c) {
  j = json{{"schema_version", kSchemaVersion},
           {"name", c.name},
           {"base_url", c.base_url},
           {"auth_env", c.auth_env},
           {"model_id", c.model_id},
           {"request_shape", std::string(to_string(c.request_shape))},
           {"temperature", c.temperature},
           {"max_output_tokens", c.max_output_tokens},
           {"rate_limit_rpm", c.rate_limit_rpm},
           {"retry", {{"max_attempts", c.retry.max_attempts}, {"backoff_ms", c.retry.backoff_ms}}},
           {"timeout_seconds", c.timeout_seconds}};
}

inline void from_json(const json& j, EndpointConfig& c) {
  for (const char* forbidden : {"api_key", "key", "token", "secret"})
    if (j.contains(forbidden))
      throw ConfigError(std::string("endpoint config must not hold secrets ('") + forbidden +
                        "'); name an environment variable in auth_env");
  c = EndpointConfig{};
  c.name = j.at("name").get<std::string>();
  c.base_url = j.at("base_url").get<std::string>();
  c.auth_env = j.value("auth_env", std::string{});
  c.model_id = j.value("model_id", std::string{});
  c.request_shape = request_shape_from_string(j.value("request_shape", std::string("openai")));
  c.temperature = j.value("temperature", 0.0);
  c.max_output_tokens = j.value("max_output_tokens", 1024);
  c.rate_limit_rpm = j.value("rate_limit_rpm", 60.0);
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    c.retry.max_attempts = r.value("max_attempts", 3);
    if (r.contains("backoff_ms")) c.retry.backoff_ms = r.at("backoff_ms").get<std::vector<int>>();
  }
  c.timeout_seconds = j.value("timeout_seconds", 120);
  if (c.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (!(c.rate_limit_rpm > 0)) throw ConfigError("rate_limit_rpm must be positive");
  if (c.base_url.rfind("http://", 0) != 0 && c.base_url.rfind("https://", 0) != 0)
    throw ConfigError("base_url must start with http:// or https://");
}

inline EndpointConfig load_endpoint(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path)).get<EndpointConfig>();
  } catch (const json::exception& e) {
    throw ConfigError("bad endpoint file '" + path.string() + "': " + e.what());
  }
}

// ---- transport ---------------------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type;
  int timeout_seconds = 120;
};

struct HttpResponse {
  int status = 0;  // 0: no HTTP response (see error)
  std::string body;
  std::string error;
  bool timed_out = false;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& req) = 0;
};

class HttplibTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& req) override {
    const auto scheme_end = req.url.find("://");
    const auto path_start = req.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? req.url : req.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : req.url.substr(path_start);
    httplib::Client cli(origin);
    cli.set_connection_timeout(std::min(req.timeout_seconds, 30), 0);
    cli.set_read_timeout(req.timeout_seconds, 0);
    cli.set_write_timeout(req.timeout_seconds, 0);
    httplib::Headers headers;
    for (const auto& [k, v] : req.headers) headers.emplace(k, v);
    HttpResponse out;
    auto res = cli.Post(path, headers, req.body, req.content_type);
    if (!res) {
      const auto err = res.error();
      out.error = httplib::to_string(err);
      out.timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                      err == httplib::Error::ConnectionTimeout;
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }
};

// ---- rate limiting -------------------------------------------------------------------

// Spaces calls at least 60/rpm seconds apart across all threads sharing it.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  explicit RateLimiter(double rpm, SleepFn sleep = default_sleep)
      : interval_(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(60.0 / rpm))),
        sleep_(std::move(sleep)) {}

  void acquire() {
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    const auto wait = slot - Clock::now();
    if (wait > Clock::duration::zero()) sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
  }

  static void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

 private:
  Clock::duration interval_;
  SleepFn sleep_;
  std::mutex mu_;
  Clock::time_point next_{};
};

// ---- requests ------------------------------------------------------------------------

inline std::string base64(const std::vector<std::uint8_t>& bytes) {
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

inline HttpRequest build_request(const EndpointConfig& ep, const std::string& prompt,
                                 const std::vector<std::uint8_t>& png, const std::string& api_key) {
  HttpRequest req;
  req.url = ep.base_url;
  req.timeout_seconds = ep.timeout_seconds;
  switch (ep.request_shape) {
    case RequestShape::OpenAIChat: {
      json content = json::array();
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64(png)}}}});
      content.push_back({{"type", "text"}, {"text", prompt}});
      json body{{"model", ep.model_id},
                {"temperature", ep.temperature},
                {"max_tokens", ep.max_output_tokens},
                {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
      req.body = body.dump();
      req.content_type = "application/json";
      if (!api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + api_key);
      break;
    }
    case RequestShape::Gemini: {
      json parts = json::array();
      parts.push_back({{"inline_data", {{"mime_type", "image/png"}, {"data", base64(png)}}}});
      parts.push_back({{"text", prompt}});
      json body{{"contents", json::array({{{"role", "user"}, {"parts", parts}}})},
                {"generationConfig", {{"temperature", ep.temperature}, {"maxOutputTokens", ep.max_output_tokens}}}};
      req.body = body.dump();
      req.content_type = "application/json";
      if (!api_key.empty()) req.headers.emplace_back("x-goog-api-key", api_key);
      break;
    }
    case RequestShape::GenericMultipart: {
      const std::string boundary = "fc2t-boundary-7MA4YWxkTrZu0gW";
      auto field = [&](const std::string& name, const std::string& value) {
        return "--" + boundary + "\r\nContent-Disposition: form-data; name=\"" + name + "\"\r\n\r\n" + value + "\r\n";
      };
      std::string body;
      body += field("model", ep.model_id);
      body += field("prompt", prompt);
      body += field("temperature", shortest_repr(ep.temperature));
      body += field("max_output_tokens", std::to_string(ep.max_output_tokens));
      body += "--" + boundary +
              "\r\nContent-Disposition: form-data; name=\"image\"; filename=\"chart.png\"\r\nContent-Type: image/png\r\n\r\n";
      body.append(png.begin(), png.end());
      body += "\r\n--" + boundary + "--\r\n";
      req.body = std::move(body);
      req.content_type = "multipart/form-data; boundary=" + boundary;
      if (!api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + api_key);
      break;
    }
  }
  return req;
}

// Pulls the model's text out of a successful response body; nullopt if the body
// is not of the expected shape.
inline std::optional<std::string> extract_text(RequestShape shape, const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  try {
    switch (shape) {
      case RequestShape::OpenAIChat:
        if (j.is_discarded()) return std::nullopt;
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      case RequestShape::Gemini: {
        if (j.is_discarded()) return std::nullopt;
        std::string text;
        for (const auto& p : j.at("candidates").at(0).at("content").at("parts"))
          if (p.contains("text")) text += p.at("text").get<std::string>();
        return text;
      }
      case RequestShape::GenericMultipart:
        if (!j.is_discarded() && j.is_object()) {
          for (const char* k : {"text", "output", "response"})
            if (j.contains(k) && j.at(k).is_string()) return j.at(k).get<std::string>();
          return std::nullopt;
        }
        return body;  // plain-text servers
    }
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

inline QueryStatus classify(const HttpResponse& r) {
  if (r.status == 0) return r.timed_out ? QueryStatus::Timeout : QueryStatus::NetworkError;
  if (r.status == 401 || r.status == 403) return QueryStatus::AuthFailure;
  if (r.status == 429) return QueryStatus::Quota;
  if (r.status == 408 || r.status == 504) return QueryStatus::Timeout;
  if (r.status >= 500) return QueryStatus::ServerError;
  if (r.status >= 200 && r.status < 300) return QueryStatus::Ok;
  return QueryStatus::BadResponse;
}

inline bool retryable(QueryStatus s) {
  return s == QueryStatus::Quota || s == QueryStatus::Timeout || s == QueryStatus::ServerError ||
         s == QueryStatus::NetworkError;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct QueryContext {
  Transport* transport = nullptr;
  std::filesystem::path image_dir;
  RateLimiter* limiter = nullptr;  // optional
  RateLimiter::SleepFn sleep = RateLimiter::default_sleep;
  std::function<const char*(const char*)> getenv = [](const char* k) { return std::getenv(k); };
};

inline std::filesystem::path image_path(const BenchmarkItem& item, const std::filesystem::path& image_dir) {
  return image_dir / (item.image_ref.empty() ? image_file_name(item) : item.image_ref);
}

// One logical query: retries transient failures per the endpoint policy and
// always returns a record (failed ones carry the status and error).
inline PredictionRecord query_item(const EndpointConfig& ep, const BenchmarkItem& item, PromptVariant variant,
                                   const QueryContext& ctx) {
  PredictionRecord rec;
  rec.item_id = item.id;
  rec.model = ep.model_id.empty() ? ep.name : ep.model_id;
  rec.prompt_variant = std::string(to_string(variant));
  rec.endpoint = ep.name;

  const auto path = image_path(item, ctx.image_dir);
  std::vector<std::uint8_t> png;
  try {
    const std::string bytes = read_text_file(path);
    png.assign(bytes.begin(), bytes.end());
    const auto dims = png::read_dimensions(png);
    rec.image_width = dims.width;
    rec.image_height = dims.height;
  } catch (const std::exception& e) {
    rec.status = QueryStatus::MissingImage;
    rec.error = e.what();
    rec.timestamp = utc_timestamp();
    return rec;
  }

  std::string key;
  if (!ep.auth_env.empty()) {
    const char* v = ctx.getenv(ep.auth_env.c_str());
    if (!v || !*v) {
      rec.status = QueryStatus::AuthFailure;
      rec.error = "environment variable " + ep.auth_env + " is not set";
      rec.timestamp = utc_timestamp();
      return rec;
    }
    key = v;
  }

  const HttpRequest req = build_request(ep, build_prompt(item, variant), png, key);
  for (int attempt = 1; attempt <= ep.retry.max_attempts; ++attempt) {
    if (attempt > 1) ctx.sleep(std::chrono::milliseconds(ep.retry.delay_before(attempt)));
    if (ctx.limiter) ctx.limiter->acquire();
    const HttpResponse res = ctx.transport->post(req);
    rec.attempts = attempt;
    rec.timestamp = utc_timestamp();
    rec.status = classify(res);
    if (rec.status == QueryStatus::Ok) {
      if (auto text = extract_text(ep.request_shape, res.body)) {
        rec.raw_text = std::move(*text);
        rec.error.clear();
        return rec;
      }
      rec.status = QueryStatus::BadResponse;
      rec.error = "unexpected response body: " + res.body.substr(0, 200);
      return rec;
    }
    rec.error = res.status ? "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200) : res.error;
    if (!retryable(rec.status)) return rec;
  }
  return rec;
}

struct BatchSummary {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
};

// Queries every item not already answered successfully in the store.  Up to
// `concurrency` requests are in flight; the shared limiter paces them.
inline BatchSummary run_batch(const EndpointConfig& ep, const std::vector<BenchmarkItem>& items, PromptVariant variant,
                              PredictionStore& store, const QueryContext& ctx, unsigned concurrency = 1) {
  const std::string model = ep.model_id.empty() ? ep.name : ep.model_id;
  const std::string var(to_string(variant));
  std::atomic<std::size_t> next{0}, ok{0}, bad{0}, skip{0};
  std::mutex err_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        if (store.has_success(items[i].id, model, var)) {
          ++skip;
          continue;
        }
        const PredictionRecord rec = query_item(ep, items[i], variant, ctx);
        store.append(rec);
        rec.ok() ? ++ok : ++bad;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
        next = items.size();
      }
    }
  };
  concurrency = std::max(1u, concurrency);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < concurrency; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return {ok.load(), bad.load(), skip.load()};
}

}  // namespace fc2t
