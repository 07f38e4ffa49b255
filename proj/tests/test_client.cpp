#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <set>

#include "fc2t/client.hpp"

using namespace fc2t;
namespace fs = std::filesystem;

namespace {

BenchmarkItem demo_item(const std::string& id = "demo") {
  BenchmarkItem it;
  it.id = id;
  it.table_id = id;
  it.source_table_id = id;
  it.axis = detail::axis_over(Decimal{0, 0}, Decimal{1, 1}, 6, FormatKind::Plain);
  return it;
}

EndpointConfig demo_endpoint(RequestShape shape = RequestShape::OpenAIChat) {
  EndpointConfig ep;
  ep.name = "mock";
  ep.base_url = "http://127.0.0.1:1/v1/chat";
  ep.model_id = "mock-model";
  ep.request_shape = shape;
  ep.retry.backoff_ms = {1, 2, 3};
  return ep;
}

// Scripted transport: answers each request with the next queued response, or an
// OpenAI-style echo of the prompt once the queue is empty.
struct MockTransport : Transport {
  std::mutex mu;
  std::vector<HttpResponse> queue;
  std::vector<HttpRequest> seen;
  std::function<HttpResponse(const HttpRequest&)> fn;

  HttpResponse post(const HttpRequest& req) override {
    std::lock_guard lock(mu);
    seen.push_back(req);
    if (fn) return fn(req);
    if (!queue.empty()) {
      auto r = queue.front();
      queue.erase(queue.begin());
      return r;
    }
    return {200, R"({"choices":[{"message":{"content":"c | A\nr | 1"}}]})", "", false};
  }
};

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

void write_png(const fs::path& p) {
  const std::vector<std::uint8_t> rgb(4 * 3 * 3, 200);
  const auto bytes = png::encode_rgb(rgb, 4, 3);
  write_text_file(p, std::string(bytes.begin(), bytes.end()));
}

}  // namespace

TEST(Prompt, Variants) {
  const auto it = demo_item();
  EXPECT_EQ(build_prompt(it, PromptVariant::Plain), "Generate underlying data table for the chart.");
  EXPECT_EQ(build_prompt(it, PromptVariant::YAxisHint),
            "Generate underlying data table for the chart. Hint: y-axis major ticks are 0.00e+0, 2.00e+0, 4.00e+0, "
            "6.00e+0, 8.00e+0, 1.00e+1");
  BenchmarkItem bare;
  EXPECT_THROW(build_prompt(bare, PromptVariant::YAxisHint), ConfigError);
  EXPECT_EQ(prompt_variant_from_string("hint"), PromptVariant::YAxisHint);
}

TEST(Endpoint, JsonRoundTripAndSecretRejection) {
  const auto ep = demo_endpoint(RequestShape::Gemini);
  const auto back = json(ep).get<EndpointConfig>();
  EXPECT_EQ(back.request_shape, RequestShape::Gemini);
  EXPECT_EQ(back.retry.backoff_ms, ep.retry.backoff_ms);
  json j = ep;
  j["api_key"] = "sk-123";
  EXPECT_THROW(j.get<EndpointConfig>(), ConfigError);
  j.erase("api_key");
  j["base_url"] = "ftp://x";
  EXPECT_THROW(j.get<EndpointConfig>(), ConfigError);
  j["base_url"] = "https://x";
  j["retry"]["max_attempts"] = 0;
  EXPECT_THROW(j.get<EndpointConfig>(), ConfigError);
}

TEST(Request, Shapes) {
  const std::vector<std::uint8_t> png{1, 2, 3};
  auto oa = build_request(demo_endpoint(), "p", png, "KEY");
  const auto body = json::parse(oa.body);
  EXPECT_EQ(body["model"], "mock-model");
  EXPECT_EQ(body["messages"][0]["content"][0]["image_url"]["url"], "data:image/png;base64,AQID");
  EXPECT_EQ(oa.headers.at(0).second, "Bearer KEY");

  auto gm = build_request(demo_endpoint(RequestShape::Gemini), "p", png, "KEY");
  EXPECT_EQ(json::parse(gm.body)["contents"][0]["parts"][0]["inline_data"]["data"], "AQID");
  EXPECT_EQ(gm.headers.at(0).first, "x-goog-api-key");

  auto mp = build_request(demo_endpoint(RequestShape::GenericMultipart), "p", png, "");
  EXPECT_NE(mp.content_type.find("multipart/form-data; boundary="), std::string::npos);
  EXPECT_NE(mp.body.find("name=\"image\""), std::string::npos);
  EXPECT_TRUE(mp.headers.empty());
}

TEST(Response, ExtractAndClassify) {
  EXPECT_EQ(extract_text(RequestShape::OpenAIChat, R"({"choices":[{"message":{"content":"x"}}]})"), "x");
  EXPECT_EQ(extract_text(RequestShape::Gemini, R"({"candidates":[{"content":{"parts":[{"text":"a"},{"text":"b"}]}}]})"),
            "ab");
  EXPECT_EQ(extract_text(RequestShape::GenericMultipart, "plain body"), "plain body");
  EXPECT_EQ(extract_text(RequestShape::GenericMultipart, R"({"output":"o"})"), "o");
  EXPECT_FALSE(extract_text(RequestShape::OpenAIChat, "{}").has_value());
  EXPECT_EQ(classify({401, "", "", false}), QueryStatus::AuthFailure);
  EXPECT_EQ(classify({429, "", "", false}), QueryStatus::Quota);
  EXPECT_EQ(classify({503, "", "", false}), QueryStatus::ServerError);
  EXPECT_EQ(classify({0, "", "x", true}), QueryStatus::Timeout);
  EXPECT_EQ(classify({0, "", "x", false}), QueryStatus::NetworkError);
  EXPECT_EQ(classify({404, "", "", false}), QueryStatus::BadResponse);
  EXPECT_TRUE(retryable(QueryStatus::Quota));
  EXPECT_FALSE(retryable(QueryStatus::AuthFailure));
}

TEST(Query, EchoAndRetries) {
  Scratch s("fc2t_test_query");
  write_png(s.dir / "demo.png");
  MockTransport mock;
  std::vector<long> slept;
  QueryContext ctx;
  ctx.transport = &mock;
  ctx.image_dir = s.dir;
  ctx.sleep = [&](std::chrono::milliseconds d) { slept.push_back(d.count()); };

  auto rec = query_item(demo_endpoint(), demo_item(), PromptVariant::Plain, ctx);
  EXPECT_EQ(rec.status, QueryStatus::Ok);
  EXPECT_EQ(rec.raw_text, "c | A\nr | 1");
  EXPECT_EQ(rec.attempts, 1);
  EXPECT_EQ(rec.image_width, 4);

  mock.fn = [](const HttpRequest&) { return HttpResponse{429, "slow down", "", false}; };
  rec = query_item(demo_endpoint(), demo_item(), PromptVariant::Plain, ctx);
  EXPECT_EQ(rec.status, QueryStatus::Quota);
  EXPECT_EQ(rec.attempts, 3);
  EXPECT_EQ(slept, (std::vector<long>{1, 2}));

  mock.fn = nullptr;
  mock.queue = {{500, "", "", false}};
  rec = query_item(demo_endpoint(), demo_item(), PromptVariant::Plain, ctx);
  EXPECT_EQ(rec.status, QueryStatus::Ok);
  EXPECT_EQ(rec.attempts, 2);

  rec = query_item(demo_endpoint(), demo_item("absent"), PromptVariant::Plain, ctx);
  EXPECT_EQ(rec.status, QueryStatus::MissingImage);
}

TEST(Query, MissingKeyIsAuthFailure) {
  Scratch s("fc2t_test_auth");
  write_png(s.dir / "demo.png");
  MockTransport mock;
  QueryContext ctx;
  ctx.transport = &mock;
  ctx.image_dir = s.dir;
  ctx.getenv = [](const char*) -> const char* { return nullptr; };
  auto ep = demo_endpoint();
  ep.auth_env = "FC2T_TEST_KEY";
  const auto rec = query_item(ep, demo_item(), PromptVariant::Plain, ctx);
  EXPECT_EQ(rec.status, QueryStatus::AuthFailure);
  EXPECT_TRUE(mock.seen.empty());
  ctx.getenv = [](const char*) -> const char* { return "abc"; };
  EXPECT_EQ(query_item(ep, demo_item(), PromptVariant::Plain, ctx).status, QueryStatus::Ok);
  EXPECT_EQ(mock.seen.back().headers.at(0).second, "Bearer abc");
}

TEST(Batch, IdempotentAndCountsFailures) {
  Scratch s("fc2t_test_batch");
  std::vector<BenchmarkItem> items;
  for (int i = 0; i < 10; ++i) {
    items.push_back(demo_item("it" + std::to_string(i)));
    write_png(s.dir / (items.back().id + ".png"));
  }
  MockTransport mock;
  QueryContext ctx;
  ctx.transport = &mock;
  ctx.image_dir = s.dir;
  ctx.sleep = [](std::chrono::milliseconds) {};
  PredictionStore store(s.dir / "preds.jsonl");
  auto sum = run_batch(demo_endpoint(), items, PromptVariant::Plain, store, ctx, 4);
  EXPECT_EQ(sum.succeeded, 10u);
  EXPECT_EQ(sum.failed, 0u);
  PredictionStore reopened(s.dir / "preds.jsonl");
  sum = run_batch(demo_endpoint(), items, PromptVariant::Plain, reopened, ctx, 2);
  EXPECT_EQ(sum.skipped, 10u);
  EXPECT_EQ(read_predictions(s.dir / "preds.jsonl").size(), 10u);

  // a different variant is a different key; items whose image is 9x9 always fail
  for (const auto& id : {"it1", "it4", "it7"}) {
    const std::vector<std::uint8_t> rgb(9 * 9 * 3, 1);
    const auto bytes = png::encode_rgb(rgb, 9, 9);
    write_text_file(s.dir / (std::string(id) + ".png"), std::string(bytes.begin(), bytes.end()));
  }
  const std::string bad_b64 = [] {
    const std::vector<std::uint8_t> rgb(9 * 9 * 3, 1);
    return base64(png::encode_rgb(rgb, 9, 9));
  }();
  mock.fn = [&](const HttpRequest& r) {
    if (r.body.find(bad_b64) != std::string::npos) return HttpResponse{403, "", "", false};
    return HttpResponse{200, R"({"choices":[{"message":{"content":"ok"}}]})", "", false};
  };
  sum = run_batch(demo_endpoint(), items, PromptVariant::YAxisHint, reopened, ctx, 3);
  EXPECT_EQ(sum.succeeded, 7u);
  EXPECT_EQ(sum.failed, 3u);
  EXPECT_EQ(sum.skipped, 0u);
  // failed ones are retried on the next run
  mock.fn = nullptr;
  sum = run_batch(demo_endpoint(), items, PromptVariant::YAxisHint, reopened, ctx, 3);
  EXPECT_EQ(sum.succeeded, 3u);
  EXPECT_EQ(sum.skipped, 7u);
}

TEST(RateLimiter, SpacesCalls) {
  std::vector<long> waits;
  RateLimiter lim(600, [&](std::chrono::milliseconds d) { waits.push_back(d.count()); });  // 100 ms apart
  for (int i = 0; i < 4; ++i) lim.acquire();
  ASSERT_EQ(waits.size(), 3u);  // first call is free, sleep is injected so time does not advance
  EXPECT_GE(waits[0], 95);
  EXPECT_GE(waits[2], 295);
}

TEST(Integration, LocalHttpServer) {
  Scratch s("fc2t_test_http");
  write_png(s.dir / "demo.png");
  httplib::Server srv;
  std::atomic<int> hits{0};
  srv.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (req.get_header_value("Authorization") != "Bearer local-key") {
      res.status = 401;
      return;
    }
    const auto body = json::parse(req.body);
    res.set_content(json{{"choices", {{{"message", {{"content", body["messages"][0]["content"][1]["text"]}}}}}}}.dump(),
                    "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  HttplibTransport transport;
  QueryContext ctx;
  ctx.transport = &transport;
  ctx.image_dir = s.dir;
  ctx.getenv = [](const char*) -> const char* { return "local-key"; };
  auto ep = demo_endpoint();
  ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
  ep.auth_env = "LOCAL_KEY";
  ep.timeout_seconds = 10;
  const auto rec = query_item(ep, demo_item(), PromptVariant::Plain, ctx);
  EXPECT_EQ(rec.status, QueryStatus::Ok) << rec.error;
  EXPECT_EQ(rec.raw_text, kBasePrompt);

  ctx.getenv = [](const char*) -> const char* { return "wrong"; };
  EXPECT_EQ(query_item(ep, demo_item(), PromptVariant::Plain, ctx).status, QueryStatus::AuthFailure);
  srv.stop();
  th.join();
  EXPECT_EQ(hits.load(), 2);
}
