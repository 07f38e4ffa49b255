#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fc2t/cli.hpp"

using namespace fc2t;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run fc2t_run(std::vector<std::string> args, const cli::Env& env = {}) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err, env);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("fc2t_test_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string p(const std::string& rel) const { return (dir / rel).string(); }
};

double broken_d_tbe(double g, double p, double t) { return std::abs(g - p) / t; }  // clamp removed

}  // namespace

TEST_F(CliTest, GenerateSummaries) {
  auto r = fc2t_run({"generate", "--out-dir", p("all")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "tables=1020 items=7140\n");
  r = fc2t_run({"generate", "--parts", "A", "--out-dir", p("a")});
  EXPECT_EQ(r.out, "tables=1020 items=3060\n");
  r = fc2t_run({"--json", "generate", "--parts", "A", "--out-dir", p("a")});
  EXPECT_EQ(json::parse(r.out)["items"], 3060);
  EXPECT_TRUE(fs::exists(p("a/manifest.json")));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(fc2t_run({"generate", "--seed", "abc", "--out-dir", p("x")}).code, 2);
  EXPECT_EQ(fc2t_run({"generate", "--parts", "Q", "--out-dir", p("x")}).code, 2);
  EXPECT_EQ(fc2t_run({}).code, 2);
  EXPECT_EQ(fc2t_run({"frobnicate"}).code, 2);
  EXPECT_EQ(fc2t_run({"render"}).code, 2);  // --manifest missing
  EXPECT_EQ(fc2t_run({"--help"}).code, 0);
}

TEST_F(CliTest, ScorePipelineOnGroundTruth) {
  ASSERT_EQ(fc2t_run({"generate", "--parts", "A", "--out-dir", p("gen")}).code, 0);
  auto r = fc2t_run({"render", "--manifest", p("gen/manifest.json"), "--out-dir", p("img"), "--filter",
                "digit_length=0..1,entities=2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "written=60 skipped=0 failed=0\n");

  // predictions: the ground truth itself, plus one garbled answer
  const Manifest m = load_manifest(p("img/manifest.json"));
  std::string lines;
  for (const auto& it : m.items) {
    PredictionRecord rec;
    rec.item_id = it.id;
    rec.model = "oracle";
    rec.prompt_variant = "plain";
    rec.raw_text = to_linearized(m.table_for(it));
    lines += json(rec).dump() + "\n";
  }
  PredictionRecord garbled;
  garbled.item_id = m.items.front().id;
  garbled.model = "garbled";
  garbled.prompt_variant = "plain";
  garbled.raw_text = "I cannot read this chart.";
  lines += json(garbled).dump() + "\n";
  write_text_file(p("dump.jsonl"), lines);

  r = fc2t_run({"import", "--in", p("dump.jsonl"), "--out", p("preds.jsonl"), "--manifest", p("img/manifest.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "imported=61 rejected=0\n");

  r = fc2t_run({"score", "--manifest", p("img/manifest.json"), "--predictions", p("preds.jsonl"), "--out", p("scores")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scored=61 parse_failures=1"), std::string::npos);
  EXPECT_NE(r.err.find("parse failure: " + garbled.item_id + " (garbled)"), std::string::npos);
  for (const auto& row : read_scores_jsonl(p("scores.jsonl")))
    EXPECT_EQ(row.score.rms_tbe_f1, row.model == "oracle" ? 1.0 : 0.0);

  r = fc2t_run({"analyze", "--manifest", p("img/manifest.json"), "--scores", p("scores.jsonl"), "--out", p("a.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("oracle/plain: dl0=100.00 dl1=100.00"), std::string::npos);

  r = fc2t_run({"report", "--manifest", p("img/manifest.json"), "--scores", p("scores.jsonl"), "--out-dir", p("rep")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("rep/oracle__plain__digit_length.png")));
}

TEST_F(CliTest, EmptyInputs) {
  ASSERT_EQ(fc2t_run({"generate", "--parts", "A", "--out-dir", p("gen")}).code, 0);
  write_text_file(p("empty.jsonl"), "");
  auto r = fc2t_run({"score", "--manifest", p("gen/manifest.json"), "--predictions", p("empty.jsonl"), "--out", p("s")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning: no predictions"), std::string::npos);
  r = fc2t_run({"report", "--manifest", p("gen/manifest.json"), "--scores", p("s.jsonl"), "--out-dir", p("rep")});
  EXPECT_EQ(r.code, 1);

  PredictionRecord stray;
  stray.item_id = "not_an_item";
  stray.model = "m";
  stray.raw_text = "c | a\nr | 1";
  write_text_file(p("stray.jsonl"), json(stray).dump() + "\n");
  r = fc2t_run({"score", "--manifest", p("gen/manifest.json"), "--predictions", p("stray.jsonl"), "--out", p("s2")});
  EXPECT_EQ(r.code, 1);
  r = fc2t_run({"import", "--in", p("stray.jsonl"), "--out", p("p.jsonl"), "--manifest", p("gen/manifest.json")});
  EXPECT_EQ(r.out, "imported=0 rejected=1\n");
}

TEST_F(CliTest, QueryWithInjectedTransport) {
  ASSERT_EQ(fc2t_run({"generate", "--parts", "A", "--out-dir", p("gen")}).code, 0);
  ASSERT_EQ(fc2t_run({"render", "--manifest", p("gen/manifest.json"), "--out-dir", p("img"), "--filter",
                 "digit_length=4,entities=1,chart=bar"})
                .code,
            0);
  write_text_file(p("ep.json"), R"({"name":"local","base_url":"http://127.0.0.1:9/x","auth_env":"FC2T_CLI_TEST_KEY",
                                    "model_id":"m1","rate_limit_rpm":100000})");
  struct Echo : Transport {
    HttpResponse post(const HttpRequest&) override {
      return {200, R"({"choices":[{"message":{"content":"c | Series A\n2018 | 1"}}]})", "", false};
    }
  } echo;
  cli::Env env;
  env.transport = &echo;
  env.sleep = [](std::chrono::milliseconds) {};
  env.getenv = [](const char*) -> const char* { return "k"; };
  auto r = fc2t_run({"query", "--manifest", p("img/manifest.json"), "--endpoint", p("ep.json"), "--out", p("q.jsonl")}, env);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "succeeded=10 failed=0 skipped=0\n");
  r = fc2t_run({"query", "--manifest", p("img/manifest.json"), "--endpoint", p("ep.json"), "--out", p("q.jsonl")}, env);
  EXPECT_EQ(r.out, "succeeded=0 failed=0 skipped=10\n");

  env.getenv = [](const char*) -> const char* { return nullptr; };
  r = fc2t_run({"query", "--manifest", p("img/manifest.json"), "--endpoint", p("ep.json"), "--variant", "hint", "--out",
           p("q.jsonl")},
          env);
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "succeeded=0 failed=10 skipped=0\n");

  write_text_file(p("bad_ep.json"), R"({"name":"x","base_url":"http://h","api_key":"oops"})");
  EXPECT_EQ(fc2t_run({"query", "--manifest", p("img/manifest.json"), "--endpoint", p("bad_ep.json")}, env).code, 2);
}

TEST_F(CliTest, VerifyListAndSelection) {
  auto r = fc2t_run({"verify", "--list"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("3 tbe_worked_example"), std::string::npos);
  r = fc2t_run({"verify", "--only", "tbe_worked_example", "--scratch-dir", p("v")});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS [3] tbe_worked_example"), std::string::npos);
  EXPECT_NE(r.out.find("all 1 checks passed"), std::string::npos);
  EXPECT_EQ(fc2t_run({"verify", "--only", "nope"}).code, 2);
}

TEST(AcceptanceHooks, BrokenClampIsCaught) {
  acceptance::Context ctx;
  ctx.scratch_dir = fs::temp_directory_path() / "fc2t_test_hooks";
  ctx.hooks.d_tbe = broken_d_tbe;
  std::vector<std::string> failed;
  acceptance::run(ctx, {"tbe_worked_example", "metric_bounds_identities"}, [&](const acceptance::Outcome& o) {
    if (!o.result.pass) failed.push_back(o.check->name);
  });
  EXPECT_EQ(failed, (std::vector<std::string>{"metric_bounds_identities"}));
}

TEST(Binary, VersionExitCode) {
  const std::string cmd = std::string(FC2T_CLI_PATH) + " --version > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  const std::string bad = std::string(FC2T_CLI_PATH) + " generate --seed nope > /dev/null 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);
}
