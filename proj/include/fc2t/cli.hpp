#pragma once

// `fc2t` command line.  Kept in a header so tests can drive it in process.

#include "CLI11.hpp"

#include <charconv>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "analysis.hpp"
#include "benchmark.hpp"
#include "client.hpp"
#include "parse.hpp"
#include "prediction.hpp"
#include "render.hpp"
#include "scoring.hpp"

namespace fc2t::cli {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

// Hooks for tests: a transport double for `query`.
struct Env {
  Transport* transport = nullptr;
  RateLimiter::SleepFn sleep = RateLimiter::default_sleep;
  std::function<const char*(const char*)> getenv = [](const char* k) { return std::getenv(k); };
};

namespace detail {

inline std::uint64_t parse_seed(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw UsageError("--seed must be a non-negative integer, got '" + s + "'");
  return v;
}

inline std::set<Part> parse_parts(const std::string& s) {
  std::set<Part> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) parts.insert(part_from_string(tok));
  if (parts.empty()) throw UsageError("--parts needs at least one of A,B,C,D");
  return parts;
}

inline Manifest load_filtered(const fs::path& manifest_path, const std::string& filter) {
  Manifest m = load_manifest(manifest_path);
  return filter.empty() ? m : filter_manifest(m, ItemFilter::parse(filter));
}

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Printer {
  std::ostream& out;
  bool as_json;
  void summary(const json& j, const std::string& text) const {
    if (as_json) out << j.dump() << "\n";
    else out << text << "\n";
    out.flush();
  }
};

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Env& env = {}) {
  CLI::App app{"fc2t: bias-controlled chart-to-table benchmark toolkit", "fc2t"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable summary on stdout");

  // generate
  auto* gen = app.add_subcommand("generate", "build the manifest and ground-truth tables");
  std::string seed_text, gen_config, gen_out = "fc2t_out", parts_text;
  bool shard = false;
  gen->add_option("--seed", seed_text, "RNG seed (unsigned integer)");
  gen->add_option("--config", gen_config, "GenConfig JSON file")->check(CLI::ExistingFile);
  gen->add_option("--out-dir", gen_out, "output directory")->capture_default_str();
  gen->add_option("--parts", parts_text, "subset of parts, e.g. A or A,B");
  gen->add_flag("--shard", shard, "write one JSON file per table under tables/");

  // render
  auto* ren = app.add_subcommand("render", "render chart images for a manifest");
  std::string ren_manifest, ren_out = "fc2t_out/images", ren_style, ren_filter;
  unsigned ren_threads = 0;
  bool ren_resume = false;
  ren->add_option("--manifest", ren_manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  ren->add_option("--out-dir", ren_out, "image directory")->capture_default_str();
  ren->add_option("--style", ren_style, "StyleSpec JSON file")->check(CLI::ExistingFile);
  ren->add_option("--filter", ren_filter, "item filter, e.g. part=A,digit_length=0..2");
  ren->add_option("--threads", ren_threads, "worker threads (0 = hardware)");
  ren->add_flag("--resume", ren_resume, "skip items whose image and sidecar exist");

  // query
  auto* qry = app.add_subcommand("query", "query a model endpoint for every item");
  std::string q_manifest, q_images, q_endpoint, q_variant = "plain", q_filter, q_out = "predictions.jsonl";
  unsigned q_concurrency = 1;
  qry->add_option("--manifest", q_manifest, "rendered manifest.json")->required()->check(CLI::ExistingFile);
  qry->add_option("--images", q_images, "image directory (default: manifest directory)");
  qry->add_option("--endpoint", q_endpoint, "EndpointConfig JSON")->required()->check(CLI::ExistingFile);
  qry->add_option("--variant", q_variant, "plain|hint")->check(CLI::IsMember({"plain", "hint"}))->capture_default_str();
  qry->add_option("--filter", q_filter, "item filter");
  qry->add_option("--out", q_out, "prediction store (JSON Lines)")->capture_default_str();
  qry->add_option("--concurrency", q_concurrency, "requests in flight")->check(CLI::Range(1u, 64u));

  // import
  auto* imp = app.add_subcommand("import", "append third-party predictions to a store");
  std::string i_in, i_out = "predictions.jsonl", i_model, i_manifest;
  imp->add_option("--in", i_in, "JSON Lines dump with item_id, model, raw_text")->required()->check(CLI::ExistingFile);
  imp->add_option("--out", i_out, "prediction store")->capture_default_str();
  imp->add_option("--model", i_model, "override the model name");
  imp->add_option("--manifest", i_manifest, "reject item ids missing from this manifest")->check(CLI::ExistingFile);

  // score
  auto* sco = app.add_subcommand("score", "score predictions against ground truth");
  std::string s_manifest, s_predictions, s_out = "scores", s_sig = "all";
  bool s_transpose = false;
  sco->add_option("--manifest", s_manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  sco->add_option("--predictions", s_predictions, "prediction store")->required()->check(CLI::ExistingFile);
  sco->add_option("--out", s_out, "output prefix: <out>.csv and <out>.jsonl")->capture_default_str();
  sco->add_option("--sig-mode", s_sig, "all|significant")->check(CLI::IsMember({"all", "significant"}));
  sco->add_flag("--transpose", s_transpose, "transpose parsed predictions");

  // analyze
  auto* ana = app.add_subcommand("analyze", "group means and paired tests");
  std::string a_manifest, a_scores, a_out = "analysis.json", a_metric = "rms_tbe_f1";
  ana->add_option("--manifest", a_manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  ana->add_option("--scores", a_scores, "scores .jsonl")->required()->check(CLI::ExistingFile);
  ana->add_option("--out", a_out, "analysis JSON")->capture_default_str();
  ana->add_option("--metric", a_metric, "metric for the paired tests")->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "per-dimension CSV tables and plots");
  std::string r_manifest, r_scores, r_out = "report", r_metric = "rms_tbe_f1";
  rep->add_option("--manifest", r_manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  rep->add_option("--scores", r_scores, "scores .jsonl")->required()->check(CLI::ExistingFile);
  rep->add_option("--out-dir", r_out, "report directory")->capture_default_str();
  rep->add_option("--metric", r_metric, "metric for the paired tests")->capture_default_str();

  // verify
  auto* ver = app.add_subcommand("verify", "run the acceptance checks");
  bool v_list = false;
  std::vector<std::string> v_only;
  std::string v_scratch;
  ver->add_flag("--list", v_list, "list check names without running");
  ver->add_option("--only", v_only, "run only these checks (name or number)");
  ver->add_option("--scratch-dir", v_scratch, "where temporary files go");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const detail::Printer print{out, as_json};
  try {
    if (*gen) {
      GenConfig cfg;
      if (!gen_config.empty()) cfg = json::parse(read_text_file(gen_config)).get<GenConfig>();
      if (!seed_text.empty()) cfg.seed = detail::parse_seed(seed_text);
      if (!parts_text.empty()) cfg.parts = detail::parse_parts(parts_text);
      const Manifest m = generate_manifest(cfg);
      fs::create_directories(gen_out);
      save_manifest(m, fs::path(gen_out) / "manifest.json", shard);
      const std::size_t tables = count_source_tables(m);
      print.summary({{"tables", tables}, {"items", m.items.size()}, {"ground_truth_tables", m.ground_truth.size()},
                     {"manifest", (fs::path(gen_out) / "manifest.json").string()}},
                    "tables=" + std::to_string(tables) + " items=" + std::to_string(m.items.size()));
      return kOk;
    }

    if (*ren) {
      Manifest m = detail::load_filtered(ren_manifest, ren_filter);
      StyleSpec style;
      if (!ren_style.empty()) style = json::parse(read_text_file(ren_style)).get<StyleSpec>();
      RenderOptions opts;
      opts.threads = ren_threads;
      opts.resume = ren_resume;
      const RenderReport rr = render_manifest(m, style, ren_out, opts);
      save_manifest(m, fs::path(ren_out) / "manifest.json");
      for (const auto& [id, why] : rr.failed) err << "render failed: " << id << ": " << why << "\n";
      print.summary({{"written", rr.written}, {"skipped", rr.skipped}, {"failed", rr.failed.size()},
                     {"manifest", (fs::path(ren_out) / "manifest.json").string()}},
                    "written=" + std::to_string(rr.written) + " skipped=" + std::to_string(rr.skipped) +
                        " failed=" + std::to_string(rr.failed.size()));
      return rr.failed.empty() ? kOk : kFailure;
    }

    if (*qry) {
      const Manifest m = detail::load_filtered(q_manifest, q_filter);
      const EndpointConfig ep = load_endpoint(q_endpoint);
      HttplibTransport http;
      RateLimiter limiter(ep.rate_limit_rpm, env.sleep);
      QueryContext ctx;
      ctx.transport = env.transport ? env.transport : &http;
      ctx.image_dir = q_images.empty() ? fs::path(q_manifest).parent_path() : fs::path(q_images);
      ctx.limiter = &limiter;
      ctx.sleep = env.sleep;
      ctx.getenv = env.getenv;
      PredictionStore store(q_out);
      const BatchSummary b =
          run_batch(ep, m.items, prompt_variant_from_string(q_variant), store, ctx, q_concurrency);
      print.summary({{"succeeded", b.succeeded}, {"failed", b.failed}, {"skipped", b.skipped}},
                    "succeeded=" + std::to_string(b.succeeded) + " failed=" + std::to_string(b.failed) +
                        " skipped=" + std::to_string(b.skipped));
      return b.failed == 0 ? kOk : kFailure;
    }

    if (*imp) {
      std::set<std::string> known;
      if (!i_manifest.empty())
        for (const auto& it : load_manifest(i_manifest).items) known.insert(it.id);
      auto records = read_predictions(i_in);
      PredictionStore store(i_out);
      std::size_t imported = 0, rejected = 0;
      for (auto& r : records) {
        if (!i_model.empty()) r.model = i_model;
        if (!known.empty() && !known.count(r.item_id)) {
          err << "unknown item '" << r.item_id << "', skipped\n";
          ++rejected;
          continue;
        }
        if (r.endpoint.empty()) r.endpoint = "import";
        store.append(r);
        ++imported;
      }
      print.summary({{"imported", imported}, {"rejected", rejected}},
                    "imported=" + std::to_string(imported) + " rejected=" + std::to_string(rejected));
      return kOk;
    }

    if (*sco) {
      const Manifest m = load_manifest(s_manifest);
      const auto preds = read_predictions(s_predictions);
      if (preds.empty()) err << "warning: no predictions in " << s_predictions << "\n";
      ScoreOptions opts;
      opts.sig = s_sig == "significant" ? SigAggregation::SignificantOnly : SigAggregation::AllMatched;
      ScoreRun run;
      try {
        run = score_predictions(m, preds, opts, ParseOptions{s_transpose});
      } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
      }
      for (const auto& r : run.rows)
        if (r.parse_failed) err << "parse failure: " << r.item_id << " (" << r.model << ")\n";
      write_text_file(s_out + ".csv", scores_to_csv(run.rows));
      write_text_file(s_out + ".jsonl", scores_to_jsonl(run.rows));
      double mean = 0;
      for (const auto& r : run.rows) mean += reported_value(r.score, Metric::RmsTbeF1);
      if (!run.rows.empty()) mean /= static_cast<double>(run.rows.size());
      print.summary({{"scored", run.rows.size()},
                     {"parse_failures", run.parse_failures},
                     {"skipped_failed_queries", run.skipped_failed_queries},
                     {"mean_rms_tbe_f1", mean}},
                    "scored=" + std::to_string(run.rows.size()) + " parse_failures=" +
                        std::to_string(run.parse_failures) + " skipped_failed_queries=" +
                        std::to_string(run.skipped_failed_queries) + " mean_rms_tbe_f1=" + shortest_repr(mean));
      return kOk;
    }

    if (*ana || *rep) {
      const bool is_report = rep->parsed();
      const Manifest m = load_manifest(is_report ? r_manifest : a_manifest);
      const auto rows = read_scores_jsonl(is_report ? r_scores : a_scores);
      const Metric metric = metric_from_string(is_report ? r_metric : a_metric);
      const auto analyses = analyze(rows, m, metric);
      if (rows.empty()) {
        err << "error: no scores to analyze\n";
        return kFailure;
      }
      for (const auto& ma : analyses)
        for (const auto& agg : ma.aggregates)
          for (const auto& w : agg.warnings) err << "warning: " << ma.model << ": " << w << "\n";
      if (is_report) {
        const auto files = emit_report(analyses, r_out);
        json j{{"files", json::array()}};
        for (const auto& f : files) j["files"].push_back(f.string());
        print.summary(j, "files=" + std::to_string(files.size()) + " dir=" + r_out);
        return kOk;
      }
      json j = json::array();
      for (const auto& ma : analyses) j.push_back(to_json_value(ma));
      write_text_file(a_out, j.dump(2) + "\n");
      std::string text;
      for (const auto& ma : analyses) {
        text += ma.model + "/" + ma.prompt_variant + ":";
        for (const auto& agg : ma.aggregates) {
          if (agg.dimension != Dimension::DigitLength) continue;
          for (const auto& g : agg.groups) text += " dl" + g.group + "=" + detail::fixed2(g.mean.at(Metric::RmsTbeF1));
        }
        for (const auto& c : ma.comparisons)
          text += " " + std::string(to_string(c.other)) + ":p=" + shortest_repr(c.result.p_value) + "(" +
                  std::string(to_string(c.result.direction)) + ")";
        text += "\n";
      }
      print.summary({{"models", analyses.size()}, {"out", a_out}}, text + "wrote " + a_out);
      return kOk;
    }

    if (*ver) {
      if (v_list) {
        for (const auto& c : acceptance::checks()) out << c.number << " " << c.name << ": " << c.summary << "\n";
        return kOk;
      }
      acceptance::Context ctx;
      ctx.scratch_dir = v_scratch.empty() ? fs::temp_directory_path() / "fc2t_verify" : fs::path(v_scratch);
      fs::create_directories(ctx.scratch_dir);
      const std::set<std::string> only(v_only.begin(), v_only.end());
      std::vector<std::string> failed;
      auto outcomes = acceptance::run(ctx, only, [&](const acceptance::Outcome& o) {
        if (!as_json) out << acceptance::format_line(o) << std::endl;
        if (!o.result.pass) failed.push_back(o.check->name);
      });
      if (outcomes.empty()) throw UsageError("--only matched no check");
      if (as_json) {
        json j = json::array();
        for (const auto& o : outcomes)
          j.push_back({{"number", o.check->number}, {"name", o.check->name}, {"pass", o.result.pass},
                       {"detail", o.result.detail}});
        out << j.dump() << "\n";
      } else {
        out << (failed.empty() ? "all " + std::to_string(outcomes.size()) + " checks passed"
                               : "failed: " + [&] {
                                   std::string s;
                                   for (const auto& f : failed) s += (s.empty() ? "" : ", ") + f;
                                   return s;
                                 }())
            << "\n";
      }
      return failed.empty() ? kOk : kFailure;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace fc2t::cli
