#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "benchmark.hpp"
#include "errors.hpp"
#include "table.hpp"

namespace fc2t {

// Error classes a query can end in; Ok means raw_text holds the model output.
enum class QueryStatus { Ok, AuthFailure, Quota, Timeout, ServerError, NetworkError, BadResponse, MissingImage };

inline std::string_view to_string(QueryStatus s) {
  switch (s) {
    case QueryStatus::Ok: return "ok";
    case QueryStatus::AuthFailure: return "auth_failure";
    case QueryStatus::Quota: return "quota";
    case QueryStatus::Timeout: return "timeout";
    case QueryStatus::ServerError: return "server_error";
    case QueryStatus::NetworkError: return "network_error";
    case QueryStatus::BadResponse: return "bad_response";
    case QueryStatus::MissingImage: return "missing_image";
  }
  return "?";
}

inline QueryStatus query_status_from_string(std::string_view s) {
  for (auto st : {QueryStatus::Ok, QueryStatus::AuthFailure, QueryStatus::Quota, QueryStatus::Timeout,
                  QueryStatus::ServerError, QueryStatus::NetworkError, QueryStatus::BadResponse,
                  QueryStatus::MissingImage})
    if (to_string(st) == s) return st;
  throw ConfigError("unknown query status '" + std::string(s) + "'");
}

struct PredictionRecord {
  std::string item_id;
  std::string model;
  std::string prompt_variant;  // "plain" | "hint"
  std::string raw_text;        // stored byte-exact
  std::string timestamp;       // ISO-8601 UTC
  QueryStatus status = QueryStatus::Ok;
  std::string error;
  int attempts = 0;
  std::string endpoint;
  int image_width = 0;
  int image_height = 0;

  bool ok() const { return status == QueryStatus::Ok; }
  bool operator==(const PredictionRecord&) const = default;
};

inline void to_json(json& j, const PredictionRecord& r) {
  j = json{{"schema_version", kSchemaVersion},
           {"item_id", r.item_id},
           {"model", r.model},
           {"prompt_variant", r.prompt_variant},
           {"raw_text", r.raw_text},
           {"timestamp", r.timestamp},
           {"status", std::string(to_string(r.status))},
           {"error", r.error},
           {"attempts", r.attempts},
           {"endpoint", r.endpoint},
           {"image_width", r.image_width},
           {"image_height", r.image_height}};
}

// Only item_id, model, prompt_variant and raw_text are required, so third-party
// dumps with the minimal schema import directly.
inline void from_json(const json& j, PredictionRecord& r) {
  r = PredictionRecord{};
  r.item_id = j.at("item_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.prompt_variant = j.value("prompt_variant", std::string("plain"));
  r.raw_text = j.at("raw_text").is_null() ? std::string{} : j.at("raw_text").get<std::string>();
  r.timestamp = j.value("timestamp", std::string{});
  r.status = query_status_from_string(j.value("status", std::string("ok")));
  r.error = j.value("error", std::string{});
  r.attempts = j.value("attempts", 0);
  r.endpoint = j.value("endpoint", std::string{});
  r.image_width = j.value("image_width", 0);
  r.image_height = j.value("image_height", 0);
}

struct StoreCorruption : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRecord> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<PredictionRecord>());
    } catch (const std::exception& e) {
      throw StoreCorruption(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// Append-only JSON Lines store.  Each record is written with a single write
// call under a lock, so concurrent appends never interleave.
class PredictionStore {
 public:
  explicit PredictionStore(std::filesystem::path path) : path_(std::move(path)) {
    for (const auto& r : read_predictions(path_))
      if (r.ok()) done_.insert(key(r.item_id, r.model, r.prompt_variant));
  }

  const std::filesystem::path& path() const { return path_; }

  bool has_success(const std::string& item_id, const std::string& model, const std::string& variant) const {
    std::lock_guard lock(mu_);
    return done_.count(key(item_id, model, variant)) > 0;
  }

  void append(const PredictionRecord& r) {
    const std::string line = json(r).dump() + "\n";
    std::lock_guard lock(mu_);
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to '" + path_.string() + "'");
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    if (!out.flush()) throw IoError("append failed for '" + path_.string() + "'");
    if (r.ok()) done_.insert(key(r.item_id, r.model, r.prompt_variant));
  }

 private:
  static std::tuple<std::string, std::string, std::string> key(const std::string& a, const std::string& b,
                                                               const std::string& c) {
    return {a, b, c};
  }

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::set<std::tuple<std::string, std::string, std::string>> done_;
};

}  // namespace fc2t
