#pragma once

// Ranked-retrieval metrics on a four-point relevance scale (0..3, hits are
// ratings >= 2) and a scenario runner with a ground-truth rating oracle.

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbmr/engine.hpp"

namespace cbmr::eval {

inline constexpr std::size_t kCutoff = 15;

struct NdcgOptions {
  std::string gain = "linear";  // rating, or "exponential": 2^rating - 1
  double log_base = 2.0;
};

/// rating >= 2 -> 1, else 0. InvalidRating outside 0..3.
std::vector<int> to_binary(std::span<const int> ratings);

/// Hits in the first k positions over k; missing positions count as misses.
double precision_at_k(std::span<const int> hits, std::size_t k = kCutoff);
/// 1 / rank of the first hit, 0 without hits.
double reciprocal_rank(std::span<const int> hits);
/// Mean over hit positions i of precision@i, 0 without hits.
double average_precision(std::span<const int> hits);
/// DCG over the first k ratings divided by the DCG of the same ratings sorted
/// descending; 0 when every rating is 0.
double ndcg_at_k(std::span<const int> ratings, std::size_t k = kCutoff, const NdcgOptions& options = {});

struct RelevanceJudgment {
  int rank = 0;  // 1-based
  int rating = 0;
};

struct ScenarioResult {
  std::string id;
  std::string description;
  std::vector<RelevanceJudgment> judgments;
  std::vector<std::string> ranked_objects;
  std::size_t query_count = 0;
  bool success = false;
  double ndcg = 0.0;
  double precision = 0.0;
  double mrr = 0.0;
  double map = 0.0;
};

/// Metrics and success (some rating is 3) from the judgments.
void score(ScenarioResult& result, const NdcgOptions& options = {});

/// Where queries go: an in-process engine or a running server.
class Backend {
 public:
  virtual ~Backend() = default;
  /// Query document in the REST schema, with each term's "path" already
  /// replaced by base64 "data".
  virtual QueryResponse query(const nlohmann::json& query) = 0;
  virtual std::vector<MediaObject> objects() = 0;
};

class LocalBackend : public Backend {
 public:
  explicit LocalBackend(Engine& engine) : engine_(engine) {}
  QueryResponse query(const nlohmann::json& query) override;
  std::vector<MediaObject> objects() override;

 private:
  Engine& engine_;
};

/// REST client. EngineUnreachable when the server cannot be reached.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(std::string host, int port, std::string token = {}, double timeout_seconds = 60.0);
  QueryResponse query(const nlohmann::json& query) override;
  std::vector<MediaObject> objects() override;

 private:
  std::string host_;
  int port_;
  std::string token_;
  double timeout_;

  nlohmann::json call(const std::string& method, const std::string& path, const std::string& body);
};

/// Scenario script (JSON):
///   {"scenarios": [{"id": "4", "description": "...",
///                   "queries": [<query document whose terms carry "path">...],
///                   "planted": [<object id or file path>...],
///                   "same_class": [<object id or file path>...]}]}
/// Relative paths resolve against the script's directory. The judged list is
/// the object rollup of the last query; earlier queries count toward
/// query_count only.
struct Scenario {
  std::string id;
  std::string description;
  std::vector<nlohmann::json> queries;
  std::vector<std::string> planted;
  std::vector<std::string> same_class;
};

/// MalformedScript on structural errors.
std::vector<Scenario> parse_scenarios(const nlohmann::json& script, const std::filesystem::path& base_dir);
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);

/// Reads every term's "path" into base64 "data".
nlohmann::json inline_references(const nlohmann::json& query);

std::vector<ScenarioResult> run_scenarios(const std::vector<Scenario>& scenarios, Backend& backend,
                                          const NdcgOptions& options = {});

/// Aligned text table: # | NDCG@15 | p@15 | MRR | MAP | Success rate | # queries,
/// with a mean row.
std::string format_report(const std::vector<ScenarioResult>& results);
nlohmann::json report_to_json(const std::vector<ScenarioResult>& results);

}  // namespace cbmr::eval
