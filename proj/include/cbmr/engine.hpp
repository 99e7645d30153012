#pragma once

// Offline ingest and online retrieval over one data directory.
//
// Layout of the data directory:
//   objects.cat, segments.cat     catalog
//   tables/<category>.vtrs        feature rows (.va / .lsh index siblings)
//   tables/surf-bow.codebook      visual vocabulary
//   fingerprint.fp                constellation-hash postings
//   index.json                    build state: row counts, d_max, seeds
//   media/                        uploaded files

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cbmr/config.hpp"
#include "cbmr/query.hpp"
#include "cbmr/store.hpp"

namespace cbmr {

struct CategoryInfo {
  std::string name;
  std::size_t dim = 0;  // 0 when fixed only at index build (surf-bow)
  Metric metric = Metric::L2;
  bool queryable = true;
};

/// Registered feature categories, in a fixed order.
const std::vector<CategoryInfo>& category_registry();
const CategoryInfo& category_info(std::string_view name);

/// Categories a term of the given type extracts by default.
std::vector<std::string> default_categories(TermType type, const Reference& reference,
                                            std::optional<AudioQueryCategory> audio_category);

struct IngestedObject {
  std::string path;
  std::string object_id;
  MediaType media_type = MediaType::Image;
  std::size_t segments = 0;
  std::size_t vectors = 0;
  std::size_t hashes = 0;
  bool duplicate = false;
};

struct IngestFailure {
  std::string path;
  std::string error;
};

struct IngestReport {
  std::vector<IngestedObject> objects;
  std::vector<IngestFailure> failures;
};

struct IndexReport {
  std::size_t codebook_k = 0;
  std::map<std::string, std::size_t> rows;
  std::map<std::string, double> d_max;
  double seconds = 0.0;
};

struct QueryResponse {
  std::string session_id;
  std::vector<ScoredResult> results;
};

/// Progress notification: one per (component, term, category) as it completes.
struct CategoryBatch {
  std::size_t component = 0;
  std::size_t term = 0;
  std::string category;
  std::vector<std::pair<std::string, double>> top;  // segment, similarity
};
using BatchCallback = std::function<void(const CategoryBatch&)>;

struct Preview {
  std::string content_type;
  Bytes bytes;
};

struct ObjectRecord {
  MediaObject object;
  std::vector<SegmentRecord> segments;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

class Engine {
 public:
  explicit Engine(EngineConfig config, Clock clock = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const { return config_; }

  // --- offline --------------------------------------------------------------
  /// Decodes, segments and extracts every file; failures are collected and
  /// the rest continue. Leaves the index stale.
  IngestReport ingest(const std::vector<std::filesystem::path>& paths);
  /// Stores the bytes under media/ and ingests the copy.
  IngestReport ingest_bytes(const std::string& name, const Bytes& bytes);
  /// Trains the codebook, builds VA/LSH indexes and fixes d_max per category.
  IndexReport build_index();
  bool index_fresh() const;

  // --- online -----------------------------------------------------------------
  /// Per-category similarity maps for one term (fetch depth fetch_factor * k).
  TermScores execute_term(const QueryTerm& term, std::size_t k, std::size_t component_index = 0,
                          std::size_t term_index = 0, const BatchCallback& on_batch = {}) const;
  QueryResponse execute_query(const Query& query, const BatchCallback& on_batch = {});
  /// Uses the segment's stored vectors as the query; the seed is never returned.
  QueryResponse more_like_this(const std::string& segment_id, const std::map<std::string, double>& categories,
                               std::size_t k, const std::optional<std::set<MediaType>>& media_filter = {});
  /// Re-fuses the session's cached score maps; weights apply to every term
  /// carrying the category. An unset filter or k keeps the session's.
  QueryResponse refine(const std::string& session_id, const std::map<std::string, double>& weights,
                       const std::optional<std::set<MediaType>>& media_filter = {},
                       std::optional<std::size_t> k = {});

  // --- catalog ------------------------------------------------------------------
  ObjectRecord object(const std::string& object_id) const;
  SegmentRecord segment(const std::string& segment_id) const;
  std::vector<MediaObject> find_objects(const std::string& name_substring) const;
  std::vector<MediaObject> objects() const;
  Preview preview(const std::string& segment_id) const;

  // --- diagnostics --------------------------------------------------------------
  std::size_t row_count(const std::string& category) const;
  std::optional<double> d_max(const std::string& category) const;
  std::size_t session_count() const;

 private:
  struct Impl;
  EngineConfig config_;
  Clock clock_;
  std::unique_ptr<Impl> impl_;
  mutable std::shared_mutex rw_;
};

}  // namespace cbmr
