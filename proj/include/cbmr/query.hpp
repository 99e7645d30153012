#pragma once

// Query composition and late fusion. Terms inside a component are combined
// with AND (weighted mean, absent = 0), components with OR (max).

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cbmr/audio_features.hpp"
#include "cbmr/media.hpp"

namespace cbmr {

enum class TermType { Image, Audio, Model3D, Motion };

std::string_view to_string(TermType type);
TermType term_type_from_string(std::string_view name);

/// Decoded reference document. A Model3D term takes either a mesh (query by
/// example) or a raster sketch of a silhouette (query by sketch).
using Reference = std::variant<std::monostate, RasterImage, AudioBuffer, TriangleMesh>;

struct QueryTerm {
  TermType type = TermType::Image;
  Reference reference;
  /// Category -> weight in [0, 1]. Empty selects the term type's defaults at weight 1.
  std::map<std::string, double> categories;
  std::optional<AudioQueryCategory> audio_category;
  double weight = 1.0;
};

struct QueryComponent {
  std::vector<QueryTerm> terms;
};

struct Query {
  std::vector<QueryComponent> components;
  std::size_t k = 100;
  std::optional<std::set<MediaType>> media_filter;
};

struct ScoredResult {
  std::string segment_id;
  std::string object_id;
  double score = 0.0;
  std::map<std::string, double> per_category;

  bool operator==(const ScoredResult&) const = default;
};

/// s = max(0, 1 - d / d_max).
double correspondence(double distance, double d_max);

using ScoreMap = std::map<std::string, double>;

struct CategoryScores {
  std::string category;
  double weight = 1.0;
  ScoreMap scores;  // segment -> similarity
};

struct TermScores {
  double weight = 1.0;
  std::vector<CategoryScores> categories;
};

struct ComponentScores {
  std::vector<TermScores> terms;
};

struct FusedScore {
  double score = 0.0;
  std::map<std::string, double> per_category;
};

/// sum(w_c * s_c) / sum(w_c) over categories with positive weight; segments
/// missing from a category contribute 0 there.
std::map<std::string, FusedScore> fuse_term(const TermScores& term);
/// Weighted mean of term scores over all terms (AND).
std::map<std::string, FusedScore> fuse_component(const ComponentScores& component);
/// Max over components (OR); per-category scores come from the first
/// component that attains the maximum.
std::map<std::string, FusedScore> fuse_query(const std::vector<ComponentScores>& components);

/// Object id encoded in a segment id (the part before ':').
std::string object_of_segment(const std::string& segment_id);
/// Segment id encoded in a row id (the part before '@').
std::string segment_of_row(const std::string& row_id);

/// Sorted by score descending, then segment id; filtered; first k kept.
std::vector<ScoredResult> rank_results(const std::map<std::string, FusedScore>& fused, std::size_t k,
                                       const std::function<bool(const std::string&)>& keep = {});

/// Object score = max over its segments, sorted descending then by object id.
std::vector<std::pair<std::string, double>> aggregate_objects(const std::vector<ScoredResult>& results);

}  // namespace cbmr
