#include <algorithm>
#include <cctype>

#include "cbmr/error.hpp"
#include "cbmr/query.hpp"

namespace cbmr {

std::string_view to_string(TermType type) {
  switch (type) {
    case TermType::Image: return "IMAGE";
    case TermType::Audio: return "AUDIO";
    case TermType::Model3D: return "MODEL_3D";
    case TermType::Motion: return "MOTION";
  }
  return "IMAGE";
}

TermType term_type_from_string(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "IMAGE" || upper == "SKETCH") return TermType::Image;
  if (upper == "AUDIO") return TermType::Audio;
  if (upper == "MODEL_3D" || upper == "MODEL3D" || upper == "3D") return TermType::Model3D;
  if (upper == "MOTION") return TermType::Motion;
  throw Error(ErrorCode::InvalidQuery, "unknown term type '" + std::string(name) + "'");
}

double correspondence(double distance, double d_max) { return std::max(0.0, 1.0 - distance / d_max); }

std::map<std::string, FusedScore> fuse_term(const TermScores& term) {
  double total = 0.0;
  for (const auto& c : term.categories)
    if (c.weight > 0.0) total += c.weight;
  std::map<std::string, FusedScore> out;
  if (total <= 0.0) return out;
  for (const auto& c : term.categories) {
    if (c.weight <= 0.0) continue;
    for (const auto& [segment, s] : c.scores) {
      auto& fused = out[segment];
      fused.score += c.weight * s;
      auto& slot = fused.per_category[c.category];
      slot = std::max(slot, s);
    }
  }
  for (auto& [segment, fused] : out) fused.score /= total;
  return out;
}

std::map<std::string, FusedScore> fuse_component(const ComponentScores& component) {
  double total = 0.0;
  for (const auto& t : component.terms) total += t.weight;
  std::map<std::string, FusedScore> out;
  if (total <= 0.0) return out;
  for (const auto& t : component.terms) {
    if (t.weight <= 0.0) continue;
    for (auto& [segment, fused] : fuse_term(t)) {
      auto& slot = out[segment];
      slot.score += t.weight * fused.score;
      for (const auto& [category, s] : fused.per_category) {
        auto& c = slot.per_category[category];
        c = std::max(c, s);
      }
    }
  }
  for (auto& [segment, fused] : out) fused.score /= total;
  return out;
}

std::map<std::string, FusedScore> fuse_query(const std::vector<ComponentScores>& components) {
  std::map<std::string, FusedScore> out;
  for (const auto& component : components) {
    for (auto& [segment, fused] : fuse_component(component)) {
      const auto it = out.find(segment);
      if (it == out.end())
        out.emplace(segment, std::move(fused));
      else if (fused.score > it->second.score)
        it->second = std::move(fused);
    }
  }
  return out;
}

std::string object_of_segment(const std::string& segment_id) { return segment_id.substr(0, segment_id.find(':')); }

std::string segment_of_row(const std::string& row_id) { return row_id.substr(0, row_id.find('@')); }

std::vector<ScoredResult> rank_results(const std::map<std::string, FusedScore>& fused, std::size_t k,
                                       const std::function<bool(const std::string&)>& keep) {
  std::vector<ScoredResult> out;
  for (const auto& [segment, f] : fused) {
    if (keep && !keep(segment)) continue;
    out.push_back({segment, object_of_segment(segment), f.score, f.per_category});
  }
  auto better = [](const ScoredResult& a, const ScoredResult& b) {
    return a.score != b.score ? a.score > b.score : a.segment_id < b.segment_id;
  };
  if (out.size() > k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), better);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

std::vector<std::pair<std::string, double>> aggregate_objects(const std::vector<ScoredResult>& results) {
  std::map<std::string, double> best;
  for (const auto& r : results) {
    const auto [it, inserted] = best.emplace(r.object_id, r.score);
    if (!inserted) it->second = std::max(it->second, r.score);
  }
  std::vector<std::pair<std::string, double>> out(best.begin(), best.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace cbmr
