#include <algorithm>
#include <cmath>
#include <functional>

#include "cbmr/error.hpp"
#include "cbmr/eval.hpp"

namespace cbmr::eval {

std::vector<int> to_binary(std::span<const int> ratings) {
  std::vector<int> hits;
  hits.reserve(ratings.size());
  for (int r : ratings) {
    if (r < 0 || r > 3) throw Error(ErrorCode::InvalidRating, "rating " + std::to_string(r) + " is outside 0..3");
    hits.push_back(r >= 2 ? 1 : 0);
  }
  return hits;
}

double precision_at_k(std::span<const int> hits, std::size_t k) {
  if (k == 0) return 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(k, hits.size()); ++i) n += hits[i] != 0;
  return static_cast<double>(n) / static_cast<double>(k);
}

double reciprocal_rank(std::span<const int> hits) {
  for (std::size_t i = 0; i < hits.size(); ++i)
    if (hits[i] != 0) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double average_precision(std::span<const int> hits) {
  double sum = 0.0;
  std::size_t found = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] == 0) continue;
    ++found;
    sum += static_cast<double>(found) / static_cast<double>(i + 1);
  }
  return found == 0 ? 0.0 : sum / static_cast<double>(found);
}

namespace {

double dcg(std::span<const int> ratings, std::size_t k, const NdcgOptions& options) {
  const bool exponential = options.gain == "exponential";
  double sum = 0.0;
  for (std::size_t i = 0; i < std::min(k, ratings.size()); ++i) {
    const double gain = exponential ? std::pow(2.0, ratings[i]) - 1.0 : static_cast<double>(ratings[i]);
    sum += gain / (std::log(static_cast<double>(i + 2)) / std::log(options.log_base));
  }
  return sum;
}

}  // namespace

double ndcg_at_k(std::span<const int> ratings, std::size_t k, const NdcgOptions& options) {
  to_binary(ratings);
  if (options.gain != "linear" && options.gain != "exponential")
    throw Error(ErrorCode::InvalidConfig, "ndcg gain must be 'linear' or 'exponential'");
  if (!(options.log_base > 1.0)) throw Error(ErrorCode::InvalidConfig, "ndcg log base must exceed 1");
  std::vector<int> ideal(ratings.begin(), ratings.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = dcg(ideal, k, options);
  if (best == 0.0) return 0.0;
  return dcg(ratings, k, options) / best;
}

void score(ScenarioResult& result, const NdcgOptions& options) {
  std::vector<int> ratings;
  for (const auto& j : result.judgments) ratings.push_back(j.rating);
  ratings.resize(std::max(ratings.size(), kCutoff), 0);
  const auto hits = to_binary(ratings);
  const std::span<const int> top(hits.data(), kCutoff);
  result.success = std::find(ratings.begin(), ratings.begin() + kCutoff, 3) != ratings.begin() + kCutoff;
  result.ndcg = ndcg_at_k(ratings, kCutoff, options);
  result.precision = precision_at_k(top, kCutoff);
  result.mrr = reciprocal_rank(top);
  result.map = average_precision(top);
}

}  // namespace cbmr::eval
