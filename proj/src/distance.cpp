#include "cbmr/distance.hpp"

#include <string>

#include "cbmr/error.hpp"

namespace cbmr {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::L2: return "L2";
    case Metric::L1: return "L1";
    case Metric::Cosine: return "COSINE";
    case Metric::ChiSquared: return "CHISQUARED";
  }
  return "L2";
}

Metric metric_from_string(std::string_view name) {
  if (name == "L2") return Metric::L2;
  if (name == "L1") return Metric::L1;
  if (name == "COSINE") return Metric::Cosine;
  if (name == "CHISQUARED") return Metric::ChiSquared;
  throw Error(ErrorCode::CorruptFile, "unknown metric '" + std::string(name) + "'");
}

double distance(Metric metric, std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch,
                "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  if (metric == Metric::ChiSquared) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] < 0.0f || b[i] < 0.0f)
        throw Error(ErrorCode::NegativeComponent, "chi-squared needs nonnegative components");
  }
  return detail::unchecked(metric, a.data(), b.data(), a.size());
}

}  // namespace cbmr
