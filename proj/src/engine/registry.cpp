#include <algorithm>

#include "cbmr/descriptor.hpp"
#include "cbmr/engine.hpp"
#include "cbmr/error.hpp"
#include "cbmr/shape_features.hpp"

namespace cbmr {

const std::vector<CategoryInfo>& category_registry() {
  static const std::vector<CategoryInfo> registry = {
      {std::string(category::kColorGrid), 192, Metric::L2, true},
      {std::string(category::kEdgeHistogram), 80, Metric::ChiSquared, true},
      {std::string(category::kHog), 8100, Metric::L2, true},
      {std::string(category::kSurfBow), 0, Metric::ChiSquared, true},
      {std::string(category::kSurfLocal), 64, Metric::L2, false},
      {std::string(category::kHpcpShingle), 360, Metric::L2, true},
      {std::string(category::kCensShingle), 120, Metric::L2, true},
      {std::string(category::kMfccShingle), 390, Metric::L2, true},
      {std::string(category::kFingerprint), 0, Metric::L2, true},
      {std::string(category::kSphericalHarmonics), 160, Metric::L2, true},
      {std::string(category::kLightField), kViewDescriptorDim, Metric::L1, true},
  };
  return registry;
}

const CategoryInfo& category_info(std::string_view name) {
  for (const auto& c : category_registry())
    if (c.name == name) return c;
  throw Error(ErrorCode::UnknownCategory, "unknown feature category '" + std::string(name) + "'");
}

std::vector<std::string> default_categories(TermType type, const Reference& reference,
                                            std::optional<AudioQueryCategory> audio_category) {
  switch (type) {
    case TermType::Image:
      return {std::string(category::kColorGrid), std::string(category::kEdgeHistogram), std::string(category::kHog),
              std::string(category::kSurfBow)};
    case TermType::Audio: return audio_features_for_category(audio_category.value_or(AudioQueryCategory::Matching));
    case TermType::Model3D:
      if (std::holds_alternative<RasterImage>(reference)) return {std::string(category::kLightField)};
      return {std::string(category::kSphericalHarmonics), std::string(category::kLightField)};
    case TermType::Motion: break;
  }
  throw Error(ErrorCode::UnsupportedTerm, "motion terms are not supported");
}

}  // namespace cbmr
