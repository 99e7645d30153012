#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cbmr {

/// Fixed-length real vector tagged with its feature category.
struct DescriptorVector {
  std::string category;
  std::vector<double> values;
  std::string segment_id;

  std::size_t dim() const { return values.size(); }
};

/// Registered feature-category names.
namespace category {
inline constexpr std::string_view kColorGrid = "color-grid";
inline constexpr std::string_view kEdgeHistogram = "edge-histogram";
inline constexpr std::string_view kHog = "hog";
inline constexpr std::string_view kSurfBow = "surf-bow";
inline constexpr std::string_view kSurfLocal = "surf-local";
inline constexpr std::string_view kHpcpShingle = "hpcp-shingle";
inline constexpr std::string_view kCensShingle = "cens-shingle";
inline constexpr std::string_view kMfccShingle = "mfcc-shingle";
inline constexpr std::string_view kFingerprint = "fingerprint";
inline constexpr std::string_view kSphericalHarmonics = "spherical-harmonics";
inline constexpr std::string_view kLightField = "lightfield";
}  // namespace category

}  // namespace cbmr
