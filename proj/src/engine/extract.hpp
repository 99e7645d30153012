#pragma once

// Feature extraction shared by ingest (stored segments) and query terms.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbmr/audio_features.hpp"
#include "cbmr/image_features.hpp"
#include "cbmr/media.hpp"
#include "cbmr/shape_features.hpp"

namespace cbmr::engine {

using Rows = std::vector<std::vector<float>>;

struct Extracted {
  std::map<std::string, Rows> rows;  // category -> vectors in row order
  std::vector<FingerprintHash> hashes;
  // Query side only: hashes of the same audio started a quarter, half and
  // three quarters of a hop later. An excerpt rarely starts on the stored
  // frame grid, and the peak times it produces drift with the phase.
  std::vector<std::vector<FingerprintHash>> phase_hashes;
};

/// Row id of the n-th vector of a segment in a category.
std::string row_id(const std::string& category, const std::string& segment_id, std::size_t n);
bool is_multi_row(const std::string& category);

using Wanted = std::set<std::string>;

Extracted extract_image(const RasterImage& image, const Wanted& wanted, const Codebook* codebook);
Extracted extract_audio(std::span<const float> samples, const Wanted& wanted, bool query = false);
Extracted extract_mesh(const TriangleMesh& mesh, const Wanted& wanted);
Extracted extract_sketch(const RasterImage& sketch);

std::vector<float> to_float(std::span<const double> v);

}  // namespace cbmr::engine
