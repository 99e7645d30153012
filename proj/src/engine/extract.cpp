#include "extract.hpp"

#include "cbmr/descriptor.hpp"

namespace cbmr::engine {

namespace {

bool want(const Wanted& wanted, std::string_view category) { return wanted.count(std::string(category)) != 0; }

void add(Extracted& out, std::string_view category, const DescriptorVector& v) {
  out.rows[std::string(category)].push_back(to_float(v.values));
}

void add_all(Extracted& out, std::string_view category, const std::vector<DescriptorVector>& vs) {
  auto& rows = out.rows[std::string(category)];
  for (const auto& v : vs) rows.push_back(to_float(v.values));
}

}  // namespace

std::vector<float> to_float(std::span<const double> v) { return std::vector<float>(v.begin(), v.end()); }

bool is_multi_row(const std::string& category) {
  return category == category::kSurfLocal || category == category::kHpcpShingle || category == category::kCensShingle ||
         category == category::kMfccShingle || category == category::kLightField;
}

std::string row_id(const std::string& category, const std::string& segment_id, std::size_t n) {
  if (category == category::kLightField) return segment_id + "@v" + std::to_string(n);
  if (is_multi_row(category)) return segment_id + "@" + std::to_string(n);
  return segment_id;
}

Extracted extract_image(const RasterImage& image, const Wanted& wanted, const Codebook* codebook) {
  Extracted out;
  if (want(wanted, category::kColorGrid)) add(out, category::kColorGrid, average_color_grid(image));
  if (want(wanted, category::kEdgeHistogram)) add(out, category::kEdgeHistogram, edge_histogram(image));
  if (want(wanted, category::kHog)) add(out, category::kHog, hog_descriptor(image));
  const bool local = want(wanted, category::kSurfLocal);
  const bool bow = want(wanted, category::kSurfBow) && codebook != nullptr;
  if (local || bow) {
    const auto descriptors = detect_local_descriptors(image);
    if (local) {
      auto& rows = out.rows[std::string(category::kSurfLocal)];
      for (const auto& d : descriptors) rows.push_back(to_float(d));
    }
    if (bow) add(out, category::kSurfBow, bow_histogram(descriptors, *codebook));
  }
  return out;
}

Extracted extract_audio(std::span<const float> samples, const Wanted& wanted, bool query) {
  Extracted out;
  const Spectrogram spec = stft(samples);
  const bool hpcp_shingles = want(wanted, category::kHpcpShingle);
  const bool cens_shingles = want(wanted, category::kCensShingle);
  if (hpcp_shingles || cens_shingles) {
    const ChromaSequence chroma = hpcp(spec);
    if (hpcp_shingles) add_all(out, category::kHpcpShingle, shingle(chroma, kShingleLength, kShingleHop));
    if (cens_shingles)
      add_all(out, category::kCensShingle, shingle(cens(chroma), kCensShingleLength, kCensShingleHop));
  }
  if (want(wanted, category::kMfccShingle)) add_all(out, category::kMfccShingle, mfcc(spec));
  if (want(wanted, category::kFingerprint)) {
    out.hashes = fingerprint(spec);
    if (query)
      for (int phase = 1; phase < 4; ++phase) {
        const std::size_t skip = static_cast<std::size_t>(phase) * kStftHop / 4;
        if (samples.size() > skip) out.phase_hashes.push_back(fingerprint(stft(samples.subspan(skip))));
      }
  }
  return out;
}

Extracted extract_mesh(const TriangleMesh& mesh, const Wanted& wanted) {
  Extracted out;
  const NormalizedMesh nm = normalize_mesh(mesh);
  if (want(wanted, category::kSphericalHarmonics)) add(out, category::kSphericalHarmonics, sh_descriptor(nm));
  if (want(wanted, category::kLightField)) {
    const LightFieldDescriptor lf = lightfield_descriptor(nm);
    auto& rows = out.rows[std::string(category::kLightField)];
    for (const auto& view : lf.views) rows.push_back(to_float(view));
  }
  return out;
}

Extracted extract_sketch(const RasterImage& sketch) {
  Extracted out;
  out.rows[std::string(category::kLightField)].push_back(to_float(sketch_to_lightfield_query(sketch)));
  return out;
}

}  // namespace cbmr::engine
