#include <algorithm>
#include <deque>
#include <map>

#include "cbmr/audio_features.hpp"

namespace cbmr {

std::uint32_t pack_hash(std::uint32_t f1, std::uint32_t f2, std::uint32_t dt) {
  return ((f1 & 0x3FFu) << 22) | ((f2 & 0x3FFu) << 12) | (dt & 0xFFFu);
}

HashFields unpack_hash(std::uint32_t hash) { return {hash >> 22, (hash >> 12) & 0x3FFu, hash & 0xFFFu}; }

namespace {

// Sliding-window maximum over a 1-D sequence (monotone deque).
void window_max(const double* in, double* out, int n, int radius, int stride) {
  std::deque<int> dq;
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int hi = std::min(n - 1, i + radius);
    while (next <= hi) {
      while (!dq.empty() && in[dq.back() * stride] <= in[next * stride]) dq.pop_back();
      dq.push_back(next++);
    }
    while (dq.front() < i - radius) dq.pop_front();
    out[i * stride] = in[dq.front() * stride];
  }
}

}  // namespace

std::vector<Peak> constellation_peaks(const Spectrogram& spec, const FingerprintParams& params) {
  const int frames = static_cast<int>(spec.frame_count);
  const int bins = std::min(params.max_bin + 1, spec.bin_count);
  std::vector<double> mag(static_cast<std::size_t>(frames) * bins);
  for (int f = 0; f < frames; ++f)
    for (int k = 0; k < bins; ++k) mag[static_cast<std::size_t>(f) * bins + k] = spec.at(f, k);

  // Separable max filter: across bins, then across frames.
  std::vector<double> across_bins(mag.size()), local_max(mag.size());
  for (int f = 0; f < frames; ++f)
    window_max(&mag[static_cast<std::size_t>(f) * bins], &across_bins[static_cast<std::size_t>(f) * bins], bins,
               params.neighborhood_bins / 2, 1);
  for (int k = 0; k < bins; ++k)
    window_max(&across_bins[k], &local_max[k], frames, params.neighborhood_frames / 2, bins);

  std::vector<Peak> candidates;
  for (int f = 0; f < frames; ++f)
    for (int k = 1; k < bins; ++k) {
      const double v = mag[static_cast<std::size_t>(f) * bins + k];
      if (v > 0.0 && v == local_max[static_cast<std::size_t>(f) * bins + k]) candidates.push_back({f, k, v});
    }

  // Top peaks per second, counted over a one-second window centred on each
  // candidate so the selection does not depend on where the audio starts.
  const double half_window = 0.5 * static_cast<double>(spec.sample_rate) / kStftHop;
  const auto stronger = [](const Peak& a, const Peak& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return a.frame != b.frame ? a.frame < b.frame : a.bin < b.bin;
  };
  std::vector<Peak> peaks;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Peak& c = candidates[i];
    while (candidates[lo].frame < c.frame - half_window) ++lo;
    int above = 0;
    for (std::size_t j = lo; j < candidates.size() && candidates[j].frame <= c.frame + half_window; ++j)
      if (stronger(candidates[j], c) && ++above >= params.peaks_per_second) break;
    if (above < params.peaks_per_second) peaks.push_back(c);
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.frame != b.frame ? a.frame < b.frame : a.bin < b.bin; });
  return peaks;
}

std::vector<FingerprintHash> fingerprint(const Spectrogram& spec, const FingerprintParams& params) {
  const auto peaks = constellation_peaks(spec, params);
  std::vector<FingerprintHash> hashes;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    int paired = 0;
    for (std::size_t j = i + 1; j < peaks.size() && paired < params.fan_out; ++j) {
      const int dt = peaks[j].frame - peaks[i].frame;
      if (dt < 1) continue;
      if (dt > params.max_dt) break;
      if (std::abs(peaks[j].bin - peaks[i].bin) > params.max_dbin) continue;
      hashes.push_back({pack_hash(static_cast<std::uint32_t>(peaks[i].bin), static_cast<std::uint32_t>(peaks[j].bin),
                                  static_cast<std::uint32_t>(dt)),
                        peaks[i].frame, {}});
      ++paired;
    }
  }
  return hashes;
}

}  // namespace cbmr
