#include "cbmr/audio_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "cbmr/error.hpp"

namespace cbmr {

Spectrogram stft(std::span<const float> samples, kernels::Exec exec) {
  Spectrogram spec;
  spec.magnitudes = kernels::stft_magnitudes(samples, kStftWindow, kStftHop, spec.frame_count, exec);
  return spec;
}

Spectrogram stft(const AudioBuffer& audio, kernels::Exec exec) { return stft(audio.samples, exec); }

// ---------------------------------------------------------------------------
// HPCP

double pitch_class_position(double frequency) {
  double pos = std::fmod(12.0 * std::log2(frequency / 440.0) + 9.0, 12.0);
  if (pos < 0.0) pos += 12.0;
  return pos;
}

int pitch_class(double frequency) {
  const long p = std::lround(12.0 * std::log2(frequency / 440.0)) + 9;
  return static_cast<int>(((p % 12) + 12) % 12);
}

ChromaSequence hpcp(const Spectrogram& spec, const HpcpParams& params) {
  ChromaSequence out;
  out.variant = ChromaVariant::Hpcp;
  out.frames.resize(spec.frame_count, Chroma{});
  const double half_width = params.window_semitones / 2.0;
  const int lo_bin = std::max(1, static_cast<int>(std::floor(params.min_frequency / spec.bin_frequency(1))));
  const int hi_bin =
      std::min(spec.bin_count - 2, static_cast<int>(std::ceil(params.max_frequency / spec.bin_frequency(1))));

  for (std::size_t f = 0; f < spec.frame_count; ++f) {
    const auto mag = spec.frame(f);
    const double frame_max = *std::max_element(mag.begin(), mag.end());
    Chroma& chroma = out.frames[f];
    if (frame_max <= 0.0) continue;
    const double floor = params.relative_peak_floor * frame_max;
    for (int k = lo_bin; k <= hi_bin; ++k) {
      if (!(mag[k] > mag[k - 1] && mag[k] >= mag[k + 1]) || mag[k] <= floor) continue;
      // Quadratic interpolation refines the peak between bins.
      const double a = mag[k - 1], b = mag[k], c = mag[k + 1];
      const double denom = a - 2 * b + c;
      const double offset = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
      const double freq = spec.bin_frequency(k + offset);
      if (freq < params.min_frequency || freq > params.max_frequency) continue;
      const double peak = b - 0.25 * (a - c) * offset;
      const double weight = peak * peak;
      const double pos = pitch_class_position(freq);
      for (int pc = 0; pc < 12; ++pc) {
        double d = pos - pc;
        if (d > 6.0) d -= 12.0;
        if (d < -6.0) d += 12.0;
        if (std::abs(d) > half_width) continue;
        const double w = std::cos(std::numbers::pi / 2.0 * d / half_width);
        chroma[pc] += weight * w * w;
      }
    }
    const double peak_class = *std::max_element(chroma.begin(), chroma.end());
    if (peak_class > 0.0)
      for (double& v : chroma) v /= peak_class;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CENS

std::vector<double> cens_window(int length) {
  std::vector<double> w(length);
  for (int i = 0; i < length; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (i + 1) / (length + 1)));
  return w;
}

ChromaSequence cens(const ChromaSequence& chroma, const CensParams& params) {
  const auto n = static_cast<long>(chroma.frames.size());
  std::vector<Chroma> quantized(chroma.frames.size(), Chroma{});
  for (long f = 0; f < n; ++f) {
    double l1 = 0.0;
    for (double v : chroma.frames[f]) l1 += std::abs(v);
    if (l1 <= 0.0) continue;
    for (int c = 0; c < 12; ++c) {
      const double v = chroma.frames[f][c] / l1;
      double q = 0.0;
      for (double t : params.thresholds)
        if (v >= t) q += 1.0;
      quantized[f][c] = q;
    }
  }

  const std::vector<double> window = cens_window(params.smoothing);
  const long half = params.smoothing / 2;
  ChromaSequence out;
  out.variant = ChromaVariant::Cens;
  for (long center = 0; center < n; center += params.downsample) {
    Chroma smoothed{};
    for (long i = 0; i < params.smoothing; ++i) {
      const long src = center + i - half;
      if (src < 0 || src >= n) continue;
      for (int c = 0; c < 12; ++c) smoothed[c] += window[i] * quantized[src][c];
    }
    double norm = 0.0;
    for (double v : smoothed) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& v : smoothed) v /= norm;
    out.frames.push_back(smoothed);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shingles

std::vector<DescriptorVector> shingle(std::span<const std::vector<double>> frames, int length, int hop,
                                      std::string_view category) {
  std::vector<DescriptorVector> out;
  if (length <= 0 || hop <= 0 || frames.size() < static_cast<std::size_t>(length)) return out;
  for (std::size_t start = 0; start + length <= frames.size(); start += hop) {
    DescriptorVector v{std::string(category), {}, {}};
    for (int i = 0; i < length; ++i) v.values.insert(v.values.end(), frames[start + i].begin(), frames[start + i].end());
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-9)
      std::fill(v.values.begin(), v.values.end(), 0.0);
    else
      for (double& x : v.values) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<DescriptorVector> shingle(const ChromaSequence& seq, int length, int hop) {
  std::vector<std::vector<double>> frames;
  frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) frames.emplace_back(f.begin(), f.end());
  const auto name = seq.variant == ChromaVariant::Hpcp ? category::kHpcpShingle : category::kCensShingle;
  return shingle(frames, length, hop, name);
}

// ---------------------------------------------------------------------------
// MFCC

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filter_bank(int filters, double min_hz, double max_hz, int bins, int sample_rate) {
  std::vector<double> edges(filters + 2);
  const double lo = hz_to_mel(min_hz), hi = hz_to_mel(max_hz);
  for (int i = 0; i < filters + 2; ++i) edges[i] = mel_to_hz(lo + (hi - lo) * i / (filters + 1));
  std::vector<double> bank(static_cast<std::size_t>(filters) * bins, 0.0);
  const double bin_hz = sample_rate / (2.0 * (bins - 1));
  for (int m = 0; m < filters; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f >= left && f <= center)
        w = (f - left) / (center - left);
      else if (f > center && f <= right)
        w = (right - f) / (right - center);
      bank[static_cast<std::size_t>(m) * bins + k] = w;
    }
  }
  return bank;
}

std::vector<std::vector<double>> mfcc_frames(const Spectrogram& spec) {
  static const std::vector<double> bank = mel_filter_bank();
  std::vector<std::vector<double>> out(spec.frame_count, std::vector<double>(kMfccCoefficients, 0.0));
  std::vector<double> log_energy(kMelFilters);
  for (std::size_t f = 0; f < spec.frame_count; ++f) {
    const auto mag = spec.frame(f);
    for (int m = 0; m < kMelFilters; ++m) {
      const double* row = &bank[static_cast<std::size_t>(m) * kStftBins];
      double e = 0.0;
      for (int k = 0; k < kStftBins; ++k)
        if (row[k] != 0.0) e += row[k] * mag[k] * mag[k];
      log_energy[m] = std::log(std::max(e, 1e-10));
    }
    for (int n = 1; n <= kMfccCoefficients; ++n) {
      double c = 0.0;
      for (int m = 0; m < kMelFilters; ++m)
        c += log_energy[m] * std::cos(std::numbers::pi * n * (m + 0.5) / kMelFilters);
      out[f][n - 1] = c;
    }
  }
  return out;
}

std::vector<DescriptorVector> mfcc(const Spectrogram& spec) {
  const auto frames = mfcc_frames(spec);
  return shingle(frames, kShingleLength, kShingleHop, category::kMfccShingle);
}

// ---------------------------------------------------------------------------
// Routing

std::string_view to_string(AudioQueryCategory category) {
  switch (category) {
    case AudioQueryCategory::Fingerprint: return "fingerprint";
    case AudioQueryCategory::Matching: return "matching";
    case AudioQueryCategory::VersionId: return "version_id";
  }
  return "matching";
}

AudioQueryCategory audio_category_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "fingerprint" || lower == "fingerprinting") return AudioQueryCategory::Fingerprint;
  if (lower == "matching" || lower == "audio_matching") return AudioQueryCategory::Matching;
  if (lower == "version_id" || lower == "version-id" || lower == "version_identification")
    return AudioQueryCategory::VersionId;
  throw Error(ErrorCode::InvalidQuery, "unknown audio query category '" + std::string(name) + "'");
}

std::vector<std::string> audio_features_for_category(AudioQueryCategory category) {
  switch (category) {
    case AudioQueryCategory::Fingerprint:
      return {std::string(category::kFingerprint), std::string(category::kMfccShingle)};
    case AudioQueryCategory::Matching:
    case AudioQueryCategory::VersionId:
      return {std::string(category::kCensShingle), std::string(category::kHpcpShingle)};
  }
  return {};
}

}  // namespace cbmr
