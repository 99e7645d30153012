#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbmr/descriptor.hpp"
#include "cbmr/kernels.hpp"
#include "cbmr/media.hpp"

namespace cbmr {

inline constexpr int kStftWindow = 4096;
inline constexpr int kStftHop = 1024;
inline constexpr int kStftBins = kStftWindow / 2 + 1;

struct Spectrogram {
  std::size_t frame_count = 0;
  int bin_count = kStftBins;
  int sample_rate = kAudioSampleRate;
  std::vector<double> magnitudes;  // frame-major

  double at(std::size_t frame, int bin) const { return magnitudes[frame * bin_count + bin]; }
  std::span<const double> frame(std::size_t f) const {
    return {magnitudes.data() + f * bin_count, static_cast<std::size_t>(bin_count)};
  }
  double bin_frequency(double bin) const { return bin * sample_rate / (2.0 * (bin_count - 1)); }
};

Spectrogram stft(const AudioBuffer& audio, kernels::Exec exec = kernels::Exec::Parallel);
Spectrogram stft(std::span<const float> samples, kernels::Exec exec = kernels::Exec::Parallel);

using Chroma = std::array<double, 12>;

enum class ChromaVariant { Hpcp, Cens };

struct ChromaSequence {
  std::vector<Chroma> frames;
  ChromaVariant variant = ChromaVariant::Hpcp;
};

struct HpcpParams {
  double min_frequency = 100.0;
  double max_frequency = 5000.0;
  double relative_peak_floor = 1e-4;
  /// Full width of the cos^2 weighting window in semitones.
  double window_semitones = 4.0 / 3.0;
};

/// Continuous pitch-class position of a frequency: 12*log2(f/440) + 9, wrapped to [0, 12).
double pitch_class_position(double frequency);

/// Pitch class index C=0 .. B=11.
int pitch_class(double frequency);

ChromaSequence hpcp(const Spectrogram& spec, const HpcpParams& params = {});

struct CensParams {
  std::array<double, 4> thresholds{0.05, 0.1, 0.2, 0.4};
  int smoothing = 41;
  int downsample = 10;
};

/// Quantize(L1-normalized frame) -> Hann smoothing -> downsample -> L2 normalization.
ChromaSequence cens(const ChromaSequence& chroma, const CensParams& params = {});

/// Smoothing window used by cens: w[i] = 0.5 (1 - cos(2 pi (i+1) / (n+1))).
std::vector<double> cens_window(int length);

inline constexpr int kShingleLength = 30;
inline constexpr int kShingleHop = 10;
/// CENS runs at a tenth of the frame rate, so its shingles are shorter.
inline constexpr int kCensShingleLength = 10;
inline constexpr int kCensShingleHop = 1;

/// Concatenates `length` consecutive frames every `hop` frames into
/// L2-normalized vectors. Vectors with norm below 1e-9 are left at zero.
std::vector<DescriptorVector> shingle(std::span<const std::vector<double>> frames, int length, int hop,
                                      std::string_view category);
std::vector<DescriptorVector> shingle(const ChromaSequence& seq, int length = kShingleLength,
                                      int hop = kShingleHop);

// --- MFCC -----------------------------------------------------------------

inline constexpr int kMelFilters = 26;
inline constexpr int kMfccCoefficients = 13;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters over the spectrogram bins, row-major kMelFilters x bins.
std::vector<double> mel_filter_bank(int filters = kMelFilters, double min_hz = 0.0, double max_hz = 8000.0,
                                    int bins = kStftBins, int sample_rate = kAudioSampleRate);

/// Cepstral coefficients 1..13 per frame.
std::vector<std::vector<double>> mfcc_frames(const Spectrogram& spec);

/// MFCC frames shingled (30 frames, hop 10) into 390-d unit vectors.
std::vector<DescriptorVector> mfcc(const Spectrogram& spec);

// --- constellation fingerprint --------------------------------------------

struct FingerprintHash {
  std::uint32_t hash = 0;
  std::int32_t anchor_time = 0;
  std::string segment_id;
};

struct HashFields {
  std::uint32_t f1;
  std::uint32_t f2;
  std::uint32_t dt;
};

std::uint32_t pack_hash(std::uint32_t f1, std::uint32_t f2, std::uint32_t dt);
HashFields unpack_hash(std::uint32_t hash);

struct Peak {
  int frame;
  int bin;
  double magnitude;
};

struct FingerprintParams {
  int neighborhood_frames = 15;
  int neighborhood_bins = 31;
  int peaks_per_second = 5;
  int fan_out = 5;
  int max_dt = 100;
  int max_dbin = 128;
  int max_bin = 1023;
};

std::vector<Peak> constellation_peaks(const Spectrogram& spec, const FingerprintParams& params = {});
std::vector<FingerprintHash> fingerprint(const Spectrogram& spec, const FingerprintParams& params = {});

// --- query routing --------------------------------------------------------

enum class AudioQueryCategory { Fingerprint, Matching, VersionId };

std::string_view to_string(AudioQueryCategory category);
/// Accepts "fingerprint", "matching", "version_id" (any case). InvalidQuery otherwise.
AudioQueryCategory audio_category_from_string(std::string_view name);

std::vector<std::string> audio_features_for_category(AudioQueryCategory category);

}  // namespace cbmr
