#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cbmr/media.hpp"

namespace cbmr {

enum class SegmentUnit { Whole, Frames, Samples };

struct SegmentRecord {
  std::string segment_id;
  std::string object_id;
  int sequence_number = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
  SegmentUnit unit = SegmentUnit::Whole;
};

std::string_view to_string(SegmentUnit unit);
SegmentUnit segment_unit_from_string(std::string_view name);

struct ShotDetectorParams {
  double threshold = 0.35;
  int min_shot_length = 5;
};

inline constexpr int kShotHistogramBins = 32;
using GrayHistogram = std::array<double, kShotHistogramBins>;

/// 32-bin luma histogram normalized to sum 1.
GrayHistogram gray_histogram(const RasterImage& image);
double histogram_l1(const GrayHistogram& a, const GrayHistogram& b);

/// Shot boundaries from precomputed per-frame histograms: a cut lies before
/// frame i when the L1 distance to frame i-1 exceeds the threshold. Shots
/// shorter than min_shot_length are merged into the preceding shot (a short
/// leading shot is merged into its successor). Returns [start, end) pairs.
std::vector<std::pair<std::int64_t, std::int64_t>> detect_shots(
    const std::vector<GrayHistogram>& histograms, const ShotDetectorParams& params = {});

std::vector<SegmentRecord> segment_video_shots(const VideoDocument& video,
                                               const std::string& object_id,
                                               const ShotDetectorParams& params = {});

inline constexpr std::int64_t kAudioWindowSamples = 10 * kAudioSampleRate;
inline constexpr std::int64_t kAudioWindowHop = 9 * kAudioSampleRate;
inline constexpr std::int64_t kAudioMinTail = kAudioSampleRate;

/// Ten-second windows with one second of overlap. A trailing partial window
/// is kept when it adds at least one second of audio not covered by the
/// previous window. `tag` is inserted before the sequence number in the
/// segment id (video soundtracks use "a").
std::vector<SegmentRecord> segment_audio_windows(const AudioBuffer& audio,
                                                 const std::string& object_id,
                                                 std::string_view tag = "");

/// Images and meshes form a single segment covering the object.
SegmentRecord trivial_segment(const MediaObject& object);

std::string make_segment_id(const std::string& object_id, std::string_view tag, int sequence);

}  // namespace cbmr
