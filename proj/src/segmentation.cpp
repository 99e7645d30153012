#include "cbmr/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "cbmr/error.hpp"

namespace cbmr {

std::string_view to_string(SegmentUnit unit) {
  switch (unit) {
    case SegmentUnit::Whole: return "whole";
    case SegmentUnit::Frames: return "frames";
    case SegmentUnit::Samples: return "samples";
  }
  return "whole";
}

SegmentUnit segment_unit_from_string(std::string_view name) {
  if (name == "frames") return SegmentUnit::Frames;
  if (name == "samples") return SegmentUnit::Samples;
  return SegmentUnit::Whole;
}

std::string make_segment_id(const std::string& object_id, std::string_view tag, int sequence) {
  return object_id + ":" + std::string(tag) + std::to_string(sequence);
}

GrayHistogram gray_histogram(const RasterImage& image) {
  GrayHistogram hist{};
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = &image.pixels[i * 3];
    const double gray = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    const int bin = std::clamp(static_cast<int>(gray * kShotHistogramBins / 256.0), 0, kShotHistogramBins - 1);
    hist[bin] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(n);
  return hist;
}

double histogram_l1(const GrayHistogram& a, const GrayHistogram& b) {
  double sum = 0.0;
  for (int i = 0; i < kShotHistogramBins; ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

std::vector<std::pair<std::int64_t, std::int64_t>> detect_shots(
    const std::vector<GrayHistogram>& histograms, const ShotDetectorParams& params) {
  const auto n = static_cast<std::int64_t>(histograms.size());
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  if (n == 0) return raw;
  std::int64_t start = 0;
  for (std::int64_t i = 1; i < n; ++i) {
    if (histogram_l1(histograms[i - 1], histograms[i]) > params.threshold) {
      raw.emplace_back(start, i);
      start = i;
    }
  }
  raw.emplace_back(start, n);

  std::vector<std::pair<std::int64_t, std::int64_t>> shots;
  for (const auto& shot : raw) {
    if (!shots.empty() && shot.second - shot.first < params.min_shot_length)
      shots.back().second = shot.second;
    else
      shots.push_back(shot);
  }
  if (shots.size() > 1 && shots.front().second - shots.front().first < params.min_shot_length) {
    shots[1].first = shots[0].first;
    shots.erase(shots.begin());
  }
  return shots;
}

std::vector<SegmentRecord> segment_video_shots(const VideoDocument& video, const std::string& object_id,
                                               const ShotDetectorParams& params) {
  std::vector<GrayHistogram> histograms(video.frame_count());
  for (std::size_t i = 0; i < video.frame_count(); ++i) histograms[i] = gray_histogram(video.frame(i));
  std::vector<SegmentRecord> segments;
  int seq = 0;
  for (const auto& [start, end] : detect_shots(histograms, params)) {
    segments.push_back({make_segment_id(object_id, "", seq), object_id, seq, start, end, SegmentUnit::Frames});
    ++seq;
  }
  return segments;
}

std::vector<SegmentRecord> segment_audio_windows(const AudioBuffer& audio, const std::string& object_id,
                                                 std::string_view tag) {
  const auto n = static_cast<std::int64_t>(audio.samples.size());
  std::vector<SegmentRecord> segments;
  if (n == 0) return segments;
  int seq = 0;
  auto push = [&](std::int64_t start, std::int64_t end) {
    segments.push_back({make_segment_id(object_id, tag, seq), object_id, seq, start, end, SegmentUnit::Samples});
    ++seq;
  };
  if (n <= kAudioWindowSamples) {
    push(0, n);
    return segments;
  }
  std::int64_t start = 0;
  std::int64_t covered = 0;
  while (start + kAudioWindowSamples <= n) {
    push(start, start + kAudioWindowSamples);
    covered = start + kAudioWindowSamples;
    start += kAudioWindowHop;
  }
  if (n - covered >= kAudioMinTail) push(start, n);
  return segments;
}

SegmentRecord trivial_segment(const MediaObject& object) {
  if (object.media_type != MediaType::Image && object.media_type != MediaType::Model3D)
    throw Error(ErrorCode::WrongMediaType, "trivial segmentation applies to images and meshes only");
  return {make_segment_id(object.object_id, "", 0), object.object_id, 0, 0, 1, SegmentUnit::Whole};
}

}  // namespace cbmr
