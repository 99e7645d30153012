#include <doctest.h>

#include <random>

#include "cbmr/error.hpp"
#include "cbmr/segmentation.hpp"

using namespace cbmr;

namespace {

AudioBuffer silence(double seconds) {
  return {kAudioSampleRate, std::vector<float>(static_cast<std::size_t>(std::llround(seconds * kAudioSampleRate)), 0.f)};
}

GrayHistogram spike(int bin) {
  GrayHistogram h{};
  h[bin] = 1.0;
  return h;
}

}  // namespace

TEST_CASE("segment ids") {
  CHECK(make_segment_id("abc", "", 3) == "abc:3");
  CHECK(make_segment_id("abc", "a", 0) == "abc:a0");
}

TEST_CASE("audio windows are ten seconds with one second overlap") {
  const auto segs = segment_audio_windows(silence(25), "o");
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].start == 0);
  CHECK(segs[0].end == 10 * kAudioSampleRate);
  CHECK(segs[1].start == 9 * kAudioSampleRate);
  CHECK(segs[1].end == 19 * kAudioSampleRate);
  CHECK(segs[2].start == 18 * kAudioSampleRate);
  CHECK(segs[2].end == 25 * kAudioSampleRate);
  CHECK(segs[2].segment_id == "o:2");
  CHECK(segs[2].unit == SegmentUnit::Samples);
}

TEST_CASE("a tail adding less than a second is dropped") {
  CHECK(segment_audio_windows(silence(19.5), "o").size() == 2);
  CHECK(segment_audio_windows(silence(20.0), "o").size() == 3);
  CHECK(segment_audio_windows(silence(4), "o").size() == 1);
  CHECK(segment_audio_windows(silence(0), "o").empty());
  CHECK(segment_audio_windows(silence(12), "v", "a")[1].segment_id == "v:a1");
}

TEST_CASE("audio window property: windows tile the signal with a bounded gap at the end") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::int64_t> len(1, 60 * kAudioSampleRate);
  for (int t = 0; t < 200; ++t) {
    const std::int64_t n = len(rng);
    const auto segs = segment_audio_windows({kAudioSampleRate, std::vector<float>(n)}, "x");
    REQUIRE_FALSE(segs.empty());
    CHECK(segs.front().start == 0);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].sequence_number == static_cast<int>(i));
      CHECK(segs[i].end - segs[i].start <= kAudioWindowSamples);
      CHECK(segs[i].end <= n);
      if (i > 0) CHECK(segs[i].start == segs[i - 1].start + kAudioWindowHop);
    }
    CHECK(n - segs.back().end < kAudioMinTail);
  }
}

TEST_CASE("shots cut where the histogram jumps") {
  std::vector<GrayHistogram> h;
  for (int i = 0; i < 10; ++i) h.push_back(spike(2));
  for (int i = 0; i < 8; ++i) h.push_back(spike(20));
  const auto shots = detect_shots(h);
  REQUIRE(shots.size() == 2);
  CHECK(shots[0] == std::pair<std::int64_t, std::int64_t>{0, 10});
  CHECK(shots[1] == std::pair<std::int64_t, std::int64_t>{10, 18});
}

TEST_CASE("short shots merge backward, a short leading shot forward") {
  std::vector<GrayHistogram> h;
  for (int i = 0; i < 2; ++i) h.push_back(spike(0));
  for (int i = 0; i < 10; ++i) h.push_back(spike(10));
  for (int i = 0; i < 3; ++i) h.push_back(spike(20));
  for (int i = 0; i < 6; ++i) h.push_back(spike(30));
  const auto shots = detect_shots(h);
  REQUIRE(shots.size() == 2);
  CHECK(shots[0] == std::pair<std::int64_t, std::int64_t>{0, 15});
  CHECK(shots[1] == std::pair<std::int64_t, std::int64_t>{15, 21});
}

TEST_CASE("shot property: a partition of the frames into runs of at least the minimum length") {
  std::mt19937 rng(5);
  for (int t = 0; t < 300; ++t) {
    std::vector<GrayHistogram> h;
    const int n = std::uniform_int_distribution<int>(1, 80)(rng);
    int bin = 0;
    for (int i = 0; i < n; ++i) {
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.2) bin = (bin + 7) % kShotHistogramBins;
      h.push_back(spike(bin));
    }
    const auto shots = detect_shots(h);
    REQUIRE_FALSE(shots.empty());
    CHECK(shots.front().first == 0);
    CHECK(shots.back().second == n);
    for (std::size_t i = 0; i < shots.size(); ++i) {
      if (i > 0) CHECK(shots[i].first == shots[i - 1].second);
      if (shots.size() > 1) CHECK(shots[i].second - shots[i].first >= 5);
    }
  }
}

TEST_CASE("gray histogram sums to one and L1 distance is symmetric") {
  RasterImage img(4, 4, 0);
  for (int x = 0; x < 4; ++x) img.at(x, 0)[0] = img.at(x, 0)[1] = img.at(x, 0)[2] = 255;
  const auto h = gray_histogram(img);
  double sum = 0;
  for (double v : h) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(h[0] == doctest::Approx(0.75));
  CHECK(h[31] == doctest::Approx(0.25));
  CHECK(histogram_l1(h, spike(0)) == doctest::Approx(0.5));
  CHECK(histogram_l1(spike(0), h) == histogram_l1(h, spike(0)));
}

TEST_CASE("trivial segments cover images and meshes only") {
  MediaObject o{"id", MediaType::Image, "p", "n", 1};
  const auto s = trivial_segment(o);
  CHECK(s.segment_id == "id:0");
  CHECK(s.unit == SegmentUnit::Whole);
  o.media_type = MediaType::Audio;
  CHECK_THROWS_AS(trivial_segment(o), Error);
}
