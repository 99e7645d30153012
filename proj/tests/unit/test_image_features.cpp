#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cbmr/image_features.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace cbmr;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("CIELAB reference colors") {
  const auto white = rgb_to_lab(255, 255, 255);
  CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(std::abs(white[1]) < 1e-3);
  CHECK(std::abs(white[2]) < 1e-3);
  const auto black = rgb_to_lab(0, 0, 0);
  CHECK(std::abs(black[0]) < 1e-9);
  const auto red = rgb_to_lab(255, 0, 0);
  CHECK(red[0] == doctest::Approx(53.24).epsilon(1e-3));
  CHECK(red[1] == doctest::Approx(80.09).epsilon(1e-3));
  CHECK(red[2] == doctest::Approx(67.20).epsilon(1e-3));
}

TEST_CASE("color grid equals per-cell mean RGB converted to Lab") {
  for (int trial = 0; trial < 4; ++trial) {
    const auto img = synth::random_scene(40 + trial, 50 + 7 * trial, 33 + 5 * trial);
    const auto got = average_color_grid(img);
    REQUIRE(got.values.size() == 192);
    CHECK(got.category == "color-grid");
    const auto means = oracle::color_grid_rgb_means(img);
    for (int c = 0; c < 64; ++c) {
      const auto lab = rgb_to_lab(means[c][0], means[c][1], means[c][2]);
      for (int k = 0; k < 3; ++k) CHECK(got.values[c * 3 + k] == doctest::Approx(lab[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("grid cell bounds partition the extent") {
  for (int extent = 8; extent < 70; ++extent) {
    int prev = 0;
    for (int i = 0; i < 8; ++i) {
      const auto [b, e] = grid_cell_bounds(extent, 8, i);
      CHECK(b == prev);
      CHECK(e > b);
      prev = e;
    }
    CHECK(prev == extent);
  }
}

TEST_CASE("edge histogram matches the block-filter oracle") {
  for (int trial = 0; trial < 3; ++trial) {
    const auto img = synth::random_scene(60 + trial, 80 + 9 * trial, 60 + 3 * trial);
    CHECK(max_abs_diff(edge_histogram(img).values, oracle::edge_histogram(img)) <= 1e-12);
  }
}

TEST_CASE("edge block classification") {
  CHECK(classify_edge_block(1, 0, 1, 0) == EdgeType::Vertical);
  CHECK(classify_edge_block(1, 1, 0, 0) == EdgeType::Horizontal);
  CHECK(classify_edge_block(1, 0.5, 0.5, 0) == EdgeType::Diagonal45);
  CHECK(classify_edge_block(0.5, 1, 0, 0.5) == EdgeType::Diagonal135);
  CHECK(classify_edge_block(1, 0, 0, 1) == EdgeType::NonDirectional);
  CHECK(classify_edge_block(0.5, 0.5, 0.5, 0.5) == EdgeType::None);
  // The threshold is strict.
  CHECK(classify_edge_block(kEdgeThreshold / 4, -kEdgeThreshold / 4, kEdgeThreshold / 4, -kEdgeThreshold / 4) ==
        EdgeType::None);
}

TEST_CASE("HOG cell histograms: serial, parallel and oracle agree") {
  const HogParams p;
  const auto img = synth::random_scene(91);
  const auto canvas = resize_gray_bilinear(to_gray(img, 1.0 / 255.0), p.canvas, p.canvas);
  const auto want = oracle::hog_binning(canvas.values, p.canvas, p.cell, p.bins);
  const auto serial = hog_cell_histograms(img, p, kernels::Exec::Serial);
  const auto parallel = hog_cell_histograms(img, p, kernels::Exec::Parallel);
  CHECK(serial == parallel);
  CHECK(max_abs_diff(serial, want) <= 1e-9);
}

TEST_CASE("HOG descriptor blocks are normalized and clipped") {
  const auto d = hog_descriptor(synth::random_scene(17));
  REQUIRE(d.values.size() == 8100);
  for (std::size_t b = 0; b < 225; ++b) {
    double norm = 0;
    for (int i = 0; i < 36; ++i) {
      const double v = d.values[b * 36 + i];
      CHECK(v >= 0);
      norm += v * v;
    }
    CHECK(std::sqrt(norm) <= 1.0 + 1e-9);
  }
}

TEST_CASE("SURF finds blobs and describes them with unit 64-d vectors") {
  RasterImage img(160, 160, 255);
  for (int y = 0; y < 160; ++y)
    for (int x = 0; x < 160; ++x)
      if (std::hypot(x - 50, y - 60) < 7 || std::hypot(x - 110, y - 100) < 10.5) std::fill(img.at(x, y), img.at(x, y) + 3, 0);
  const auto kps = detect_keypoints(img);
  REQUIRE(kps.size() >= 2);
  bool near_a = false, near_b = false;
  for (const auto& k : kps) {
    CHECK(k.descriptor.size() == kLocalDescriptorDim);
    const double n = std::sqrt(std::inner_product(k.descriptor.begin(), k.descriptor.end(), k.descriptor.begin(), 0.0));
    CHECK(n == doctest::Approx(1.0).epsilon(1e-6));
    near_a |= std::hypot(k.x - 50, k.y - 60) < 4;
    near_b |= std::hypot(k.x - 110, k.y - 100) < 4;
  }
  CHECK(near_a);
  CHECK(near_b);
  CHECK(detect_keypoints(RasterImage(64, 64, 128)).empty());
}

TEST_CASE("codebook training is deterministic and the histogram sums to one") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  std::vector<LocalDescriptor> ds;
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 25; ++i) {
      LocalDescriptor d(8);
      for (int k = 0; k < 8; ++k) d[k] = (k == c ? 10.0 : 0.0) + 0.1 * g(rng);
      ds.push_back(d);
    }
  const Codebook a = train_codebook(ds, 4, 42), b = train_codebook(ds, 4, 42);
  CHECK(a.centroids == b.centroids);
  CHECK(a.k() == 4);
  CHECK(a.dim() == 8);
  // Each cluster lands on its own centroid.
  std::set<std::size_t> used;
  for (int c = 0; c < 4; ++c) used.insert(nearest_centroid(a, ds[c * 25]));
  CHECK(used.size() == 4);
  const auto h = bow_histogram(ds, a);
  CHECK(std::accumulate(h.values.begin(), h.values.end(), 0.0) == doctest::Approx(1.0));
  for (double v : h.values) CHECK(v == doctest::Approx(0.25));
  const auto empty = bow_histogram(std::vector<LocalDescriptor>{}, a);
  CHECK(std::accumulate(empty.values.begin(), empty.values.end(), 0.0) == 0.0);
}

TEST_CASE("nearest centroid ties go to the lowest index") {
  Codebook cb{"surf-bow", {{1, 0}, {-1, 0}, {0, 1}}};
  CHECK(nearest_centroid(cb, std::vector<double>{0, 0}) == 0);
  CHECK(nearest_centroid(cb, std::vector<double>{0, 0.9}) == 2);
}
