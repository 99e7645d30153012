#include "cbmr/image_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cbmr {

GrayImage to_gray(const RasterImage& image, double scale) {
  GrayImage gray{image.width, image.height, std::vector<double>(static_cast<std::size_t>(image.width) * image.height)};
  for (std::size_t i = 0; i < gray.values.size(); ++i) {
    const std::uint8_t* p = &image.pixels[i * 3];
    gray.values[i] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) * scale;
  }
  return gray;
}

GrayImage resize_gray_bilinear(const GrayImage& image, int width, int height) {
  GrayImage out{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      const double top = image.at(x0, y0) * (1 - wx) + image.at(x1, y0) * wx;
      const double bottom = image.at(x0, y1) * (1 - wx) + image.at(x1, y1) * wx;
      out.at(x, y) = top * (1 - wy) + bottom * wy;
    }
  }
  return out;
}

std::array<double, 3> rgb_to_lab(double r, double g, double b) {
  auto linear = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double lr = linear(r), lg = linear(g), lb = linear(b);
  const double x = 0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb;
  const double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb;
  const double z = 0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb;
  constexpr double delta = 6.0 / 29.0;
  auto f = [](double t) {
    return t > delta * delta * delta ? std::cbrt(t) : t / (3 * delta * delta) + 4.0 / 29.0;
  };
  const double fx = f(x / 0.95047), fy = f(y / 1.0), fz = f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::pair<int, int> grid_cell_bounds(int extent, int cells, int index) {
  int begin = static_cast<int>(static_cast<long>(index) * extent / cells);
  int end = static_cast<int>(static_cast<long>(index + 1) * extent / cells);
  // Images narrower than the grid reuse the nearest pixel.
  if (end <= begin) {
    begin = std::min(begin, extent - 1);
    end = begin + 1;
  }
  return {begin, end};
}

DescriptorVector average_color_grid(const RasterImage& image) {
  DescriptorVector out{std::string(category::kColorGrid), {}, {}};
  out.values.reserve(kColorGridCells * kColorGridCells * 3);
  for (int gy = 0; gy < kColorGridCells; ++gy) {
    const auto [y0, y1] = grid_cell_bounds(image.height, kColorGridCells, gy);
    for (int gx = 0; gx < kColorGridCells; ++gx) {
      const auto [x0, x1] = grid_cell_bounds(image.width, kColorGridCells, gx);
      double sum[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) sum[c] += image.at(x, y)[c];
      const double n = static_cast<double>(y1 - y0) * (x1 - x0);
      const auto lab = rgb_to_lab(sum[0] / n, sum[1] / n, sum[2] / n);
      out.values.insert(out.values.end(), lab.begin(), lab.end());
    }
  }
  return out;
}

EdgeType classify_edge_block(double a0, double a1, double a2, double a3) {
  const double s2 = std::numbers::sqrt2;
  const double responses[5] = {
      std::abs(a0 - a1 + a2 - a3),
      std::abs(a0 + a1 - a2 - a3),
      std::abs(s2 * a0 - s2 * a3),
      std::abs(s2 * a1 - s2 * a2),
      std::abs(2 * a0 - 2 * a1 - 2 * a2 + 2 * a3),
  };
  int best = 0;
  for (int i = 1; i < 5; ++i)
    if (responses[i] > responses[best]) best = i;
  return responses[best] > kEdgeThreshold ? static_cast<EdgeType>(best) : EdgeType::None;
}

DescriptorVector edge_histogram(const RasterImage& image) {
  const GrayImage gray = to_gray(image, 1.0 / 255.0);
  DescriptorVector out{std::string(category::kEdgeHistogram), std::vector<double>(80, 0.0), {}};
  for (int sy = 0; sy < 4; ++sy) {
    const auto [y0, y1] = grid_cell_bounds(gray.height, 4, sy);
    for (int sx = 0; sx < 4; ++sx) {
      const auto [x0, x1] = grid_cell_bounds(gray.width, 4, sx);
      double* bins = &out.values[(sy * 4 + sx) * 5];
      int blocks = 0;
      for (int y = y0; y + 1 < y1; y += 2) {
        for (int x = x0; x + 1 < x1; x += 2) {
          ++blocks;
          const EdgeType type =
              classify_edge_block(gray.at(x, y), gray.at(x + 1, y), gray.at(x, y + 1), gray.at(x + 1, y + 1));
          if (type != EdgeType::None) bins[static_cast<int>(type)] += 1.0;
        }
      }
      if (blocks > 0)
        for (int b = 0; b < 5; ++b) bins[b] /= blocks;
    }
  }
  return out;
}

std::vector<double> hog_cell_histograms(const RasterImage& image, const HogParams& p, kernels::Exec exec) {
  const GrayImage canvas = resize_gray_bilinear(to_gray(image, 1.0 / 255.0), p.canvas, p.canvas);
  const int cells = p.canvas / p.cell;
  std::vector<double> hist(static_cast<std::size_t>(cells) * cells * p.bins, 0.0);
  const double bin_width = 180.0 / p.bins;
  const int n = p.canvas;
  const bool parallel = exec == kernels::Exec::Parallel;

  // Rows of cells are disjoint in the output, so they split across threads.
#pragma omp parallel for schedule(static) if (parallel)
  for (int cy = 0; cy < cells; ++cy) {
    for (int y = cy * p.cell; y < (cy + 1) * p.cell; ++y) {
      for (int x = 0; x < n; ++x) {
        const double gx = canvas.at(std::min(x + 1, n - 1), y) - canvas.at(std::max(x - 1, 0), y);
        const double gy = canvas.at(x, std::min(y + 1, n - 1)) - canvas.at(x, std::max(y - 1, 0));
        const double magnitude = std::hypot(gx, gy);
        if (magnitude == 0.0) continue;
        double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
        if (angle < 0.0) angle += 180.0;
        if (angle >= 180.0) angle -= 180.0;
        const double pos = angle / bin_width;
        const int lower = static_cast<int>(std::floor(pos));
        const double frac = pos - lower;
        double* cell = &hist[(static_cast<std::size_t>(cy) * cells + x / p.cell) * p.bins];
        cell[lower % p.bins] += magnitude * (1.0 - frac);
        cell[(lower + 1) % p.bins] += magnitude * frac;
      }
    }
  }
  return hist;
}

DescriptorVector hog_descriptor(const RasterImage& image, const HogParams& p) {
  const std::vector<double> hist = hog_cell_histograms(image, p);
  const int cells = p.canvas / p.cell;
  const int blocks = cells - 1;
  const std::size_t block_len = 4u * static_cast<std::size_t>(p.bins);
  DescriptorVector out{std::string(category::kHog), {}, {}};
  out.values.reserve(static_cast<std::size_t>(blocks) * blocks * block_len);
  std::vector<double> block(block_len);
  auto normalize = [&](std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq + p.epsilon * p.epsilon);
    for (double& x : v) x /= norm;
  };
  for (int by = 0; by < blocks; ++by) {
    for (int bx = 0; bx < blocks; ++bx) {
      std::size_t k = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const double* cell = &hist[(static_cast<std::size_t>(by + dy) * cells + bx + dx) * p.bins];
          for (int b = 0; b < p.bins; ++b) block[k++] = cell[b];
        }
      normalize(block);
      for (double& x : block) x = std::min(x, p.clip);
      normalize(block);
      out.values.insert(out.values.end(), block.begin(), block.end());
    }
  }
  return out;
}

}  // namespace cbmr
