#include <algorithm>
#include <cmath>

#include "cbmr/image_features.hpp"

namespace cbmr {

namespace {

class IntegralImage {
 public:
  explicit IntegralImage(const GrayImage& gray)
      : width_(gray.width), height_(gray.height),
        sums_(static_cast<std::size_t>(gray.width + 1) * (gray.height + 1), 0.0) {
    for (int y = 0; y < height_; ++y) {
      double row = 0.0;
      for (int x = 0; x < width_; ++x) {
        row += gray.at(x, y);
        sums_[index(y + 1, x + 1)] = sums_[index(y, x + 1)] + row;
      }
    }
  }

  /// Sum over rows [row, row+rows) and columns [col, col+cols), clipped to the image.
  double box(int row, int col, int rows, int cols) const {
    const int r1 = std::clamp(row, 0, height_), c1 = std::clamp(col, 0, width_);
    const int r2 = std::clamp(row + rows, 0, height_), c2 = std::clamp(col + cols, 0, width_);
    return sums_[index(r2, c2)] - sums_[index(r1, c2)] - sums_[index(r2, c1)] + sums_[index(r1, c1)];
  }

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * (width_ + 1) + col; }

  int width_;
  int height_;
  std::vector<double> sums_;
};

struct ResponseLayer {
  int size = 0;
  int step = 1;
  int rows = 0;
  int cols = 0;
  std::vector<double> det;

  double at(int i, int j) const { return det[static_cast<std::size_t>(i) * cols + j]; }
};

bool filter_fits(const IntegralImage& img, int r, int c, int size) {
  const int b = (size - 1) / 2;
  return r - b >= 0 && c - b >= 0 && r + b < img.height() && c + b < img.width();
}

ResponseLayer build_layer(const IntegralImage& img, int size, int step) {
  ResponseLayer layer;
  layer.size = size;
  layer.step = step;
  layer.rows = img.height() / step;
  layer.cols = img.width() / step;
  layer.det.assign(static_cast<std::size_t>(layer.rows) * layer.cols, 0.0);
  const int b = (size - 1) / 2;
  const int l = size / 3;
  const double inv_area = 1.0 / (static_cast<double>(size) * size);
  for (int i = 0; i < layer.rows; ++i) {
    const int r = i * step;
    for (int j = 0; j < layer.cols; ++j) {
      const int c = j * step;
      if (!filter_fits(img, r, c, size)) continue;
      double dxx = img.box(r - l + 1, c - b, 2 * l - 1, size) - 3.0 * img.box(r - l + 1, c - l / 2, 2 * l - 1, l);
      double dyy = img.box(r - b, c - l + 1, size, 2 * l - 1) - 3.0 * img.box(r - l / 2, c - l + 1, l, 2 * l - 1);
      double dxy = img.box(r - l, c + 1, l, l) + img.box(r + 1, c - l, l, l) - img.box(r - l, c - l, l, l) -
                   img.box(r + 1, c + 1, l, l);
      dxx *= inv_area;
      dyy *= inv_area;
      dxy *= inv_area;
      layer.det[static_cast<std::size_t>(i) * layer.cols + j] = dxx * dyy - 0.81 * dxy * dxy;
    }
  }
  return layer;
}

double haar_x(const IntegralImage& img, int row, int col, int s) {
  return img.box(row - s / 2, col, s, s / 2) - img.box(row - s / 2, col - s / 2, s, s / 2);
}

double haar_y(const IntegralImage& img, int row, int col, int s) {
  return img.box(row, col - s / 2, s / 2, s) - img.box(row - s / 2, col - s / 2, s / 2, s);
}

LocalDescriptor upright_descriptor(const IntegralImage& img, double x, double y, double sigma) {
  LocalDescriptor desc(kLocalDescriptorDim, 0.0);
  const int s = std::max(2, 2 * static_cast<int>(std::lround(sigma)));
  const double gauss = 3.3 * sigma;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double sum_dx = 0, sum_adx = 0, sum_dy = 0, sum_ady = 0;
      for (int k = 0; k < 5; ++k) {
        for (int m = 0; m < 5; ++m) {
          const double ox = (-10.0 + 5 * j + m + 0.5) * sigma;
          const double oy = (-10.0 + 5 * i + k + 0.5) * sigma;
          const int col = static_cast<int>(std::lround(x + ox));
          const int row = static_cast<int>(std::lround(y + oy));
          const double w = std::exp(-(ox * ox + oy * oy) / (2.0 * gauss * gauss));
          const double dx = w * haar_x(img, row, col, s);
          const double dy = w * haar_y(img, row, col, s);
          sum_dx += dx;
          sum_adx += std::abs(dx);
          sum_dy += dy;
          sum_ady += std::abs(dy);
        }
      }
      double* out = &desc[(i * 4 + j) * 4];
      out[0] = sum_dx;
      out[1] = sum_adx;
      out[2] = sum_dy;
      out[3] = sum_ady;
    }
  }
  double norm = 0.0;
  for (double v : desc) norm += v * v;
  norm = std::sqrt(norm);
  if (norm <= 1e-12) return {};
  for (double& v : desc) v /= norm;
  return desc;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const RasterImage& image, const SurfParams& params) {
  const IntegralImage img(to_gray(image));
  std::vector<Keypoint> keypoints;
  for (int o = 0; o < params.octaves; ++o) {
    const int step = 1 << o;
    std::vector<ResponseLayer> layers;
    for (int s = 0; s < params.scales; ++s) {
      const int size = 3 * ((1 << (o + 1)) * (s + 1) + 1);
      layers.push_back(build_layer(img, size, step));
    }
    for (int m = 1; m + 1 < params.scales; ++m) {
      const ResponseLayer& mid = layers[m];
      for (int i = 1; i + 1 < mid.rows; ++i) {
        for (int j = 1; j + 1 < mid.cols; ++j) {
          const double v = mid.at(i, j);
          if (v <= params.threshold) continue;
          if (!filter_fits(img, i * step, j * step, layers[m + 1].size)) continue;
          bool is_max = true;
          for (int dl = -1; dl <= 1 && is_max; ++dl)
            for (int di = -1; di <= 1 && is_max; ++di)
              for (int dj = -1; dj <= 1 && is_max; ++dj) {
                if (dl == 0 && di == 0 && dj == 0) continue;
                if (layers[m + dl].at(i + di, j + dj) >= v) is_max = false;
              }
          if (!is_max) continue;
          Keypoint kp;
          kp.x = j * step;
          kp.y = i * step;
          kp.sigma = 1.2 * mid.size / 9.0;
          kp.response = v;
          kp.descriptor = upright_descriptor(img, kp.x, kp.y, kp.sigma);
          if (!kp.descriptor.empty()) keypoints.push_back(std::move(kp));
        }
      }
    }
  }
  return keypoints;
}

std::vector<LocalDescriptor> detect_local_descriptors(const RasterImage& image, const SurfParams& params) {
  std::vector<LocalDescriptor> out;
  for (auto& kp : detect_keypoints(image, params)) out.push_back(std::move(kp.descriptor));
  return out;
}

}  // namespace cbmr
