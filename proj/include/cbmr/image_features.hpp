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

/// Single-channel image with real intensities.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Luma 0.299R + 0.587G + 0.114B, scaled by `scale` (1 keeps 0..255).
GrayImage to_gray(const RasterImage& image, double scale = 1.0);
GrayImage resize_gray_bilinear(const GrayImage& image, int width, int height);

/// sRGB (0..255) to CIELAB under D65.
std::array<double, 3> rgb_to_lab(double r, double g, double b);

// --- color layout ---------------------------------------------------------

inline constexpr int kColorGridCells = 8;

/// Pixel bounds [begin, end) of grid cell `index` along an axis of `extent` pixels.
std::pair<int, int> grid_cell_bounds(int extent, int cells, int index);

/// 8x8 grid of mean colors in CIELAB, row-major, L,a,b per cell: 192 values.
DescriptorVector average_color_grid(const RasterImage& image);

// --- edge histogram -------------------------------------------------------

enum class EdgeType { Vertical = 0, Horizontal = 1, Diagonal45 = 2, Diagonal135 = 3, NonDirectional = 4, None = 5 };

inline constexpr double kEdgeThreshold = 11.0 / 255.0;

/// Classifies one 2x2 block (top-left, top-right, bottom-left, bottom-right
/// intensities in [0, 1]) by its strongest filter response.
EdgeType classify_edge_block(double a0, double a1, double a2, double a3);

/// 4x4 sub-images x 5 edge types, each normalized by the sub-image's block count: 80 values.
DescriptorVector edge_histogram(const RasterImage& image);

// --- HOG ------------------------------------------------------------------

struct HogParams {
  int canvas = 128;
  int cell = 8;
  int bins = 9;
  double epsilon = 1e-5;
  double clip = 0.2;
};

/// Per-cell orientation histograms of the resized luma canvas, before block
/// normalization: (canvas/cell)^2 cells x bins, row-major.
std::vector<double> hog_cell_histograms(const RasterImage& image, const HogParams& params = {},
                                        kernels::Exec exec = kernels::Exec::Parallel);

/// Histograms of the 2x2-cell blocks (stride one cell), L2-normalized, clipped
/// at 0.2 and renormalized: 15 x 15 x 36 = 8100 values on the default canvas.
DescriptorVector hog_descriptor(const RasterImage& image, const HogParams& params = {});

// --- local features -------------------------------------------------------

inline constexpr int kLocalDescriptorDim = 64;
using LocalDescriptor = std::vector<double>;

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
  double response = 0.0;
  LocalDescriptor descriptor;
};

struct SurfParams {
  int octaves = 3;
  int scales = 4;
  double threshold = 600.0;
};

/// Upright SURF on the 0..255 luma image: box-filter Hessian determinant,
/// 3x3x3 non-maximum suppression, 64-d Haar-wavelet descriptor.
std::vector<Keypoint> detect_keypoints(const RasterImage& image, const SurfParams& params = {});

std::vector<LocalDescriptor> detect_local_descriptors(const RasterImage& image, const SurfParams& params = {});

// --- bag of words ---------------------------------------------------------

struct Codebook {
  std::string category;
  std::vector<std::vector<double>> centroids;

  std::size_t k() const { return centroids.size(); }
  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
};

struct KMeansParams {
  int max_iterations = 50;
  double tolerance = 1e-4;
};

/// k-means with k-means++ seeding; deterministic for a given seed.
Codebook train_codebook(std::span<const LocalDescriptor> descriptors, std::size_t k, std::uint64_t seed,
                        const KMeansParams& params = {});

/// Nearest centroid under L2, ties to the lowest index.
std::size_t nearest_centroid(const Codebook& codebook, std::span<const double> descriptor);

/// L1-normalized assignment counts; zero vector for no descriptors.
DescriptorVector bow_histogram(std::span<const LocalDescriptor> descriptors, const Codebook& codebook);

}  // namespace cbmr
