#pragma once

#include <array>
#include <span>
#include <vector>

#include "cbmr/binary_image.hpp"
#include "cbmr/descriptor.hpp"
#include "cbmr/kernels.hpp"
#include "cbmr/media.hpp"

namespace cbmr {

struct NormalizedMesh {
  TriangleMesh mesh;
  Vec3 applied_translation{0, 0, 0};
  double applied_scale = 1.0;
};

double surface_area(const TriangleMesh& mesh);
/// Area-weighted mean of the triangle centroids.
Vec3 surface_centroid(const TriangleMesh& mesh);

/// Moves the surface centroid to the origin and scales the farthest vertex to radius 1.
NormalizedMesh normalize_mesh(const TriangleMesh& mesh);

// --- spherical harmonics --------------------------------------------------

struct ShParams {
  int voxels = 64;
  kernels::SphereSampling sampling{};
};

/// Shell-major energies: 32 shells x degrees 0..4 = 160 values.
DescriptorVector sh_descriptor(const NormalizedMesh& mesh, const ShParams& params = {},
                               kernels::Exec exec = kernels::Exec::Parallel);

// --- light field ----------------------------------------------------------

inline constexpr int kLightFieldViews = 10;
inline constexpr int kSilhouetteSize = 256;
inline constexpr int kZernikeOrder = 10;
inline constexpr int kZernikeCount = 35;
inline constexpr int kFourierCount = 10;
inline constexpr int kViewDescriptorDim = kZernikeCount + kFourierCount;

/// One direction from each antipodal pair of dodecahedron vertices
/// (vertices (+-1,+-1,+-1), (0,+-1/phi,+-phi) and cyclic permutations), normalized:
///   0 (1,1,1)   1 (1,1,-1)   2 (1,-1,1)   3 (1,-1,-1)
///   4 (0,1/phi,phi)   5 (0,1/phi,-phi)   6 (1/phi,phi,0)   7 (1/phi,-phi,0)
///   8 (phi,0,1/phi)   9 (phi,0,-1/phi)
const std::array<Vec3, kLightFieldViews>& light_field_directions();

std::vector<BinaryImage> lightfield_projections(const NormalizedMesh& mesh,
                                                kernels::Exec exec = kernels::Exec::Parallel);

/// (n, m) pairs with n <= 10, m >= 0, n - m even, excluding (0, 0), in order of n then m.
const std::vector<std::pair<int, int>>& zernike_orders();

/// |A_nm| over the shape scaled into the unit disc about its centroid.
std::vector<double> zernike_magnitudes(const BinaryImage& silhouette);

/// Harmonics 1..10 of the resampled centroid-distance signature of the
/// largest component's outer contour, divided by harmonic 0.
std::vector<double> fourier_contour(const BinaryImage& silhouette);

struct ContourPoint {
  int x;
  int y;
};

/// Moore-neighborhood trace of the outer boundary, clockwise from the topmost-leftmost pixel.
std::vector<ContourPoint> trace_outer_contour(const BinaryImage& image);

/// Keeps only the largest 8-connected component.
BinaryImage largest_component(const BinaryImage& image);

/// 35 Zernike magnitudes followed by 10 Fourier magnitudes.
std::vector<double> view_descriptor(const BinaryImage& silhouette);

struct LightFieldDescriptor {
  std::array<std::vector<double>, kLightFieldViews> views;
};

LightFieldDescriptor lightfield_descriptor(const NormalizedMesh& mesh,
                                           kernels::Exec exec = kernels::Exec::Parallel);

/// The 60 rotations of the dodecahedral group as permutations of the view axes.
const std::vector<std::array<int, kLightFieldViews>>& dodecahedral_view_permutations();

double view_distance(std::span<const double> a, std::span<const double> b);

/// Minimum over the rotation group of the summed L1 view distances.
double lightfield_distance(const LightFieldDescriptor& a, const LightFieldDescriptor& b);

/// Otsu threshold over 8-bit luma; returns -1 for an image with a single intensity.
int otsu_threshold(std::span<const std::uint64_t, 256> histogram);

/// Binarizes dark strokes at the Otsu threshold and fills enclosed regions.
BinaryImage sketch_silhouette(const RasterImage& sketch);

std::vector<double> sketch_to_lightfield_query(const RasterImage& sketch);

/// Minimum over the model's views of the L1 view distance.
double sketch_distance(std::span<const double> query, const LightFieldDescriptor& model);

}  // namespace cbmr
