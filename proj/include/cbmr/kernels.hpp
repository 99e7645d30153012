#pragma once

// Data-parallel inner loops. Each kernel has a serial reference path and an
// OpenMP path; both produce bit-identical output and the tests hold them to it.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cbmr/binary_image.hpp"
#include "cbmr/distance.hpp"
#include "cbmr/media.hpp"

namespace cbmr::kernels {

enum class Exec { Serial, Parallel };

/// out[i] = distance(metric, row i, query) for a row-major block of rows.
void scan_distances(Metric metric, std::span<const float> rows, std::size_t dim,
                    std::span<const float> query, std::span<double> out, Exec exec);

/// Binary occupancy grid over the cube [-1, 1]^3, x fastest.
struct VoxelGrid {
  int resolution = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(int x, int y, int z) const {
    return cells[(static_cast<std::size_t>(z) * resolution + y) * resolution + x];
  }
  std::size_t count() const;
};

/// A voxel is set when any triangle overlaps its box (separating-axis test).
VoxelGrid voxelize_surface(const TriangleMesh& mesh, int resolution, Exec exec);

/// Sets every voxel not 6-connected to the grid border through empty voxels,
/// turning the surface of a closed mesh into a solid. Open surfaces are left as is.
void fill_enclosed(VoxelGrid& grid);

/// Triangle/axis-aligned-box overlap via the separating axis theorem.
bool triangle_box_overlap(const Vec3& box_center, const Vec3& half_size, const Vec3& a, const Vec3& b,
                          const Vec3& c);

struct SphereSampling {
  int shells = 32;
  int theta_steps = 64;
  int phi_steps = 64;
  int max_degree = 4;
};

/// Indicator of the voxel grid on shell r at polar angles (theta, phi),
/// looked up at the nearest voxel.
double sample_indicator(const VoxelGrid& grid, double r, double theta, double phi);

/// Per-shell spherical-harmonic energies, shell-major, (max_degree + 1) per
/// shell. Shell s (0-based) has radius (s + 1) / shells.
std::vector<double> shell_energies(const VoxelGrid& grid, const SphereSampling& sampling, Exec exec);

/// Orthonormal image-plane basis (u, v) for a viewing direction.
struct ViewBasis {
  Vec3 direction;
  Vec3 u;
  Vec3 v;
};

ViewBasis make_view_basis(const Vec3& direction);

/// Orthographic silhouette: the image plane spans [-1, 1]^2, pixel (x, y)
/// covers u in [x, x+1) * 2/size - 1 and v from the top row down.
BinaryImage render_silhouette(const TriangleMesh& mesh, const ViewBasis& view, int size);

std::vector<BinaryImage> render_views(const TriangleMesh& mesh, std::span<const ViewBasis> views,
                                      int size, Exec exec);

/// Hann-windowed magnitude STFT, frame-major, window/2+1 bins per frame.
/// Inputs shorter than one window are zero-padded to a single frame.
std::vector<double> stft_magnitudes(std::span<const float> samples, int window, int hop,
                                    std::size_t& frame_count, Exec exec);

}  // namespace cbmr::kernels
