#pragma once

// Per-item bodies shared by the serial and OpenMP loops.

#include <cmath>
#include <vector>

#include "cbmr/kernels.hpp"

namespace cbmr::kernels::detail {

struct ProjectedTriangle {
  double x[3];
  double y[3];
  int x0, x1, y0, y1;  // inclusive pixel bounds
};

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct TriangleBounds {
  int lo[3];
  int hi[3];
};

TriangleBounds voxel_bounds(const TriangleMesh& mesh, std::size_t face, int resolution);

void voxelize_triangle_in_slab(const TriangleMesh& mesh, std::size_t face, const TriangleBounds& bounds,
                               int z, VoxelGrid& grid);

/// Fills one shell's row of (max_degree + 1) energies.
void shell_energy_row(const VoxelGrid& grid, const SphereSampling& sampling, int shell, double* out);

void rasterize_triangle(const TriangleMesh& mesh, std::size_t face, const ViewBasis& view, BinaryImage& image);

/// Hann window of the given length (periodic form).
const std::vector<double>& hann_window(int length);

/// Magnitudes for one frame; `scratch_in` and `scratch_out` are FFTW buffers.
void stft_frame(std::span<const float> samples, std::size_t frame, int window, int hop, double* scratch_in,
                void* scratch_out, double* out);

void* fftw_alloc_complex_buffer(int window);
double* fftw_alloc_real_buffer(int window);
void fftw_release(void* buffer);

}  // namespace cbmr::kernels::detail
