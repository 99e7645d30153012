#include "common.hpp"

namespace cbmr::kernels::parallel {

void scan_distances(Metric metric, std::span<const float> rows, std::size_t dim, std::span<const float> query,
                    std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = cbmr::detail::unchecked(metric, rows.data() + i * dim, query.data(), dim);
}

void voxelize(const TriangleMesh& mesh, VoxelGrid& grid) {
  std::vector<detail::TriangleBounds> bounds(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) bounds[f] = detail::voxel_bounds(mesh, f, grid.resolution);
  // Each z-slab is owned by one iteration, so writes never race.
  #pragma omp parallel for schedule(dynamic, 1)
  for (int z = 0; z < grid.resolution; ++z) {
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      if (z < bounds[f].lo[2] || z > bounds[f].hi[2]) continue;
      detail::voxelize_triangle_in_slab(mesh, f, bounds[f], z, grid);
    }
  }
}

void shell_energies(const VoxelGrid& grid, const SphereSampling& sampling, std::vector<double>& out) {
  const int degrees = sampling.max_degree + 1;
  #pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < sampling.shells; ++s) detail::shell_energy_row(grid, sampling, s, out.data() + s * degrees);
}

void render_views(const TriangleMesh& mesh, std::span<const ViewBasis> views, std::vector<BinaryImage>& images) {
  const auto n = static_cast<std::ptrdiff_t>(views.size());
  #pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t v = 0; v < n; ++v)
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) detail::rasterize_triangle(mesh, f, views[v], images[v]);
}

void stft(std::span<const float> samples, int window, int hop, std::size_t frames, std::vector<double>& out) {
  const std::size_t bins = static_cast<std::size_t>(window / 2 + 1);
  #pragma omp parallel
  {
    double* in = detail::fftw_alloc_real_buffer(window);
    void* spectrum = detail::fftw_alloc_complex_buffer(window);
    const auto n = static_cast<std::ptrdiff_t>(frames);
    #pragma omp for schedule(static)
    for (std::ptrdiff_t f = 0; f < n; ++f)
      detail::stft_frame(samples, static_cast<std::size_t>(f), window, hop, in, spectrum, out.data() + f * bins);
    detail::fftw_release(in);
    detail::fftw_release(spectrum);
  }
}

}  // namespace cbmr::kernels::parallel
