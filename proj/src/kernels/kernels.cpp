#include <algorithm>
#include <cmath>

#include "cbmr/error.hpp"
#include "common.hpp"

namespace cbmr::kernels {

// Loop drivers live in serial.cpp and parallel.cpp.
namespace serial {
void scan_distances(Metric, std::span<const float>, std::size_t, std::span<const float>, std::span<double>);
void voxelize(const TriangleMesh&, VoxelGrid&);
void shell_energies(const VoxelGrid&, const SphereSampling&, std::vector<double>&);
void render_views(const TriangleMesh&, std::span<const ViewBasis>, std::vector<BinaryImage>&);
void stft(std::span<const float>, int, int, std::size_t, std::vector<double>&);
}  // namespace serial
namespace parallel {
void scan_distances(Metric, std::span<const float>, std::size_t, std::span<const float>, std::span<double>);
void voxelize(const TriangleMesh&, VoxelGrid&);
void shell_energies(const VoxelGrid&, const SphereSampling&, std::vector<double>&);
void render_views(const TriangleMesh&, std::span<const ViewBasis>, std::vector<BinaryImage>&);
void stft(std::span<const float>, int, int, std::size_t, std::vector<double>&);
}  // namespace parallel

void scan_distances(Metric metric, std::span<const float> rows, std::size_t dim, std::span<const float> query,
                    std::span<double> out, Exec exec) {
  if (query.size() != dim || rows.size() != out.size() * dim)
    throw Error(ErrorCode::DimensionMismatch, "scan_distances shape mismatch");
  if (exec == Exec::Serial)
    serial::scan_distances(metric, rows, dim, query, out);
  else
    parallel::scan_distances(metric, rows, dim, query, out);
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

VoxelGrid voxelize_surface(const TriangleMesh& mesh, int resolution, Exec exec) {
  VoxelGrid grid{resolution, std::vector<std::uint8_t>(static_cast<std::size_t>(resolution) * resolution * resolution, 0)};
  if (exec == Exec::Serial)
    serial::voxelize(mesh, grid);
  else
    parallel::voxelize(mesh, grid);
  return grid;
}

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 normalized(const Vec3& a) {
  const double n = std::sqrt(dot3(a, a));
  return {a[0] / n, a[1] / n, a[2] / n};
}

bool separated_on(const Vec3& axis, const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& half) {
  const double p0 = dot3(axis, v0), p1 = dot3(axis, v1), p2 = dot3(axis, v2);
  const double r = half[0] * std::abs(axis[0]) + half[1] * std::abs(axis[1]) + half[2] * std::abs(axis[2]);
  return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
}

}  // namespace

bool triangle_box_overlap(const Vec3& center, const Vec3& half, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = sub(a, center), v1 = sub(b, center), v2 = sub(c, center);
  const Vec3 edges[3] = {sub(v1, v0), sub(v2, v1), sub(v0, v2)};
  // Nine edge-cross-axis tests.
  for (const Vec3& e : edges) {
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 unit{0, 0, 0};
      unit[axis] = 1.0;
      const Vec3 test = cross(unit, e);
      if (test[0] == 0 && test[1] == 0 && test[2] == 0) continue;
      if (separated_on(test, v0, v1, v2, half)) return false;
    }
  }
  // Box face normals.
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = std::min({v0[axis], v1[axis], v2[axis]});
    const double hi = std::max({v0[axis], v1[axis], v2[axis]});
    if (lo > half[axis] || hi < -half[axis]) return false;
  }
  // Triangle plane.
  const Vec3 normal = cross(edges[0], edges[1]);
  const double d = dot3(normal, v0);
  const double r = half[0] * std::abs(normal[0]) + half[1] * std::abs(normal[1]) + half[2] * std::abs(normal[2]);
  return std::abs(d) <= r;
}

void fill_enclosed(VoxelGrid& grid) {
  const int n = grid.resolution;
  std::vector<std::uint8_t> outside(grid.cells.size(), 0);
  std::vector<std::size_t> stack;
  const auto visit = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) return;
    const std::size_t i = (static_cast<std::size_t>(z) * n + y) * n + x;
    if (outside[i] || grid.cells[i]) return;
    outside[i] = 1;
    stack.push_back(i);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      visit(a, b, 0);
      visit(a, b, n - 1);
      visit(a, 0, b);
      visit(a, n - 1, b);
      visit(0, a, b);
      visit(n - 1, a, b);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % n), y = static_cast<int>(i / n % n), z = static_cast<int>(i / n / n);
    visit(x + 1, y, z);
    visit(x - 1, y, z);
    visit(x, y + 1, z);
    visit(x, y - 1, z);
    visit(x, y, z + 1);
    visit(x, y, z - 1);
  }
  for (std::size_t i = 0; i < outside.size(); ++i)
    if (!outside[i]) grid.cells[i] = 1;
}

double sample_indicator(const VoxelGrid& grid, double r, double theta, double phi) {
  const double st = std::sin(theta);
  const double p[3] = {r * st * std::cos(phi), r * st * std::sin(phi), r * std::cos(theta)};
  int idx[3];
  for (int k = 0; k < 3; ++k)
    idx[k] = std::clamp(static_cast<int>(std::floor((p[k] + 1.0) * 0.5 * grid.resolution)), 0, grid.resolution - 1);
  return grid.at(idx[0], idx[1], idx[2]);
}

std::vector<double> shell_energies(const VoxelGrid& grid, const SphereSampling& sampling, Exec exec) {
  std::vector<double> out(static_cast<std::size_t>(sampling.shells) * (sampling.max_degree + 1), 0.0);
  if (exec == Exec::Serial)
    serial::shell_energies(grid, sampling, out);
  else
    parallel::shell_energies(grid, sampling, out);
  return out;
}

ViewBasis make_view_basis(const Vec3& direction) {
  const Vec3 d = normalized(direction);
  const Vec3 up = std::abs(d[2]) > 0.9 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
  const Vec3 u = normalized(cross(up, d));
  const Vec3 v = cross(d, u);
  return {d, u, v};
}

BinaryImage render_silhouette(const TriangleMesh& mesh, const ViewBasis& view, int size) {
  BinaryImage image(size, size);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) detail::rasterize_triangle(mesh, f, view, image);
  return image;
}

std::vector<BinaryImage> render_views(const TriangleMesh& mesh, std::span<const ViewBasis> views, int size,
                                      Exec exec) {
  std::vector<BinaryImage> images(views.size(), BinaryImage(size, size));
  if (exec == Exec::Serial)
    serial::render_views(mesh, views, images);
  else
    parallel::render_views(mesh, views, images);
  return images;
}

std::vector<double> stft_magnitudes(std::span<const float> samples, int window, int hop, std::size_t& frame_count,
                                    Exec exec) {
  frame_count = samples.size() <= static_cast<std::size_t>(window)
                    ? 1
                    : 1 + (samples.size() - static_cast<std::size_t>(window)) / static_cast<std::size_t>(hop);
  std::vector<double> out(frame_count * static_cast<std::size_t>(window / 2 + 1), 0.0);
  if (exec == Exec::Serial)
    serial::stft(samples, window, hop, frame_count, out);
  else
    parallel::stft(samples, window, hop, frame_count, out);
  return out;
}

}  // namespace cbmr::kernels
