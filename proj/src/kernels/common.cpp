#include "common.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>

namespace cbmr::kernels::detail {

namespace {

constexpr double kCubeMin = -1.0;
constexpr double kCubeSpan = 2.0;

int clamp_index(double v, int resolution) {
  return std::clamp(static_cast<int>(std::floor(v)), 0, resolution - 1);
}

}  // namespace

TriangleBounds voxel_bounds(const TriangleMesh& mesh, std::size_t face, int resolution) {
  const auto& f = mesh.faces[face];
  TriangleBounds b{};
  const double scale = resolution / kCubeSpan;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = mesh.vertices[f[0]][axis], hi = lo;
    for (int k = 1; k < 3; ++k) {
      lo = std::min(lo, mesh.vertices[f[k]][axis]);
      hi = std::max(hi, mesh.vertices[f[k]][axis]);
    }
    // One voxel of slack on each side; the overlap test decides.
    b.lo[axis] = clamp_index((lo - kCubeMin) * scale - 1.0, resolution);
    b.hi[axis] = clamp_index((hi - kCubeMin) * scale + 1.0, resolution);
  }
  return b;
}

void voxelize_triangle_in_slab(const TriangleMesh& mesh, std::size_t face, const TriangleBounds& bounds, int z,
                               VoxelGrid& grid) {
  const int r = grid.resolution;
  const double h = kCubeSpan / r;
  const Vec3 half{h / 2, h / 2, h / 2};
  const auto& f = mesh.faces[face];
  const Vec3& a = mesh.vertices[f[0]];
  const Vec3& b = mesh.vertices[f[1]];
  const Vec3& c = mesh.vertices[f[2]];
  for (int y = bounds.lo[1]; y <= bounds.hi[1]; ++y) {
    for (int x = bounds.lo[0]; x <= bounds.hi[0]; ++x) {
      auto& cell = grid.cells[(static_cast<std::size_t>(z) * r + y) * r + x];
      if (cell) continue;
      const Vec3 center{kCubeMin + (x + 0.5) * h, kCubeMin + (y + 0.5) * h, kCubeMin + (z + 0.5) * h};
      if (triangle_box_overlap(center, half, a, b, c)) cell = 1;
    }
  }
}

namespace {

// Associated Legendre P_l^m(x) without the Condon-Shortley phase.
double legendre(int l, int m, double x) {
  double pmm = 1.0;
  const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
  double fact = 1.0;
  for (int i = 1; i <= m; ++i) {
    pmm *= fact * somx2;
    fact += 2.0;
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

double sh_normalization(int l, int m) {
  double ratio = 1.0;  // (l-m)! / (l+m)!
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
}

}  // namespace

void shell_energy_row(const VoxelGrid& grid, const SphereSampling& s, int shell, double* out) {
  const double pi = std::numbers::pi;
  const double r = static_cast<double>(shell + 1) / s.shells;
  const double d_theta = pi / s.theta_steps;
  const double d_phi = 2.0 * pi / s.phi_steps;
  const int degrees = s.max_degree + 1;

  // Azimuthal sums per polar ring, then Legendre quadrature over the rings.
  std::vector<double> cos_sum(static_cast<std::size_t>(s.theta_steps) * degrees, 0.0);
  std::vector<double> sin_sum(cos_sum.size(), 0.0);
  for (int i = 0; i < s.theta_steps; ++i) {
    const double theta = (i + 0.5) * d_theta;
    for (int j = 0; j < s.phi_steps; ++j) {
      const double phi = j * d_phi;
      const double f = sample_indicator(grid, r, theta, phi);
      if (f == 0.0) continue;
      for (int m = 0; m < degrees; ++m) {
        cos_sum[i * degrees + m] += f * std::cos(m * phi);
        sin_sum[i * degrees + m] += f * std::sin(m * phi);
      }
    }
  }

  for (int l = 0; l < degrees; ++l) {
    double energy = 0.0;
    for (int m = 0; m <= l; ++m) {
      double c = 0.0, sn = 0.0;
      for (int i = 0; i < s.theta_steps; ++i) {
        const double theta = (i + 0.5) * d_theta;
        const double w = legendre(l, m, std::cos(theta)) * std::sin(theta);
        c += w * cos_sum[i * degrees + m];
        sn += w * sin_sum[i * degrees + m];
      }
      const double k = sh_normalization(l, m) * d_theta * d_phi;
      if (m == 0) {
        energy += (k * c) * (k * c);
      } else {
        const double k2 = std::numbers::sqrt2 * k;
        energy += (k2 * c) * (k2 * c) + (k2 * sn) * (k2 * sn);
      }
    }
    out[l] = energy;
  }
}

void rasterize_triangle(const TriangleMesh& mesh, std::size_t face, const ViewBasis& view, BinaryImage& image) {
  const int size = image.width;
  const double scale = size / 2.0;
  const auto& f = mesh.faces[face];
  double px[3], py[3];
  for (int k = 0; k < 3; ++k) {
    const Vec3& p = mesh.vertices[f[k]];
    px[k] = (dot(p, view.u) + 1.0) * scale;
    py[k] = (1.0 - dot(p, view.v)) * scale;
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min({px[0], px[1], px[2]}) - 1)));
  const int x1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({px[0], px[1], px[2]}) + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min({py[0], py[1], py[2]}) - 1)));
  const int y1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({py[0], py[1], py[2]}) + 1)));
  if (x0 > x1 || y0 > y1) return;

  const double area2 = (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
  const bool edge_on = std::abs(area2) < 1.0;
  for (int y = y0; y <= y1; ++y) {
    const double cy = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      std::uint8_t& pixel = image.at(x, y);
      if (pixel) continue;
      const double cx = x + 0.5;
      if (!edge_on) {
        const double w0 = (px[1] - px[0]) * (cy - py[0]) - (py[1] - py[0]) * (cx - px[0]);
        const double w1 = (px[2] - px[1]) * (cy - py[1]) - (py[2] - py[1]) * (cx - px[1]);
        const double w2 = (px[0] - px[2]) * (cy - py[2]) - (py[0] - py[2]) * (cx - px[2]);
        if ((w0 >= 0 && w1 >= 0 && w2 >= 0) || (w0 <= 0 && w1 <= 0 && w2 <= 0)) pixel = 1;
        continue;
      }
      // Triangles seen edge-on still cover a half-pixel-wide line.
      for (int e = 0; e < 3 && !pixel; ++e) {
        const double ax = px[e], ay = py[e];
        const double bx = px[(e + 1) % 3], by = py[(e + 1) % 3];
        const double dx = bx - ax, dy = by - ay;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? ((cx - ax) * dx + (cy - ay) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double ex = ax + t * dx - cx, ey = ay + t * dy - cy;
        if (ex * ex + ey * ey <= 0.25) pixel = 1;
      }
    }
  }
}

namespace {
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(int window) {
  static std::map<int, fftw_plan> plans;
  std::lock_guard lock(fftw_mutex());
  auto it = plans.find(window);
  if (it != plans.end()) return it->second;
  double* in = fftw_alloc_real(window);
  fftw_complex* out = fftw_alloc_complex(window / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(window, in, out, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(window, plan);
  return plan;
}
}  // namespace

const std::vector<double>& hann_window(int length) {
  static std::map<int, std::vector<double>> cache;
  static std::mutex m;
  std::lock_guard lock(m);
  auto& w = cache[length];
  if (w.empty()) {
    w.resize(length);
    for (int n = 0; n < length; ++n) w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

void* fftw_alloc_complex_buffer(int window) { return fftw_alloc_complex(window / 2 + 1); }
double* fftw_alloc_real_buffer(int window) { return fftw_alloc_real(window); }
void fftw_release(void* buffer) { fftw_free(buffer); }

void stft_frame(std::span<const float> samples, std::size_t frame, int window, int hop, double* in,
                void* scratch_out, double* out) {
  const auto& hann = hann_window(window);
  const std::size_t start = frame * static_cast<std::size_t>(hop);
  for (int n = 0; n < window; ++n) {
    const std::size_t idx = start + n;
    in[n] = idx < samples.size() ? samples[idx] * hann[n] : 0.0;
  }
  auto* spectrum = static_cast<fftw_complex*>(scratch_out);
  fftw_execute_dft_r2c(plan_for(window), in, spectrum);
  for (int k = 0; k <= window / 2; ++k) out[k] = std::hypot(spectrum[k][0], spectrum[k][1]);
}

}  // namespace cbmr::kernels::detail
