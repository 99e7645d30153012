#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>

#include "cbmr/error.hpp"
#include "cbmr/shape_features.hpp"

namespace cbmr {

namespace {

constexpr double kPhi = std::numbers::phi;

Vec3 unit(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  return {x / n, y / n, z / n};
}

}  // namespace

const std::array<Vec3, kLightFieldViews>& light_field_directions() {
  static const std::array<Vec3, kLightFieldViews> dirs = {
      unit(1, 1, 1),           unit(1, 1, -1),           unit(1, -1, 1),        unit(1, -1, -1),
      unit(0, 1 / kPhi, kPhi), unit(0, 1 / kPhi, -kPhi), unit(1 / kPhi, kPhi, 0), unit(1 / kPhi, -kPhi, 0),
      unit(kPhi, 0, 1 / kPhi), unit(kPhi, 0, -1 / kPhi),
  };
  return dirs;
}

std::vector<BinaryImage> lightfield_projections(const NormalizedMesh& mesh, kernels::Exec exec) {
  if (mesh.mesh.faces.empty()) throw Error(ErrorCode::DegenerateMesh, "mesh has no faces");
  std::vector<kernels::ViewBasis> views;
  for (const auto& d : light_field_directions()) views.push_back(kernels::make_view_basis(d));
  return kernels::render_views(mesh.mesh, views, kSilhouetteSize, exec);
}

// ---------------------------------------------------------------------------
// Zernike moments

const std::vector<std::pair<int, int>>& zernike_orders() {
  static const std::vector<std::pair<int, int>> orders = [] {
    std::vector<std::pair<int, int>> out;
    for (int n = 0; n <= kZernikeOrder; ++n)
      for (int m = n % 2; m <= n; m += 2)
        if (n != 0 || m != 0) out.emplace_back(n, m);
    return out;
  }();
  return orders;
}

namespace {

// Coefficients of R_nm(rho) = sum_s c_s rho^(n-2s).
std::vector<double> radial_coefficients(int n, int m) {
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::vector<double> c;
  for (int s = 0; s <= (n - m) / 2; ++s) {
    const double sign = s % 2 == 0 ? 1.0 : -1.0;
    c.push_back(sign * fact(n - s) / (fact(s) * fact((n + m) / 2 - s) * fact((n - m) / 2 - s)));
  }
  return c;
}

}  // namespace

std::vector<double> zernike_magnitudes(const BinaryImage& silhouette) {
  double cx = 0.0, cy = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < silhouette.height; ++y)
    for (int x = 0; x < silhouette.width; ++x)
      if (silhouette.at(x, y)) {
        cx += x + 0.5;
        cy += y + 0.5;
        ++count;
      }
  if (count == 0) throw Error(ErrorCode::EmptyImage, "silhouette has no set pixels");
  cx /= static_cast<double>(count);
  cy /= static_cast<double>(count);
  double radius = 0.0;
  for (int y = 0; y < silhouette.height; ++y)
    for (int x = 0; x < silhouette.width; ++x)
      if (silhouette.at(x, y)) radius = std::max(radius, std::hypot(x + 0.5 - cx, y + 0.5 - cy));
  // Half a pixel keeps the outermost pixel centers strictly inside the disc.
  radius += 0.5;

  const auto& orders = zernike_orders();
  std::vector<std::vector<double>> coeffs;
  for (const auto& [n, m] : orders) coeffs.push_back(radial_coefficients(n, m));
  std::vector<std::complex<double>> moments(orders.size());
  double rho_pow[kZernikeOrder + 1];
  std::complex<double> rot_pow[kZernikeOrder + 1];

  for (int y = 0; y < silhouette.height; ++y) {
    for (int x = 0; x < silhouette.width; ++x) {
      if (!silhouette.at(x, y)) continue;
      const double dx = (x + 0.5 - cx) / radius, dy = (y + 0.5 - cy) / radius;
      const double rho = std::hypot(dx, dy);
      const std::complex<double> dir = rho > 0 ? std::complex<double>(dx, -dy) / rho : std::complex<double>(1, 0);
      rho_pow[0] = 1.0;
      rot_pow[0] = 1.0;
      for (int k = 1; k <= kZernikeOrder; ++k) {
        rho_pow[k] = rho_pow[k - 1] * rho;
        rot_pow[k] = rot_pow[k - 1] * dir;
      }
      for (std::size_t i = 0; i < orders.size(); ++i) {
        const auto [n, m] = orders[i];
        double radial = 0.0;
        for (std::size_t s = 0; s < coeffs[i].size(); ++s) radial += coeffs[i][s] * rho_pow[n - 2 * s];
        moments[i] += radial * rot_pow[m];
      }
    }
  }
  const double area = 1.0 / (radius * radius);
  std::vector<double> out(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i)
    out[i] = std::abs(moments[i]) * (orders[i].first + 1) / std::numbers::pi * area;
  return out;
}

// ---------------------------------------------------------------------------
// Contours

BinaryImage largest_component(const BinaryImage& image) {
  std::vector<int> label(image.bits.size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(image.bits.size()); ++start) {
    if (!image.bits[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    std::size_t size = 0;
    stack.push_back(start);
    label[start] = id;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      ++size;
      const int px = p % image.width, py = p / image.width;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx, ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= image.width || ny >= image.height) continue;
          const int q = ny * image.width + nx;
          if (image.bits[q] && label[q] < 0) {
            label[q] = id;
            stack.push_back(q);
          }
        }
    }
    sizes.push_back(size);
  }
  BinaryImage out(image.width, image.height);
  if (sizes.empty()) return out;
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (std::size_t i = 0; i < label.size(); ++i) out.bits[i] = label[i] == best ? 1 : 0;
  return out;
}

std::vector<ContourPoint> trace_outer_contour(const BinaryImage& image) {
  // Clockwise neighbor order in image coordinates (y down), starting west.
  static constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  auto set = [&](int x, int y) { return x >= 0 && y >= 0 && x < image.width && y < image.height && image.at(x, y); };

  int sx = -1, sy = -1;
  for (int y = 0; y < image.height && sx < 0; ++y)
    for (int x = 0; x < image.width; ++x)
      if (image.at(x, y)) {
        sx = x;
        sy = y;
        break;
      }
  std::vector<ContourPoint> contour;
  if (sx < 0) return contour;
  contour.push_back({sx, sy});

  int cx = sx, cy = sy;
  int back_dir = 0;  // entered the start pixel from the west
  const int start_back = back_dir;
  const std::size_t limit = 4 * image.bits.size() + 8;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int i = 1; i <= 8; ++i) {
      const int d = (back_dir + i) % 8;
      if (set(cx + kDx[d], cy + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int prev = (found + 7) % 8;
    const int bx = cx + kDx[prev], by = cy + kDy[prev];
    cx += kDx[found];
    cy += kDy[found];
    // Direction from the new pixel back to the last background neighbor.
    int nb = 0;
    for (int d = 0; d < 8; ++d)
      if (cx + kDx[d] == bx && cy + kDy[d] == by) nb = d;
    back_dir = nb;
    if (cx == sx && cy == sy && back_dir == start_back) break;
    if (cx == sx && cy == sy && contour.size() > 2) {
      // Jacob's criterion can miss when the start is re-entered from another side;
      // stop once the next step would retrace the first move.
      int next = -1;
      for (int i = 1; i <= 8; ++i) {
        const int d = (back_dir + i) % 8;
        if (set(cx + kDx[d], cy + kDy[d])) {
          next = d;
          break;
        }
      }
      if (next >= 0 && cx + kDx[next] == contour[1].x && cy + kDy[next] == contour[1].y) break;
    }
    contour.push_back({cx, cy});
  }
  return contour;
}

std::vector<double> fourier_contour(const BinaryImage& silhouette) {
  const BinaryImage component = largest_component(silhouette);
  double cx = 0.0, cy = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < component.height; ++y)
    for (int x = 0; x < component.width; ++x)
      if (component.at(x, y)) {
        cx += x;
        cy += y;
        ++count;
      }
  if (count == 0) throw Error(ErrorCode::EmptyImage, "silhouette has no set pixels");
  cx /= static_cast<double>(count);
  cy /= static_cast<double>(count);

  const auto contour = trace_outer_contour(component);
  constexpr int kSamples = 128;
  std::vector<double> signature(kSamples);
  const std::size_t n = contour.size();
  std::vector<double> cumulative(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = contour[i];
    const auto& b = contour[(i + 1) % n];
    cumulative[i + 1] = cumulative[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double total = cumulative[n];
  for (int j = 0; j < kSamples; ++j) {
    if (total <= 0.0) {
      signature[j] = std::hypot(contour[0].x - cx, contour[0].y - cy);
      continue;
    }
    const double t = total * j / kSamples;
    const std::size_t seg =
        std::min<std::size_t>(n - 1, std::upper_bound(cumulative.begin(), cumulative.end(), t) - cumulative.begin() - 1);
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double u = len > 0 ? (t - cumulative[seg]) / len : 0.0;
    const auto& a = contour[seg];
    const auto& b = contour[(seg + 1) % n];
    const double px = a.x + u * (b.x - a.x), py = a.y + u * (b.y - a.y);
    signature[j] = std::hypot(px - cx, py - cy);
  }

  std::vector<double> magnitude(kFourierCount + 1);
  for (int k = 0; k <= kFourierCount; ++k) {
    std::complex<double> sum = 0.0;
    for (int j = 0; j < kSamples; ++j) sum += signature[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / kSamples);
    magnitude[k] = std::abs(sum);
  }
  std::vector<double> out(kFourierCount, 0.0);
  if (magnitude[0] > 0.0)
    for (int k = 1; k <= kFourierCount; ++k) out[k - 1] = magnitude[k] / magnitude[0];
  return out;
}

std::vector<double> view_descriptor(const BinaryImage& silhouette) {
  std::vector<double> out = zernike_magnitudes(silhouette);
  const auto fourier = fourier_contour(silhouette);
  out.insert(out.end(), fourier.begin(), fourier.end());
  return out;
}

LightFieldDescriptor lightfield_descriptor(const NormalizedMesh& mesh, kernels::Exec exec) {
  const auto images = lightfield_projections(mesh, exec);
  LightFieldDescriptor out;
  for (int v = 0; v < kLightFieldViews; ++v) {
    if (images[v].count() == 0) throw Error(ErrorCode::DegenerateMesh, "empty silhouette");
    out.views[v] = view_descriptor(images[v]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rotation group

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Vec3 apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2], m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
          m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

Mat3 axis_rotation(const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  return {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
           {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
           {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
}

// Index j and sign with m * d_i = +-d_j, or -1 if the rotation breaks the axis set.
int axis_image(const Mat3& m, int i) {
  const auto& dirs = light_field_directions();
  const Vec3 r = apply(m, dirs[i]);
  for (int j = 0; j < kLightFieldViews; ++j) {
    const double dot = r[0] * dirs[j][0] + r[1] * dirs[j][1] + r[2] * dirs[j][2];
    if (std::abs(std::abs(dot) - 1.0) < 1e-9) return j;
  }
  return -1;
}

bool preserves_axes(const Mat3& m) {
  for (int i = 0; i < kLightFieldViews; ++i)
    if (axis_image(m, i) < 0) return false;
  return true;
}

bool same(const Mat3& a, const Mat3& b) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(a[i][j] - b[i][j]) > 1e-9) return false;
  return true;
}

}  // namespace

const std::vector<std::array<int, kLightFieldViews>>& dodecahedral_view_permutations() {
  static const std::vector<std::array<int, kLightFieldViews>> perms = [] {
    // Generators: 3-fold about (1,1,1), 2-fold about z, and a 5-fold face axis.
    std::vector<Mat3> generators = {Mat3{{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}}, Mat3{{{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}}}};
    const std::array<Vec3, 6> five_fold_candidates = {unit(0, 1, kPhi), unit(0, kPhi, 1), unit(1, kPhi, 0),
                                                      unit(kPhi, 1, 0), unit(1, 0, kPhi), unit(kPhi, 0, 1)};
    for (const auto& axis : five_fold_candidates) {
      const Mat3 r = axis_rotation(axis, 2 * std::numbers::pi / 5);
      if (preserves_axes(r)) {
        generators.push_back(r);
        break;
      }
    }
    std::vector<Mat3> group = {Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (const auto& g : generators) {
        const Mat3 candidate = multiply(g, group[i]);
        if (std::none_of(group.begin(), group.end(), [&](const Mat3& m) { return same(m, candidate); }))
          group.push_back(candidate);
      }
    }
    std::vector<std::array<int, kLightFieldViews>> out;
    for (const auto& m : group) {
      std::array<int, kLightFieldViews> p{};
      for (int i = 0; i < kLightFieldViews; ++i) p[i] = axis_image(m, i);
      out.push_back(p);
    }
    return out;
  }();
  return perms;
}

double view_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "view descriptor lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

double lightfield_distance(const LightFieldDescriptor& a, const LightFieldDescriptor& b) {
  double view_d[kLightFieldViews][kLightFieldViews];
  for (int i = 0; i < kLightFieldViews; ++i)
    for (int j = 0; j < kLightFieldViews; ++j) view_d[i][j] = view_distance(a.views[i], b.views[j]);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& perm : dodecahedral_view_permutations()) {
    double sum = 0.0;
    for (int i = 0; i < kLightFieldViews; ++i) sum += view_d[i][perm[i]];
    best = std::min(best, sum);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sketches

int otsu_threshold(std::span<const std::uint64_t, 256> histogram) {
  double total = 0.0, weighted = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += static_cast<double>(histogram[i]);
    weighted += i * static_cast<double>(histogram[i]);
  }
  double w0 = 0.0, sum0 = 0.0, best_var = 0.0;
  int best = -1;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(histogram[t]);
    sum0 += t * static_cast<double>(histogram[t]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (weighted - sum0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

BinaryImage sketch_silhouette(const RasterImage& sketch) {
  std::vector<int> gray(static_cast<std::size_t>(sketch.width) * sketch.height);
  std::array<std::uint64_t, 256> histogram{};
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const std::uint8_t* p = &sketch.pixels[i * 3];
    gray[i] = std::clamp(static_cast<int>(std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])), 0, 255);
    ++histogram[gray[i]];
  }
  const int threshold = otsu_threshold(histogram);
  if (threshold < 0) throw Error(ErrorCode::EmptyImage, "sketch is blank");

  // Background = light pixels reachable from the border; everything else is the shape.
  const int w = sketch.width, h = sketch.height;
  std::vector<std::uint8_t> outside(gray.size(), 0);
  std::vector<int> stack;
  auto seed = [&](int x, int y) {
    const int i = y * w + x;
    if (gray[i] > threshold && !outside[i]) {
      outside[i] = 1;
      stack.push_back(i);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    const int x = i % w, y = i / w;
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  BinaryImage silhouette(w, h);
  for (std::size_t i = 0; i < gray.size(); ++i) silhouette.bits[i] = outside[i] ? 0 : 1;
  if (silhouette.count() == 0) throw Error(ErrorCode::EmptyImage, "sketch has no strokes");
  return silhouette;
}

std::vector<double> sketch_to_lightfield_query(const RasterImage& sketch) {
  return view_descriptor(sketch_silhouette(sketch));
}

double sketch_distance(std::span<const double> query, const LightFieldDescriptor& model) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& view : model.views) best = std::min(best, view_distance(query, view));
  return best;
}

}  // namespace cbmr
