#include "synth.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace synth {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

namespace {

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void paint(RasterImage& img, int x, int y, const std::array<std::uint8_t, 3>& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::copy(c.begin(), c.end(), img.at(x, y));
}

double seg_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 == 0 ? 0 : std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

bool in_triangle(double px, double py, const std::array<std::pair<double, double>, 3>& t) {
  const auto side = [&](int a, int b) {
    return (t[b].first - t[a].first) * (py - t[a].second) - (t[b].second - t[a].second) * (px - t[a].first);
  };
  const double d0 = side(0, 1), d1 = side(1, 2), d2 = side(2, 0);
  return (d0 >= 0 && d1 >= 0 && d2 >= 0) || (d0 <= 0 && d1 <= 0 && d2 <= 0);
}

}  // namespace

RasterImage random_scene(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto color = [&] {
    return std::array<std::uint8_t, 3>{clamp8(255 * u(rng)), clamp8(255 * u(rng)), clamp8(255 * u(rng))};
  };
  RasterImage img(width, height);
  const auto c0 = color(), c1 = color();
  const double angle = 2 * kPi * u(rng);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = 0.5 + 0.5 * ((x - width / 2.0) * std::cos(angle) + (y - height / 2.0) * std::sin(angle)) /
                                 std::hypot(width / 2.0, height / 2.0);
      for (int ch = 0; ch < 3; ++ch) img.at(x, y)[ch] = clamp8(c0[ch] * (1 - t) + c1[ch] * t);
    }

  const int shapes = 3 + static_cast<int>(u(rng) * 5);
  for (int s = 0; s < shapes; ++s) {
    const auto fill = color();
    const int kind = static_cast<int>(u(rng) * 3);
    const double cx = u(rng) * width, cy = u(rng) * height;
    const double rx = (0.08 + 0.22 * u(rng)) * width, ry = (0.08 + 0.22 * u(rng)) * height;
    const bool striped = u(rng) < 0.4;
    const double stripe = 3 + 6 * u(rng);
    std::array<std::pair<double, double>, 3> tri;
    for (auto& p : tri) p = {cx + (u(rng) - 0.5) * 2 * rx, cy + (u(rng) - 0.5) * 2 * ry};
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        bool inside = false;
        if (kind == 0) inside = std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
        else if (kind == 1) inside = std::pow((x - cx) / rx, 2) + std::pow((y - cy) / ry, 2) <= 1.0;
        else inside = in_triangle(x, y, tri);
        if (!inside) continue;
        if (striped && static_cast<int>(std::floor((x + y) / stripe)) % 2 == 0)
          paint(img, x, y, {static_cast<std::uint8_t>(255 - fill[0]), static_cast<std::uint8_t>(255 - fill[1]),
                            static_cast<std::uint8_t>(255 - fill[2])});
        else
          paint(img, x, y, fill);
      }
  }
  return img;
}

RasterImage gaussian_blur(const RasterImage& image, double sigma) {
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-i * i / (2 * sigma * sigma));
  for (auto& k : kernel) k /= total;
  const int w = image.width, h = image.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (int i = -radius; i <= radius; ++i) s += kernel[i + radius] * image.at(std::clamp(x + i, 0, w - 1), y)[c];
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = s;
      }
  RasterImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (int i = -radius; i <= radius; ++i)
          s += kernel[i + radius] * tmp[(static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x) * 3 + c];
        out.at(x, y)[c] = clamp8(s);
      }
  return out;
}

RasterImage hue_shift(const RasterImage& image, double degrees) {
  RasterImage out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t* p = image.at(x, y);
      const double r = p[0] / 255.0, g = p[1] / 255.0, b = p[2] / 255.0;
      const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), d = mx - mn;
      double hue = 0;
      if (d > 0) {
        if (mx == r) hue = 60 * std::fmod((g - b) / d, 6.0);
        else if (mx == g) hue = 60 * ((b - r) / d + 2);
        else hue = 60 * ((r - g) / d + 4);
      }
      hue = std::fmod(hue + degrees + 720.0, 360.0);
      const double s = mx == 0 ? 0 : d / mx, v = mx;
      const double c = v * s, xx = c * (1 - std::abs(std::fmod(hue / 60.0, 2.0) - 1)), m = v - c;
      double rr = 0, gg = 0, bb = 0;
      switch (static_cast<int>(hue / 60.0) % 6) {
        case 0: rr = c, gg = xx; break;
        case 1: rr = xx, gg = c; break;
        case 2: gg = c, bb = xx; break;
        case 3: gg = xx, bb = c; break;
        case 4: rr = xx, bb = c; break;
        default: rr = c, bb = xx; break;
      }
      std::uint8_t* q = out.at(x, y);
      q[0] = clamp8((rr + m) * 255), q[1] = clamp8((gg + m) * 255), q[2] = clamp8((bb + m) * 255);
    }
  return out;
}

RasterImage sketch(Sketch shape, int size, int thickness) {
  RasterImage img(size, size, 255);
  const double c = size / 2.0;
  std::vector<std::pair<double, double>> poly;
  if (shape == Sketch::Square) {
    const double h = 0.3 * size;
    poly = {{c - h, c - h}, {c + h, c - h}, {c + h, c + h}, {c - h, c + h}};
  } else if (shape == Sketch::Star) {
    for (int i = 0; i < 10; ++i) {
      const double r = (i % 2 == 0 ? 0.4 : 0.17) * size;
      const double a = -kPi / 2 + i * kPi / 5;
      poly.emplace_back(c + r * std::cos(a), c + r * std::sin(a));
    }
  }
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      double d;
      if (shape == Sketch::Circle) {
        d = std::abs(std::hypot(px - c, py - c) - 0.35 * size);
      } else {
        d = 1e9;
        for (std::size_t i = 0; i < poly.size(); ++i) {
          const auto& a = poly[i];
          const auto& b = poly[(i + 1) % poly.size()];
          d = std::min(d, seg_distance(px, py, a.first, a.second, b.first, b.second));
        }
      }
      if (d <= thickness / 2.0) paint(img, x, y, {0, 0, 0});
    }
  return img;
}

// --- audio ------------------------------------------------------------------

namespace {

double midi_hz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

double envelope(std::size_t i, std::size_t n, int rate) {
  const double attack = 0.01 * rate, release = 0.03 * rate;
  const double a = std::min(1.0, static_cast<double>(i) / attack);
  const double r = std::min(1.0, static_cast<double>(n - i) / release);
  return std::min(a, r);
}

void normalize_peak(AudioBuffer& audio, double peak) {
  float mx = 0;
  for (float s : audio.samples) mx = std::max(mx, std::abs(s));
  if (mx > 0)
    for (float& s : audio.samples) s = static_cast<float>(s * peak / mx);
}

}  // namespace

AudioBuffer render_melody(const std::vector<Note>& notes, Timbre timbre, double amplitude) {
  AudioBuffer out;
  const int rate = out.sample_rate;
  for (const auto& note : notes) {
    const auto n = static_cast<std::size_t>(note.seconds * rate);
    const double f = midi_hz(note.midi);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      double v = 0;
      if (timbre == Timbre::Sine) {
        v = std::sin(2 * kPi * f * t);
      } else {
        for (int k = 1; k * f < 0.45 * rate; k += 2) v += std::sin(2 * kPi * k * f * t) / k;
        v *= 4 / kPi;
      }
      out.samples.push_back(static_cast<float>(amplitude * envelope(i, n, rate) * v));
    }
  }
  normalize_peak(out, amplitude);
  return out;
}

std::vector<Note> random_melody(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed * 7919 + 3);
  std::uniform_int_distribution<int> step(-4, 4);
  std::uniform_int_distribution<int> length(1, 3);
  std::vector<Note> notes;
  int pitch = 60 + static_cast<int>(rng() % 12);
  for (std::size_t i = 0; i < count; ++i) {
    pitch = std::clamp(pitch + step(rng), 52, 80);
    notes.push_back({static_cast<double>(pitch), 0.25 * length(rng)});
  }
  return notes;
}

AudioBuffer random_track(std::uint64_t seed, double seconds) {
  std::mt19937_64 rng(seed * 104729 + 11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int rate = cbmr::kAudioSampleRate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  AudioBuffer out;
  out.samples.assign(n, 0.0f);

  std::array<double, 5> harmonics{};
  for (auto& h : harmonics) h = 0.2 + 0.8 * u(rng);
  const auto voice = [&](int lo, int hi, double min_len, double max_len, double gain) {
    std::size_t pos = 0;
    while (pos < n) {
      const double f = midi_hz(lo + std::floor(u(rng) * (hi - lo)));
      const auto len = std::min(n - pos, static_cast<std::size_t>((min_len + (max_len - min_len) * u(rng)) * rate));
      for (std::size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / rate;
        double v = 0;
        for (std::size_t k = 0; k < harmonics.size(); ++k) v += harmonics[k] * std::sin(2 * kPi * (k + 1) * f * t) / (k + 1);
        out.samples[pos + i] += static_cast<float>(gain * envelope(i, len, rate) * v);
      }
      pos += len;
    }
  };
  voice(55, 86, 0.12, 0.4, 0.5);
  voice(36, 55, 0.5, 1.0, 0.4);

  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t pos = 0;
  while (pos < n) {
    const auto len = std::min(n - pos, static_cast<std::size_t>(0.08 * rate));
    for (std::size_t i = 0; i < len; ++i)
      out.samples[pos + i] += static_cast<float>(0.3 * std::exp(-40.0 * i / rate) * noise(rng));
    pos += static_cast<std::size_t>((0.25 + 0.25 * u(rng)) * rate);
  }
  normalize_peak(out, 0.8);
  return out;
}

AudioBuffer excerpt(const AudioBuffer& audio, double start_seconds, double seconds) {
  AudioBuffer out;
  const auto begin = std::min(audio.samples.size(), static_cast<std::size_t>(start_seconds * audio.sample_rate));
  const auto end = std::min(audio.samples.size(), begin + static_cast<std::size_t>(seconds * audio.sample_rate));
  out.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     audio.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

AudioBuffer add_white_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed) {
  double power = 0;
  for (float s : audio.samples) power += static_cast<double>(s) * s;
  power /= std::max<std::size_t>(1, audio.samples.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  AudioBuffer out = audio;
  for (float& s : out.samples) s = static_cast<float>(s + noise(rng));
  return out;
}

// --- meshes -----------------------------------------------------------------

TriangleMesh uv_sphere(int rings, int segments) {
  TriangleMesh m;
  m.vertices.push_back({0, 0, 1});
  for (int r = 1; r < rings; ++r) {
    const double theta = kPi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2 * kPi * s / segments;
      m.vertices.push_back({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)});
    }
  }
  m.vertices.push_back({0, 0, -1});
  const auto idx = [&](int r, int s) { return static_cast<std::uint32_t>(1 + (r - 1) * segments + (s % segments)); };
  const auto south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (int s = 0; s < segments; ++s) {
    m.faces.push_back({0, idx(1, s), idx(1, s + 1)});
    m.faces.push_back({south, idx(rings - 1, s + 1), idx(rings - 1, s)});
  }
  for (int r = 1; r < rings - 1; ++r)
    for (int s = 0; s < segments; ++s) {
      m.faces.push_back({idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)});
      m.faces.push_back({idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)});
    }
  return m;
}

TriangleMesh box(double sx, double sy, double sz) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({(i & 1 ? 0.5 : -0.5) * sx, (i & 2 ? 0.5 : -0.5) * sy, (i & 4 ? 0.5 : -0.5) * sz});
  const std::array<std::array<std::uint32_t, 4>, 6> quads = {
      {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriangleMesh extrude(const std::vector<std::pair<double, double>>& polygon, double height) {
  TriangleMesh m;
  const auto n = static_cast<std::uint32_t>(polygon.size());
  for (double z : {-height / 2, height / 2})
    for (const auto& [x, y] : polygon) m.vertices.push_back({x, y, z});
  m.vertices.push_back({0, 0, -height / 2});
  m.vertices.push_back({0, 0, height / 2});
  const std::uint32_t bottom = 2 * n, top = 2 * n + 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    m.faces.push_back({bottom, j, i});
    m.faces.push_back({top, n + i, n + j});
    m.faces.push_back({i, j, n + j});
    m.faces.push_back({i, n + j, n + i});
  }
  return m;
}

TriangleMesh star_prism(int points, double inner, double outer, double height) {
  std::vector<std::pair<double, double>> poly;
  for (int i = 0; i < 2 * points; ++i) {
    const double r = i % 2 == 0 ? outer : inner;
    const double a = kPi / 2 + i * kPi / points;
    poly.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return extrude(poly, height);
}

TriangleMesh torus(double major, double minor, int rings, int segments) {
  TriangleMesh m;
  for (int r = 0; r < rings; ++r)
    for (int s = 0; s < segments; ++s) {
      const double u = 2 * kPi * r / rings, v = 2 * kPi * s / segments;
      m.vertices.push_back({(major + minor * std::cos(v)) * std::cos(u), (major + minor * std::cos(v)) * std::sin(u),
                            minor * std::sin(v)});
    }
  const auto idx = [&](int r, int s) { return static_cast<std::uint32_t>((r % rings) * segments + (s % segments)); };
  for (int r = 0; r < rings; ++r)
    for (int s = 0; s < segments; ++s) {
      m.faces.push_back({idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)});
      m.faces.push_back({idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)});
    }
  return m;
}

TriangleMesh cone(double radius, double height, int segments) {
  TriangleMesh m;
  for (int s = 0; s < segments; ++s) {
    const double a = 2 * kPi * s / segments;
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), -height / 2});
  }
  m.vertices.push_back({0, 0, height / 2});
  m.vertices.push_back({0, 0, -height / 2});
  const auto apex = static_cast<std::uint32_t>(segments), base = apex + 1;
  for (int s = 0; s < segments; ++s) {
    const auto i = static_cast<std::uint32_t>(s), j = static_cast<std::uint32_t>((s + 1) % segments);
    m.faces.push_back({i, j, apex});
    m.faces.push_back({base, j, i});
  }
  return m;
}

std::string class_name(ShapeClass c) {
  switch (c) {
    case ShapeClass::Sphere: return "sphere";
    case ShapeClass::Cube: return "cube";
    case ShapeClass::Star: return "star";
    case ShapeClass::Torus: return "torus";
    case ShapeClass::Cone: return "cone";
    case ShapeClass::Cross: return "cross";
  }
  return "?";
}

TriangleMesh shape(ShapeClass c, std::uint64_t member) {
  // Low-discrepancy proportions keep the members of a class well apart.
  const auto spread = [member](double step, double offset) {
    const double t = std::fmod(offset + static_cast<double>(member) * step, 1.0);
    return 0.7 + 0.6 * t;
  };
  const double p = spread(0.6180339887, 0.5), q = spread(0.4142135624, 0.5), r = spread(0.7320508076, 0.5);
  switch (c) {
    case ShapeClass::Sphere: {
      Mat3 s{{{p, 0, 0}, {0, q, 0}, {0, 0, r}}};
      return transform(uv_sphere(), s);
    }
    case ShapeClass::Cube: return box(p, q, r);
    case ShapeClass::Star: return star_prism(5, 0.4 * p, 1.0, 0.5 * q);
    case ShapeClass::Torus: return torus(1.0, 0.35 * p);
    case ShapeClass::Cone: return cone(0.9 * p, 1.8 * q);
    case ShapeClass::Cross: {
      const double w = 0.35 * p, l = 1.0;
      const std::vector<std::pair<double, double>> plus = {{w, w},   {w, l},   {-w, l}, {-w, w},  {-l, w},  {-l, -w},
                                                           {-w, -w}, {-w, -l}, {w, -l}, {w, -w},  {l, -w},  {l, w}};
      return extrude(plus, 0.5 * q);
    }
  }
  return {};
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2 * kPi * u2), x = a * std::cos(2 * kPi * u2);
  const double y = b * std::sin(2 * kPi * u3), z = b * std::cos(2 * kPi * u3);
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

TriangleMesh transform(const TriangleMesh& mesh, const Mat3& m, Vec3 translate, double scale) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[i] = scale * (m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2]) + translate[i];
    v = r;
  }
  return out;
}

// --- files ------------------------------------------------------------------

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cbmr-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_png(const fs::path& path, const RasterImage& image) { cbmr::write_file(path, cbmr::encode_png(image)); }

void write_wav(const fs::path& path, const AudioBuffer& audio) { cbmr::write_file(path, cbmr::encode_wav(audio)); }

void write_obj(const fs::path& path, const TriangleMesh& mesh) {
  const std::string text = cbmr::encode_obj(mesh);
  cbmr::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace synth
