#pragma once

// Deterministic synthetic media for tests and acceptance runs.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cbmr/media.hpp"

namespace synth {

using cbmr::AudioBuffer;
using cbmr::RasterImage;
using cbmr::TriangleMesh;
using cbmr::Vec3;

// --- images ---------------------------------------------------------------

/// Gradient background with 3-7 random rectangles, ellipses and triangles.
RasterImage random_scene(std::uint64_t seed, int width = 160, int height = 120);
RasterImage gaussian_blur(const RasterImage& image, double sigma);
/// Rotates every pixel's hue by `degrees` in HSV space.
RasterImage hue_shift(const RasterImage& image, double degrees);

/// Outline drawings on a white canvas, stroke `thickness` px.
enum class Sketch { Circle, Square, Star };
RasterImage sketch(Sketch shape, int size = 256, int thickness = 4);

// --- audio ----------------------------------------------------------------

enum class Timbre { Sine, Square };

struct Note {
  double midi;
  double seconds;
};

/// Equal-tempered notes rendered with an attack/release envelope.
AudioBuffer render_melody(const std::vector<Note>& notes, Timbre timbre, double amplitude = 0.5);
std::vector<Note> random_melody(std::uint64_t seed, std::size_t count);
/// Two voices plus a noise-burst percussion track.
AudioBuffer random_track(std::uint64_t seed, double seconds);
AudioBuffer excerpt(const AudioBuffer& audio, double start_seconds, double seconds);
/// White noise at the given SNR relative to the signal's mean power.
AudioBuffer add_white_noise(const AudioBuffer& audio, double snr_db, std::uint64_t seed);

// --- meshes ---------------------------------------------------------------

TriangleMesh uv_sphere(int rings = 16, int segments = 32);
TriangleMesh box(double sx, double sy, double sz);
/// Prism over a star-shaped polygon (fan-triangulated from the origin).
TriangleMesh extrude(const std::vector<std::pair<double, double>>& polygon, double height);
TriangleMesh star_prism(int points, double inner, double outer, double height);
TriangleMesh torus(double major, double minor, int rings = 24, int segments = 12);
TriangleMesh cone(double radius, double height, int segments = 32);

/// The six primitive classes used by the 3D scenarios.
enum class ShapeClass { Sphere, Cube, Star, Torus, Cone, Cross };
inline constexpr int kShapeClasses = 6;
std::string class_name(ShapeClass c);
/// Member `member` of a class; proportions vary between 0.7x and 1.3x of
/// the class template along a low-discrepancy sequence; member 0 is the template.
TriangleMesh shape(ShapeClass c, std::uint64_t member);

using Mat3 = std::array<Vec3, 3>;
Mat3 random_rotation(std::mt19937_64& rng);
TriangleMesh transform(const TriangleMesh& mesh, const Mat3& m, Vec3 translate = {0, 0, 0}, double scale = 1.0);

// --- files ----------------------------------------------------------------

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);
void write_png(const std::filesystem::path& path, const RasterImage& image);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace synth
