#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbmr {

enum class MediaType { Image, Audio, Video, Model3D };

std::string_view to_string(MediaType type);
MediaType media_type_from_string(std::string_view name);

struct MediaObject {
  std::string object_id;
  MediaType media_type = MediaType::Image;
  std::string path;
  std::string name;
  std::uint64_t size_bytes = 0;
};

/// Row-major 8-bit RGB raster.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const {
    return &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
  }
  bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }
};

inline constexpr int kAudioSampleRate = 22050;

/// Mono audio at kAudioSampleRate with samples in [-1, 1].
struct AudioBuffer {
  int sample_rate = kAudioSampleRate;
  std::vector<float> samples;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

using Vec3 = std::array<double, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

/// Frame-sequence video. Frames are decoded on demand.
class VideoDocument {
 public:
  VideoDocument(std::vector<std::filesystem::path> frames, double fps,
                std::optional<AudioBuffer> audio);

  std::size_t frame_count() const { return frames_.size(); }
  double fps() const { return fps_; }
  double duration_seconds() const { return static_cast<double>(frames_.size()) / fps_; }
  const std::optional<AudioBuffer>& audio() const { return audio_; }
  const std::filesystem::path& frame_path(std::size_t index) const { return frames_.at(index); }

  RasterImage frame(std::size_t index) const;

 private:
  std::vector<std::filesystem::path> frames_;
  double fps_;
  std::optional<AudioBuffer> audio_;
};

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Hex MD5 of the bytes; the object id of an ingested file.
std::string content_id(std::span<const std::uint8_t> bytes);

// Decoders over in-memory bytes; the path-taking loaders wrap them.
RasterImage decode_image(std::span<const std::uint8_t> bytes);
AudioBuffer decode_audio(std::span<const std::uint8_t> bytes);
TriangleMesh decode_mesh(std::string_view text);

RasterImage load_image(const std::filesystem::path& path);
AudioBuffer load_audio(const std::filesystem::path& path);
TriangleMesh load_mesh(const std::filesystem::path& path);

/// Reads a `key=value` manifest: fps, frames (directory), optional count and
/// pattern (printf-style with one integer conversion, default
/// "frame_%05d.ppm"), and audio (path or "none"). Without count, every
/// PNG/PPM file in the frame directory is used in lexicographic order.
/// Relative paths are resolved against the manifest's directory.
VideoDocument load_video_manifest(const std::filesystem::path& path);

/// Resamples to kAudioSampleRate by linear interpolation;
/// output length is round(N * 22050 / source_rate).
std::vector<float> resample_linear(std::span<const float> samples, int source_rate);

Bytes encode_png(const RasterImage& image);
Bytes encode_ppm(const RasterImage& image);
/// PCM16 mono WAV at the buffer's sample rate; samples clamped to [-1, 1).
Bytes encode_wav(const AudioBuffer& audio);
std::string encode_obj(const TriangleMesh& mesh);

/// Guesses the media type from the file extension
/// (.png/.ppm, .wav, .obj, .manifest/.video).
std::optional<MediaType> media_type_for_path(const std::filesystem::path& path);

RasterImage resize_bilinear(const RasterImage& image, int width, int height);

}  // namespace cbmr
