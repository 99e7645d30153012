#include "cbmr/media.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "cbmr/error.hpp"

namespace cbmr {

namespace fs = std::filesystem;

std::string_view to_string(MediaType type) {
  switch (type) {
    case MediaType::Image: return "IMAGE";
    case MediaType::Audio: return "AUDIO";
    case MediaType::Video: return "VIDEO";
    case MediaType::Model3D: return "MODEL_3D";
  }
  return "IMAGE";
}

MediaType media_type_from_string(std::string_view name) {
  if (name == "IMAGE") return MediaType::Image;
  if (name == "AUDIO") return MediaType::Audio;
  if (name == "VIDEO") return MediaType::Video;
  if (name == "MODEL_3D") return MediaType::Model3D;
  throw Error(ErrorCode::InvalidQuery, "unknown media type '" + std::string(name) + "'");
}

RasterImage::RasterImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string content_id(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_md5(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Images

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

class PpmReader {
 public:
  explicit PpmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    long value = 0;
    bool any = false;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw Error(ErrorCode::CorruptFile, "PPM header value too large");
      any = true;
      ++pos_;
    }
    if (!any) throw Error(ErrorCode::CorruptFile, "malformed PPM header");
    return value;
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

RasterImage decode_ppm(std::span<const std::uint8_t> bytes) {
  PpmReader reader(bytes);
  reader.skip(2);
  const long width = reader.next_int();
  const long height = reader.next_int();
  const long maxval = reader.next_int();
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    throw Error(ErrorCode::CorruptFile, "invalid PPM dimensions");
  // Exactly one whitespace byte separates the header from the raster.
  reader.skip(1);
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t needed = static_cast<std::size_t>(width) * height * 3 * sample_bytes;
  if (reader.pos() > bytes.size() || bytes.size() - reader.pos() < needed)
    throw Error(ErrorCode::CorruptFile, "truncated PPM payload");

  RasterImage image(static_cast<int>(width), static_cast<int>(height));
  const std::uint8_t* src = bytes.data() + reader.pos();
  if (sample_bytes == 1) {
    std::copy_n(src, image.pixels.size(), image.pixels.begin());
  } else {
    for (std::size_t i = 0; i < image.pixels.size(); ++i) image.pixels[i] = src[2 * i];
  }
  return image;
}

struct PngMemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
  if (reader->bytes.size() - reader->offset < length) png_error(png, "truncated PNG payload");
  std::memcpy(out, reader->bytes.data() + reader->offset, length);
  reader->offset += length;
}

void png_error_to_exception(png_structp png, png_const_charp message) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what != nullptr) *what = message;
  png_longjmp(png, 1);
}

void png_warning_ignored(png_structp, png_const_charp) {}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  std::string message = "corrupt PNG";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           png_error_to_exception, png_warning_ignored);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  RasterImage image;
  std::vector<png_bytep> rows;
  PngMemoryReader reader{bytes, 0};

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::CorruptFile, message);
  }
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != width * 3) png_error(png, "unexpected PNG row layout");
  image = RasterImage(static_cast<int>(width), static_cast<int>(height));
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = image.pixels.data() + static_cast<std::size_t>(y) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin()))
    return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  throw Error(ErrorCode::UnsupportedFormat, "not a PNG or binary PPM image");
}

Bytes encode_png(const RasterImage& image) {
  if (!image.valid()) throw Error(ErrorCode::CorruptFile, "invalid raster");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            png_error_to_exception, png_warning_ignored);
  png_infop info = png_create_info_struct(png);
  Bytes out;
  std::vector<png_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "PNG encode failed: " + message);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y)
    rows[y] = const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Bytes encode_ppm(const RasterImage& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

RasterImage load_image(const fs::path& path) { return decode_image(read_file(path)); }

RasterImage resize_bilinear(const RasterImage& image, int width, int height) {
  RasterImage out(width, height);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(x0, y0)[c] * (1 - wx) + image.at(x1, y0)[c] * wx;
        const double bottom = image.at(x0, y1)[c] * (1 - wx) + image.at(x1, y1)[c] * wx;
        out.at(x, y)[c] = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bottom * wy));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audio

namespace {

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace

std::vector<float> resample_linear(std::span<const float> samples, int source_rate) {
  if (source_rate <= 0) throw Error(ErrorCode::CorruptFile, "invalid sample rate");
  if (source_rate == kAudioSampleRate) return {samples.begin(), samples.end()};
  const std::size_t n = samples.size();
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * kAudioSampleRate / source_rate));
  std::vector<float> out(out_len);
  if (n == 0) return out;
  const double step = static_cast<double>(source_rate) / kAudioSampleRate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) * step;
    const auto i0 = std::min(static_cast<std::size_t>(t), n - 1);
    const std::size_t i1 = std::min(i0 + 1, n - 1);
    const double frac = t - static_cast<double>(i0);
    out[i] = static_cast<float>(samples[i0] * (1.0 - frac) + samples[i1] * frac);
  }
  return out;
}

AudioBuffer decode_audio(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::UnsupportedFormat, "not a RIFF/WAVE file");

  int channels = 0;
  int rate = 0;
  bool have_format = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) throw Error(ErrorCode::CorruptFile, "short fmt chunk");
      const std::uint8_t* fmt = bytes.data() + body;
      std::uint16_t tag = le16(fmt);
      // WAVE_FORMAT_EXTENSIBLE carries the real format in the subformat GUID.
      if (tag == 0xFFFE) {
        if (size < 40 || available < 40) throw Error(ErrorCode::CorruptFile, "short extensible fmt");
        tag = le16(fmt + 24);
      }
      if (tag != 1) throw Error(ErrorCode::UnsupportedFormat, "WAV is not PCM");
      channels = le16(fmt + 2);
      rate = static_cast<int>(le32(fmt + 4));
      if (le16(fmt + 14) != 16) throw Error(ErrorCode::UnsupportedFormat, "only 16-bit PCM is supported");
      if (channels != 1 && channels != 2)
        throw Error(ErrorCode::UnsupportedFormat, "only mono or stereo WAV is supported");
      if (rate <= 0) throw Error(ErrorCode::CorruptFile, "invalid sample rate");
      have_format = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      // Streaming writers leave the size open; clamp to what is present.
      data = bytes.subspan(body, std::min<std::size_t>(size, available));
      have_data = true;
    }
    if (size > available) break;
    pos = body + size + (size & 1u);
  }
  if (!have_format || !have_data) throw Error(ErrorCode::CorruptFile, "missing fmt or data chunk");

  const std::size_t frame_bytes = 2u * static_cast<std::size_t>(channels);
  const std::size_t frames = data.size() / frame_bytes;
  std::vector<float> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data.data() + i * frame_bytes;
    double sum = 0.0;
    for (int c = 0; c < channels; ++c)
      sum += static_cast<std::int16_t>(le16(p + 2 * c)) / 32768.0;
    mono[i] = static_cast<float>(sum / channels);
  }
  AudioBuffer audio;
  audio.samples = resample_linear(mono, rate);
  return audio;
}

AudioBuffer load_audio(const fs::path& path) { return decode_audio(read_file(path)); }

Bytes encode_wav(const AudioBuffer& audio) {
  Bytes out;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (float s : audio.samples) {
    const long v = std::lround(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32768.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(v, -32768L, 32767L))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meshes

namespace {

std::int64_t parse_obj_index(std::string_view token, std::size_t vertex_count, int line_no) {
  const auto slash = token.find('/');
  if (slash != std::string_view::npos) token = token.substr(0, slash);
  std::int64_t index = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
  if (ec != std::errc() || ptr != token.data() + token.size() || index == 0)
    throw Error(ErrorCode::CorruptFile, "malformed face index on line " + std::to_string(line_no));
  // Negative indices count back from the most recent vertex.
  const std::int64_t resolved = index > 0 ? index - 1 : static_cast<std::int64_t>(vertex_count) + index;
  if (resolved < 0 || resolved >= static_cast<std::int64_t>(vertex_count))
    throw Error(ErrorCode::CorruptFile, "face index out of range on line " + std::to_string(line_no));
  return resolved;
}

}  // namespace

TriangleMesh decode_mesh(std::string_view text) {
  TriangleMesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v{};
      if (!(fields >> v[0] >> v[1] >> v[2]) || !std::isfinite(v[0]) || !std::isfinite(v[1]) ||
          !std::isfinite(v[2]))
        throw Error(ErrorCode::CorruptFile, "malformed vertex on line " + std::to_string(line_no));
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> polygon;
      std::string token;
      while (fields >> token)
        polygon.push_back(static_cast<std::uint32_t>(parse_obj_index(token, mesh.vertices.size(), line_no)));
      if (polygon.size() < 3)
        throw Error(ErrorCode::CorruptFile, "face with fewer than 3 vertices on line " + std::to_string(line_no));
      for (std::size_t i = 1; i + 1 < polygon.size(); ++i)
        mesh.faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
    }
  }
  return mesh;
}

TriangleMesh load_mesh(const fs::path& path) {
  const Bytes bytes = read_file(path);
  return decode_mesh(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string encode_obj(const TriangleMesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Video manifests

VideoDocument::VideoDocument(std::vector<fs::path> frames, double fps, std::optional<AudioBuffer> audio)
    : frames_(std::move(frames)), fps_(fps), audio_(std::move(audio)) {
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) throw Error(ErrorCode::CorruptFile, "fps must be positive");
  if (frames_.empty()) throw Error(ErrorCode::CorruptFile, "video has no frames");
}

RasterImage VideoDocument::frame(std::size_t index) const { return load_image(frames_.at(index)); }

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_frame_name(const std::string& pattern, long index) {
  const auto pct = pattern.find('%');
  if (pct == std::string::npos || pattern.find('%', pct + 1) != std::string::npos)
    throw Error(ErrorCode::CorruptFile, "frame pattern needs exactly one integer conversion");
  const auto conv = pattern.find('d', pct);
  if (conv == std::string::npos) throw Error(ErrorCode::CorruptFile, "frame pattern must use %d");
  for (std::size_t i = pct + 1; i < conv; ++i)
    if (!std::isdigit(static_cast<unsigned char>(pattern[i])))
      throw Error(ErrorCode::CorruptFile, "unsupported frame pattern flags");
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern.c_str(), static_cast<int>(index));
  return buf;
}

}  // namespace

VideoDocument load_video_manifest(const fs::path& path) {
  const Bytes bytes = read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::map<std::string, std::string> keys;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::CorruptFile, "manifest line without '=': " + t);
    keys[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  if (!keys.contains("fps") || !keys.contains("frames"))
    throw Error(ErrorCode::CorruptFile, "manifest requires fps and frames");

  double fps = 0.0;
  try {
    std::size_t used = 0;
    fps = std::stod(keys["fps"], &used);
    if (used != keys["fps"].size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw Error(ErrorCode::CorruptFile, "invalid fps value");
  }

  const fs::path base = path.parent_path();
  const fs::path frame_dir = base / keys["frames"];
  std::vector<fs::path> frames;
  if (keys.contains("count")) {
    long count = 0;
    auto [ptr, ec] = std::from_chars(keys["count"].data(), keys["count"].data() + keys["count"].size(), count);
    if (ec != std::errc() || count < 1) throw Error(ErrorCode::CorruptFile, "invalid frame count");
    const std::string pattern = keys.contains("pattern") ? keys["pattern"] : "frame_%05d.ppm";
    for (long i = 0; i < count; ++i) {
      fs::path frame = frame_dir / format_frame_name(pattern, i);
      if (!fs::exists(frame))
        throw Error(ErrorCode::MissingFrame, "frame " + std::to_string(i) + " missing: " + frame.string());
      frames.push_back(std::move(frame));
    }
  } else {
    if (!fs::is_directory(frame_dir)) throw Error(ErrorCode::CorruptFile, "frame directory missing");
    for (const auto& entry : fs::directory_iterator(frame_dir)) {
      const auto type = media_type_for_path(entry.path());
      if (entry.is_regular_file() && type == MediaType::Image) frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end());
  }

  std::optional<AudioBuffer> audio;
  if (keys.contains("audio") && keys["audio"] != "none" && !keys["audio"].empty())
    audio = load_audio(base / keys["audio"]);
  return VideoDocument(std::move(frames), fps, std::move(audio));
}

std::optional<MediaType> media_type_for_path(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png" || ext == ".ppm") return MediaType::Image;
  if (ext == ".wav") return MediaType::Audio;
  if (ext == ".obj") return MediaType::Model3D;
  if (ext == ".manifest" || ext == ".video") return MediaType::Video;
  return std::nullopt;
}

}  // namespace cbmr
