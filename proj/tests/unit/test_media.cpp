#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>

#include "cbmr/error.hpp"
#include "cbmr/media.hpp"
#include "synth.hpp"

using namespace cbmr;

namespace {

Bytes text_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("content ids are hex MD5 of the bytes") {
  CHECK(content_id(text_bytes("")) == "d41d8cd98f00b204e9800998ecf8427e");
  CHECK(content_id(text_bytes("abc")) == "900150983cd24fb0d6963f7d28e17f72");
  CHECK(content_id(text_bytes("The quick brown fox jumps over the lazy dog")) == "9e107d9d372bb6826bd81d3542a419d6");
}

TEST_CASE("PNG and PPM round trips are lossless") {
  const RasterImage img = synth::random_scene(3, 37, 21);
  const RasterImage png = decode_image(encode_png(img));
  const RasterImage ppm = decode_image(encode_ppm(img));
  CHECK(png.width == 37);
  CHECK(png.height == 21);
  CHECK(png.pixels == img.pixels);
  CHECK(ppm.pixels == img.pixels);
}

TEST_CASE("WAV round trip keeps 16-bit precision") {
  AudioBuffer a;
  for (int i = 0; i < 1000; ++i) a.samples.push_back(static_cast<float>(0.8 * std::sin(i * 0.05)));
  const AudioBuffer b = decode_audio(encode_wav(a));
  REQUIRE(b.samples.size() == a.samples.size());
  CHECK(b.sample_rate == kAudioSampleRate);
  double worst = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) worst = std::max(worst, double(std::fabs(a.samples[i] - b.samples[i])));
  CHECK(worst <= 1.0 / 32768 + 1e-7);
}

TEST_CASE("resampling follows the length rule and preserves a constant") {
  std::vector<float> in(44100, 0.25f);
  const auto out = resample_linear(in, 44100);
  CHECK(out.size() == 22050);
  for (float v : out) CHECK(v == doctest::Approx(0.25));
  CHECK(resample_linear(std::vector<float>(1000, 0.f), 8000).size() == 2756);  // round(1000 * 22050 / 8000)
}

TEST_CASE("OBJ round trip") {
  const TriangleMesh m = synth::box(1, 2, 3);
  const TriangleMesh back = decode_mesh(encode_obj(m));
  CHECK(back.vertices.size() == m.vertices.size());
  CHECK(back.faces == m.faces);
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    for (int c = 0; c < 3; ++c) CHECK(back.vertices[i][c] == doctest::Approx(m.vertices[i][c]));
}

TEST_CASE("OBJ polygons are fan triangulated and negative indices resolve") {
  const TriangleMesh m = decode_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n");
  REQUIRE(m.faces.size() == 2);
  CHECK(m.faces[0] == std::array<std::uint32_t, 3>{0, 1, 2});
  CHECK(m.faces[1] == std::array<std::uint32_t, 3>{0, 2, 3});
}

TEST_CASE("decoding failures carry their codes") {
  CHECK(code_of([] { decode_image(text_bytes("not an image at all")); }) == ErrorCode::UnsupportedFormat);
  Bytes png = encode_png(synth::random_scene(1, 16, 16));
  png.resize(png.size() / 2);
  CHECK(code_of([&] { decode_image(png); }) == ErrorCode::CorruptFile);
  Bytes wav = encode_wav(AudioBuffer{kAudioSampleRate, std::vector<float>(100, 0.f)});
  wav.resize(30);
  CHECK(code_of([&] { decode_audio(wav); }) == ErrorCode::CorruptFile);
  CHECK(code_of([] { decode_mesh("v 0 0 0\nf 1 2 3\n"); }) == ErrorCode::CorruptFile);
  CHECK(code_of([] { load_image("/nonexistent/file.png"); }) == ErrorCode::Io);
}

TEST_CASE("media type from extension") {
  CHECK(media_type_for_path("a/b.PNG") == MediaType::Image);
  CHECK(media_type_for_path("x.ppm") == MediaType::Image);
  CHECK(media_type_for_path("x.wav") == MediaType::Audio);
  CHECK(media_type_for_path("x.obj") == MediaType::Model3D);
  CHECK(media_type_for_path("x.manifest") == MediaType::Video);
  CHECK_FALSE(media_type_for_path("x.txt").has_value());
  CHECK(media_type_from_string(to_string(MediaType::Model3D)) == MediaType::Model3D);
}

TEST_CASE("video manifests resolve relative paths and list frames in order") {
  const auto dir = synth::temp_dir("unit-video");
  std::filesystem::create_directories(dir / "frames");
  for (int i = 0; i < 4; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05d.ppm", i);
    write_file(dir / "frames" / name, encode_ppm(RasterImage(8, 6, static_cast<std::uint8_t>(i * 60))));
  }
  synth::write_wav(dir / "sound.wav", AudioBuffer{kAudioSampleRate, std::vector<float>(22050, 0.1f)});
  {
    std::ofstream(dir / "clip.manifest") << "fps=12.5\nframes=frames\naudio=sound.wav\n";
  }
  const VideoDocument v = load_video_manifest(dir / "clip.manifest");
  CHECK(v.frame_count() == 4);
  CHECK(v.fps() == 12.5);
  CHECK(v.duration_seconds() == doctest::Approx(0.32));
  REQUIRE(v.audio().has_value());
  CHECK(v.audio()->samples.size() == 22050);
  CHECK(v.frame(2).at(3, 3)[0] == 120);

  {
    std::ofstream(dir / "short.manifest") << "fps=10\nframes=frames\ncount=6\naudio=none\n";
  }
  CHECK(code_of([&] { load_video_manifest(dir / "short.manifest"); }) == ErrorCode::MissingFrame);
}

TEST_CASE("bilinear resize of a constant image is constant") {
  const RasterImage img(10, 7, 91);
  const RasterImage r = resize_bilinear(img, 23, 5);
  CHECK(r.width == 23);
  CHECK(r.height == 5);
  for (auto p : r.pixels) CHECK(p == 91);
}
