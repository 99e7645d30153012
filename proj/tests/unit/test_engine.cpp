#include <doctest.h>

#include <fstream>
#include <functional>

#include "cbmr/engine.hpp"
#include "cbmr/error.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace cbmr;
namespace fs = std::filesystem;

namespace {

struct Corpus {
  fs::path media;
  std::vector<fs::path> images, tracks, meshes;
  fs::path video;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus c;
    c.media = synth::temp_dir("unit-engine-media");
    for (int i = 0; i < 10; ++i) {
      c.images.push_back(c.media / ("img" + std::to_string(i) + ".png"));
      synth::write_png(c.images.back(), synth::random_scene(300 + i));
    }
    for (int i = 0; i < 3; ++i) {
      c.tracks.push_back(c.media / ("track" + std::to_string(i) + ".wav"));
      synth::write_wav(c.tracks.back(), synth::random_track(60 + i, 12));
    }
    for (int i = 0; i < synth::kShapeClasses; ++i) {
      c.meshes.push_back(c.media / (synth::class_name(synth::ShapeClass(i)) + ".obj"));
      synth::write_obj(c.meshes.back(), synth::shape(synth::ShapeClass(i), 0));
    }
    fs::create_directories(c.media / "clip");
    for (int f = 0; f < 20; ++f) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05d.ppm", f);
      write_file(c.media / "clip" / name, encode_ppm(RasterImage(64, 48, f < 10 ? 20 : 230)));
    }
    synth::write_wav(c.media / "clip" / "sound.wav", synth::random_track(70, 3));
    c.video = c.media / "clip.manifest";
    std::ofstream(c.video) << "fps=10\nframes=clip\naudio=clip/sound.wav\n";
    return c;
  }();
  return c;
}

std::vector<fs::path> all_files() {
  const auto& c = corpus();
  std::vector<fs::path> out = c.images;
  out.insert(out.end(), c.tracks.begin(), c.tracks.end());
  out.insert(out.end(), c.meshes.begin(), c.meshes.end());
  out.push_back(c.video);
  return out;
}

EngineConfig config_for(const std::string& name) {
  EngineConfig cfg;
  cfg.data_dir = synth::temp_dir(name);
  cfg.codebook_k = 64;
  return cfg;
}

QueryTerm image_term(const fs::path& path, std::map<std::string, double> categories = {}) {
  return {TermType::Image, load_image(path), std::move(categories), std::nullopt, 1.0};
}

Query single(QueryTerm t, std::size_t k = 10) {
  Query q;
  q.k = k;
  q.components.push_back({{std::move(t)}});
  return q;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

// One indexed engine shared by the read-only cases.
Engine& shared_engine() {
  static Engine engine(config_for("unit-engine-shared"));
  static const bool ready = [] {
    const auto report = engine.ingest(all_files());
    REQUIRE(report.failures.empty());
    engine.build_index();
    return true;
  }();
  (void)ready;
  return engine;
}

}  // namespace

TEST_CASE("ingest segments every media type") {
  Engine engine(config_for("unit-engine-ingest"));
  const auto report = engine.ingest(all_files());
  CHECK(report.failures.empty());
  REQUIRE(report.objects.size() == 20);
  for (const auto& o : report.objects) {
    CHECK(o.object_id.size() == 32);
    CHECK_FALSE(o.duplicate);
  }
  CHECK(report.objects[0].object_id == content_id(read_file(corpus().images[0])));
  CHECK(report.objects[10].segments == 2);  // 12 s of audio: 0-10 s and 9-12 s
  CHECK(report.objects[10].hashes > 0);
  const auto& video = report.objects.back();
  CHECK(video.media_type == MediaType::Video);
  const auto rec = engine.object(video.object_id);
  // Two shots of ten frames plus one soundtrack window.
  REQUIRE(rec.segments.size() == 3);
  // Ordered by sequence number, then id.
  CHECK(rec.segments[0].segment_id == video.object_id + ":0");
  CHECK(rec.segments[1].segment_id == video.object_id + ":a0");
  CHECK(rec.segments[1].unit == SegmentUnit::Samples);
  CHECK(rec.segments[2].segment_id == video.object_id + ":1");
  CHECK(rec.segments[2].start == 10);
  CHECK(rec.segments[2].unit == SegmentUnit::Frames);

  const auto again = engine.ingest({corpus().images[0], corpus().video});
  CHECK(again.objects[0].duplicate);
  CHECK(again.objects[1].duplicate);
  CHECK(again.objects[1].object_id == video.object_id);
}

TEST_CASE("ingest failures are collected and the rest continue") {
  Engine engine(config_for("unit-engine-fail"));
  const auto dir = synth::temp_dir("unit-engine-bad");
  write_file(dir / "broken.png", Bytes{1, 2, 3});
  synth::write_wav(dir / "empty.wav", AudioBuffer{});
  write_file(dir / "notes.txt", Bytes{'x'});
  const auto report = engine.ingest({dir / "broken.png", corpus().images[1], dir / "empty.wav", dir / "notes.txt"});
  CHECK(report.objects.size() == 1);
  REQUIRE(report.failures.size() == 3);
  CHECK(report.failures[0].error.find("UnsupportedFormat") != std::string::npos);
  CHECK(report.failures[1].error.find("InsufficientData") != std::string::npos);
}

TEST_CASE("queries need a fresh index") {
  Engine engine(config_for("unit-engine-stale"));
  engine.ingest({corpus().images[0], corpus().images[1]});
  CHECK_FALSE(engine.index_fresh());
  CHECK(code_of([&] { engine.execute_query(single(image_term(corpus().images[0]))); }) == ErrorCode::IndexStale);
  engine.build_index();
  CHECK(engine.index_fresh());
  CHECK_FALSE(engine.execute_query(single(image_term(corpus().images[0]))).results.empty());
}

TEST_CASE("an indexed image retrieves itself first") {
  Engine& engine = shared_engine();
  for (int i : {0, 4, 9}) {
    const auto r = engine.execute_query(single(image_term(corpus().images[i])));
    REQUIRE_FALSE(r.results.empty());
    CHECK(r.results[0].object_id == content_id(read_file(corpus().images[i])));
    CHECK(r.results[0].score == doctest::Approx(1.0));
    CHECK(r.results[0].per_category.count("color-grid") == 1);
    CHECK(r.session_id.size() > 0);
  }
}

TEST_CASE("results follow the ranking and rollup rules") {
  Engine& engine = shared_engine();
  const auto r = engine.execute_query(single(image_term(corpus().images[2]), 50));
  for (std::size_t i = 1; i < r.results.size(); ++i) {
    CHECK(r.results[i - 1].score >= r.results[i].score);
    if (r.results[i - 1].score == r.results[i].score) CHECK(r.results[i - 1].segment_id < r.results[i].segment_id);
  }
  auto want = oracle::group_by_max(r.results);
  std::stable_sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  CHECK(aggregate_objects(r.results) == want);
}

TEST_CASE("media filter and audio, mesh and sketch terms") {
  Engine& engine = shared_engine();
  Query q = single(image_term(corpus().images[1]), 50);
  q.media_filter = std::set<MediaType>{MediaType::Video};
  for (const auto& res : engine.execute_query(q).results)
    CHECK(engine.object(res.object_id).object.media_type == MediaType::Video);

  const auto track = load_audio(corpus().tracks[1]);
  QueryTerm audio{TermType::Audio, synth::excerpt(track, 2.0, 4.0), {}, AudioQueryCategory::Fingerprint, 1.0};
  const auto ra = engine.execute_query(single(audio));
  REQUIRE_FALSE(ra.results.empty());
  CHECK(ra.results[0].object_id == content_id(read_file(corpus().tracks[1])));

  QueryTerm mesh{TermType::Model3D, load_mesh(corpus().meshes[3]), {}, std::nullopt, 1.0};
  const auto rm = engine.execute_query(single(mesh));
  REQUIRE_FALSE(rm.results.empty());
  CHECK(rm.results[0].object_id == content_id(read_file(corpus().meshes[3])));

  QueryTerm sketch{TermType::Model3D, synth::sketch(synth::Sketch::Circle), {}, std::nullopt, 1.0};
  const auto rs = engine.execute_query(single(sketch));
  REQUIRE_FALSE(rs.results.empty());
  for (const auto& res : rs.results) CHECK(engine.object(res.object_id).object.media_type == MediaType::Model3D);
}

TEST_CASE("invalid queries") {
  Engine& engine = shared_engine();
  Query empty;
  CHECK(code_of([&] { engine.execute_query(empty); }) == ErrorCode::InvalidQuery);
  CHECK(code_of([&] { engine.execute_query(single(image_term(corpus().images[0], {{"nope", 1.0}}))); }) ==
        ErrorCode::UnknownCategory);
  CHECK(code_of([&] { engine.execute_query(single(image_term(corpus().images[0], {{"hog", 1.5}}))); }) ==
        ErrorCode::InvalidQuery);
  QueryTerm motion{TermType::Motion, std::monostate{}, {}, std::nullopt, 1.0};
  CHECK(code_of([&] { engine.execute_query(single(motion)); }) == ErrorCode::UnsupportedTerm);
  QueryTerm mismatched{TermType::Audio, load_image(corpus().images[0]), {}, std::nullopt, 1.0};
  CHECK(code_of([&] { engine.execute_query(single(mismatched)); }) == ErrorCode::InvalidQuery);
  Query zero = single(image_term(corpus().images[0]));
  zero.k = 0;
  CHECK(code_of([&] { engine.execute_query(zero); }) == ErrorCode::InvalidQuery);
}

TEST_CASE("more-like-this never returns its seed") {
  Engine& engine = shared_engine();
  const std::string seed = content_id(read_file(corpus().images[5])) + ":0";
  const auto r = engine.more_like_this(seed, {}, 5);
  REQUIRE_FALSE(r.results.empty());
  for (const auto& res : r.results) CHECK(res.segment_id != seed);
  const auto hog_only = engine.more_like_this(seed, {{"hog", 1.0}}, 5);
  for (const auto& res : hog_only.results) CHECK(res.per_category.count("hog") == 1);
  CHECK(code_of([&] { engine.more_like_this("ffff:0", {}, 5); }) == ErrorCode::UnknownSegment);
  const std::string track_seg = content_id(read_file(corpus().tracks[0])) + ":0";
  const auto fp = engine.more_like_this(track_seg, {{"fingerprint", 1.0}}, 5);
  for (const auto& res : fp.results) CHECK(res.segment_id != track_seg);
}

TEST_CASE("refine re-weights cached scores and is idempotent") {
  Engine& engine = shared_engine();
  const auto first = engine.execute_query(single(image_term(corpus().images[3]), 20));
  std::map<std::string, double> only_color;
  for (const auto& c : default_categories(TermType::Image, load_image(corpus().images[3]), std::nullopt))
    only_color[c] = c == "color-grid" ? 1.0 : 0.0;
  const auto a = engine.refine(first.session_id, only_color);
  const auto b = engine.refine(first.session_id, only_color);
  CHECK(a.results == b.results);
  CHECK(a.session_id == first.session_id);
  for (const auto& r : a.results) CHECK(r.score == doctest::Approx(r.per_category.count("color-grid") ? r.per_category.at("color-grid") : 0.0));
  const auto fewer = engine.refine(first.session_id, {}, std::nullopt, 3);
  CHECK(fewer.results.size() == 3);
  CHECK(code_of([&] { engine.refine(first.session_id, {{"mfcc-shingle", 1.0}}); }) == ErrorCode::UnknownCategory);
  CHECK(code_of([&] { engine.refine(first.session_id, {{"hog", -0.1}}); }) == ErrorCode::InvalidQuery);
  CHECK(code_of([&] { engine.refine("no-such-session", {}); }) == ErrorCode::SessionExpired);
}

TEST_CASE("sessions expire after their idle time") {
  auto now = std::chrono::steady_clock::time_point{};
  EngineConfig cfg = config_for("unit-engine-ttl");
  cfg.session_ttl_seconds = 60;
  Engine engine(cfg, [&] { return now; });
  engine.ingest({corpus().images[0], corpus().images[1], corpus().images[2]});
  engine.build_index();
  const auto r = engine.execute_query(single(image_term(corpus().images[0])));
  now += std::chrono::seconds(50);
  CHECK_NOTHROW(engine.refine(r.session_id, {}));
  now += std::chrono::seconds(50);  // 50 s after the last use
  CHECK_NOTHROW(engine.refine(r.session_id, {}));
  now += std::chrono::seconds(61);
  CHECK(code_of([&] { engine.refine(r.session_id, {}); }) == ErrorCode::SessionExpired);
  CHECK(engine.session_count() == 0);
}

TEST_CASE("a reopened data directory answers identically") {
  const EngineConfig cfg = config_for("unit-engine-reopen");
  std::vector<ScoredResult> before;
  IndexReport built;
  {
    Engine engine(cfg);
    engine.ingest(all_files());
    built = engine.build_index();
    before = engine.execute_query(single(image_term(corpus().images[7]), 20)).results;
  }
  Engine reopened(cfg);
  CHECK(reopened.index_fresh());
  CHECK(reopened.execute_query(single(image_term(corpus().images[7]), 20)).results == before);
  CHECK(reopened.d_max("hog") == built.d_max.at("hog"));
  CHECK(reopened.row_count("color-grid") == built.rows.at("color-grid"));
}

TEST_CASE("index report and d_max") {
  Engine& engine = shared_engine();
  for (const auto& c : {"color-grid", "edge-histogram", "hog", "surf-bow", "spherical-harmonics", "mfcc-shingle"}) {
    REQUIRE(engine.d_max(c).has_value());
    CHECK(*engine.d_max(c) > 0);
  }
  CHECK(engine.row_count("color-grid") == 10 + 2);  // images plus two video shots
}

TEST_CASE("previews") {
  Engine& engine = shared_engine();
  const std::string img = content_id(read_file(corpus().images[0])) + ":0";
  const auto p = engine.preview(img);
  CHECK(p.content_type == "image/png");
  const auto thumb = decode_image(p.bytes);
  CHECK(std::max(thumb.width, thumb.height) == 256);
  const auto a = engine.preview(content_id(read_file(corpus().tracks[0])) + ":1");
  CHECK(a.content_type == "audio/wav");
  CHECK(decode_audio(a.bytes).samples.size() == 3 * kAudioSampleRate);
  const auto m = engine.preview(content_id(read_file(corpus().meshes[0])) + ":0");
  CHECK(m.content_type == "image/png");
  CHECK(code_of([&] { engine.preview("nothing:0"); }) == ErrorCode::UnknownSegment);
}

TEST_CASE("uploads are stored under media/ and ingested") {
  Engine engine(config_for("unit-engine-upload"));
  const Bytes bytes = read_file(corpus().images[4]);
  const auto r = engine.ingest_bytes("holiday.png", bytes);
  REQUIRE(r.objects.size() == 1);
  const auto stored = fs::path(engine.object(r.objects[0].object_id).object.path);
  CHECK(stored.parent_path().filename() == "media");
  CHECK(read_file(stored) == bytes);
  CHECK(engine.find_objects("holiday").size() == 1);
  CHECK(code_of([&] { engine.ingest_bytes("x.txt", bytes); }) == ErrorCode::UnsupportedFormat);
}

TEST_CASE("config text round trip and validation") {
  EngineConfig c;
  c.port = 9123;
  c.token = "s3cret";
  c.knn_method = KnnMethod::Lsh;
  c.dmax_percentile = 0.9;
  const auto back = EngineConfig::parse(c.dump());
  CHECK(back.port == 9123);
  CHECK(back.token == "s3cret");
  CHECK(back.knn_method == KnnMethod::Lsh);
  CHECK(back.dmax_percentile == 0.9);
  CHECK(EngineConfig::parse("# comment\nport = 81\n").port == 81);
  CHECK(code_of([] { EngineConfig::parse("bogus = 1\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { EngineConfig::parse("port = banana\n"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("every kNN method gives the same exact answers where it is exact") {
  for (KnnMethod m : {KnnMethod::Exact, KnnMethod::VaFile}) {
    EngineConfig cfg = config_for("unit-engine-knn");
    cfg.knn_method = m;
    Engine engine(cfg);
    engine.ingest(corpus().images);
    engine.build_index();
    const auto r = engine.execute_query(single(image_term(corpus().images[6], {{"color-grid", 1.0}}), 5));
    static std::vector<ScoredResult> first;
    if (m == KnnMethod::Exact) first = r.results;
    else CHECK(r.results == first);
  }
}
