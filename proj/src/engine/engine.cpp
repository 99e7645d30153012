#include "cbmr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "cbmr/descriptor.hpp"
#include "cbmr/error.hpp"
#include "cbmr/segmentation.hpp"
#include "cbmr/shape_features.hpp"
#include "extract.hpp"

namespace cbmr {

namespace fs = std::filesystem;
using nlohmann::json;
using engine::Extracted;
using engine::Rows;

namespace {

constexpr std::string_view kSketchKey = "lightfield:sketch";

struct Session {
  std::vector<ComponentScores> scores;
  std::size_t k = 0;
  std::optional<std::set<MediaType>> media_filter;
  std::chrono::steady_clock::time_point last_used;
};

struct StagedObject {
  MediaObject object;
  std::vector<SegmentRecord> segments;
  std::map<std::string, std::vector<std::pair<std::string, std::vector<float>>>> rows;
  std::vector<FingerprintHash> hashes;
};

struct SegmentGroup {
  std::string segment;
  std::size_t begin;
  std::size_t end;
};

// Rows of one segment are inserted together, so each segment is a run.
std::vector<SegmentGroup> segment_groups(const VectorTable& table) {
  std::vector<SegmentGroup> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::string seg = segment_of_row(table.row_id(i));
    if (!out.empty() && out.back().segment == seg)
      out.back().end = i + 1;
    else
      out.push_back({std::move(seg), i, i + 1});
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> rows_of_segment(const VectorTable& table, const std::string& seg) {
  std::optional<std::size_t> start = table.find(seg);
  if (!start) start = table.find(seg + "@0");
  if (!start) start = table.find(seg + "@v0");
  if (!start) return std::nullopt;
  std::size_t end = *start + 1;
  while (end < table.size() && segment_of_row(table.row_id(end)) == seg) ++end;
  return std::make_pair(*start, end);
}

LightFieldDescriptor lightfield_from_rows(const VectorTable& table, std::size_t begin, std::size_t end) {
  if (end - begin != kLightFieldViews) throw Error(ErrorCode::CorruptFile, "light-field segment without 10 views");
  LightFieldDescriptor lf;
  for (std::size_t v = 0; v < kLightFieldViews; ++v) {
    const auto row = table.row(begin + v);
    lf.views[v].assign(row.begin(), row.end());
  }
  return lf;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 1.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  const double v = values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
  return v > 0.0 ? v : 1.0;
}

std::uint64_t category_seed(std::uint64_t seed, std::string_view category) {
  std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (unsigned char c : category) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

ScoreMap to_similarity(const std::vector<std::pair<std::string, double>>& distances, double d_max) {
  ScoreMap out;
  for (const auto& [seg, d] : distances) out[seg] = correspondence(d, d_max);
  return out;
}

std::vector<std::pair<std::string, double>> top_scores(const ScoreMap& scores, std::size_t k) {
  std::vector<std::pair<std::string, double>> out(scores.begin(), scores.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > k) out.resize(k);
  return out;
}

void check_weight(double w, const std::string& what) {
  if (!std::isfinite(w) || w < 0.0 || w > 1.0)
    throw Error(ErrorCode::InvalidQuery, what + " weight must be in [0, 1]");
}

}  // namespace

struct Engine::Impl {
  const EngineConfig& config;
  Catalog catalog;
  std::map<std::string, VectorTable> tables;
  std::map<std::string, VAFileIndex> va;
  std::map<std::string, LSHIndex> lsh;
  std::optional<Codebook> codebook;
  FingerprintIndex fingerprints;

  bool built = false;
  std::map<std::string, std::size_t> built_rows;
  std::size_t built_postings = 0;
  std::map<std::string, double> dmax;

  mutable std::mutex session_mu;
  std::map<std::string, Session> sessions;
  std::uint64_t session_counter = 0;
  std::string session_prefix;

  explicit Impl(const EngineConfig& c) : config(c) {
    std::random_device rd;
    static constexpr char kHex[] = "0123456789abcdef";
    for (int i = 0; i < 8; ++i) session_prefix.push_back(kHex[rd() & 0xF]);
  }

  fs::path dir() const { return config.data_dir; }
  fs::path table_path(const std::string& cat, std::string_view ext = ".vtrs") const {
    return dir() / "tables" / (cat + std::string(ext));
  }

  // --- persistence -----------------------------------------------------------

  void load() {
    if (!fs::exists(dir())) return;
    catalog = Catalog::load(dir());
    for (const auto& c : category_registry())
      if (fs::exists(table_path(c.name))) tables.emplace(c.name, VectorTable::open(table_path(c.name), c.name));
    if (fs::exists(table_path(std::string(category::kSurfBow), ".codebook"))) {
      const auto cb = VectorTable::open(table_path(std::string(category::kSurfBow), ".codebook"), "codebook");
      Codebook book{std::string(category::kSurfBow), {}};
      for (std::size_t i = 0; i < cb.size(); ++i) book.centroids.emplace_back(cb.row(i).begin(), cb.row(i).end());
      codebook = std::move(book);
    }
    if (fs::exists(dir() / "fingerprint.fp")) fingerprints = FingerprintIndex::load(dir() / "fingerprint.fp");
    if (fs::exists(dir() / "index.json")) {
      const Bytes bytes = read_file(dir() / "index.json");
      try {
        const json j = json::parse(bytes.begin(), bytes.end());
        built = j.at("built").get<bool>();
        built_rows = j.at("rows").get<std::map<std::string, std::size_t>>();
        built_postings = j.at("postings").get<std::size_t>();
        dmax = j.at("d_max").get<std::map<std::string, double>>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptFile, std::string("index.json: ") + e.what());
      }
    }
    for (const auto& [name, table] : tables) {
      if (fs::exists(table_path(name, ".va"))) {
        auto idx = VAFileIndex::load(table_path(name, ".va"));
        if (!idx.stale_for(table)) va.emplace(name, std::move(idx));
      }
      if (fs::exists(table_path(name, ".lsh"))) {
        auto idx = LSHIndex::load(table_path(name, ".lsh"), table);
        if (!idx.stale_for(table)) lsh.emplace(name, std::move(idx));
      }
    }
  }

  void save_data() const {
    fs::create_directories(dir() / "tables");
    catalog.save(dir());
    for (const auto& [name, table] : tables) table.save(table_path(name));
    fingerprints.save(dir() / "fingerprint.fp");
  }

  void save_index_state() const {
    json j;
    j["built"] = built;
    j["rows"] = built_rows;
    j["postings"] = built_postings;
    j["d_max"] = dmax;
    j["codebook_k"] = codebook ? codebook->k() : 0;
    j["codebook_seed"] = config.codebook_seed;
    j["dmax_seed"] = config.dmax_seed;
    j["dmax_pairs"] = config.dmax_pairs;
    j["knn_method"] = std::string(to_string(config.knn_method));
    j["va_bits"] = config.va_bits;
    j["lsh_seed"] = config.lsh_seed;
    const std::string text = j.dump(2);
    write_file(dir() / "index.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

  bool fresh() const {
    if (!built) return false;
    if (fingerprints.posting_count() != built_postings) return false;
    for (const auto& [name, table] : tables) {
      const auto it = built_rows.find(name);
      if (it == built_rows.end() || it->second != table.size()) return false;
    }
    for (const auto& [name, rows] : built_rows)
      if (!tables.count(name) && rows != 0) return false;
    return true;
  }

  void require_fresh() const {
    if (!fresh()) throw Error(ErrorCode::IndexStale, "the index must be rebuilt after ingest ('index build')");
  }

  VectorTable& table_for(const std::string& category) {
    auto it = tables.find(category);
    if (it == tables.end()) {
      const auto& info = category_info(category);
      it = tables.emplace(category, VectorTable(category, info.dim, info.metric)).first;
    }
    return it->second;
  }

  // --- ingest ------------------------------------------------------------------

  static void stage_rows(StagedObject& staged, const std::string& segment_id, Extracted&& ex) {
    for (auto& [category, rows] : ex.rows) {
      auto& out = staged.rows[category];
      for (std::size_t n = 0; n < rows.size(); ++n)
        out.emplace_back(engine::row_id(category, segment_id, n), std::move(rows[n]));
    }
    for (auto& h : ex.hashes) {
      h.segment_id = segment_id;
      staged.hashes.push_back(std::move(h));
    }
  }

  static const engine::Wanted& image_categories() {
    static const engine::Wanted w = {std::string(category::kColorGrid), std::string(category::kEdgeHistogram),
                                     std::string(category::kHog), std::string(category::kSurfLocal)};
    return w;
  }
  static const engine::Wanted& audio_categories() {
    static const engine::Wanted w = {std::string(category::kHpcpShingle), std::string(category::kCensShingle),
                                     std::string(category::kMfccShingle), std::string(category::kFingerprint)};
    return w;
  }
  static const engine::Wanted& mesh_categories() {
    static const engine::Wanted w = {std::string(category::kSphericalHarmonics), std::string(category::kLightField)};
    return w;
  }

  void stage_audio(StagedObject& staged, const AudioBuffer& audio, std::string_view tag) {
    for (auto& seg : segment_audio_windows(audio, staged.object.object_id, tag)) {
      const auto begin = static_cast<std::size_t>(seg.start);
      const auto end = std::min(static_cast<std::size_t>(seg.end), audio.samples.size());
      const std::span<const float> samples(audio.samples.data() + begin, end - begin);
      stage_rows(staged, seg.segment_id, engine::extract_audio(samples, audio_categories()));
      staged.segments.push_back(std::move(seg));
    }
  }

  // Returns nullopt when the object is already cataloged.
  std::optional<StagedObject> stage(const fs::path& path, MediaType type, const std::string& name) {
    StagedObject staged;
    staged.object.media_type = type;
    staged.object.path = fs::absolute(path).lexically_normal().string();
    staged.object.name = name.empty() ? path.filename().string() : name;
    const Bytes bytes = read_file(path);
    staged.object.size_bytes = bytes.size();

    if (type == MediaType::Video) {
      const VideoDocument video = load_video_manifest(path);
      // The id covers the manifest, every frame and the soundtrack.
      Bytes all = bytes;
      for (std::size_t i = 0; i < video.frame_count(); ++i) {
        const Bytes frame = read_file(video.frame_path(i));
        all.insert(all.end(), frame.begin(), frame.end());
      }
      if (video.audio()) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(video.audio()->samples.data());
        all.insert(all.end(), p, p + video.audio()->samples.size() * sizeof(float));
      }
      staged.object.object_id = content_id(all);
      if (catalog.has_object(staged.object.object_id)) return std::nullopt;
      for (auto& shot : segment_video_shots(video, staged.object.object_id)) {
        const auto key = static_cast<std::size_t>(shot.start + (shot.end - shot.start) / 2);
        stage_rows(staged, shot.segment_id, engine::extract_image(video.frame(key), image_categories(), nullptr));
        staged.segments.push_back(std::move(shot));
      }
      if (video.audio()) stage_audio(staged, *video.audio(), "a");
      return staged;
    }

    staged.object.object_id = content_id(bytes);
    if (catalog.has_object(staged.object.object_id)) return std::nullopt;
    switch (type) {
      case MediaType::Image: {
        const RasterImage image = decode_image(bytes);
        auto seg = trivial_segment(staged.object);
        stage_rows(staged, seg.segment_id, engine::extract_image(image, image_categories(), nullptr));
        staged.segments.push_back(std::move(seg));
        break;
      }
      case MediaType::Audio: {
        const AudioBuffer audio = decode_audio(bytes);
        if (audio.samples.empty()) throw Error(ErrorCode::InsufficientData, "audio file has no samples");
        stage_audio(staged, audio, "");
        break;
      }
      case MediaType::Model3D: {
        const TriangleMesh mesh = decode_mesh(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        auto seg = trivial_segment(staged.object);
        stage_rows(staged, seg.segment_id, engine::extract_mesh(mesh, mesh_categories()));
        staged.segments.push_back(std::move(seg));
        break;
      }
      case MediaType::Video: break;
    }
    return staged;
  }

  IngestedObject commit(StagedObject&& staged) {
    IngestedObject report{staged.object.path, staged.object.object_id, staged.object.media_type,
                          staged.segments.size(), 0, staged.hashes.size(), false};
    catalog.add_object(staged.object);
    for (const auto& seg : staged.segments) catalog.add_segment(seg);
    for (auto& [category, rows] : staged.rows) {
      if (rows.empty()) continue;
      VectorTable& table = table_for(category);
      for (auto& [id, v] : rows) {
        table.insert(id, std::span<const float>(v));
        ++report.vectors;
      }
    }
    fingerprints.add(staged.hashes);
    return report;
  }

  // `name` overrides the cataloged file name (uploads keep the client's name).
  IngestReport ingest(const std::vector<fs::path>& paths, const std::string& name = {}) {
    IngestReport report;
    for (const auto& path : paths) {
      try {
        const auto type = media_type_for_path(path);
        if (!type) throw Error(ErrorCode::UnsupportedFormat, "unrecognized file extension");
        auto staged = stage(path, *type, name);
        if (!staged) {
          const Bytes bytes = read_file(path);
          IngestedObject dup;
          dup.path = path.string();
          dup.media_type = *type;
          dup.duplicate = true;
          // Videos hash more than the manifest; look the id up by path instead.
          for (const auto& [id, obj] : catalog.objects())
            if (obj.path == fs::absolute(path).lexically_normal().string()) dup.object_id = id;
          if (dup.object_id.empty()) dup.object_id = content_id(bytes);
          dup.segments = catalog.segments_of(dup.object_id).size();
          report.objects.push_back(std::move(dup));
          continue;
        }
        report.objects.push_back(commit(std::move(*staged)));
      } catch (const std::exception& e) {
        report.failures.push_back({path.string(), e.what()});
      }
    }
    save_data();
    return report;
  }

  // --- index build ------------------------------------------------------------

  void build_codebook(IndexReport& report) {
    codebook.reset();
    tables.erase(std::string(category::kSurfBow));
    fs::remove(table_path(std::string(category::kSurfBow)));
    fs::remove(table_path(std::string(category::kSurfBow), ".codebook"));
    const auto local_it = tables.find(std::string(category::kSurfLocal));
    if (local_it == tables.end() || local_it->second.size() < 2) return;
    const VectorTable& local = local_it->second;

    std::vector<LocalDescriptor> descriptors;
    descriptors.reserve(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) descriptors.emplace_back(local.row(i).begin(), local.row(i).end());
    const std::size_t k = std::min(config.codebook_k, descriptors.size());
    codebook = train_codebook(descriptors, k, config.codebook_seed);
    report.codebook_k = k;

    VectorTable book("codebook", local.dim(), Metric::L2);
    for (std::size_t c = 0; c < codebook->k(); ++c)
      book.insert("c" + std::to_string(c), std::span<const double>(codebook->centroids[c]));
    book.save(table_path(std::string(category::kSurfBow), ".codebook"));

    std::map<std::string, std::pair<std::size_t, std::size_t>> local_rows;
    for (const auto& g : segment_groups(local)) local_rows[g.segment] = {g.begin, g.end};
    VectorTable bow(std::string(category::kSurfBow), k, Metric::ChiSquared);
    const auto grid = tables.find(std::string(category::kColorGrid));
    if (grid != tables.end()) {
      for (std::size_t i = 0; i < grid->second.size(); ++i) {
        const std::string& seg = grid->second.row_id(i);
        std::vector<LocalDescriptor> mine;
        if (const auto it = local_rows.find(seg); it != local_rows.end())
          for (std::size_t r = it->second.first; r < it->second.second; ++r)
            mine.emplace_back(local.row(r).begin(), local.row(r).end());
        bow.insert(seg, std::span<const double>(bow_histogram(mine, *codebook).values));
      }
    }
    tables.emplace(std::string(category::kSurfBow), std::move(bow));
  }

  double sample_dmax(const VectorTable& table, bool sketch) const {
    const auto groups = segment_groups(table);
    if (groups.size() < 2) return 1.0;
    std::mt19937_64 rng(category_seed(config.dmax_seed, sketch ? kSketchKey : std::string_view(table.category())));
    std::uniform_int_distribution<std::size_t> pick_i(0, groups.size() - 1), pick_j(0, groups.size() - 2);
    const bool lightfield = table.category() == category::kLightField;
    std::vector<double> distances;
    distances.reserve(config.dmax_pairs);
    for (std::size_t p = 0; p < config.dmax_pairs; ++p) {
      const std::size_t i = pick_i(rng);
      std::size_t j = pick_j(rng);
      if (j >= i) ++j;
      const auto& a = groups[i];
      const auto& b = groups[j];
      double d = std::numeric_limits<double>::infinity();
      if (lightfield && !sketch) {
        d = lightfield_distance(lightfield_from_rows(table, a.begin, a.end), lightfield_from_rows(table, b.begin, b.end));
      } else if (sketch) {
        std::uniform_int_distribution<std::size_t> view(a.begin, a.end - 1);
        const std::size_t v = view(rng);
        for (std::size_t r = b.begin; r < b.end; ++r)
          d = std::min(d, detail::unchecked(table.metric(), table.row(v).data(), table.row(r).data(), table.dim()));
      } else {
        for (std::size_t ra = a.begin; ra < a.end; ++ra)
          for (std::size_t rb = b.begin; rb < b.end; ++rb)
            d = std::min(d, detail::unchecked(table.metric(), table.row(ra).data(), table.row(rb).data(), table.dim()));
      }
      distances.push_back(d);
    }
    return percentile(std::move(distances), config.dmax_percentile);
  }

  IndexReport build_index() {
    const auto t0 = std::chrono::steady_clock::now();
    IndexReport report;
    build_codebook(report);

    va.clear();
    lsh.clear();
    for (const auto& [name, table] : tables) {
      fs::remove(table_path(name, ".va"));
      fs::remove(table_path(name, ".lsh"));
      if (!category_info(name).queryable || table.size() == 0) continue;
      const bool l1l2 = table.metric() == Metric::L1 || table.metric() == Metric::L2;
      if (config.knn_method == KnnMethod::VaFile && l1l2) {
        auto idx = VAFileIndex::build(table, config.va_bits);
        idx.save(table_path(name, ".va"));
        va.emplace(name, std::move(idx));
      } else if (config.knn_method == KnnMethod::Lsh && table.metric() == Metric::L2) {
        auto idx = LSHIndex::build(table, {config.lsh_tables, config.lsh_projections, config.lsh_width, config.lsh_seed});
        idx.save(table_path(name, ".lsh"));
        lsh.emplace(name, std::move(idx));
      }
    }

    dmax.clear();
    for (const auto& [name, table] : tables) {
      if (!category_info(name).queryable) continue;
      dmax[name] = sample_dmax(table, false);
      if (name == category::kLightField) dmax[std::string(kSketchKey)] = sample_dmax(table, true);
    }

    built = true;
    built_rows.clear();
    for (const auto& [name, table] : tables) built_rows[name] = table.size();
    built_postings = fingerprints.posting_count();
    save_data();
    save_index_state();

    report.rows = built_rows;
    report.d_max = dmax;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

  // --- search -----------------------------------------------------------------

  double dmax_for(std::string_view key) const {
    const auto it = dmax.find(std::string(key));
    return it == dmax.end() ? 1.0 : it->second;
  }

  // Segment -> min distance over the query vectors and each segment's rows;
  // the best `depth` segments, or every segment for a full scan.
  std::vector<std::pair<std::string, double>> nearest_segments(const VectorTable& table, const Rows& queries,
                                                               std::size_t depth, const std::string& exclude) const {
    std::map<std::string, double> best;
    const auto va_it = config.knn_method == KnnMethod::VaFile ? va.find(table.category()) : va.end();
    const auto lsh_it = config.knn_method == KnnMethod::Lsh ? lsh.find(table.category()) : lsh.end();
    const bool indexed = va_it != va.end() || lsh_it != lsh.end();
    const std::size_t n = table.size();
    if (n == 0) return {};

    for (const auto& q : queries) {
      if (!indexed) {
        std::vector<double> dist(n);
        kernels::scan_distances(table.metric(), table.data(), table.dim(), q, dist, kernels::Exec::Parallel);
        for (std::size_t i = 0; i < n; ++i) {
          std::string seg = segment_of_row(table.row_id(i));
          if (seg == exclude) continue;
          const auto [it, inserted] = best.emplace(std::move(seg), dist[i]);
          if (!inserted) it->second = std::min(it->second, dist[i]);
        }
        continue;
      }
      // Rows arrive in ascending distance, so a segment's first row is its minimum.
      std::size_t krows = std::max<std::size_t>(depth, 1);
      for (;;) {
        krows = std::min(krows, n);
        const KnnResult hits =
            va_it != va.end() ? knn_va(table, va_it->second, q, krows) : knn_lsh(table, lsh_it->second, q, krows);
        std::set<std::string> seen;
        for (const auto& h : hits) {
          std::string seg = segment_of_row(h.row_id);
          if (seg == exclude) continue;
          seen.insert(seg);
          const auto [it, inserted] = best.emplace(std::move(seg), h.distance);
          if (!inserted) it->second = std::min(it->second, h.distance);
        }
        if (seen.size() >= depth || hits.size() < krows || krows >= n) break;
        krows *= 4;
      }
    }
    std::vector<std::pair<std::string, double>> out(best.begin(), best.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    if (out.size() > depth) out.resize(depth);
    return out;
  }

  std::vector<std::pair<std::string, double>> nearest_models(const LightFieldDescriptor& query, std::size_t depth,
                                                             const std::string& exclude) const {
    const auto it = tables.find(std::string(category::kLightField));
    if (it == tables.end()) return {};
    std::vector<std::pair<std::string, double>> out;
    for (const auto& g : segment_groups(it->second)) {
      if (g.segment == exclude) continue;
      out.emplace_back(g.segment, lightfield_distance(query, lightfield_from_rows(it->second, g.begin, g.end)));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    if (out.size() > depth) out.resize(depth);
    return out;
  }

  ScoreMap fingerprint_scores(const Extracted& ex, const std::string& exclude) const {
    ScoreMap out;
    const auto score = [&](const std::vector<FingerprintHash>& hashes) {
      if (hashes.empty()) return;
      for (const auto& m : fingerprints.lookup(hashes)) {
        if (m.segment_id == exclude) continue;
        const double s = std::min(1.0, static_cast<double>(m.votes) / static_cast<double>(hashes.size()));
        auto [it, fresh] = out.emplace(m.segment_id, s);
        if (!fresh) it->second = std::max(it->second, s);
      }
    };
    score(ex.hashes);
    for (const auto& phase : ex.phase_hashes) score(phase);  // best phase wins
    return out;
  }

  // Similarities for one category from extracted query material.
  ScoreMap category_scores(const std::string& category, const Extracted& ex, bool sketch, std::size_t depth,
                           const std::string& exclude) const {
    if (category == category::kFingerprint) return fingerprint_scores(ex, exclude);
    const auto rows_it = ex.rows.find(category);
    const auto table_it = tables.find(category);
    if (rows_it == ex.rows.end() || rows_it->second.empty() || table_it == tables.end()) return {};
    if (category == category::kLightField && !sketch) {
      LightFieldDescriptor lf;
      for (std::size_t v = 0; v < kLightFieldViews; ++v)
        lf.views[v].assign(rows_it->second[v].begin(), rows_it->second[v].end());
      return to_similarity(nearest_models(lf, depth, exclude), dmax_for(category));
    }
    if (table_it->second.dim() != rows_it->second.front().size())
      throw Error(ErrorCode::DimensionMismatch, category + ": query vector dimension differs from the table");
    return to_similarity(nearest_segments(table_it->second, rows_it->second, depth, exclude),
                         dmax_for(sketch ? kSketchKey : std::string_view(category)));
  }

  std::vector<std::pair<std::string, double>> resolve_categories(const QueryTerm& term) const {
    std::vector<std::pair<std::string, double>> out;
    const auto applicable = default_categories(term.type, term.reference, term.audio_category);
    if (term.categories.empty()) {
      for (const auto& c : applicable)
        if (c == category::kFingerprint ? fingerprints.posting_count() > 0 : tables.count(c) != 0)
          out.emplace_back(c, 1.0);
      if (out.empty())
        for (const auto& c : applicable) out.emplace_back(c, 1.0);
      return out;
    }
    const auto all_for_type = [&] {
      if (term.type == TermType::Audio) {
        return std::vector<std::string>{std::string(category::kHpcpShingle), std::string(category::kCensShingle),
                                        std::string(category::kMfccShingle), std::string(category::kFingerprint)};
      }
      return applicable;
    }();
    for (const auto& [name, w] : term.categories) {
      const auto& info = category_info(name);
      if (!info.queryable || std::find(all_for_type.begin(), all_for_type.end(), name) == all_for_type.end())
        throw Error(ErrorCode::UnknownCategory,
                    "category '" + name + "' does not apply to " + std::string(to_string(term.type)) + " terms");
      check_weight(w, "category '" + name + "'");
      out.emplace_back(name, w);
    }
    return out;
  }

  static void validate_term(const QueryTerm& term) {
    if (term.type == TermType::Motion) throw Error(ErrorCode::UnsupportedTerm, "motion terms are not supported");
    const bool ok = (term.type == TermType::Image && std::holds_alternative<RasterImage>(term.reference)) ||
                    (term.type == TermType::Audio && std::holds_alternative<AudioBuffer>(term.reference)) ||
                    (term.type == TermType::Model3D && (std::holds_alternative<TriangleMesh>(term.reference) ||
                                                        std::holds_alternative<RasterImage>(term.reference)));
    if (!ok) throw Error(ErrorCode::InvalidQuery, std::string(to_string(term.type)) + " term has no matching reference");
    if (!std::isfinite(term.weight) || term.weight < 0.0) throw Error(ErrorCode::InvalidQuery, "term weight must be >= 0");
    bool active = term.categories.empty();
    for (const auto& [name, w] : term.categories) active = active || w > 0.0;
    if (!active) throw Error(ErrorCode::InvalidQuery, "a term needs at least one category with positive weight");
  }

  static void validate_query(const Query& query) {
    if (query.components.empty()) throw Error(ErrorCode::InvalidQuery, "query has no components");
    if (query.k == 0) throw Error(ErrorCode::InvalidQuery, "k must be at least 1");
    for (const auto& component : query.components) {
      if (component.terms.empty()) throw Error(ErrorCode::InvalidQuery, "query component has no terms");
      std::set<TermType> types;
      double total = 0.0;
      for (const auto& term : component.terms) {
        validate_term(term);
        if (!types.insert(term.type).second)
          throw Error(ErrorCode::InvalidQuery, "a component may hold one " + std::string(to_string(term.type)) + " term");
        total += term.weight;
      }
      if (!(total > 0.0)) throw Error(ErrorCode::InvalidQuery, "a component needs a term with positive weight");
    }
  }

  TermScores execute_term(const QueryTerm& term, std::size_t k, std::size_t ci, std::size_t ti,
                          const BatchCallback& on_batch) const {
    validate_term(term);
    const auto categories = resolve_categories(term);
    engine::Wanted wanted;
    for (const auto& [name, w] : categories) wanted.insert(name);

    Extracted ex;
    bool sketch = false;
    try {
      if (term.type == TermType::Image) {
        ex = engine::extract_image(std::get<RasterImage>(term.reference), wanted, codebook ? &*codebook : nullptr);
      } else if (term.type == TermType::Audio) {
        ex = engine::extract_audio(std::get<AudioBuffer>(term.reference).samples, wanted, true);
      } else if (std::holds_alternative<RasterImage>(term.reference)) {
        sketch = true;
        ex = engine::extract_sketch(std::get<RasterImage>(term.reference));
      } else {
        ex = engine::extract_mesh(std::get<TriangleMesh>(term.reference), wanted);
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::ExtractionFailed, e.what());
    }

    const std::size_t depth = config.fetch_factor * k;
    TermScores scores;
    scores.weight = term.weight;
    for (const auto& [name, w] : categories) {
      CategoryScores cs{name, w, category_scores(name, ex, sketch, depth, "")};
      if (on_batch) on_batch({ci, ti, name, top_scores(cs.scores, k)});
      scores.categories.push_back(std::move(cs));
    }
    return scores;
  }

  std::function<bool(const std::string&)> media_filter(const std::optional<std::set<MediaType>>& filter) const {
    if (!filter) return {};
    return [this, filter](const std::string& segment) {
      const auto& objects = catalog.objects();
      const auto it = objects.find(object_of_segment(segment));
      return it != objects.end() && filter->count(it->second.media_type) != 0;
    };
  }

  std::vector<std::string> categories_of_segment(const std::string& seg) const {
    std::vector<std::string> out;
    for (const auto& c : category_registry()) {
      if (!c.queryable) continue;
      if (c.name == category::kFingerprint) {
        if (!fingerprints.hashes_of(seg).empty()) out.push_back(c.name);
        continue;
      }
      const auto it = tables.find(c.name);
      if (it != tables.end() && rows_of_segment(it->second, seg)) out.push_back(c.name);
    }
    return out;
  }

  TermScores more_like_this(const std::string& seg, const std::map<std::string, double>& requested, std::size_t k) const {
    if (!catalog.has_segment(seg)) throw Error(ErrorCode::UnknownSegment, "no segment '" + seg + "'");
    std::vector<std::pair<std::string, double>> categories;
    if (requested.empty()) {
      for (const auto& c : categories_of_segment(seg)) categories.emplace_back(c, 1.0);
      if (categories.empty()) throw Error(ErrorCode::MissingVectors, "segment '" + seg + "' has no stored vectors");
    } else {
      bool active = false;
      for (const auto& [name, w] : requested) {
        const auto& info = category_info(name);
        if (!info.queryable) throw Error(ErrorCode::UnknownCategory, "category '" + name + "' cannot be queried");
        check_weight(w, "category '" + name + "'");
        active = active || w > 0.0;
        categories.emplace_back(name, w);
      }
      if (!active) throw Error(ErrorCode::InvalidQuery, "at least one category needs a positive weight");
    }

    Extracted ex;
    for (const auto& [name, w] : categories) {
      if (name == category::kFingerprint) {
        ex.hashes = fingerprints.hashes_of(seg);
        if (ex.hashes.empty()) throw Error(ErrorCode::MissingVectors, "segment '" + seg + "' has no fingerprint");
        continue;
      }
      const auto table_it = tables.find(name);
      const auto range = table_it == tables.end() ? std::nullopt : rows_of_segment(table_it->second, seg);
      if (!range) throw Error(ErrorCode::MissingVectors, "segment '" + seg + "' has no " + name + " vectors");
      auto& rows = ex.rows[name];
      for (std::size_t r = range->first; r < range->second; ++r)
        rows.emplace_back(table_it->second.row(r).begin(), table_it->second.row(r).end());
    }

    const std::size_t depth = config.fetch_factor * k;
    TermScores scores;
    for (const auto& [name, w] : categories)
      scores.categories.push_back({name, w, category_scores(name, ex, false, depth, seg)});
    return scores;
  }

  // --- sessions -------------------------------------------------------------------

  void purge_sessions(std::chrono::steady_clock::time_point now) {
    const auto ttl = std::chrono::duration<double>(config.session_ttl_seconds);
    for (auto it = sessions.begin(); it != sessions.end();)
      it = now - it->second.last_used > ttl ? sessions.erase(it) : std::next(it);
  }

  std::string store_session(Session session, std::chrono::steady_clock::time_point now) {
    std::lock_guard lock(session_mu);
    purge_sessions(now);
    session.last_used = now;
    std::string id = session_prefix + "-" + std::to_string(++session_counter);
    sessions.emplace(id, std::move(session));
    return id;
  }
};

// ---------------------------------------------------------------------------

Engine::Engine(EngineConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      impl_(std::make_unique<Impl>(config_)) {
  impl_->load();
}

Engine::~Engine() = default;

IngestReport Engine::ingest(const std::vector<fs::path>& paths) {
  std::unique_lock lock(rw_);
  return impl_->ingest(paths);
}

IngestReport Engine::ingest_bytes(const std::string& name, const Bytes& bytes) {
  const fs::path leaf = fs::path(name).filename();
  if (leaf.empty()) throw Error(ErrorCode::InvalidQuery, "upload needs a file name");
  if (!media_type_for_path(leaf)) throw Error(ErrorCode::UnsupportedFormat, "unrecognized file extension");
  if (media_type_for_path(leaf) == MediaType::Video)
    throw Error(ErrorCode::UnsupportedFormat, "video manifests must be ingested from the file system");
  const fs::path target = config_.data_dir / "media" / (content_id(bytes) + leaf.extension().string());
  std::unique_lock lock(rw_);
  if (!fs::exists(target)) write_file(target, bytes);
  IngestReport report = impl_->ingest({target}, leaf.string());
  for (auto& o : report.objects) o.path = name;
  return report;
}

IndexReport Engine::build_index() {
  std::unique_lock lock(rw_);
  return impl_->build_index();
}

bool Engine::index_fresh() const {
  std::shared_lock lock(rw_);
  return impl_->fresh();
}

TermScores Engine::execute_term(const QueryTerm& term, std::size_t k, std::size_t component_index,
                                std::size_t term_index, const BatchCallback& on_batch) const {
  std::shared_lock lock(rw_);
  impl_->require_fresh();
  return impl_->execute_term(term, k, component_index, term_index, on_batch);
}

QueryResponse Engine::execute_query(const Query& query, const BatchCallback& on_batch) {
  Impl::validate_query(query);
  Session session;
  QueryResponse response;
  {
    std::shared_lock lock(rw_);
    impl_->require_fresh();
    for (std::size_t ci = 0; ci < query.components.size(); ++ci) {
      ComponentScores component;
      for (std::size_t ti = 0; ti < query.components[ci].terms.size(); ++ti)
        component.terms.push_back(impl_->execute_term(query.components[ci].terms[ti], query.k, ci, ti, on_batch));
      session.scores.push_back(std::move(component));
    }
    response.results = rank_results(fuse_query(session.scores), query.k, impl_->media_filter(query.media_filter));
  }
  session.k = query.k;
  session.media_filter = query.media_filter;
  response.session_id = impl_->store_session(std::move(session), clock_());
  return response;
}

QueryResponse Engine::more_like_this(const std::string& segment_id, const std::map<std::string, double>& categories,
                                     std::size_t k, const std::optional<std::set<MediaType>>& media_filter) {
  if (k == 0) throw Error(ErrorCode::InvalidQuery, "k must be at least 1");
  Session session;
  QueryResponse response;
  {
    std::shared_lock lock(rw_);
    impl_->require_fresh();
    ComponentScores component;
    component.terms.push_back(impl_->more_like_this(segment_id, categories, k));
    session.scores.push_back(std::move(component));
    response.results = rank_results(fuse_query(session.scores), k, impl_->media_filter(media_filter));
  }
  session.k = k;
  session.media_filter = media_filter;
  response.session_id = impl_->store_session(std::move(session), clock_());
  return response;
}

QueryResponse Engine::refine(const std::string& session_id, const std::map<std::string, double>& weights,
                             const std::optional<std::set<MediaType>>& media_filter, std::optional<std::size_t> k) {
  if (k && *k == 0) throw Error(ErrorCode::InvalidQuery, "k must be at least 1");
  std::vector<ComponentScores> scores;
  std::size_t top_k = 0;
  std::optional<std::set<MediaType>> filter;
  {
    std::lock_guard lock(impl_->session_mu);
    const auto now = clock_();
    impl_->purge_sessions(now);
    const auto it = impl_->sessions.find(session_id);
    if (it == impl_->sessions.end()) throw Error(ErrorCode::SessionExpired, "no session '" + session_id + "'");
    Session& session = it->second;
    std::set<std::string> known;
    for (const auto& c : session.scores)
      for (const auto& t : c.terms)
        for (const auto& cs : t.categories) known.insert(cs.category);
    for (const auto& [name, w] : weights) {
      if (!known.count(name)) throw Error(ErrorCode::UnknownCategory, "category '" + name + "' is not in this query");
      check_weight(w, "category '" + name + "'");
    }
    for (auto& c : session.scores)
      for (auto& t : c.terms)
        for (auto& cs : t.categories)
          if (const auto w = weights.find(cs.category); w != weights.end()) cs.weight = w->second;
    if (media_filter) session.media_filter = media_filter;
    if (k) session.k = *k;
    session.last_used = now;
    scores = session.scores;
    top_k = session.k;
    filter = session.media_filter;
  }
  std::shared_lock lock(rw_);
  return {session_id, rank_results(fuse_query(scores), top_k, impl_->media_filter(filter))};
}

ObjectRecord Engine::object(const std::string& object_id) const {
  std::shared_lock lock(rw_);
  ObjectRecord record{impl_->catalog.object(object_id), {}};
  for (const auto& seg : impl_->catalog.segments_of(object_id)) record.segments.push_back(impl_->catalog.segment(seg));
  return record;
}

SegmentRecord Engine::segment(const std::string& segment_id) const {
  std::shared_lock lock(rw_);
  return impl_->catalog.segment(segment_id);
}

std::vector<MediaObject> Engine::find_objects(const std::string& name_substring) const {
  std::shared_lock lock(rw_);
  return impl_->catalog.find_by_name(name_substring);
}

std::vector<MediaObject> Engine::objects() const {
  std::shared_lock lock(rw_);
  std::vector<MediaObject> out;
  for (const auto& [id, obj] : impl_->catalog.objects()) out.push_back(obj);
  return out;
}

namespace {

constexpr int kThumbnailSide = 256;

Bytes thumbnail(const RasterImage& image) {
  const int side = std::max(image.width, image.height);
  const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(image.width) * kThumbnailSide / side)));
  const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(image.height) * kThumbnailSide / side)));
  return encode_png(resize_bilinear(image, w, h));
}

Bytes audio_excerpt(const AudioBuffer& audio, const SegmentRecord& seg) {
  AudioBuffer out;
  const auto begin = std::min(static_cast<std::size_t>(seg.start), audio.samples.size());
  const auto end = std::min(static_cast<std::size_t>(seg.end), audio.samples.size());
  out.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     audio.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return encode_wav(out);
}

}  // namespace

Preview Engine::preview(const std::string& segment_id) const {
  SegmentRecord seg;
  MediaObject obj;
  {
    std::shared_lock lock(rw_);
    seg = impl_->catalog.segment(segment_id);
    obj = impl_->catalog.object(seg.object_id);
  }
  switch (obj.media_type) {
    case MediaType::Image: return {"image/png", thumbnail(load_image(obj.path))};
    case MediaType::Audio: return {"audio/wav", audio_excerpt(load_audio(obj.path), seg)};
    case MediaType::Video: {
      const VideoDocument video = load_video_manifest(obj.path);
      if (seg.unit == SegmentUnit::Samples) {
        if (!video.audio()) throw Error(ErrorCode::UnknownSegment, "video has no soundtrack");
        return {"audio/wav", audio_excerpt(*video.audio(), seg)};
      }
      return {"image/png", thumbnail(video.frame(static_cast<std::size_t>(seg.start + (seg.end - seg.start) / 2)))};
    }
    case MediaType::Model3D: {
      const auto nm = normalize_mesh(load_mesh(obj.path));
      const auto views = lightfield_projections(nm, kernels::Exec::Serial);
      RasterImage image(kSilhouetteSize, kSilhouetteSize, 255);
      for (int y = 0; y < kSilhouetteSize; ++y)
        for (int x = 0; x < kSilhouetteSize; ++x)
          if (views[0].at(x, y)) std::fill_n(image.at(x, y), 3, std::uint8_t{0});
      return {"image/png", encode_png(image)};
    }
  }
  throw Error(ErrorCode::UnknownSegment, segment_id);
}

std::size_t Engine::row_count(const std::string& category) const {
  std::shared_lock lock(rw_);
  const auto it = impl_->tables.find(category);
  return it == impl_->tables.end() ? 0 : it->second.size();
}

std::optional<double> Engine::d_max(const std::string& category) const {
  std::shared_lock lock(rw_);
  const auto it = impl_->dmax.find(category);
  if (it == impl_->dmax.end()) return std::nullopt;
  return it->second;
}

std::size_t Engine::session_count() const {
  std::lock_guard lock(impl_->session_mu);
  return impl_->sessions.size();
}

}  // namespace cbmr
