#include <algorithm>

#include <json.hpp>

#include "binio.hpp"
#include "cbmr/error.hpp"
#include "cbmr/store.hpp"

namespace cbmr {

namespace {

// Catalog files reuse the table framing; the metric byte is 0xFF and the
// dimension field carries the entity schema id.
constexpr std::uint8_t kCatalogMarker = 0xFF;
constexpr std::uint32_t kObjectSchema = 1;
constexpr std::uint32_t kSegmentSchema = 2;

using nlohmann::json;

void write_entities(const std::filesystem::path& path, std::uint32_t schema,
                    const std::vector<std::pair<std::string, std::string>>& rows) {
  binio::Writer w;
  w.bytes("VTRS");
  w.put<std::uint16_t>(kTableFormatVersion);
  w.put<std::uint8_t>(kCatalogMarker);
  w.put<std::uint32_t>(schema);
  w.put<std::uint64_t>(rows.size());
  for (const auto& [id, payload] : rows) {
    w.short_string(id);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(payload.size()));
    w.bytes(payload);
  }
  w.commit(path);
}

std::vector<std::pair<std::string, json>> read_entities(const std::filesystem::path& path, std::uint32_t schema) {
  binio::Reader r(path);
  r.expect_magic("VTRS");
  if (r.get<std::uint16_t>() != kTableFormatVersion) throw Error(ErrorCode::CorruptFile, r.name() + ": version");
  if (r.get<std::uint8_t>() != kCatalogMarker || r.get<std::uint32_t>() != schema)
    throw Error(ErrorCode::CorruptFile, r.name() + ": not the expected catalog file");
  const auto count = r.get<std::uint64_t>();
  std::vector<std::pair<std::string, json>> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = r.short_string();
    const std::string payload = r.bytes(r.get<std::uint32_t>());
    try {
      out.emplace_back(std::move(id), json::parse(payload));
    } catch (const json::exception&) {
      throw Error(ErrorCode::CorruptFile, r.name() + ": malformed entity payload");
    }
  }
  return out;
}

}  // namespace

void Catalog::add_object(const MediaObject& object) {
  if (!objects_.emplace(object.object_id, object).second)
    throw Error(ErrorCode::DuplicateId, "object '" + object.object_id + "' already in catalog");
}

void Catalog::add_segment(const SegmentRecord& segment) {
  if (!objects_.count(segment.object_id))
    throw Error(ErrorCode::UnknownId, "segment references unknown object '" + segment.object_id + "'");
  if (!segments_.emplace(segment.segment_id, segment).second)
    throw Error(ErrorCode::DuplicateId, "segment '" + segment.segment_id + "' already in catalog");
}

const MediaObject& Catalog::object(const std::string& id) const {
  const auto it = objects_.find(id);
  if (it == objects_.end()) throw Error(ErrorCode::UnknownId, "no object '" + id + "'");
  return it->second;
}

const SegmentRecord& Catalog::segment(const std::string& id) const {
  const auto it = segments_.find(id);
  if (it == segments_.end()) throw Error(ErrorCode::UnknownSegment, "no segment '" + id + "'");
  return it->second;
}

std::vector<std::string> Catalog::segments_of(const std::string& object_id) const {
  std::vector<const SegmentRecord*> found;
  for (const auto& [id, seg] : segments_)
    if (seg.object_id == object_id) found.push_back(&seg);
  std::sort(found.begin(), found.end(), [](const SegmentRecord* a, const SegmentRecord* b) {
    return a->sequence_number != b->sequence_number ? a->sequence_number < b->sequence_number
                                                    : a->segment_id < b->segment_id;
  });
  std::vector<std::string> out;
  for (const auto* s : found) out.push_back(s->segment_id);
  return out;
}

std::vector<MediaObject> Catalog::find_by_name(const std::string& needle) const {
  std::vector<MediaObject> out;
  for (const auto& [id, obj] : objects_)
    if (obj.name.find(needle) != std::string::npos) out.push_back(obj);
  return out;
}

void Catalog::save(const std::filesystem::path& dir) const {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& [id, o] : objects_)
    rows.emplace_back(id, json{{"media_type", to_string(o.media_type)},
                               {"path", o.path},
                               {"name", o.name},
                               {"size", o.size_bytes}}
                              .dump());
  write_entities(dir / "objects.cat", kObjectSchema, rows);
  rows.clear();
  for (const auto& [id, s] : segments_)
    rows.emplace_back(id, json{{"object_id", s.object_id},
                               {"seq", s.sequence_number},
                               {"start", s.start},
                               {"end", s.end},
                               {"unit", to_string(s.unit)}}
                              .dump());
  write_entities(dir / "segments.cat", kSegmentSchema, rows);
}

Catalog Catalog::load(const std::filesystem::path& dir) {
  Catalog cat;
  if (!std::filesystem::exists(dir / "objects.cat")) return cat;
  try {
    for (auto& [id, j] : read_entities(dir / "objects.cat", kObjectSchema))
      cat.add_object({id, media_type_from_string(j.at("media_type").get<std::string>()), j.at("path").get<std::string>(),
                      j.at("name").get<std::string>(), j.at("size").get<std::uint64_t>()});
    if (std::filesystem::exists(dir / "segments.cat"))
      for (auto& [id, j] : read_entities(dir / "segments.cat", kSegmentSchema))
        cat.add_segment({id, j.at("object_id").get<std::string>(), j.at("seq").get<int>(), j.at("start").get<std::int64_t>(),
                         j.at("end").get<std::int64_t>(), segment_unit_from_string(j.at("unit").get<std::string>())});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("catalog entry: ") + e.what());
  }
  return cat;
}

}  // namespace cbmr
