#include <algorithm>

#include "binio.hpp"
#include "cbmr/error.hpp"
#include "cbmr/store.hpp"

namespace cbmr {

VectorTable::VectorTable(std::string category, std::size_t dim, Metric metric)
    : category_(std::move(category)), dim_(dim), metric_(metric) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "table dimension must be positive");
}

void VectorTable::insert(std::string row_id, std::span<const float> vector) {
  if (vector.size() != dim_)
    throw Error(ErrorCode::DimensionMismatch, category_ + ": expected " + std::to_string(dim_) + " components, got " +
                                                  std::to_string(vector.size()));
  if (index_.count(row_id)) throw Error(ErrorCode::DuplicateId, category_ + ": row '" + row_id + "' exists");
  if (metric_ == Metric::ChiSquared)
    for (float v : vector)
      if (v < 0.0f) throw Error(ErrorCode::NegativeComponent, category_ + ": negative histogram bin");
  index_.emplace(row_id, ids_.size());
  ids_.push_back(std::move(row_id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

void VectorTable::insert(std::string row_id, std::span<const double> vector) {
  std::vector<float> v(vector.begin(), vector.end());
  insert(std::move(row_id), std::span<const float>(v));
}

std::optional<std::size_t> VectorTable::find(const std::string& row_id) const {
  const auto it = index_.find(row_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> VectorTable::get(const std::string& row_id) const {
  const auto i = find(row_id);
  if (!i) throw Error(ErrorCode::UnknownId, category_ + ": no row '" + row_id + "'");
  return row(*i);
}

void VectorTable::save(const std::filesystem::path& path) const {
  binio::Writer w;
  w.bytes("VTRS");
  w.put<std::uint16_t>(kTableFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(metric_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    w.short_string(ids_[i]);
    w.raw(data_.data() + i * dim_, dim_ * sizeof(float));
  }
  w.commit(path);
}

VectorTable VectorTable::open(const std::filesystem::path& path, std::string category) {
  binio::Reader r(path);
  r.expect_magic("VTRS");
  const auto version = r.get<std::uint16_t>();
  if (version != kTableFormatVersion) throw Error(ErrorCode::CorruptFile, r.name() + ": unsupported version");
  const auto metric = r.get<std::uint8_t>();
  if (metric > static_cast<std::uint8_t>(Metric::ChiSquared))
    throw Error(ErrorCode::CorruptFile, r.name() + ": not a vector table");
  const auto dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  VectorTable table(std::move(category), dim, static_cast<Metric>(metric));
  table.ids_.reserve(count);
  table.data_.resize(count * dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = r.short_string();
    r.raw(table.data_.data() + i * dim, dim * sizeof(float));
    if (!table.index_.emplace(id, table.ids_.size()).second)
      throw Error(ErrorCode::CorruptFile, r.name() + ": duplicate row id");
    table.ids_.push_back(std::move(id));
  }
  if (!r.done()) throw Error(ErrorCode::CorruptFile, r.name() + ": trailing bytes");
  return table;
}

void finalize_knn(KnnResult& hits, std::size_t k) {
  auto less = [](const KnnHit& a, const KnnHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.row_id < b.row_id;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), less);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), less);
  }
}

KnnResult knn_exact(const VectorTable& table, std::span<const float> query, std::size_t k, kernels::Exec exec) {
  if (query.size() != table.dim())
    throw Error(ErrorCode::DimensionMismatch, table.category() + ": query has " + std::to_string(query.size()) +
                                                  " components, table has " + std::to_string(table.dim()));
  if (k == 0) throw Error(ErrorCode::InvalidQuery, "k must be at least 1");
  if (table.metric() == Metric::ChiSquared)
    for (float v : query)
      if (v < 0.0f) throw Error(ErrorCode::NegativeComponent, table.category() + ": negative query component");
  std::vector<double> dist(table.size());
  kernels::scan_distances(table.metric(), table.data(), table.dim(), query, dist, exec);
  KnnResult hits;
  hits.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) hits.push_back({table.row_id(i), dist[i]});
  finalize_knn(hits, k);
  return hits;
}

}  // namespace cbmr
