#include <algorithm>
#include <cmath>
#include <random>

#include "binio.hpp"
#include "cbmr/error.hpp"
#include "cbmr/store.hpp"

namespace cbmr {

namespace {

constexpr std::uint16_t kLshVersion = 1;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void LSHIndex::init(std::size_t dim, const LshParams& params) {
  if (params.tables < 1 || params.projections < 1 || !(params.bucket_width > 0.0))
    throw Error(ErrorCode::InvalidQuery, "LSH needs positive table count, projection count and bucket width");
  params_ = params;
  dim_ = dim;
  rows_ = 0;
  const std::size_t h = static_cast<std::size_t>(params.tables) * params.projections;
  a_.resize(h * dim);
  b_.resize(h);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> offset(0.0, params.bucket_width);
  for (std::size_t j = 0; j < h; ++j) {
    for (std::size_t d = 0; d < dim; ++d) a_[j * dim + d] = gauss(rng);
    b_[j] = offset(rng);
  }
  buckets_.assign(params.tables, {});
}

std::uint64_t LSHIndex::bucket_key(int t, std::span<const float> v) const {
  std::uint64_t key = static_cast<std::uint64_t>(t);
  for (int p = 0; p < params_.projections; ++p) {
    const std::size_t j = static_cast<std::size_t>(t) * params_.projections + p;
    const double* a = &a_[j * dim_];
    double dot = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dot += a[d] * v[d];
    const auto h = static_cast<std::int64_t>(std::floor((dot + b_[j]) / params_.bucket_width));
    key = mix(key ^ static_cast<std::uint64_t>(h));
  }
  return key;
}

void LSHIndex::add_rows(const VectorTable& table) {
  for (std::size_t r = rows_; r < table.size(); ++r)
    for (int t = 0; t < params_.tables; ++t) buckets_[t][bucket_key(t, table.row(r))].push_back(static_cast<std::uint32_t>(r));
  rows_ = table.size();
}

LSHIndex LSHIndex::build(const VectorTable& table, const LshParams& params) {
  if (table.metric() != Metric::L2) throw Error(ErrorCode::InvalidQuery, "LSH supports L2 tables only");
  LSHIndex idx;
  idx.init(table.dim(), params);
  idx.add_rows(table);
  return idx;
}

std::vector<std::size_t> LSHIndex::candidates(std::span<const float> query) const {
  std::vector<std::size_t> out;
  for (int t = 0; t < params_.tables; ++t) {
    const auto it = buckets_[t].find(bucket_key(t, query));
    if (it != buckets_[t].end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t LSHIndex::bucket_entries() const {
  std::size_t n = 0;
  for (const auto& table : buckets_)
    for (const auto& [key, rows] : table) n += rows.size();
  return n;
}

KnnResult knn_lsh(const VectorTable& table, const LSHIndex& index, std::span<const float> query, std::size_t k) {
  if (index.stale_for(table)) throw Error(ErrorCode::IndexStale, table.category() + ": LSH index is out of date");
  if (query.size() != table.dim()) throw Error(ErrorCode::DimensionMismatch, table.category() + ": query dimension");
  if (k == 0) throw Error(ErrorCode::InvalidQuery, "k must be at least 1");
  KnnResult hits;
  for (std::size_t r : index.candidates(query))
    hits.push_back({table.row_id(r), detail::unchecked(table.metric(), table.row(r).data(), query.data(), table.dim())});
  finalize_knn(hits, k);
  return hits;
}

void LSHIndex::save(const std::filesystem::path& path) const {
  binio::Writer w;
  w.bytes("VTLH");
  w.put<std::uint16_t>(kLshVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params_.tables));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params_.projections));
  w.put<double>(params_.bucket_width);
  w.put<std::uint64_t>(params_.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(rows_);
  w.commit(path);
}

LSHIndex LSHIndex::load(const std::filesystem::path& path, const VectorTable& table) {
  binio::Reader r(path);
  r.expect_magic("VTLH");
  if (r.get<std::uint16_t>() != kLshVersion) throw Error(ErrorCode::CorruptFile, r.name() + ": unsupported version");
  LshParams p;
  p.tables = static_cast<int>(r.get<std::uint32_t>());
  p.projections = static_cast<int>(r.get<std::uint32_t>());
  p.bucket_width = r.get<double>();
  p.seed = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint32_t>();
  const auto rows = r.get<std::uint64_t>();
  if (dim != table.dim()) throw Error(ErrorCode::DimensionMismatch, r.name() + ": dimension differs from table");
  LSHIndex idx;
  idx.init(dim, p);
  // Only the rows present at build time are hashed; later inserts leave it stale.
  if (rows <= table.size()) {
    for (std::size_t row = 0; row < rows; ++row)
      for (int t = 0; t < p.tables; ++t) idx.buckets_[t][idx.bucket_key(t, table.row(row))].push_back(static_cast<std::uint32_t>(row));
  }
  idx.rows_ = rows;
  return idx;
}

}  // namespace cbmr
