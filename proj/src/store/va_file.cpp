#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "binio.hpp"
#include "cbmr/error.hpp"
#include "cbmr/store.hpp"

namespace cbmr {

namespace {

constexpr std::uint16_t kVaVersion = 1;

// Bounds are computed from double partition edges while exact distances come
// from float data, so comparisons allow a little rounding slack.
double slack(double threshold) { return threshold * (1.0 + 1e-9) + 1e-12; }

}  // namespace

VAFileIndex VAFileIndex::build(const VectorTable& table, int bits_per_dim) {
  if (bits_per_dim < 1 || bits_per_dim > 16)
    throw Error(ErrorCode::InvalidQuery, "VA-file bits per dimension must be in [1, 16]");
  if (table.metric() != Metric::L2 && table.metric() != Metric::L1)
    throw Error(ErrorCode::InvalidQuery, "VA-file supports L1 and L2 tables only");
  VAFileIndex idx;
  idx.bits_ = bits_per_dim;
  idx.dim_ = table.dim();
  idx.rows_ = table.size();
  const std::size_t cells = std::size_t{1} << bits_per_dim;
  idx.bounds_.resize(idx.dim_ * (cells + 1));
  for (std::size_t d = 0; d < idx.dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t r = 0; r < idx.rows_; ++r) {
      lo = std::min<double>(lo, table.row(r)[d]);
      hi = std::max<double>(hi, table.row(r)[d]);
    }
    if (idx.rows_ == 0) lo = hi = 0.0;
    if (!(hi > lo)) hi = lo + 1.0;  // constant dimension: any positive width keeps edges increasing
    double* b = &idx.bounds_[d * (cells + 1)];
    for (std::size_t i = 0; i <= cells; ++i) b[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
    b[cells] = hi;
  }
  idx.cells_.resize(idx.rows_ * idx.dim_);
  for (std::size_t r = 0; r < idx.rows_; ++r)
    for (std::size_t d = 0; d < idx.dim_; ++d) idx.cells_[r * idx.dim_ + d] = idx.cell_of(d, table.row(r)[d]);
  return idx;
}

std::span<const double> VAFileIndex::boundaries(std::size_t d) const {
  const std::size_t n = (std::size_t{1} << bits_) + 1;
  return {bounds_.data() + d * n, n};
}

std::uint32_t VAFileIndex::cell_of(std::size_t d, double v) const {
  const auto b = boundaries(d);
  const auto it = std::upper_bound(b.begin(), b.end(), v);
  const auto last = static_cast<std::ptrdiff_t>(b.size()) - 2;
  const std::ptrdiff_t c = std::clamp<std::ptrdiff_t>((it - b.begin()) - 1, 0, last);
  return static_cast<std::uint32_t>(c);
}

KnnResult knn_va(const VectorTable& table, const VAFileIndex& index, std::span<const float> query, std::size_t k,
                 VaSearchStats* stats) {
  if (index.stale_for(table)) throw Error(ErrorCode::IndexStale, table.category() + ": VA-file is out of date");
  if (query.size() != table.dim()) throw Error(ErrorCode::DimensionMismatch, table.category() + ": query dimension");
  if (k == 0) throw Error(ErrorCode::InvalidQuery, "k must be at least 1");
  const bool l2 = table.metric() == Metric::L2;
  const std::size_t dim = table.dim(), n = table.size();
  const std::size_t cells = std::size_t{1} << index.bits_per_dim();

  // Per-dimension, per-cell bound contributions for this query.
  std::vector<double> lo_part(dim * cells), hi_part(dim * cells);
  for (std::size_t d = 0; d < dim; ++d) {
    const auto b = index.boundaries(d);
    const double q = query[d];
    for (std::size_t c = 0; c < cells; ++c) {
      const double lo = b[c], hi = b[c + 1];
      const double below = q < lo ? lo - q : (q > hi ? q - hi : 0.0);
      const double above = std::max(std::abs(q - lo), std::abs(q - hi));
      lo_part[d * cells + c] = l2 ? below * below : below;
      hi_part[d * cells + c] = l2 ? above * above : above;
    }
  }

  std::vector<double> lower(n), upper(n);
  for (std::size_t r = 0; r < n; ++r) {
    double lsum = 0.0, usum = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t c = index.cell(r, d);
      lsum += lo_part[d * cells + c];
      usum += hi_part[d * cells + c];
    }
    lower[r] = l2 ? std::sqrt(lsum) : lsum;
    upper[r] = l2 ? std::sqrt(usum) : usum;
  }

  // Filtering: the k-th smallest upper bound caps the k-th nearest distance.
  double cap = std::numeric_limits<double>::infinity();
  if (n > k) {
    std::vector<double> ub = upper;
    std::nth_element(ub.begin(), ub.begin() + static_cast<std::ptrdiff_t>(k - 1), ub.end());
    cap = ub[k - 1];
  }
  std::vector<std::size_t> candidates;
  for (std::size_t r = 0; r < n; ++r)
    if (lower[r] <= slack(cap)) candidates.push_back(r);
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return lower[a] != lower[b] ? lower[a] < lower[b] : a < b; });

  // Refinement in lower-bound order until no remaining row can enter the top k.
  KnnResult hits;
  std::priority_queue<double> best;
  std::size_t examined = 0;
  for (std::size_t r : candidates) {
    if (best.size() == k && lower[r] > slack(best.top())) break;
    const double d = detail::unchecked(table.metric(), table.row(r).data(), query.data(), dim);
    ++examined;
    hits.push_back({table.row_id(r), d});
    if (best.size() < k) {
      best.push(d);
    } else if (d < best.top()) {
      best.pop();
      best.push(d);
    }
  }
  if (stats) stats->candidates_examined = examined;
  finalize_knn(hits, k);
  return hits;
}

void VAFileIndex::save(const std::filesystem::path& path) const {
  binio::Writer w;
  w.bytes("VTVA");
  w.put<std::uint16_t>(kVaVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(bits_));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(rows_);
  w.raw(bounds_.data(), bounds_.size() * sizeof(double));
  // Signatures packed LSB-first, bits_ per dimension, row after row.
  std::vector<std::uint8_t> packed((signature_bits() * rows_ + 7) / 8, 0);
  std::size_t bit = 0;
  for (std::uint32_t c : cells_)
    for (int i = 0; i < bits_; ++i, ++bit)
      if ((c >> i) & 1u) packed[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
  w.raw(packed.data(), packed.size());
  w.commit(path);
}

VAFileIndex VAFileIndex::load(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("VTVA");
  if (r.get<std::uint16_t>() != kVaVersion) throw Error(ErrorCode::CorruptFile, r.name() + ": unsupported version");
  VAFileIndex idx;
  idx.bits_ = r.get<std::uint8_t>();
  if (idx.bits_ < 1 || idx.bits_ > 16) throw Error(ErrorCode::CorruptFile, r.name() + ": bad bit count");
  idx.dim_ = r.get<std::uint32_t>();
  idx.rows_ = r.get<std::uint64_t>();
  idx.bounds_.resize(idx.dim_ * ((std::size_t{1} << idx.bits_) + 1));
  r.raw(idx.bounds_.data(), idx.bounds_.size() * sizeof(double));
  std::vector<std::uint8_t> packed((idx.signature_bits() * idx.rows_ + 7) / 8);
  r.raw(packed.data(), packed.size());
  idx.cells_.resize(idx.rows_ * idx.dim_);
  std::size_t bit = 0;
  for (auto& c : idx.cells_) {
    c = 0;
    for (int i = 0; i < idx.bits_; ++i, ++bit)
      if ((packed[bit / 8] >> (bit % 8)) & 1u) c |= 1u << i;
  }
  if (!r.done()) throw Error(ErrorCode::CorruptFile, r.name() + ": trailing bytes");
  return idx;
}

}  // namespace cbmr
