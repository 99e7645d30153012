#pragma once

// Persistent feature tables, their kNN indexes, the fingerprint inverted
// index and the object/segment catalog.
//
// None of these classes lock internally. Callers hold a reader/writer lock:
// any number of concurrent const calls, or one mutating call.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbmr/audio_features.hpp"
#include "cbmr/distance.hpp"
#include "cbmr/kernels.hpp"
#include "cbmr/media.hpp"
#include "cbmr/segmentation.hpp"

namespace cbmr {

struct KnnHit {
  std::string row_id;
  double distance = 0.0;

  bool operator==(const KnnHit&) const = default;
};

/// Ascending by distance, ties by row id.
using KnnResult = std::vector<KnnHit>;

inline constexpr std::uint16_t kTableFormatVersion = 1;

class VectorTable {
 public:
  VectorTable(std::string category, std::size_t dim, Metric metric);

  /// Reads a table file; the category is taken from the argument, not the file.
  static VectorTable open(const std::filesystem::path& path, std::string category);

  const std::string& category() const { return category_; }
  std::size_t dim() const { return dim_; }
  Metric metric() const { return metric_; }
  std::size_t size() const { return ids_.size(); }

  void insert(std::string row_id, std::span<const float> vector);
  void insert(std::string row_id, std::span<const double> vector);

  bool contains(const std::string& row_id) const { return index_.count(row_id) != 0; }
  std::optional<std::size_t> find(const std::string& row_id) const;
  std::span<const float> get(const std::string& row_id) const;

  const std::string& row_id(std::size_t i) const { return ids_[i]; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const { return data_; }

  void save(const std::filesystem::path& path) const;

 private:
  std::string category_;
  std::size_t dim_;
  Metric metric_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

KnnResult knn_exact(const VectorTable& table, std::span<const float> query, std::size_t k,
                    kernels::Exec exec = kernels::Exec::Parallel);

/// Sorts by (distance, row id) and keeps the first k.
void finalize_knn(KnnResult& hits, std::size_t k);

// --- VA-file ----------------------------------------------------------------

class VAFileIndex {
 public:
  static constexpr int kDefaultBits = 6;

  /// Equi-width partitions over each dimension's observed range. L1 and L2 only.
  static VAFileIndex build(const VectorTable& table, int bits_per_dim = kDefaultBits);
  static VAFileIndex load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int bits_per_dim() const { return bits_; }
  std::size_t dim() const { return dim_; }
  std::size_t row_count() const { return rows_; }
  std::size_t signature_bits() const { return dim_ * static_cast<std::size_t>(bits_); }
  /// 2^bits + 1 strictly increasing boundaries for dimension d.
  std::span<const double> boundaries(std::size_t d) const;
  /// Cell index of row r in dimension d.
  std::uint32_t cell(std::size_t r, std::size_t d) const { return cells_[r * dim_ + d]; }
  bool stale_for(const VectorTable& table) const { return rows_ != table.size() || dim_ != table.dim(); }

  /// Cell containing v: the last boundary <= v, clamped into range.
  std::uint32_t cell_of(std::size_t d, double v) const;

 private:
  int bits_ = kDefaultBits;
  std::size_t dim_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> bounds_;
  std::vector<std::uint32_t> cells_;
};

struct VaSearchStats {
  std::size_t candidates_examined = 0;
};

/// Exact kNN: cell bounds prune, survivors are refined with true distances.
KnnResult knn_va(const VectorTable& table, const VAFileIndex& index, std::span<const float> query,
                 std::size_t k, VaSearchStats* stats = nullptr);

// --- LSH ----------------------------------------------------------------------

struct LshParams {
  int tables = 8;
  int projections = 8;
  double bucket_width = 4.0;
  std::uint64_t seed = 42;
};

class LSHIndex {
 public:
  static LSHIndex build(const VectorTable& table, const LshParams& params = {});
  /// Reads the parameter header and rehashes the table's rows.
  static LSHIndex load(const std::filesystem::path& path, const VectorTable& table);
  void save(const std::filesystem::path& path) const;

  const LshParams& params() const { return params_; }
  std::size_t row_count() const { return rows_; }
  bool stale_for(const VectorTable& table) const { return rows_ != table.size() || dim_ != table.dim(); }

  /// Bucket key of a vector in table t.
  std::uint64_t bucket_key(int t, std::span<const float> v) const;
  /// Row indexes sharing a bucket with the query in at least one table, ascending.
  std::vector<std::size_t> candidates(std::span<const float> query) const;
  std::size_t bucket_entries() const;

 private:
  LshParams params_;
  std::size_t dim_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> a_;  // tables x projections x dim
  std::vector<double> b_;  // tables x projections
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> buckets_;

  void init(std::size_t dim, const LshParams& params);
  void add_rows(const VectorTable& table);
};

KnnResult knn_lsh(const VectorTable& table, const LSHIndex& index, std::span<const float> query,
                  std::size_t k);

// --- fingerprints ---------------------------------------------------------------

struct FingerprintMatch {
  std::string segment_id;
  std::size_t votes = 0;
};

class FingerprintIndex {
 public:
  static constexpr int kOffsetBinWidth = 3;
  static constexpr std::size_t kMinVotes = 5;

  void add(std::span<const FingerprintHash> hashes);
  std::size_t posting_count() const;
  std::size_t hash_count() const { return postings_.size(); }

  /// Votes per segment = largest offset-bin population; < kMinVotes dropped;
  /// sorted by votes descending, then segment id.
  std::vector<FingerprintMatch> lookup(std::span<const FingerprintHash> query) const;
  /// Stored hashes of one segment, ordered by (anchor time, hash).
  std::vector<FingerprintHash> hashes_of(const std::string& segment_id) const;

  static FingerprintIndex load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  struct Posting {
    std::uint32_t segment;
    std::int32_t anchor_time;
    auto operator<=>(const Posting&) const = default;
  };
  std::vector<std::string> segments_;
  std::unordered_map<std::string, std::uint32_t> segment_index_;
  std::unordered_map<std::uint32_t, std::vector<Posting>> postings_;

  std::uint32_t intern(const std::string& segment_id);
};

/// floor(a / b) for b > 0.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && a < 0) ? q - 1 : q;
}

// --- catalog ----------------------------------------------------------------------

class Catalog {
 public:
  void add_object(const MediaObject& object);
  void add_segment(const SegmentRecord& segment);

  bool has_object(const std::string& id) const { return objects_.count(id) != 0; }
  bool has_segment(const std::string& id) const { return segments_.count(id) != 0; }
  const MediaObject& object(const std::string& id) const;
  const SegmentRecord& segment(const std::string& id) const;
  std::vector<std::string> segments_of(const std::string& object_id) const;
  std::vector<MediaObject> find_by_name(const std::string& needle) const;

  const std::map<std::string, MediaObject>& objects() const { return objects_; }
  const std::map<std::string, SegmentRecord>& segments() const { return segments_; }

  void save(const std::filesystem::path& dir) const;
  static Catalog load(const std::filesystem::path& dir);

 private:
  std::map<std::string, MediaObject> objects_;
  std::map<std::string, SegmentRecord> segments_;
};

}  // namespace cbmr
