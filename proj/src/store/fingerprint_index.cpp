#include <algorithm>
#include <map>

#include "binio.hpp"
#include "cbmr/error.hpp"
#include "cbmr/store.hpp"

namespace cbmr {

namespace {
constexpr std::uint16_t kFpVersion = 1;
}

std::uint32_t FingerprintIndex::intern(const std::string& segment_id) {
  const auto [it, inserted] = segment_index_.emplace(segment_id, static_cast<std::uint32_t>(segments_.size()));
  if (inserted) segments_.push_back(segment_id);
  return it->second;
}

void FingerprintIndex::add(std::span<const FingerprintHash> hashes) {
  for (const auto& h : hashes) {
    auto& list = postings_[h.hash];
    const Posting p{intern(h.segment_id), h.anchor_time};
    list.insert(std::upper_bound(list.begin(), list.end(), p), p);
  }
}

std::size_t FingerprintIndex::posting_count() const {
  std::size_t n = 0;
  for (const auto& [hash, list] : postings_) n += list.size();
  return n;
}

std::vector<FingerprintMatch> FingerprintIndex::lookup(std::span<const FingerprintHash> query) const {
  std::map<std::pair<std::uint32_t, std::int64_t>, std::size_t> bins;
  for (const auto& q : query) {
    const auto it = postings_.find(q.hash);
    if (it == postings_.end()) continue;
    for (const auto& p : it->second) {
      const std::int64_t offset = static_cast<std::int64_t>(q.anchor_time) - p.anchor_time;
      ++bins[{p.segment, floor_div(offset, kOffsetBinWidth)}];
    }
  }
  std::unordered_map<std::uint32_t, std::size_t> votes;
  for (const auto& [key, count] : bins) votes[key.first] = std::max(votes[key.first], count);
  std::vector<FingerprintMatch> out;
  for (const auto& [segment, v] : votes)
    if (v >= kMinVotes) out.push_back({segments_[segment], v});
  std::sort(out.begin(), out.end(), [](const FingerprintMatch& a, const FingerprintMatch& b) {
    return a.votes != b.votes ? a.votes > b.votes : a.segment_id < b.segment_id;
  });
  return out;
}

std::vector<FingerprintHash> FingerprintIndex::hashes_of(const std::string& segment_id) const {
  std::vector<FingerprintHash> out;
  const auto seg = segment_index_.find(segment_id);
  if (seg == segment_index_.end()) return out;
  for (const auto& [hash, list] : postings_)
    for (const auto& p : list)
      if (p.segment == seg->second) out.push_back({hash, p.anchor_time, segment_id});
  std::sort(out.begin(), out.end(), [](const FingerprintHash& a, const FingerprintHash& b) {
    return a.anchor_time != b.anchor_time ? a.anchor_time < b.anchor_time : a.hash < b.hash;
  });
  return out;
}

void FingerprintIndex::save(const std::filesystem::path& path) const {
  binio::Writer w;
  w.bytes("VTFP");
  w.put<std::uint16_t>(kFpVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(segments_.size()));
  for (const auto& s : segments_) w.short_string(s);
  std::vector<std::uint32_t> keys;
  for (const auto& [hash, list] : postings_) keys.push_back(hash);
  std::sort(keys.begin(), keys.end());
  w.put<std::uint64_t>(keys.size());
  for (auto hash : keys) {
    const auto& list = postings_.at(hash);
    w.put<std::uint32_t>(hash);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      w.put<std::uint32_t>(p.segment);
      w.put<std::int32_t>(p.anchor_time);
    }
  }
  w.commit(path);
}

FingerprintIndex FingerprintIndex::load(const std::filesystem::path& path) {
  binio::Reader r(path);
  r.expect_magic("VTFP");
  if (r.get<std::uint16_t>() != kFpVersion) throw Error(ErrorCode::CorruptFile, r.name() + ": unsupported version");
  FingerprintIndex idx;
  const auto nseg = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < nseg; ++i) idx.intern(r.short_string());
  const auto nkeys = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < nkeys; ++i) {
    const auto hash = r.get<std::uint32_t>();
    const auto n = r.get<std::uint32_t>();
    auto& list = idx.postings_[hash];
    list.reserve(n);
    for (std::uint32_t j = 0; j < n; ++j) {
      Posting p{r.get<std::uint32_t>(), r.get<std::int32_t>()};
      if (p.segment >= nseg) throw Error(ErrorCode::CorruptFile, r.name() + ": posting references unknown segment");
      list.push_back(p);
    }
  }
  if (!r.done()) throw Error(ErrorCode::CorruptFile, r.name() + ": trailing bytes");
  return idx;
}

}  // namespace cbmr
