#include <doctest.h>

#include <cmath>
#include <random>

#include "cbmr/error.hpp"
#include "cbmr/store.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace cbmr;

namespace {

VectorTable random_table(std::size_t n, std::size_t dim, Metric m, std::uint64_t seed) {
  VectorTable t("t", dim, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0, 1);
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : v) x = m == Metric::ChiSquared ? u(rng) : g(rng);
    t.insert("r" + std::to_string(i), std::span<const float>(v));
  }
  return t;
}

std::vector<float> random_query(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<float> g(0, 1);
  std::vector<float> q(dim);
  for (auto& x : q) x = g(rng);
  return q;
}

}  // namespace

TEST_CASE("distance metrics against the oracle (property)") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(0, 2);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<float> a(n), b(n);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    for (Metric m : {Metric::L2, Metric::L1, Metric::Cosine, Metric::ChiSquared}) {
      const double d = distance(m, a, b);
      CHECK(d == doctest::Approx(oracle::distance(m, a, b)).epsilon(1e-12));
      CHECK(d >= 0);
      CHECK(d == doctest::Approx(distance(m, b, a)).epsilon(1e-12));
      CHECK(distance(m, a, a) == doctest::Approx(0.0).scale(1));
    }
  }
}

TEST_CASE("distance preconditions") {
  const std::vector<float> a{1, 2}, b{1, 2, 3}, neg{-1, 2};
  CHECK_THROWS_AS(distance(Metric::L2, a, b), Error);
  CHECK_THROWS_AS(distance(Metric::ChiSquared, neg, a), Error);
  const std::vector<float> z{0, 0};
  CHECK(distance(Metric::Cosine, z, a) == 1.0);
  CHECK(distance(Metric::ChiSquared, z, z) == 0.0);
  CHECK(metric_from_string(to_string(Metric::ChiSquared)) == Metric::ChiSquared);
}

TEST_CASE("exact kNN equals brute force, ties broken by row id") {
  for (Metric m : {Metric::L2, Metric::L1, Metric::Cosine, Metric::ChiSquared}) {
    const auto table = random_table(500, 12, m, 5);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < table.size(); ++i) ids.push_back(table.row_id(i));
    std::vector<float> rows(table.data().begin(), table.data().end());
    std::mt19937_64 rng(6);
    for (int q = 0; q < 10; ++q) {
      auto query = random_query(12, rng);
      if (m == Metric::ChiSquared)
        for (auto& x : query) x = std::abs(x);
      const auto got = knn_exact(table, query, 15);
      const auto want = oracle::brute_knn(ids, rows, 12, query, 15, m);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].row_id == want[i].first);
        CHECK(got[i].distance == doctest::Approx(want[i].second).epsilon(1e-12));
      }
    }
  }
  VectorTable dup("t", 2, Metric::L2);
  for (const char* id : {"c", "a", "b"}) dup.insert(id, std::vector<float>{1, 1});
  const auto hits = knn_exact(dup, std::vector<float>{0, 0}, 2);
  CHECK(hits[0].row_id == "a");
  CHECK(hits[1].row_id == "b");
}

TEST_CASE("VA-file search is exact at every bit width") {
  for (Metric m : {Metric::L2, Metric::L1}) {
    const auto table = random_table(800, 16, m, 9);
    std::mt19937_64 rng(10);
    for (int bits : {1, 3, 6, 8}) {
      const auto va = VAFileIndex::build(table, bits);
      CHECK(va.signature_bits() == 16u * bits);
      for (int q = 0; q < 8; ++q) {
        const auto query = random_query(16, rng);
        VaSearchStats stats;
        CHECK(knn_va(table, va, query, 10, &stats) == knn_exact(table, query, 10));
        CHECK(stats.candidates_examined <= table.size());
      }
    }
  }
}

TEST_CASE("VA cells and boundaries") {
  const auto table = random_table(100, 3, Metric::L2, 1);
  const auto va = VAFileIndex::build(table, 2);
  for (std::size_t d = 0; d < 3; ++d) {
    const auto b = va.boundaries(d);
    REQUIRE(b.size() == 5);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] > b[i - 1]);
    CHECK(va.cell_of(d, b[0] - 10) == 0);
    CHECK(va.cell_of(d, b[4] + 10) == 3);
    CHECK(va.cell_of(d, b[2]) == 2);
  }
  for (std::size_t r = 0; r < table.size(); ++r)
    for (std::size_t d = 0; d < 3; ++d) CHECK(va.cell(r, d) == va.cell_of(d, table.row(r)[d]));
  CHECK_THROWS_AS(VAFileIndex::build(random_table(10, 3, Metric::Cosine, 1)), Error);
}

TEST_CASE("tables, VA and LSH files persist") {
  const auto dir = synth::temp_dir("unit-store");
  auto table = random_table(300, 8, Metric::L1, 3);
  table.save(dir / "t.vtrs");
  const auto back = VectorTable::open(dir / "t.vtrs", "renamed");
  CHECK(back.category() == "renamed");
  CHECK(back.metric() == Metric::L1);
  CHECK(back.size() == 300);
  CHECK(std::equal(back.data().begin(), back.data().end(), table.data().begin()));
  CHECK(back.get("r17")[3] == table.get("r17")[3]);

  const auto va = VAFileIndex::build(table, 5);
  va.save(dir / "t.va");
  const auto va2 = VAFileIndex::load(dir / "t.va");
  CHECK(va2.bits_per_dim() == 5);
  for (std::size_t r = 0; r < 300; ++r) CHECK(va2.cell(r, 2) == va.cell(r, 2));

  auto l2 = random_table(300, 8, Metric::L2, 4);
  const auto lsh = LSHIndex::build(l2, {4, 6, 3.0, 99});
  lsh.save(dir / "t.lsh");
  const auto lsh2 = LSHIndex::load(dir / "t.lsh", l2);
  CHECK(lsh2.params().tables == 4);
  CHECK(lsh2.params().seed == 99);
  std::mt19937_64 rng(1);
  const auto q = random_query(8, rng);
  CHECK(lsh2.candidates(q) == lsh.candidates(q));
  CHECK(lsh2.bucket_entries() == lsh.bucket_entries());

  table.insert("extra", std::vector<float>(8, 0.f));
  CHECK(va.stale_for(table));
  l2.insert("extra", std::vector<float>(8, 0.f));
  CHECK(lsh.stale_for(l2));

  write_file(dir / "bad.vtrs", Bytes{1, 2, 3, 4});
  CHECK_THROWS_AS(VectorTable::open(dir / "bad.vtrs", "x"), Error);
}

TEST_CASE("table invariants") {
  VectorTable t("t", 3, Metric::L2);
  t.insert("a", std::vector<float>{1, 2, 3});
  CHECK_THROWS_AS(t.insert("a", std::vector<float>{1, 2, 3}), Error);
  CHECK_THROWS_AS(t.insert("b", std::vector<float>{1, 2}), Error);
  CHECK(t.contains("a"));
  CHECK_FALSE(t.find("zz").has_value());
}

TEST_CASE("LSH candidates always include an indexed copy of the query") {
  const auto table = random_table(400, 10, Metric::L2, 12);
  const auto lsh = LSHIndex::build(table);
  for (std::size_t r = 0; r < table.size(); r += 37) {
    const auto c = lsh.candidates(table.row(r));
    CHECK(std::binary_search(c.begin(), c.end(), r));
    const auto hits = knn_lsh(table, lsh, table.row(r), 1);
    REQUIRE_FALSE(hits.empty());
    CHECK(hits[0].distance == 0.0);
  }
}

TEST_CASE("floor division") {
  CHECK(floor_div(7, 3) == 2);
  CHECK(floor_div(-7, 3) == -3);
  CHECK(floor_div(-6, 3) == -2);
  CHECK(floor_div(0, 3) == 0);
}

TEST_CASE("fingerprint index votes by offset bin") {
  FingerprintIndex idx;
  std::vector<FingerprintHash> seg;
  for (int i = 0; i < 20; ++i) seg.push_back({static_cast<std::uint32_t>(1000 + i), 10 * i, "s:0"});
  for (int i = 0; i < 4; ++i) seg.push_back({static_cast<std::uint32_t>(5000 + i), i, "t:0"});
  idx.add(seg);
  CHECK(idx.posting_count() == 24);

  // The query is the first segment's hashes shifted by -7 frames with one-frame jitter.
  std::vector<FingerprintHash> q;
  for (int i = 0; i < 20; ++i) q.push_back({static_cast<std::uint32_t>(1000 + i), 10 * i - 7 + (i % 2), ""});
  for (int i = 0; i < 4; ++i) q.push_back({static_cast<std::uint32_t>(5000 + i), i, ""});
  const auto m = idx.lookup(q);
  REQUIRE(m.size() == 1);  // t:0 has only 4 votes, below the minimum
  CHECK(m[0].segment_id == "s:0");
  CHECK(m[0].votes >= 10);

  const auto dir = synth::temp_dir("unit-fp");
  idx.save(dir / "f.fp");
  const auto back = FingerprintIndex::load(dir / "f.fp");
  CHECK(back.lookup(q).at(0).votes == m[0].votes);
  const auto h = back.hashes_of("s:0");
  REQUIRE(h.size() == 20);
  CHECK(h[3].anchor_time == 30);
  CHECK(back.hashes_of("nope").empty());
}

TEST_CASE("offsets within one bin share their votes; a bin edge splits them") {
  FingerprintIndex idx;
  std::vector<FingerprintHash> seg;
  for (int i = 0; i < 9; ++i) seg.push_back({static_cast<std::uint32_t>(i), 100, "s:0"});
  idx.add(seg);
  std::vector<FingerprintHash> q;
  for (int i = 0; i < 9; ++i) q.push_back({static_cast<std::uint32_t>(i), 100 + (i % 3), ""});  // offsets 0, 1, 2
  CHECK(idx.lookup(q).at(0).votes == 9);
  for (int i = 0; i < 9; ++i) q[i].anchor_time = 100 - (i % 3);  // offsets 0, -1, -2: bins 0 and -1
  CHECK(idx.lookup(q).at(0).votes == 6);
}

TEST_CASE("catalog persists objects and segments") {
  Catalog c;
  c.add_object({"o1", MediaType::Audio, "/x/song.wav", "song.wav", 1234});
  c.add_object({"o2", MediaType::Image, "/x/pic.png", "pic.png", 99});
  c.add_segment({"o1:0", "o1", 0, 0, 220500, SegmentUnit::Samples});
  c.add_segment({"o1:1", "o1", 1, 198450, 300000, SegmentUnit::Samples});
  c.add_segment({"o2:0", "o2", 0, 0, 1, SegmentUnit::Whole});
  CHECK_THROWS_AS(c.add_object({"o1", MediaType::Audio, "", "", 0}), Error);
  const auto dir = synth::temp_dir("unit-cat");
  c.save(dir);
  const auto back = Catalog::load(dir);
  CHECK(back.object("o1").path == "/x/song.wav");
  CHECK(back.object("o1").size_bytes == 1234);
  CHECK(back.segment("o1:1").end == 300000);
  CHECK(back.segments_of("o1") == std::vector<std::string>{"o1:0", "o1:1"});
  CHECK(back.find_by_name("pic").size() == 1);
  CHECK_THROWS_AS(back.object("zz"), Error);
}
