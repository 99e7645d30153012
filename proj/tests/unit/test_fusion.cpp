#include <doctest.h>

#include <random>

#include "cbmr/query.hpp"
#include "oracles.hpp"

using namespace cbmr;

namespace {

TermScores term(double weight, std::vector<CategoryScores> cats) { return {weight, std::move(cats)}; }

}  // namespace

TEST_CASE("correspondence") {
  CHECK(correspondence(0, 2) == 1.0);
  CHECK(correspondence(1, 2) == 0.5);
  CHECK(correspondence(5, 2) == 0.0);
}

TEST_CASE("term fusion is a weighted mean with absent scores counted as zero") {
  const auto t = term(1, {{"a", 1.0, {{"x", 0.8}, {"y", 0.4}}}, {"b", 0.5, {{"x", 0.2}}}, {"c", 0.0, {{"y", 1.0}}}});
  const auto f = fuse_term(t);
  CHECK(f.at("x").score == doctest::Approx((0.8 + 0.5 * 0.2) / 1.5));
  CHECK(f.at("y").score == doctest::Approx(0.4 / 1.5));
  CHECK(f.at("x").per_category.at("b") == 0.2);
}

TEST_CASE("AND averages terms, OR takes the maximum") {
  ComponentScores c1{{term(1, {{"a", 1, {{"x", 0.9}, {"y", 0.3}}}}), term(3, {{"b", 1, {{"x", 0.1}}}})}};
  const auto and_ = fuse_component(c1);
  CHECK(and_.at("x").score == doctest::Approx((0.9 + 3 * 0.1) / 4));
  CHECK(and_.at("y").score == doctest::Approx(0.3 / 4));
  ComponentScores c2{{term(1, {{"a", 1, {{"y", 0.7}}}})}};
  const auto or_ = fuse_query({c1, c2});
  CHECK(or_.at("x").score == doctest::Approx(0.3));
  CHECK(or_.at("y").score == doctest::Approx(0.7));
}

TEST_CASE("fusion properties on random score maps") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ComponentScores> comps(1 + rng() % 3);
    for (auto& c : comps) {
      c.terms.resize(1 + rng() % 3);
      for (auto& t : c.terms) {
        t.weight = 0.1 + u(rng);
        t.categories.resize(1 + rng() % 3);
        for (auto& cat : t.categories) {
          cat.category = "c" + std::to_string(rng() % 4);
          cat.weight = 0.1 + u(rng);
          for (int s = 0; s < 6; ++s)
            if (u(rng) < 0.6) cat.scores["s" + std::to_string(s)] = u(rng);
        }
      }
    }
    const auto fused = fuse_query(comps);
    for (const auto& [seg, fs] : fused) {
      CHECK(fs.score >= 0);
      CHECK(fs.score <= 1);
      double best = 0;
      for (const auto& c : comps) {
        const auto m = fuse_component(c);
        const auto it = m.find(seg);
        if (it != m.end()) best = std::max(best, it->second.score);
      }
      CHECK(fs.score == best);
    }
    // Adding a component never lowers a score.
    auto more = comps;
    more.push_back(comps.front());
    more.back().terms.front().categories.front().scores["s0"] = 1.0;
    const auto bigger = fuse_query(more);
    for (const auto& [seg, fs] : fused) CHECK(bigger.at(seg).score >= fs.score);
  }
}

TEST_CASE("ranking sorts by score then id, filters, and truncates") {
  std::map<std::string, FusedScore> f{{"b:0", {0.5, {}}}, {"a:0", {0.5, {}}}, {"c:1", {0.9, {}}}, {"d:0", {0.1, {}}}};
  const auto r = rank_results(f, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].segment_id == "c:1");
  CHECK(r[0].object_id == "c");
  CHECK(r[1].segment_id == "a:0");
  CHECK(r[2].segment_id == "b:0");
  const auto kept = rank_results(f, 10, [](const std::string& seg) { return seg[0] != 'c'; });
  CHECK(kept.size() == 3);
  CHECK(kept[0].segment_id == "a:0");
}

TEST_CASE("object rollup equals the group-by-max oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<ScoredResult> rs;
    for (int i = 0; i < 30; ++i) {
      const std::string obj = "o" + std::to_string(rng() % 8);
      rs.push_back({obj + ":" + std::to_string(i), obj, std::round(u(rng) * 20) / 20, {}});
    }
    const auto got = aggregate_objects(rs);
    auto want = oracle::group_by_max(rs);
    std::stable_sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    CHECK(got == want);
  }
}

TEST_CASE("id helpers") {
  CHECK(object_of_segment("abc:a3") == "abc");
  CHECK(segment_of_row("abc:0@v7") == "abc:0");
  CHECK(segment_of_row("abc:0") == "abc:0");
  CHECK(term_type_from_string(to_string(TermType::Model3D)) == TermType::Model3D);
}
