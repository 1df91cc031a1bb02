#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ius/harness/curation.hpp"

using namespace ius;
using namespace ius::harness;
using scoring::UtilityLevel;

namespace {

PoolEntry entry(std::string id, std::string cls, double u) {
  return {std::move(id), std::move(cls), {u, 0.0, 0.0, 0.0}, u, scoring::utility_level(u)};
}

// n entries per class with u drawn uniformly in [-1, 1]
ScoredPool random_pool(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScoredPool pool;
  for (int i = 0; i < per_class; ++i)
    for (const char* c : {"A", "B"}) pool.entries.push_back(entry(std::string(c) + std::to_string(i), c, d(rng)));
  return pool;
}

const std::map<std::string, double> kHalf{{"A", 0.5}, {"B", 0.5}};

}  // namespace

TEST(Curation, AllVhPoolIsSelectedWhole) {
  ScoredPool pool;
  for (int i = 0; i < 4; ++i) {
    pool.entries.push_back(entry("a" + std::to_string(i), "A", 0.9 + 0.01 * i));
    pool.entries.push_back(entry("b" + std::to_string(i), "B", 0.95));
  }
  auto ids = curate_vh(pool, 8, kHalf);
  std::vector<std::string> all;
  for (const auto& e : pool.entries) all.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(ids, all);
}

TEST(Curation, DeficitListsShortfall) {
  ScoredPool pool;
  for (int i = 0; i < 3; ++i) pool.entries.push_back(entry("a" + std::to_string(i), "A", 0.9));
  pool.entries.push_back(entry("a_low", "A", 0.1));
  for (int i = 0; i < 6; ++i) pool.entries.push_back(entry("b" + std::to_string(i), "B", 0.9));
  try {
    curate_vh(pool, 10, kHalf);
    FAIL() << "expected a deficit";
  } catch (const DeficitError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Deficit);
    EXPECT_EQ(e.shortfall(), (std::map<std::string, int>{{"A", 2}}));
  }
}

TEST(Curation, MatchesFilterSortTakeOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pool = random_pool(150, seed);
    const std::map<std::string, double> dist{{"A", 0.3}, {"B", 0.7}};
    const auto got = curate_vh(pool, 7, dist);

    // oracle: A gets round(2.1)=2, B gets round(4.9)=5
    std::vector<std::string> want;
    for (auto [cls, k] : {std::pair<std::string, int>{"A", 2}, {"B", 5}}) {
      std::vector<std::pair<double, std::string>> vh;
      for (const auto& e : pool.entries)
        if (e.class_key == cls && e.u >= 0.8) vh.push_back({-e.u, e.id});
      std::sort(vh.begin(), vh.end());
      ASSERT_GE(static_cast<int>(vh.size()), k);
      for (int i = 0; i < k; ++i) want.push_back(vh[i].second);
    }
    EXPECT_EQ(got, want) << "seed " << seed;
    for (const auto& id : got) {
      const auto it = std::find_if(pool.entries.begin(), pool.entries.end(), [&](const PoolEntry& e) { return e.id == id; });
      EXPECT_EQ(it->level, UtilityLevel::VH);
    }
  }
}

TEST(Curation, TiesBrokenById) {
  ScoredPool pool;
  for (const char* id : {"z", "m", "c", "q"}) pool.entries.push_back(entry(id, "A", 0.9));
  EXPECT_EQ(curate_vh(pool, 2, {{"A", 1.0}}), (std::vector<std::string>{"c", "m"}));
}

TEST(Curation, MissingClassAndBadDistribution) {
  const auto pool = random_pool(5, 3);
  try {
    curate_vh(pool, 4, {{"A", 0.5}, {"C", 0.5}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingClass);
  }
  for (const char* bad : {"A", "A=x", "A=-1", "=0.5", "A=0.5,A=0.5", "A=0,B=0"}) {
    try {
      parse_distribution(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << bad;
    }
  }
  EXPECT_EQ(parse_distribution("A=0.25,B=0.75"), (std::map<std::string, double>{{"A", 0.25}, {"B", 0.75}}));
}

TEST(Curation, PoolValidation) {
  ScoredPool pool;
  pool.entries.push_back(entry("x", "A", 0.9));
  pool.entries.push_back(entry("x", "B", 0.9));
  EXPECT_THROW(pool.validate(), Error);
  pool.entries.pop_back();
  pool.entries.front().level = UtilityLevel::L;
  EXPECT_THROW(pool.validate(), Error);
}

TEST(RandomControl, WholePoolAndDeterminism) {
  const auto pool = random_pool(10, 5);
  auto ids = random_control(pool, 20, kHalf, 9);
  EXPECT_EQ(ids, random_control(pool, 20, kHalf, 9));
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  EXPECT_EQ(ids.size(), 20u);

  const auto a = random_control(pool, 6, kHalf, 1), b = random_control(pool, 6, kHalf, 2);
  EXPECT_NE(a, b);
  EXPECT_THROW(random_control(pool, 30, kHalf, 1), DeficitError);
}

TEST(RandomControl, ExactClassCounts) {
  const auto pool = random_pool(20, 2);
  const auto ids = random_control(pool, 10, {{"A", 0.3}, {"B", 0.7}}, 4);
  EXPECT_EQ(std::count_if(ids.begin(), ids.end(), [](const std::string& s) { return s[0] == 'A'; }), 3);
  EXPECT_EQ(std::count_if(ids.begin(), ids.end(), [](const std::string& s) { return s[0] == 'B'; }), 7);
}

// Each of the n members of a class is picked with probability k/n; over
// 10^4 seeds every count must sit within 3 binomial sds of the mean.
TEST(RandomControl, UniformOverSeeds) {
  const int n = 10, k = 3, seeds = 10000;
  const auto pool = random_pool(n, 8);
  std::map<std::string, int> hits;
  for (int s = 0; s < seeds; ++s)
    for (const auto& id : random_control(pool, 2 * k, kHalf, static_cast<std::uint64_t>(s))) ++hits[id];
  ASSERT_EQ(hits.size(), static_cast<std::size_t>(2 * n));
  const double p = static_cast<double>(k) / n;
  const double mean = seeds * p, sd = std::sqrt(seeds * p * (1 - p));
  for (const auto& [id, c] : hits) EXPECT_NEAR(c, mean, 3.0 * sd) << id;
}

TEST(Curation, ClassTargetsLargestRemainder) {
  const auto pool = random_pool(3, 1);
  EXPECT_EQ(class_targets(5, kHalf, pool), (std::map<std::string, int>{{"A", 3}, {"B", 2}}));
  EXPECT_EQ(class_targets(0, kHalf, pool), (std::map<std::string, int>{{"A", 0}, {"B", 0}}));
  EXPECT_THROW(class_targets(-1, kHalf, pool), Error);
}
