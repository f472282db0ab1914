#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sdm/rng.hpp"
#include "sdm/stats.hpp"

using namespace sdm;

TEST(Rng, FrozenOutputs) {
  Rng a(42);
  EXPECT_EQ(a(), 0x44698c133193bb34ULL);
  EXPECT_EQ(a(), 0xa6a77df36703bdb2ULL);
  EXPECT_EQ(a(), 0x1308b032f81ecc2fULL);
  Rng b(7);
  EXPECT_EQ(b(), 0x6f92ac7eeef895ebULL);
  EXPECT_EQ(b(), 0x74e25edf81065efeULL);
}

TEST(Rng, ReplicationSeedsFrozen) {
  EXPECT_EQ(replication_seed(7, 0), 0xe50c1a7b8761b69bULL);
  EXPECT_EQ(replication_seed(7, 1), 0xd21fcafe4c44508cULL);
  EXPECT_EQ(replication_seed(7, 2), 0x7f40827cd2303105ULL);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(123, 4), b(123, 4);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
  EXPECT_EQ(a.counter(), 1000u);
}

TEST(Rng, StreamsAndSplitsDiffer) {
  Rng base(5);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 64; ++s) {
    Rng r(5, s);
    firsts.insert(r());
    Rng c = base.split(s);
    firsts.insert(c());
  }
  EXPECT_EQ(firsts.size(), 128u);
}

TEST(Rng, UniformMoments) {
  Rng r(1);
  std::vector<double> xs;
  for (int i = 0; i < 200000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    xs.push_back(u);
  }
  const Summary s = summarize(xs);
  EXPECT_NEAR(s.mean, 0.5, 4 * std::sqrt(1.0 / 12.0 / 200000));
  EXPECT_NEAR(s.stddev * s.stddev, 1.0 / 12.0, 2e-3);
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  std::vector<double> xs, x4;
  for (int i = 0; i < 200000; ++i) {
    const double z = r.normal();
    xs.push_back(z);
    x4.push_back(z * z * z * z);
  }
  const Summary s = summarize(xs);
  EXPECT_NEAR(s.mean, 0.0, 4 / std::sqrt(200000.0));
  EXPECT_NEAR(s.stddev, 1.0, 0.01);
  EXPECT_NEAR(summarize(x4).mean, 3.0, 0.1);
}

TEST(Rng, BelowIsUniform) {
  Rng r(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(r.index(7))];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);  // chi-square 6 dof, p = 0.001
}

TEST(Rng, BernoulliFrequency) {
  Rng r(4);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += r.bernoulli(0.3);
  EXPECT_NEAR(hits / 100000.0, 0.3, 4 * std::sqrt(0.21 / 100000));
}

TEST(Stats, SummaryValues) {
  const std::vector<double> xs{1, 2, 3, 4};
  const Summary s = summarize(xs);
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.half_width, 1.959963984540054 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  const std::vector<double> one{7.0};
  const Summary t = summarize(one);
  EXPECT_DOUBLE_EQ(t.mean, 7.0);
  EXPECT_EQ(t.std_error, 0.0);
}

TEST(Stats, FitSlope) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  EXPECT_NEAR(fit_slope(x, y), 2.0, 1e-15);
}

TEST(Stats, ParallelMapKeepsOrderAndPropagates) {
  const auto out = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(10, [](std::size_t i) -> int {
                 if (i == 5) throw std::runtime_error("boom");
                 return 0;
               }),
               std::runtime_error);
}

TEST(Stats, ParallelReplicationsMatchSerial) {
  const auto par = parallel_map(16, [](std::size_t i) {
    Rng r = replication_rng(99, i);
    return r.normal();
  });
  for (std::size_t i = 0; i < 16; ++i) {
    Rng r = replication_rng(99, i);
    EXPECT_EQ(par[i], r.normal());
  }
}
