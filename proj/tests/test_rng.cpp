#include "nsdt/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using nsdt::Rng;

TEST(Rng, KeyedStreamsAreReproducible) {
  Rng a = Rng::keyed(42, 7);
  Rng b = Rng::keyed(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctStreamsDiffer) {
  Rng a = Rng::keyed(42, 7);
  Rng b = Rng::keyed(42, 8);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64());
  EXPECT_LT(same, 2);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r = Rng::keyed(1, 0);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = r.next_uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  Rng r = Rng::keyed(2, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.next_normal();
    s1 += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.03);
}
