#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gdv/random.hpp"

using namespace gdv;

TEST_SUITE("random") {
  TEST_CASE("engine matches the published mt19937_64 reference") {
    Rng rng(5489);
    std::uint64_t value = 0;
    for (int i = 0; i < 10000; ++i) value = rng.next_u64();
    CHECK(value == 9981545732273789042ULL);
  }

  TEST_CASE("stream derivation") {
    CHECK(derive_seed(1234, 0) == 1234);
    // First SplitMix64 output from state 0.
    CHECK(derive_seed(0, 1) == 0xE220A8397B1DCDAFULL);
    CHECK(derive_seed(1234, 1) != derive_seed(1234, 2));
    Rng a(99, 3), b(derive_seed(99, 3));
    CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("uniform lies in [0, 1) and has the right moments") {
    Rng rng(1);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
      sq += u * u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
    CHECK(std::abs(sq / n - sum * sum / n / n - 1.0 / 12.0) < 0.003);
  }

  TEST_CASE("normal moments") {
    Rng rng(2);
    double sum = 0.0, sq = 0.0, fourth = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      REQUIRE(std::isfinite(z));
      sum += z;
      sq += z * z;
      fourth += z * z * z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
    CHECK(std::abs(fourth / n - 3.0) < 0.1);
  }

  TEST_CASE("uniform_int is inclusive and even") {
    Rng rng(3);
    std::vector<int> counts(9, 0);
    for (int i = 0; i < 90000; ++i) {
      const auto v = rng.uniform_int(2, 10);
      REQUIRE(v >= 2);
      REQUIRE(v <= 10);
      ++counts[v - 2];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK(rng.uniform_int(5, 5) == 5);
  }

  TEST_CASE("shuffle is a reproducible permutation") {
    std::vector<int> a(50);
    std::iota(a.begin(), a.end(), 0);
    std::vector<int> b(a.begin(), a.end());
    Rng r1(4), r2(4);
    r1.shuffle(std::span<int>(a));
    r2.shuffle(std::span<int>(b));
    CHECK(a == b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  }
}
