#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "rankone/error.hpp"
#include "rankone/mobius.hpp"

using namespace rankone;

TEST_CASE("mobius values at small n") {
  const MobiusTable t(100);
  CHECK(t(1) == 1);
  CHECK(t(12) == 0);
  CHECK(t(30) == -1);
  CHECK(mobius_direct(1) == 1);
  CHECK(mobius_direct(4) == 0);
  CHECK(mobius_direct(6) == 1);
  CHECK(t.mertens(100) == 1);

  std::int64_t sum = 0;
  for (std::uint64_t n = 1; n <= 100; ++n) sum += oracle::mobius(n);
  CHECK(sum == 1);
}

TEST_CASE("sieve agrees with trial division through 10^4") {
  const MobiusTable t = sieve_mobius(10000);
  for (std::uint64_t n = 1; n <= 10000; ++n) {
    REQUIRE(t(n) == oracle::mobius(n));
    REQUIRE(mobius_direct(n) == oracle::mobius(n));
  }
}

TEST_CASE("sieve is multiplicative and vanishes on squares") {
  const std::uint64_t n_max = 5000;
  const MobiusTable t(n_max);
  for (std::uint64_t m = 1; m <= 70; ++m) {
    for (std::uint64_t n = 1; m * n <= n_max; ++n) {
      if (std::gcd(m, n) == 1) REQUIRE(t(m * n) == t(m) * t(n));
    }
  }
  for (std::uint64_t d : {2u, 3u, 5u, 7u}) {
    for (std::uint64_t k = 1; d * d * k <= n_max; ++k) {
      REQUIRE(t(d * d * k) == 0);
      if (k % d != 0) REQUIRE(t(d * k) == t(d) * t(k));
    }
  }
}

TEST_CASE("residue mertens sums") {
  const MobiusTable t(100);
  CHECK(residue_mertens(t, 2, 4) == -1);
  CHECK(residue_mertens(t, 5, 4) == 0);
  CHECK(residue_mertens(t, 3, 9) == 0);
  CHECK(residue_mertens(t, 2, 101) == residue_mertens(t, 2, 100));
  CHECK_THROWS_AS(residue_mertens(t, 2, 202), InvalidArgument);
  CHECK_THROWS_AS(residue_mertens(t, 0, 10), InvalidArgument);
}

TEST_CASE("table bounds and argument errors") {
  CHECK_THROWS_AS(MobiusTable(0), InvalidArgument);
  const MobiusTable t(10);
  CHECK(t.n_max() == 10);
  CHECK_THROWS_AS(t(0), InvalidArgument);
  CHECK_THROWS_AS(t(11), InvalidArgument);
  CHECK_THROWS_AS(t.mertens(11), InvalidArgument);
  CHECK_THROWS_AS(mobius_direct(0), InvalidArgument);
}

TEST_CASE("primes and factorization") {
  CHECK_FALSE(is_prime(0));
  CHECK_FALSE(is_prime(1));
  CHECK(is_prime(2));
  CHECK(is_prime(97));
  CHECK_FALSE(is_prime(91));
  CHECK(prime_factors(360) == std::vector<std::uint64_t>{2, 2, 2, 3, 3, 5});
  CHECK(prime_factors(1).empty());
  CHECK(prime_factors(13) == std::vector<std::uint64_t>{13});
}
