#include "rankone/mobius.hpp"

#include <string>

#include "rankone/error.hpp"

namespace rankone {

MobiusTable::MobiusTable(std::uint64_t n_max) {
  if (n_max == 0) throw InvalidArgument("arith_mobius", "n_max must be >= 1");
  values_.assign(n_max, 0);
  // Linear sieve over 1..n_max; index i holds mu(i + 1).
  std::vector<std::uint32_t> primes;
  std::vector<bool> composite(n_max + 1, false);
  values_[0] = 1;
  for (std::uint64_t i = 2; i <= n_max; ++i) {
    if (!composite[i]) {
      primes.push_back(static_cast<std::uint32_t>(i));
      values_[i - 1] = -1;
    }
    for (std::uint32_t p : primes) {
      const std::uint64_t m = i * p;
      if (m > n_max) break;
      composite[m] = true;
      if (i % p == 0) {
        values_[m - 1] = 0;
        break;
      }
      values_[m - 1] = static_cast<std::int8_t>(-values_[i - 1]);
    }
  }
}

int MobiusTable::operator()(std::uint64_t n) const {
  if (n == 0 || n > n_max()) {
    throw InvalidArgument("arith_mobius",
                          "index " + std::to_string(n) + " outside table 1.." + std::to_string(n_max()));
  }
  return values_[n - 1];
}

std::int64_t MobiusTable::mertens(std::uint64_t N) const {
  if (N > n_max()) {
    throw InvalidArgument("arith_mobius",
                          "Mertens sum to " + std::to_string(N) + " exceeds table size " + std::to_string(n_max()));
  }
  std::int64_t sum = 0;
  for (std::uint64_t n = 0; n < N; ++n) sum += values_[n];
  return sum;
}

MobiusTable sieve_mobius(std::uint64_t n_max) { return MobiusTable(n_max); }

int mobius_direct(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("arith_mobius", "mu(0) is undefined");
  int sign = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return 0;
    sign = -sign;
  }
  if (n > 1) sign = -sign;
  return sign;
}

std::int64_t residue_mertens(const MobiusTable& table, std::uint64_t p, std::uint64_t N) {
  if (p == 0) throw InvalidArgument("arith_mobius", "residue_mertens requires p >= 1");
  const std::uint64_t count = N / p;
  if (count * p > table.n_max()) {
    throw InvalidArgument("arith_mobius", "residue sum needs mu up to " + std::to_string(count * p) +
                                              " but table stops at " + std::to_string(table.n_max()));
  }
  std::int64_t sum = 0;
  for (std::uint64_t i = 1; i <= count; ++i) sum += table.at_unchecked(p * i);
  return sum;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace rankone
