#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rankone {

/// Sieved values of the Möbius function on 1..n_max.
///
/// Storage is 0-based internally but the public accessors are 1-based: the
/// entry for n = 0 does not exist.
class MobiusTable {
 public:
  /// Linear sieve. Throws InvalidArgument when n_max == 0.
  explicit MobiusTable(std::uint64_t n_max);

  std::uint64_t n_max() const { return static_cast<std::uint64_t>(values_.size()); }

  /// mu(n) for 1 <= n <= n_max. Throws InvalidArgument outside that range.
  int operator()(std::uint64_t n) const;

  /// Unchecked access, 1 <= n <= n_max.
  int at_unchecked(std::uint64_t n) const { return values_[n - 1]; }

  /// Values mu(1), ..., mu(n_max).
  std::span<const std::int8_t> values() const { return values_; }

  /// Sum of mu(n) for n <= N (N <= n_max).
  std::int64_t mertens(std::uint64_t N) const;

 private:
  std::vector<std::int8_t> values_;
};

MobiusTable sieve_mobius(std::uint64_t n_max);

/// Trial-division evaluation of mu(n); the independent oracle for the sieve.
int mobius_direct(std::uint64_t n);

/// Sum of mu(p*i) over 0 < i <= N/p. Requires p*floor(N/p) <= n_max.
std::int64_t residue_mertens(const MobiusTable& table, std::uint64_t p, std::uint64_t N);

bool is_prime(std::uint64_t n);

/// Prime factors of n with multiplicity, in nondecreasing order.
std::vector<std::uint64_t> prime_factors(std::uint64_t n);

}  // namespace rankone
