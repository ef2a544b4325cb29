#pragma once

// Independent reference implementations used to check the library. They are
// deliberately naive: string-free recursion on small inputs, trial division,
// brute-force pair counting.

#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rankone/construction.hpp"

namespace oracle {

inline int mobius(std::uint64_t n) {
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

inline std::vector<boost::multiprecision::cpp_int> levels(const rankone::Construction& c, int J) {
  std::vector<boost::multiprecision::cpp_int> L{c.h1() + 1};
  for (int j = 1; j < J; ++j) {
    const auto st = c.stage(j);
    boost::multiprecision::cpp_int next = 0;
    for (int i = 0; i < st.r; ++i) next += L.back() + st.s[static_cast<std::size_t>(i)];
    L.push_back(next);
  }
  return L;
}

// Stage-K word over stage-j labels: level index >= 0, spacer stage as -m.
inline std::vector<int> word(const rankone::Construction& c, int j, int K) {
  std::vector<int> w;
  const auto L = levels(c, j);
  for (int a = 0; a < static_cast<int>(L.back()); ++a) w.push_back(a);
  for (int m = j; m < K; ++m) {
    const auto st = c.stage(m);
    std::vector<int> next;
    for (int i = 0; i < st.r; ++i) {
      next.insert(next.end(), w.begin(), w.end());
      next.insert(next.end(), static_cast<std::size_t>(st.s[static_cast<std::size_t>(i)]), -m);
    }
    w = std::move(next);
  }
  return w;
}

// #{l : labels[l] = a, labels[l + n] = b} over valid l.
inline std::uint64_t pair_count(const std::vector<int>& w, std::int64_t n, int a, int b) {
  std::uint64_t count = 0;
  const auto size = static_cast<std::int64_t>(w.size());
  for (std::int64_t l = 0; l < size; ++l) {
    const std::int64_t t = l + n;
    if (t < 0 || t >= size) continue;
    if (w[static_cast<std::size_t>(l)] == a && w[static_cast<std::size_t>(t)] == b) ++count;
  }
  return count;
}

}  // namespace oracle
