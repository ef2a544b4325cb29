#include "rankone/sarnak.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "rankone/error.hpp"

namespace rankone {

namespace {

constexpr const char* kModule = "sarnak";

void require_compatible(const TowerModel& model, const Observable& f) {
  if (model.ref_stage() != f.stage() || model.reference_levels() != f.levels()) {
    throw InvalidArgument(kModule, "observable is defined on stage " + std::to_string(f.stage()) +
                                       " but the tower model is labeled relative to stage " +
                                       std::to_string(model.ref_stage()));
  }
}

void require_partition(const TowerModel& model, const FactorPartition& partition) {
  if (partition.depth != model.depth() || partition.classes.size() != model.size()) {
    throw InvalidArgument(kModule, "factor partition depth " + std::to_string(partition.depth) +
                                       " does not match tower depth " + std::to_string(model.depth()));
  }
}

/// Numerator of f at a stage-K level.
std::int64_t value_at(const TowerModel& model, const Observable& f, std::uint64_t level) {
  const std::int32_t code = model.codes()[level];
  return code >= 0 ? f.numerator(static_cast<std::uint64_t>(code)) : 0;
}

void require_orbit(const TowerModel& model, std::uint64_t start, std::uint64_t span) {
  if (start >= model.size() || span >= model.size() - start) {
    throw DepthTooShallow(kModule, "orbit from level " + std::to_string(start) + " spanning " + std::to_string(span) +
                                       " steps leaves the stage-" + std::to_string(model.depth()) + " tower of " +
                                       std::to_string(model.size()) + " levels");
  }
}

void require_table(const MobiusTable& table, std::uint64_t N) {
  if (N > table.n_max()) {
    throw InvalidArgument(kModule, "Möbius table stops at " + std::to_string(table.n_max()) + " but N = " +
                                       std::to_string(N));
  }
}

void require_support_in_E(const TowerModel& model, const FactorPartition& partition, const Observable& f,
                          std::uint64_t start) {
  if (partition.class_of(start) != 0) {
    throw InvalidArgument(kModule, "start level " + std::to_string(start) + " is not in E (class " +
                                       std::to_string(partition.class_of(start)) + ")");
  }
  for (std::uint64_t l = 0; l < model.size(); ++l) {
    if (value_at(model, f, l) != 0 && partition.class_of(l) != 0) {
      throw InvalidArgument(kModule, "observable is nonzero on level " + std::to_string(l) + " outside E");
    }
  }
}

/// Saturating a * b, capped at `cap` + 1.
std::uint64_t mul_capped(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  if (a != 0 && b > (cap + 1) / a) return cap + 1;
  return std::min(a * b, cap + 1);
}

struct StrideContext {
  const TowerModel& model;
  const Observable& f;
  const MobiusTable& table;
  std::uint64_t start;

  /// sum_{k <= count} f(T^{stride k} x) w(k)
  template <typename Weight>
  std::int64_t sum(std::uint64_t stride, std::uint64_t count, Weight w) const {
    std::int64_t total = 0;
    for (std::uint64_t k = 1; k <= count; ++k) {
      const std::int64_t v = value_at(model, f, start + stride * k);
      if (v != 0) total += v * w(k);
    }
    return total;
  }
};

TelescopeResult telescope_at_stride(const TowerModel& model, const Observable& f, std::int64_t d, std::uint64_t stride, std::uint64_t start, std::uint64_t N,
                                    const MobiusTable& table) {
  const auto ud = static_cast<std::uint64_t>(d);
  const StrideContext ctx{model, f, table, start};
  const int mu_d = table(ud);
  const std::int64_t lhs = ctx.sum(stride, N, [&](std::uint64_t i) { return table.at_unchecked(i); });
  const std::int64_t leading = mu_d * ctx.sum(stride * ud, N / ud, [&](std::uint64_t k) { return table.at_unchecked(k); });
  const std::int64_t correction =
      mu_d * ctx.sum(stride * ud * ud, N / (ud * ud), [&](std::uint64_t m) { return table.at_unchecked(ud * m); });

  TelescopeResult out;
  out.d = d;
  out.stride = stride;
  out.N = N;
  out.lhs = Rational(lhs, f.denominator());
  out.leading = Rational(leading, f.denominator());
  out.correction = Rational(correction, f.denominator());
  out.rhs = Rational(leading - correction, f.denominator());
  out.equal = lhs == leading - correction;
  return out;
}

void require_prime_divisor(const FactorPartition& partition, std::int64_t d) {
  if (d < 2 || !is_prime(static_cast<std::uint64_t>(d))) {
    throw InvalidArgument(kModule, "prime extension needs a prime d (got " + std::to_string(d) + ")");
  }
  if (partition.d % d != 0) {
    throw InvalidArgument(kModule, "d = " + std::to_string(d) + " does not divide the factor order " +
                                       std::to_string(partition.d));
  }
}

}  // namespace

Observable::Observable(int stage, std::vector<std::int64_t> numerators, std::int64_t denominator)
    : stage_(stage), numerators_(std::move(numerators)), denominator_(denominator) {
  if (stage_ < 1) throw InvalidArgument(kModule, "observable stage must be >= 1");
  if (denominator_ <= 0) throw InvalidArgument(kModule, "observable denominator must be positive");
  if (numerators_.empty()) throw InvalidArgument(kModule, "observable needs at least one level");
}

Observable Observable::indicator(int stage, std::uint64_t levels, const std::vector<std::uint64_t>& support) {
  std::vector<std::int64_t> num(levels, 0);
  for (std::uint64_t a : support) {
    if (a >= levels) throw InvalidArgument(kModule, "indicator level " + std::to_string(a) + " out of range");
    num[a] = 1;
  }
  return Observable(stage, std::move(num));
}

Rational Observable::sup_norm() const {
  std::int64_t top = 0;
  for (std::int64_t v : numerators_) top = std::max(top, v < 0 ? -v : v);
  return {top, denominator_};
}

MobiusSum mobius_weighted_sum(const TowerModel& model, const Observable& f, std::uint64_t start, std::uint64_t N,
                              const MobiusTable& table) {
  require_compatible(model, f);
  if (N == 0) throw InvalidArgument(kModule, "N must be positive");
  require_orbit(model, start, N);
  require_table(table, N);

  std::vector<std::uint64_t> marks;
  for (std::uint64_t c = 100; c < N; c *= 10) marks.push_back(c);
  marks.push_back(N);

  MobiusSum out;
  std::int64_t acc = 0;
  std::size_t next = 0;
  for (std::uint64_t i = 1; i <= N; ++i) {
    const std::int64_t v = value_at(model, f, start + i);
    if (v != 0) acc += v * table.at_unchecked(i);
    if (i == marks[next]) {
      const double ratio = std::abs(static_cast<double>(acc)) / static_cast<double>(f.denominator()) /
                           static_cast<double>(i);
      out.checkpoints.push_back({i, Rational(acc, f.denominator()), ratio});
      ++next;
    }
  }
  out.total = Rational(acc, f.denominator());
  return out;
}

MobiusSum mobius_weighted_sum(const Construction& params, const Observable& f, std::uint64_t start, std::uint64_t N,
                              int K, const MobiusTable& table) {
  return mobius_weighted_sum(build_labels(params, f.stage(), K), f, start, N, table);
}

void write_decay_csv(std::ostream& out, const MobiusSum& sum) {
  out << "N,S_N,S_N/N\n";
  for (const auto& c : sum.checkpoints) {
    const std::string value = c.sum.denominator() == 1
                                  ? std::to_string(c.sum.numerator())
                                  : fmt::format("{}/{}", c.sum.numerator(), c.sum.denominator());
    const double signed_ratio = static_cast<double>(c.sum.numerator()) / static_cast<double>(c.sum.denominator()) /
                                static_cast<double>(c.n);
    out << fmt::format("{},{},{}\n", c.n, value, signed_ratio);
  }
}

FactorPartition compact_factor(const Construction& params, int horizon, int K) {
  if (horizon < 1 || K < 1) throw InvalidArgument(kModule, "compact_factor requires horizon, K >= 1");
  const EigenvalueOrder order = eigenvalue_order(params, tail_start(horizon), horizon);
  const int last = std::max(K, horizon);
  const HeightTable table = heights(params, last + 1);

  FactorPartition out;
  out.d = order.d;
  out.depth = K;
  for (int m = 1; m <= last; ++m) {
    const StageParams st = params.stage(m);
    FactorPartition::StageOffsets entry;
    entry.stage = m;
    BigInt offset = 0;
    for (int i = 0; i < st.r; ++i) {
      entry.offsets.push_back(offset);
      if (offset % out.d != 0) entry.divisible = false;
      offset += table.levels(m) + st.s[static_cast<std::size_t>(i)];
    }
    if (!entry.divisible) {
      if (m >= K) {
        throw ConsistencyFailure(kModule, "column offsets at stage " + std::to_string(m) + " are not divisible by d = " +
                                              std::to_string(out.d));
      }
      out.consistent_from = m + 1;
    }
    out.stages.push_back(std::move(entry));
  }

  const BigInt& levels = table.levels(K);
  if (levels > kMaxTowerLevels) {
    throw DepthTooShallow(kModule, "stage " + std::to_string(K) + " tower is too large to partition");
  }
  const auto size = levels.convert_to<std::uint64_t>();
  out.classes.resize(size);
  const auto ud = static_cast<std::uint64_t>(out.d);
  for (std::uint64_t l = 0; l < size; ++l) out.classes[l] = static_cast<std::uint32_t>(l % ud);
  return out;
}

CyclicityCheck verify_factor_cyclicity(const FactorPartition& partition, const TowerModel& model) {
  require_partition(model, partition);
  CyclicityCheck out;
  const auto ud = static_cast<std::uint32_t>(partition.d);
  const auto codes = model.codes();
  for (std::uint64_t l = 0; l < model.size(); ++l) {
    if (l + 1 < model.size()) {
      ++out.transitions;
      if (partition.classes[l + 1] != (partition.classes[l] + 1) % ud) ++out.transition_failures;
    }
    if (codes[l] >= 0) {
      ++out.reference_levels;
      if (partition.classes[l] != static_cast<std::uint32_t>(codes[l]) % ud) ++out.label_mismatches;
    }
  }
  return out;
}

TelescopeResult telescope_identity_check(const TowerModel& model, const FactorPartition& partition,
                                         const Observable& f, std::int64_t d, std::uint64_t start, std::uint64_t N,
                                         const MobiusTable& table) {
  require_prime_divisor(partition, d);
  require_compatible(model, f);
  require_partition(model, partition);
  require_orbit(model, start, N);
  require_table(table, N);
  require_support_in_E(model, partition, f, start);
  return telescope_at_stride(model, f, d, 1, start, N, table);
}

std::vector<TelescopeResult> composite_extension_check(const TowerModel& model, const FactorPartition& partition,
                                                       const Observable& f, std::int64_t d, std::uint64_t start,
                                                       std::uint64_t N, const MobiusTable& table) {
  if (d < 2) throw InvalidArgument(kModule, "extension order d must be >= 2");
  if (partition.d % d != 0) {
    throw InvalidArgument(kModule, "d = " + std::to_string(d) + " does not divide the factor order " +
                                       std::to_string(partition.d));
  }
  require_compatible(model, f);
  require_partition(model, partition);
  require_orbit(model, start, N);
  require_table(table, N);
  require_support_in_E(model, partition, f, start);

  std::vector<TelescopeResult> out;
  std::uint64_t stride = 1;
  std::uint64_t count = N;
  for (std::uint64_t p : prime_factors(static_cast<std::uint64_t>(d))) {
    out.push_back(telescope_at_stride(model, f, static_cast<std::int64_t>(p), stride, start, count, table));
    stride *= p;
    count /= p;
  }
  return out;
}

PrimeExtensionReport prime_extension_report(const TowerModel& model, const FactorPartition& partition,
                                            const Observable& f, std::int64_t d, std::uint64_t start,
                                            std::uint64_t N, int M, const MobiusTable& table) {
  if (M < 1) throw InvalidArgument(kModule, "recursion depth M must be >= 1");
  require_prime_divisor(partition, d);
  require_compatible(model, f);
  require_partition(model, partition);
  require_orbit(model, start, N);
  require_table(table, N);
  require_support_in_E(model, partition, f, start);

  const auto ud = static_cast<std::uint64_t>(d);
  const StrideContext ctx{model, f, table, start};
  const int mu_d = table(ud);
  const std::int64_t total = ctx.sum(1, N, [&](std::uint64_t i) { return table.at_unchecked(i); });
  const double norm = boost::rational_cast<double>(f.sup_norm());

  PrimeExtensionReport out;
  out.total = Rational(total, f.denominator());
  std::int64_t term_sum = 0;
  std::int64_t abs_term_sum = 0;
  std::int64_t remainder = 0;
  std::uint64_t power = 1;  // d^u, saturated above N
  for (int u = 1; u <= M; ++u) {
    power = mul_capped(power, ud, N);
    const std::uint64_t next = mul_capped(power, ud, N);
    const std::int64_t term =
        power > N ? 0 : mu_d * ctx.sum(power, N / power, [&](std::uint64_t k) { return table.at_unchecked(k); });
    remainder = next > N ? 0 : ctx.sum(next, N / next, [&](std::uint64_t k) { return table.at_unchecked(ud * k); });
    term_sum += term;
    abs_term_sum += term < 0 ? -term : term;
    out.unfoldings.push_back({u, Rational(term, f.denominator()), Rational(remainder, f.denominator()),
                              static_cast<double>(N) * norm / std::pow(static_cast<double>(d), u)});
  }
  out.identity_holds = total == term_sum + remainder;

  // |total| d^M <= (sum |term_u|) d^M + N max|num|, all over the common denominator.
  BigInt dM = 1;
  for (int u = 0; u < M; ++u) dM *= d;
  const BigInt lhs = BigInt(total < 0 ? -total : total) * dM;
  std::int64_t max_num = 0;
  for (std::int64_t v : f.numerators()) max_num = std::max(max_num, v < 0 ? -v : v);
  const BigInt rhs = BigInt(abs_term_sum) * dM + BigInt(N) * BigInt(max_num);
  out.bound_holds = lhs <= rhs;
  return out;
}

std::vector<Observable> decompose_observable(const Observable& F, const FactorPartition& partition) {
  if (F.stage() < partition.consistent_from && partition.d > 1) {
    throw ConsistencyFailure(kModule, "stage-" + std::to_string(F.stage()) +
                                          " levels do not have well-defined classes; the partition is consistent from stage " +
                                          std::to_string(partition.consistent_from));
  }
  const auto ud = static_cast<std::uint64_t>(partition.d);
  std::vector<std::vector<std::int64_t>> parts(ud, std::vector<std::int64_t>(F.levels(), 0));
  for (std::uint64_t a = 0; a < F.levels(); ++a) parts[a % ud][a] = F.numerator(a);
  std::vector<Observable> out;
  out.reserve(ud);
  for (auto& num : parts) out.emplace_back(F.stage(), std::move(num), F.denominator());
  return out;
}

}  // namespace rankone
