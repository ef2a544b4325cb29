#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <boost/rational.hpp>

#include "rankone/construction.hpp"
#include "rankone/mobius.hpp"
#include "rankone/tower.hpp"

namespace rankone {

using Rational = boost::rational<std::int64_t>;

/// Finite combination of stage-j level indicators, f = sum_a (num[a] / den) 1_a.
/// Spacers added after stage j evaluate to zero.
class Observable {
 public:
  Observable(int stage, std::vector<std::int64_t> numerators, std::int64_t denominator = 1);

  /// Indicator of the given stage-j levels.
  static Observable indicator(int stage, std::uint64_t levels, const std::vector<std::uint64_t>& support);

  int stage() const { return stage_; }
  std::uint64_t levels() const { return numerators_.size(); }
  std::int64_t numerator(std::uint64_t level) const { return numerators_[level]; }
  std::int64_t denominator() const { return denominator_; }
  Rational coefficient(std::uint64_t level) const { return {numerators_[level], denominator_}; }
  const std::vector<std::int64_t>& numerators() const { return numerators_; }

  Rational sup_norm() const;

 private:
  int stage_;
  std::vector<std::int64_t> numerators_;
  std::int64_t denominator_;
};

struct MobiusCheckpoint {
  std::uint64_t n = 0;
  Rational sum;
  double ratio = 0.0;  // |S_n| / n
};

struct MobiusSum {
  Rational total;
  std::vector<MobiusCheckpoint> checkpoints;
};

/// S_N = sum_{i=1}^N f(T^i x) mu(i) for x at level `start` of the model's
/// stage-K tower, with checkpoints at 10^2, 10^3, ... and at N.
MobiusSum mobius_weighted_sum(const TowerModel& model, const Observable& f, std::uint64_t start, std::uint64_t N,
                              const MobiusTable& table);
MobiusSum mobius_weighted_sum(const Construction& params, const Observable& f, std::uint64_t start, std::uint64_t N,
                              int K, const MobiusTable& table);

/// Header `N,S_N,S_N/N`, one row per checkpoint.
void write_decay_csv(std::ostream& out, const MobiusSum& sum);

/// Cyclic factor E, TE, ..., T^{d-1} E realized on the stage-K tower: level l
/// belongs to class l mod d and E is class 0.
struct FactorPartition {
  struct StageOffsets {
    int stage = 0;
    /// Column start positions sum_{i' < i} (L_m + s_m(i')), i = 1..r.
    std::vector<BigInt> offsets;
    bool divisible = true;
  };

  std::int64_t d = 1;
  int depth = 0;
  std::vector<std::uint32_t> classes;
  std::vector<StageOffsets> stages;
  /// Every stage m >= consistent_from embeds with offsets divisible by d.
  int consistent_from = 1;

  std::uint32_t class_of(std::uint64_t level) const { return classes[level]; }
};

/// Throws OdometerCase for column-constant spacers and ConsistencyFailure when
/// a column offset at a stage >= K is not divisible by d.
FactorPartition compact_factor(const Construction& params, int horizon, int K);

struct CyclicityCheck {
  std::uint64_t transitions = 0;
  std::uint64_t transition_failures = 0;
  std::uint64_t reference_levels = 0;
  /// Levels labeled with a stage-j level a whose class is not a mod d.
  std::uint64_t label_mismatches = 0;

  bool ok() const { return transition_failures == 0 && label_mismatches == 0; }
};

/// Literal pass over the label array: class(l+1) = class(l) + 1 mod d and
/// class(l) = a mod d for every level labeled with stage-j level a.
CyclicityCheck verify_factor_cyclicity(const FactorPartition& partition, const TowerModel& model);

struct TelescopeResult {
  std::int64_t d = 0;
  std::uint64_t stride = 1;
  std::uint64_t N = 0;
  /// sum_{i<=N} f(T^{stride i} x) mu(i)
  Rational lhs;
  /// mu(d) sum_{k<=N/d} f(S^k x) mu(k),  S = T^{stride d}
  Rational leading;
  /// mu(d) sum_{m<=N/d^2} f(S^{dm} x) mu(dm)
  Rational correction;
  Rational rhs;
  bool equal = false;
};

/// Prime-extension identity for f supported on E and x in E. d must be prime
/// and divide the partition's order.
TelescopeResult telescope_identity_check(const TowerModel& model, const FactorPartition& partition,
                                         const Observable& f, std::int64_t d, std::uint64_t start, std::uint64_t N,
                                         const MobiusTable& table);

/// Composite order: one identity per prime factor of d in nondecreasing
/// order, each applied to the Möbius sum of the previous power T^{stride}.
std::vector<TelescopeResult> composite_extension_check(const TowerModel& model, const FactorPartition& partition,
                                                       const Observable& f, std::int64_t d, std::uint64_t start,
                                                       std::uint64_t N, const MobiusTable& table);

struct PrimeExtensionReport {
  struct Unfolding {
    int u = 0;
    /// mu(d) sum_{k<=N/d^u} f(T^{d^u k} x) mu(k)
    Rational term;
    /// sum_{k<=N/d^{u+1}} f(T^{d^{u+1} k} x) mu(dk), what is left after u unfoldings
    Rational remainder;
    /// N ||f|| / d^u
    double crude_bound = 0.0;
  };
  Rational total;
  std::vector<Unfolding> unfoldings;
  /// total == sum of terms + last remainder
  bool identity_holds = false;
  /// |total| <= sum |term_u| + N ||f|| / d^M, exact
  bool bound_holds = false;
};

PrimeExtensionReport prime_extension_report(const TowerModel& model, const FactorPartition& partition,
                                            const Observable& f, std::int64_t d, std::uint64_t start,
                                            std::uint64_t N, int M, const MobiusTable& table);

/// F = f_0 + ... + f_{d-1} with supp f_i inside T^i E.
std::vector<Observable> decompose_observable(const Observable& F, const FactorPartition& partition);

}  // namespace rankone
