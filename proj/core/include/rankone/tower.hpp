#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "rankone/construction.hpp"

namespace rankone {

/// Label of one stage-K level relative to a reference stage j: either a
/// stage-j level index or a spacer added while building towers j+1..K.
class LevelLabel {
 public:
  static constexpr LevelLabel reference(std::int32_t index) { return LevelLabel(index); }
  static constexpr LevelLabel spacer(std::int32_t stage) { return LevelLabel(-stage); }
  static constexpr LevelLabel from_code(std::int32_t code) { return LevelLabel(code); }

  constexpr bool is_reference() const { return code_ >= 0; }
  constexpr bool is_spacer() const { return code_ < 0; }
  constexpr std::int32_t index() const { return code_; }
  constexpr std::int32_t spacer_stage() const { return -code_; }
  constexpr std::int32_t code() const { return code_; }

  friend constexpr bool operator==(LevelLabel, LevelLabel) = default;

 private:
  constexpr explicit LevelLabel(std::int32_t code) : code_(code) {}
  std::int32_t code_;
};

/// Upper limit on L_K for materialized towers.
inline constexpr std::uint64_t kMaxTowerLevels = std::uint64_t{1} << 26;

/// Stage-K tower with each level labeled relative to stage j.
class TowerModel {
 public:
  TowerModel(int ref_stage, int depth, HeightTable heights, std::vector<std::int32_t> codes);

  int ref_stage() const { return ref_stage_; }
  int depth() const { return depth_; }
  const HeightTable& heights() const { return heights_; }

  /// L_K
  std::uint64_t size() const { return codes_.size(); }
  /// L_j
  std::uint64_t reference_levels() const { return reference_levels_; }

  LevelLabel label(std::uint64_t level) const { return LevelLabel::from_code(codes_[level]); }
  std::span<const std::int32_t> codes() const { return codes_; }

  /// Copies of the stage-j tower inside the stage-K tower (product of r_m).
  std::uint64_t copies() const { return copies_; }
  std::uint64_t spacer_count() const { return size() - reference_levels_ * copies_; }

 private:
  int ref_stage_;
  int depth_;
  HeightTable heights_;
  std::vector<std::int32_t> codes_;
  std::uint64_t reference_levels_;
  std::uint64_t copies_;
};

/// Cut-and-stack the stage-j tower up to stage K: each stage m concatenates
/// column 1, s_m(1) spacers, column 2, ..., column r_m, s_m(r_m) spacers.
TowerModel build_labels(const Construction& params, int j, int K);

/// Smallest depth K >= j with L_K >= min_levels.
int depth_for_levels(const Construction& params, int j, std::uint64_t min_levels);

struct LevelMeasures {
  /// Occurrences of each stage-j level in the stage-K tower (all equal).
  std::vector<std::uint64_t> counts;
  std::uint64_t spacer_count = 0;
  std::uint64_t total = 1;

  double value(std::size_t level) const { return static_cast<double>(counts[level]) / static_cast<double>(total); }
  double spacer_value() const { return static_cast<double>(spacer_count) / static_cast<double>(total); }
};

LevelMeasures level_measures(const TowerModel& model);

inline constexpr int kDefaultTailProbe = 5;

/// Relative mass added by spacers between stage K and the probe stage K + probe:
/// 1 - L_K W_K / (L_{K'} W_{K'}) with W_m = prod_{u<m} 1/r_u.
double tail_mass(const Construction& params, int K, int probe = kDefaultTailProbe);

/// Finite-depth estimate of nu(A ∩ T^{-n} B) over stage-j levels A, B.
///
/// Entries are exact counts over the common denominator L_K. Cell index L_j
/// stands for the complement of the stage-j tower (spacers added after stage
/// j); together with the reference levels it partitions the stage-K tower, so
/// row sums over all cells differ from nu(A) only by top-exit pairs.
class CorrelationMatrix {
 public:
  struct Entry {
    std::uint32_t a;
    std::uint32_t b;
    std::uint64_t count;
  };

  CorrelationMatrix(int stage, int depth, std::int64_t shift, std::uint32_t levels, std::uint64_t denominator,
                    std::vector<Entry> entries, double tail);

  int stage() const { return stage_; }
  int depth() const { return depth_; }
  std::int64_t shift() const { return shift_; }
  /// Number of stage-j levels L_j; the spacer cell has this index.
  std::uint32_t levels() const { return levels_; }
  std::uint32_t spacer_cell() const { return levels_; }
  std::uint64_t denominator() const { return denominator_; }

  std::uint64_t count(std::uint32_t a, std::uint32_t b) const;
  double value(std::uint32_t a, std::uint32_t b) const {
    return static_cast<double>(count(a, b)) / static_cast<double>(denominator_);
  }
  /// Sum over every cell b (reference levels and the spacer cell).
  double row_sum(std::uint32_t a) const;

  double tail() const { return tail_; }
  double error_bound() const;

  /// Nonzero entries in lexicographic (a, b) order, spacer cell included.
  std::span<const Entry> entries() const { return entries_; }
  bool is_dense() const { return !dense_.empty(); }

 private:
  int stage_;
  int depth_;
  std::int64_t shift_;
  std::uint32_t levels_;
  std::uint64_t denominator_;
  std::vector<Entry> entries_;
  std::vector<std::uint64_t> dense_;
  double tail_;
};

inline constexpr std::uint32_t kDenseCorrelationLimit = 64;

/// Correlation at shift n on an existing model. Throws DepthTooShallow when |n| >= L_K.
CorrelationMatrix correlate(const Construction& params, const TowerModel& model, std::int64_t n,
                            int tail_probe = kDefaultTailProbe);

CorrelationMatrix correlation_matrix(const Construction& params, int j, int K, std::int64_t n);

/// Header `A,B,value,error`, nonzero reference-level pairs in (A, B) order.
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix);

/// Labels of levels start+1 .. start+N (the T-orbit of a point at level start).
std::vector<LevelLabel> orbit_labels(const TowerModel& model, std::uint64_t start, std::uint64_t N);
std::vector<LevelLabel> orbit_labels(const Construction& params, int j, int K, std::uint64_t start,
                                     std::uint64_t N);

}  // namespace rankone
