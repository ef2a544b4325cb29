#include "rankone/tower.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "rankone/error.hpp"

namespace rankone {

namespace {

constexpr const char* kModule = "tower";

std::uint64_t checked_size(const HeightTable& table, int K) {
  const BigInt& L = table.levels(K);
  if (L > kMaxTowerLevels) {
    throw DepthTooShallow(kModule, "stage " + std::to_string(K) + " tower has " + L.str() +
                                       " levels, above the materialization limit " +
                                       std::to_string(kMaxTowerLevels));
  }
  return L.convert_to<std::uint64_t>();
}

}  // namespace

TowerModel::TowerModel(int ref_stage, int depth, HeightTable heights, std::vector<std::int32_t> codes)
    : ref_stage_(ref_stage),
      depth_(depth),
      heights_(std::move(heights)),
      codes_(std::move(codes)),
      reference_levels_(heights_.levels_u64(ref_stage)),
      copies_(static_cast<std::uint64_t>(std::count(codes_.begin(), codes_.end(), 0))) {}

TowerModel build_labels(const Construction& params, int j, int K) {
  if (j < 1 || K < j) throw InvalidArgument(kModule, "build_labels requires 1 <= j <= K");
  HeightTable table = heights(params, K);
  const std::uint64_t total = checked_size(table, K);
  const std::uint64_t base = table.levels_u64(j);

  std::vector<std::int32_t> word;
  word.reserve(total);
  for (std::uint64_t l = 0; l < base; ++l) word.push_back(static_cast<std::int32_t>(l));

  for (int m = j; m < K; ++m) {
    const StageParams st = params.stage(m);
    const std::size_t column = word.size();
    for (int i = 0; i < st.r; ++i) {
      if (i > 0) word.insert(word.end(), word.begin(), word.begin() + static_cast<std::ptrdiff_t>(column));
      word.insert(word.end(), static_cast<std::size_t>(st.s[static_cast<std::size_t>(i)]), -m);
    }
  }
  return TowerModel(j, K, std::move(table), std::move(word));
}

int depth_for_levels(const Construction& params, int j, std::uint64_t min_levels) {
  if (j < 1) throw InvalidArgument(kModule, "stage index must be >= 1");
  BigInt L = params.h1() + 1;
  for (int m = 1; m < j; ++m) {
    const StageParams st = params.stage(m);
    L = L * st.r + st.spacer_sum();
  }
  int K = j;
  while (L < min_levels) {
    const StageParams st = params.stage(K);
    L = L * st.r + st.spacer_sum();
    ++K;
  }
  return K;
}

LevelMeasures level_measures(const TowerModel& model) {
  LevelMeasures out;
  out.counts.assign(model.reference_levels(), 0);
  for (std::int32_t c : model.codes()) {
    if (c >= 0) {
      ++out.counts[static_cast<std::size_t>(c)];
    } else {
      ++out.spacer_count;
    }
  }
  out.total = model.size();
  return out;
}

double tail_mass(const Construction& params, int K, int probe) {
  if (K < 1 || probe < 0) throw InvalidArgument(kModule, "tail_mass requires K >= 1 and probe >= 0");
  const HeightTable table = heights(params, K + probe);
  // L_{m+1} W_{m+1} / (L_m W_m) = 1 + (sum_i s_m(i)) / (r_m L_m)
  long double growth = 1.0L;
  for (int m = K; m < K + probe; ++m) {
    const StageParams st = params.stage(m);
    const long double Lm = table.levels(m).convert_to<long double>();
    growth *= 1.0L + static_cast<long double>(st.spacer_sum()) / (static_cast<long double>(st.r) * Lm);
  }
  return static_cast<double>(1.0L - 1.0L / growth);
}

CorrelationMatrix::CorrelationMatrix(int stage, int depth, std::int64_t shift, std::uint32_t levels,
                                     std::uint64_t denominator, std::vector<Entry> entries, double tail)
    : stage_(stage),
      depth_(depth),
      shift_(shift),
      levels_(levels),
      denominator_(denominator),
      entries_(std::move(entries)),
      tail_(tail) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& x, const Entry& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
  if (levels_ <= kDenseCorrelationLimit) {
    const std::size_t cells = levels_ + 1;
    dense_.assign(cells * cells, 0);
    for (const Entry& e : entries_) dense_[e.a * cells + e.b] = e.count;
  }
}

std::uint64_t CorrelationMatrix::count(std::uint32_t a, std::uint32_t b) const {
  if (a > levels_ || b > levels_) throw InvalidArgument(kModule, "correlation cell out of range");
  if (!dense_.empty()) return dense_[a * (levels_ + 1) + b];
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair(a, b),
                                   [](const Entry& e, const std::pair<std::uint32_t, std::uint32_t>& key) {
                                     return std::pair(e.a, e.b) < key;
                                   });
  return (it != entries_.end() && it->a == a && it->b == b) ? it->count : 0;
}

double CorrelationMatrix::row_sum(std::uint32_t a) const {
  std::uint64_t sum = 0;
  for (const Entry& e : entries_) {
    if (e.a == a) sum += e.count;
  }
  return static_cast<double>(sum) / static_cast<double>(denominator_);
}

double CorrelationMatrix::error_bound() const {
  return static_cast<double>(shift_ < 0 ? -shift_ : shift_) / static_cast<double>(denominator_) + tail_;
}

CorrelationMatrix correlate(const Construction& params, const TowerModel& model, std::int64_t n, int tail_probe) {
  const std::uint64_t size = model.size();
  const std::uint64_t abs_n = static_cast<std::uint64_t>(n < 0 ? -n : n);
  if (abs_n >= size) {
    throw DepthTooShallow(kModule, "shift " + std::to_string(n) + " needs more than the " + std::to_string(size) +
                                       " levels of the stage-" + std::to_string(model.depth()) + " tower");
  }
  const auto levels = static_cast<std::uint32_t>(model.reference_levels());
  const std::uint32_t cells = levels + 1;
  const auto codes = model.codes();
  auto cell = [levels](std::int32_t c) { return c >= 0 ? static_cast<std::uint32_t>(c) : levels; };

  const std::uint64_t lo = n < 0 ? abs_n : 0;
  const std::uint64_t hi = n < 0 ? size : size - abs_n;
  std::vector<CorrelationMatrix::Entry> entries;
  if (levels <= kDenseCorrelationLimit) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(cells) * cells, 0);
    for (std::uint64_t l = lo; l < hi; ++l) {
      ++counts[cell(codes[l]) * cells + cell(codes[static_cast<std::uint64_t>(static_cast<std::int64_t>(l) + n)])];
    }
    for (std::uint32_t a = 0; a < cells; ++a) {
      for (std::uint32_t b = 0; b < cells; ++b) {
        if (const auto c = counts[a * cells + b]) entries.push_back({a, b, c});
      }
    }
  } else {
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    for (std::uint64_t l = lo; l < hi; ++l) {
      const std::uint64_t key = std::uint64_t{cell(codes[l])} * cells +
                                cell(codes[static_cast<std::uint64_t>(static_cast<std::int64_t>(l) + n)]);
      ++counts[key];
    }
    entries.reserve(counts.size());
    for (const auto& [key, c] : counts) {
      entries.push_back({static_cast<std::uint32_t>(key / cells), static_cast<std::uint32_t>(key % cells), c});
    }
  }
  return CorrelationMatrix(model.ref_stage(), model.depth(), n, levels, size, std::move(entries),
                           tail_mass(params, model.depth(), tail_probe));
}

CorrelationMatrix correlation_matrix(const Construction& params, int j, int K, std::int64_t n) {
  return correlate(params, build_labels(params, j, K), n);
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix) {
  out << "A,B,value,error\n";
  const double err = matrix.error_bound();
  for (const auto& e : matrix.entries()) {
    if (e.a == matrix.spacer_cell() || e.b == matrix.spacer_cell()) continue;
    out << fmt::format("{},{},{},{}\n", e.a, e.b,
                       static_cast<double>(e.count) / static_cast<double>(matrix.denominator()), err);
  }
}

std::vector<LevelLabel> orbit_labels(const TowerModel& model, std::uint64_t start, std::uint64_t N) {
  if (N == 0) throw InvalidArgument(kModule, "orbit length N must be positive");
  if (start >= model.size() || N >= model.size() - start) {
    throw DepthTooShallow(kModule, "orbit from level " + std::to_string(start) + " of length " + std::to_string(N) +
                                       " leaves the stage-" + std::to_string(model.depth()) + " tower of " +
                                       std::to_string(model.size()) + " levels");
  }
  std::vector<LevelLabel> out;
  out.reserve(N);
  for (std::uint64_t i = 1; i <= N; ++i) out.push_back(model.label(start + i));
  return out;
}

std::vector<LevelLabel> orbit_labels(const Construction& params, int j, int K, std::uint64_t start,
                                     std::uint64_t N) {
  return orbit_labels(build_labels(params, j, K), start, N);
}

}  // namespace rankone
