#include "rankone/construction.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>


#include "rankone/error.hpp"

namespace rankone {

namespace {

constexpr const char* kModule = "construction";

void validate(const StageParams& st) {
  if (st.r < 2) throw InvalidArgument(kModule, "r must be >= 2 (got " + std::to_string(st.r) + ")");
  if (static_cast<int>(st.s.size()) != st.r) {
    throw InvalidArgument(kModule, "spacer array has " + std::to_string(st.s.size()) +
                                       " entries but r = " + std::to_string(st.r));
  }
  for (int v : st.s) {
    if (v < 0) throw InvalidArgument(kModule, "spacer heights must be >= 0");
  }
}

void validate_h1(int h1) {
  if (h1 < 0) throw InvalidArgument(kModule, "h1 must be >= 0");
}

std::string stage_to_string(const StageParams& st) {
  std::string out = "r=" + std::to_string(st.r) + " s=(";
  for (std::size_t i = 0; i < st.s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(st.s[i]);
  }
  return out + ")";
}

std::int64_t to_i64(const BigInt& v) {
  if (v > std::numeric_limits<std::int64_t>::max()) {
    throw InvalidArgument(kModule, "eigenvalue order exceeds 64-bit range");
  }
  return v.convert_to<std::int64_t>();
}

}  // namespace

StageParams::StageParams(int columns, std::vector<int> spacers) : r(columns), s(std::move(spacers)) {
  validate(*this);
}

int StageParams::spacer_sum() const { return std::accumulate(s.begin(), s.end(), 0); }
int StageParams::spacer_max() const { return *std::max_element(s.begin(), s.end()); }
int StageParams::spacer_min() const { return *std::min_element(s.begin(), s.end()); }
int StageParams::spacer_min_first() const { return *std::min_element(s.begin(), s.end() - 1); }

Construction Construction::explicit_stages(int h1, std::vector<StageParams> stages) {
  validate_h1(h1);
  for (const auto& st : stages) validate(st);
  Construction c;
  c.kind_ = Kind::Explicit;
  c.h1_ = h1;
  c.prefix_ = std::move(stages);
  c.name_ = "explicit";
  return c;
}

Construction Construction::periodic(int h1, std::vector<StageParams> pattern,
                                    std::vector<StageParams> prefix) {
  validate_h1(h1);
  if (pattern.empty()) throw InvalidArgument(kModule, "periodic pattern must be nonempty");
  for (const auto& st : pattern) validate(st);
  for (const auto& st : prefix) validate(st);
  Construction c;
  c.kind_ = Kind::Periodic;
  c.h1_ = h1;
  c.pattern_ = std::move(pattern);
  c.prefix_ = std::move(prefix);
  c.name_ = "periodic";
  return c;
}

Construction Construction::random_bounded(int h1, int r_max, int s_max, std::uint64_t seed) {
  validate_h1(h1);
  if (r_max < 2) throw InvalidArgument(kModule, "random r_max must be >= 2");
  if (s_max < 0) throw InvalidArgument(kModule, "random s_max must be >= 0");
  Construction c;
  c.kind_ = Kind::Random;
  c.h1_ = h1;
  c.r_max_ = r_max;
  c.s_max_ = s_max;
  c.seed_ = seed;
  c.name_ = "random";
  return c;
}

Construction Construction::odometer(int p, int h1) {
  if (p < 2) throw InvalidArgument(kModule, "odometer base must be >= 2");
  auto c = periodic(h1, {StageParams(p, std::vector<int>(p, 0))});
  c.name_ = "odometer" + std::to_string(p);
  return c;
}

Construction Construction::chacon() {
  auto c = periodic(0, {StageParams(3, {0, 1, 0})});
  c.name_ = "chacon";
  return c;
}

Construction Construction::flat3() {
  auto c = periodic(0, {StageParams(3, {1, 1, 0})});
  c.name_ = "flat3";
  return c;
}

Construction Construction::class4() {
  auto c = periodic(1, {StageParams(2, {0, 2})});
  c.name_ = "class4";
  return c;
}

Construction Construction::preset(std::string_view name) {
  if (name == "chacon") return chacon();
  if (name == "flat3") return flat3();
  if (name == "class4") return class4();
  if (name.starts_with("odometer") && name.size() > 8) {
    int p = 0;
    for (char ch : name.substr(8)) {
      if (ch < '0' || ch > '9' || p > 1000) throw InvalidArgument(kModule, "unknown preset '" + std::string(name) + "'");
      p = p * 10 + (ch - '0');
    }
    return odometer(p);
  }
  throw InvalidArgument(kModule, "unknown preset '" + std::string(name) +
                                     "' (expected chacon, flat3, class4 or odometer<p>)");
}

Construction Construction::with_h1(int h1) const {
  validate_h1(h1);
  Construction c = *this;
  c.h1_ = h1;
  return c;
}

StageParams Construction::stage(int j) const {
  if (j < 1) throw InvalidArgument(kModule, "stage index must be >= 1");
  const auto idx = static_cast<std::size_t>(j - 1);
  switch (kind_) {
    case Kind::Explicit:
      if (idx >= prefix_.size()) {
        throw InvalidArgument(kModule, "stage " + std::to_string(j) + " is not defined (explicit list has " +
                                           std::to_string(prefix_.size()) + " stages)");
      }
      return prefix_[idx];
    case Kind::Periodic:
      if (idx < prefix_.size()) return prefix_[idx];
      return pattern_[(idx - prefix_.size()) % pattern_.size()];
    case Kind::Random: {
      std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                        static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<int> r_dist(2, r_max_);
      std::uniform_int_distribution<int> s_dist(0, s_max_);
      const int r = r_dist(rng);
      std::vector<int> s(static_cast<std::size_t>(r));
      for (auto& v : s) v = s_dist(rng);
      return StageParams(r, std::move(s));
    }
  }
  throw InvalidArgument(kModule, "corrupt construction kind");
}

std::optional<int> Construction::last_stage() const {
  if (kind_ == Kind::Explicit) return static_cast<int>(prefix_.size());
  return std::nullopt;
}

std::string Construction::describe() const {
  std::string out = name_ + " (h1=" + std::to_string(h1_);
  switch (kind_) {
    case Kind::Explicit:
    case Kind::Periodic: {
      if (!prefix_.empty()) {
        out += kind_ == Kind::Explicit ? ", stages:" : ", prefix:";
        for (const auto& st : prefix_) out += " [" + stage_to_string(st) + "]";
      }
      if (kind_ == Kind::Periodic) {
        out += ", repeating:";
        for (const auto& st : pattern_) out += " [" + stage_to_string(st) + "]";
      }
      break;
    }
    case Kind::Random:
      out += ", random r<=" + std::to_string(r_max_) + " s<=" + std::to_string(s_max_) +
             " seed=" + std::to_string(seed_);
      break;
  }
  return out + ")";
}

const BigInt& HeightTable::levels(int j) const {
  if (j < 1 || j > stages()) {
    throw InvalidArgument(kModule, "height table has stages 1.." + std::to_string(stages()) +
                                       ", requested " + std::to_string(j));
  }
  return levels_[static_cast<std::size_t>(j - 1)];
}

std::uint64_t HeightTable::levels_u64(int j) const {
  const BigInt& v = levels(j);
  if (v > std::numeric_limits<std::uint64_t>::max()) {
    throw InvalidArgument(kModule, "tower height at stage " + std::to_string(j) + " exceeds 64 bits");
  }
  return v.convert_to<std::uint64_t>();
}

double HeightTable::levels_double(int j) const { return levels(j).convert_to<double>(); }

HeightTable heights(const Construction& params, int J) {
  if (J < 1) throw InvalidArgument(kModule, "heights requires J >= 1");
  std::vector<BigInt> L;
  L.reserve(static_cast<std::size_t>(J));
  L.emplace_back(params.h1() + 1);
  for (int j = 1; j < J; ++j) {
    const StageParams st = params.stage(j);
    L.push_back(L.back() * st.r + st.spacer_sum());
  }
  return HeightTable(std::move(L));
}

BoundedProfile bounded_profile(const Construction& params, int J, std::optional<int> bound) {
  if (J < 1) throw InvalidArgument(kModule, "bounded_profile requires J >= 1");
  BoundedProfile out;
  for (int j = 1; j <= J; ++j) {
    const StageParams st = params.stage(j);
    out.r_sup = std::max(out.r_sup, st.r);
    out.s_sup = std::max(out.s_sup, st.spacer_max());
  }
  if (bound) out.is_bounded_on_horizon = out.r_sup <= *bound && out.s_sup <= *bound;
  return out;
}

bool WindowSet::lengths_nondecreasing() const {
  for (std::size_t k = 1; k < windows.size(); ++k) {
    if (windows[k].length() < windows[k - 1].length()) return false;
  }
  return true;
}

WindowSet find_windows(const Construction& params, int J, int B) {
  if (J < 1 || B < 1) throw InvalidArgument(kModule, "find_windows requires J, B >= 1");
  WindowSet out;
  int open = 0;  // first stage of the current run, 0 when none
  for (int j = 1; j <= J; ++j) {
    const StageParams st = params.stage(j);
    const bool ok = st.r <= B && st.spacer_max() <= B;
    if (ok && open == 0) open = j;
    if (!ok && open != 0) {
      out.windows.push_back({open, j - 1});
      open = 0;
    }
  }
  if (open != 0) out.windows.push_back({open, J});
  return out;
}

Flatness flatness(const Construction& params, StageWindow window) {
  if (window.first < 1 || window.last < window.first) {
    throw InvalidArgument(kModule, "flatness requires a nonempty window of stages >= 1");
  }
  Flatness out{true, true, std::nullopt};
  std::optional<int> common;
  bool common_constant = true;
  for (int j = window.first; j <= window.last; ++j) {
    const StageParams st = params.stage(j);
    const int first = st.s.front();
    const bool head_equal = std::all_of(st.s.begin(), st.s.end() - 1, [&](int v) { return v == first; });
    if (!head_equal) {
      out.flat_first = false;
      out.flat_strict = false;
      common_constant = false;
      continue;
    }
    if (st.s.back() != first) out.flat_strict = false;
    if (!common) {
      common = first;
    } else if (*common != first) {
      common_constant = false;
    }
  }
  if (out.flat_first && common_constant) out.s_value = common;
  return out;
}

std::vector<BigInt> return_times(const Construction& params, int j) {
  const HeightTable table = heights(params, j);
  const StageParams st = params.stage(j);
  std::vector<BigInt> out;
  out.reserve(st.s.size());
  for (int v : st.s) out.push_back(table.levels(j) + v);
  return out;
}

bool column_constant_spacers(const Construction& params, int first, int last) {
  for (int j = first; j <= last; ++j) {
    const StageParams st = params.stage(j);
    if (st.spacer_min() != st.spacer_max()) return false;
  }
  return true;
}

EigenvalueOrder eigenvalue_order(const Construction& params, int j0, int J) {
  if (j0 < 1 || J < j0) throw InvalidArgument(kModule, "eigenvalue_order requires 1 <= j0 <= J");
  if (column_constant_spacers(params, j0, J)) {
    throw OdometerCase(kModule, "spacers are column-constant on stages " + std::to_string(j0) + ".." +
                                    std::to_string(J) + "; the eigenvalue group is infinite");
  }
  const HeightTable table = heights(params, J);
  EigenvalueOrder out;
  BigInt g = 0;
  for (int j = j0; j <= J; ++j) {
    const StageParams st = params.stage(j);
    for (int v : st.s) g = boost::multiprecision::gcd(g, table.levels(j) + v);
    out.running.push_back(to_i64(g));
  }
  out.d = out.running.back();
  out.stable_since = J;
  for (int k = static_cast<int>(out.running.size()) - 1; k >= 0 && out.running[static_cast<std::size_t>(k)] == out.d; --k) {
    out.stable_since = j0 + k;
  }
  return out;
}

std::string ClassLabel::to_string() const {
  switch (kind) {
    case Kind::Odometer: return "Odometer";
    case Kind::FlatWeaklyMixing: return "FlatWeaklyMixing";
    case Kind::NonFlatWeaklyMixing: return "NonFlatWeaklyMixing";
    case Kind::NonFlatCompactFactor: return "NonFlatCompactFactor(" + std::to_string(d) + ")";
  }
  return "?";
}

int tail_start(int horizon) { return horizon / 2 + 1; }

ClassLabel classify(const Construction& params, int horizon, int bound) {
  if (horizon < 1) throw InvalidArgument(kModule, "classify requires horizon >= 1");
  const BoundedProfile profile = bounded_profile(params, horizon, bound);
  if (!profile.is_bounded_on_horizon) {
    throw NotBounded(kModule, "parameters exceed bound " + std::to_string(bound) + " within horizon " +
                                  std::to_string(horizon) + " (r_sup=" + std::to_string(profile.r_sup) +
                                  ", s_sup=" + std::to_string(profile.s_sup) + ")");
  }
  const int first = tail_start(horizon);
  if (column_constant_spacers(params, first, horizon)) return {ClassLabel::Kind::Odometer, 1};
  const EigenvalueOrder order = eigenvalue_order(params, first, horizon);
  if (order.d >= 2) return {ClassLabel::Kind::NonFlatCompactFactor, order.d};
  if (flatness(params, {first, horizon}).flat_first) return {ClassLabel::Kind::FlatWeaklyMixing, 1};
  return {ClassLabel::Kind::NonFlatWeaklyMixing, 1};
}

}  // namespace rankone
