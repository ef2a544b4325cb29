#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rankone {

using BigInt = boost::multiprecision::cpp_int;

/// Cutting parameters of one stage: the tower is cut into r columns and
/// s[i] spacer levels are placed above column i + 1.
struct StageParams {
  int r = 2;
  std::vector<int> s;

  StageParams() : s(2, 0) {}
  StageParams(int columns, std::vector<int> spacers);

  int spacer_sum() const;
  int spacer_max() const;
  int spacer_min() const;
  /// min(s(1), ..., s(r-1)); the last column is excluded.
  int spacer_min_first() const;

  friend bool operator==(const StageParams&, const StageParams&) = default;
};

/// Defining data of a rank-one construction: the initial tower has h1 + 1
/// levels; stage j (j >= 1) supplies the parameters used to build tower j + 1.
class Construction {
 public:
  enum class Kind { Explicit, Periodic, Random };

  /// Finite list; stage(j) throws for j past the end.
  static Construction explicit_stages(int h1, std::vector<StageParams> stages);
  /// prefix[0], prefix[1], ..., then pattern repeated forever.
  static Construction periodic(int h1, std::vector<StageParams> pattern,
                               std::vector<StageParams> prefix = {});
  /// Independent draws r in [2, r_max], s(i) in [0, s_max], deterministic in (seed, j).
  static Construction random_bounded(int h1, int r_max, int s_max, std::uint64_t seed);

  /// One of odometer<p> (e.g. "odometer2"), chacon, flat3, class4.
  static Construction preset(std::string_view name);
  static Construction odometer(int p, int h1 = 0);
  static Construction chacon();
  static Construction flat3();
  static Construction class4();

  Construction with_h1(int h1) const;

  int h1() const { return h1_; }
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Parameters of stage j, j >= 1.
  StageParams stage(int j) const;

  /// Last stage index that can be requested, if the generator is finite.
  std::optional<int> last_stage() const;

  std::string describe() const;

 private:
  Construction() = default;

  Kind kind_ = Kind::Explicit;
  int h1_ = 0;
  std::string name_;
  std::vector<StageParams> prefix_;
  std::vector<StageParams> pattern_;
  int r_max_ = 2;
  int s_max_ = 0;
  std::uint64_t seed_ = 0;
};

/// L[j] = h_j + 1 = number of levels of the stage-j tower, for j = 1..J.
class HeightTable {
 public:
  HeightTable() = default;
  explicit HeightTable(std::vector<BigInt> levels) : levels_(std::move(levels)) {}

  int stages() const { return static_cast<int>(levels_.size()); }
  const BigInt& levels(int j) const;
  BigInt height(int j) const { return levels(j) - 1; }
  /// levels(j) as a machine integer; throws InvalidArgument if it does not fit.
  std::uint64_t levels_u64(int j) const;
  double levels_double(int j) const;

 private:
  std::vector<BigInt> levels_;
};

/// Heights through stage J from the recursion L_{j+1} = L_j r_j + sum_i s_j(i).
HeightTable heights(const Construction& params, int J);

struct BoundedProfile {
  int r_sup = 0;
  int s_sup = 0;
  bool is_bounded_on_horizon = true;
};

/// Suprema over stages 1..J. With a bound B, the flag says whether both
/// suprema are <= B.
BoundedProfile bounded_profile(const Construction& params, int J,
                               std::optional<int> bound = std::nullopt);

/// Closed integer interval of stage indices [first, last].
struct StageWindow {
  int first = 1;
  int last = 1;

  int length() const { return last - first; }
  bool contains(int j) const { return first <= j && j <= last; }
  friend bool operator==(const StageWindow&, const StageWindow&) = default;
};

struct WindowSet {
  std::vector<StageWindow> windows;

  bool empty() const { return windows.empty(); }
  std::size_t size() const { return windows.size(); }
  /// True when window lengths never decrease (finite-horizon proxy for
  /// "arbitrarily long intervals").
  bool lengths_nondecreasing() const;
};

/// Maximal runs of stages j <= J with r_j <= B and max_i s_j(i) <= B.
WindowSet find_windows(const Construction& params, int J, int B);

struct Flatness {
  bool flat_first = false;
  bool flat_strict = false;
  std::optional<int> s_value;
};

Flatness flatness(const Construction& params, StageWindow window);

/// {L_j + s_j(i) : i = 1..r_j}, in column order.
std::vector<BigInt> return_times(const Construction& params, int j);

struct EigenvalueOrder {
  std::int64_t d = 1;
  /// Running gcd after including stages j0..J' for J' = j0..J.
  std::vector<std::int64_t> running;
  /// First J' from which the running gcd equals d.
  int stable_since = 1;
};

/// gcd of L_j + s_j(i) over j in [j0, J] and all columns. Throws OdometerCase
/// when every stage in the range has column-constant spacers.
EigenvalueOrder eigenvalue_order(const Construction& params, int j0, int J);

struct ClassLabel {
  enum class Kind { Odometer, FlatWeaklyMixing, NonFlatWeaklyMixing, NonFlatCompactFactor };
  Kind kind = Kind::Odometer;
  std::int64_t d = 1;

  std::string to_string() const;
  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

inline constexpr int kDefaultParameterBound = 1000;

/// First stage of the tail [horizon/2 + 1, horizon] on which "eventually"
/// conditions are evaluated.
int tail_start(int horizon);

/// True when every stage in [first, last] has the same spacer height above
/// every column.
bool column_constant_spacers(const Construction& params, int first, int last);

/// Four-way label of a bounded construction, evaluated on the tail of the
/// horizon. Throws NotBounded when a parameter on 1..horizon exceeds bound.
ClassLabel classify(const Construction& params, int horizon, int bound = kDefaultParameterBound);

}  // namespace rankone
