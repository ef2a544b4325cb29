#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rankone/construction.hpp"
#include "rankone/tower.hpp"

namespace rankone {

/// Truncated convex combination sum_{|z| <= Z} a_z T^z + theta * Theta, where
/// Theta is the projection onto constants.
struct LimitPolynomial {
  int window = 0;
  /// a_z for z = -window..window, stored at index z + window.
  std::vector<double> coeffs = std::vector<double>(1, 0.0);
  double theta = 0.0;
  double fit_residual = 0.0;

  /// Polynomial with the given (z, a_z) terms; the window is the largest |z|.
  static LimitPolynomial from_terms(const std::vector<std::pair<int, double>>& terms, double theta = 0.0,
                                    int min_window = 0);
  static LimitPolynomial identity() { return from_terms({{0, 1.0}}); }

  bool in_window(int z) const { return -window <= z && z <= window; }
  /// a_z, zero outside the window.
  double coeff(int z) const { return in_window(z) ? coeffs[static_cast<std::size_t>(z + window)] : 0.0; }
  double& coeff_ref(int z) { return coeffs.at(static_cast<std::size_t>(z + window)); }
  double mass() const;
  std::string to_string(double threshold = 1e-9) const;
};

/// Rows `z,a_z` for every z in the window, then `theta,c` and `residual,value`.
void write_polynomial_csv(std::ostream& out, const LimitPolynomial& poly);

struct SupportSet {
  /// Offset m (or any caller-defined index) the support belongs to.
  int index = 0;
  std::vector<int> points;

  bool subset_of_multiples(std::int64_t modulus) const;
};

inline constexpr double kSupportThreshold = 0.02;
inline constexpr double kCoefficientTolerance = 0.02;
inline constexpr double kStabilityTolerance = 0.02;
inline constexpr double kResidualAcceptance = 0.05;
inline constexpr int kDefaultWindow = 8;
inline constexpr std::uint64_t kDefaultMinLevels = 10000;

/// {z : a_z > tau}.
SupportSet support(const LimitPolynomial& poly, double tau = kSupportThreshold, int index = 0);

struct FitOptions {
  double tau = kSupportThreshold;
  int max_iterations = 10000;
  double tolerance = 1e-10;
};

/// Fit C_n by sum_z a_z C_z + c * M_Theta on the simplex, M_Theta(A,B) = nu(A) nu(B).
///
/// Each matrix is divided by the number of pairs it counted (L_K - |shift|) so
/// that top-exit losses do not favour large |z|. Basis matrices that coincide
/// after this normalization are merged onto the shift of smallest |z|
/// (positive first). The residual is the Frobenius norm of the deviation
/// relative to the norm of C_n. `basis` must hold shifts -Z..Z in order.
LimitPolynomial fit_limit_polynomial(const CorrelationMatrix& target, const std::vector<CorrelationMatrix>& basis,
                                     const LevelMeasures& measures, int Z, const FitOptions& options = {});

/// One element n_k = d * H_{j_k + m} of an H-sequence, with
/// H_j = -(L_j + min_{i < r_j} s_j(i)).
struct HTerm {
  int start = 1;  // j_k
  int stage = 1;  // j_k + m
  std::int64_t shift = 0;
};

/// The first `count` terms with j_k >= min_start. Window starts are used when
/// there are at least `count` windows, otherwise every stage j with
/// [j, j + m] inside a window.
std::vector<HTerm> h_sequence(const Construction& params, std::int64_t d, int m, const WindowSet& windows, int count,
                              int min_start = 1);

struct WeakLimitConfig {
  int window = kDefaultWindow;
  /// Reference stage j; 0 picks the smallest j with L_j > 2 * window.
  int ref_stage = 0;
  /// Smallest j_k; 0 means ref_stage + 2.
  int min_start = 0;
  int count = 3;
  /// Depth K is the smallest stage with L_K >= min_levels and L_K >= shift_ratio * |n_k|.
  std::uint64_t min_levels = kDefaultMinLevels;
  double shift_ratio = 32.0;
  double stability_tol = kStabilityTolerance;
  FitOptions fit;
  /// Default windows: a single window [1, horizon].
  int horizon = 40;
};

struct WeakLimitStep {
  HTerm term;
  int depth = 0;
  LimitPolynomial poly;
};

struct WeakLimitReport {
  int ref_stage = 0;
  std::vector<WeakLimitStep> steps;
  /// max over consecutive steps of the largest coefficient change (theta included).
  double stability_gap = 0.0;
  LimitPolynomial final;

  bool stable(double tol) const { return stability_gap <= tol; }
};

int default_ref_stage(const Construction& params, int window);

/// Limit of T^{n_k} along n_k = d * H_{j_k + m}.
WeakLimitReport weak_limit(const Construction& params, std::int64_t d, int m, const WindowSet& windows,
                           const WeakLimitConfig& config = {});
WeakLimitReport weak_limit(const Construction& params, std::int64_t d, int m, const WeakLimitConfig& config = {});

/// Largest coefficient difference between two polynomials (theta included).
double coefficient_gap(const LimitPolynomial& a, const LimitPolynomial& b);

/// Common series R with Q = R(S^q) and P = R(T^p).
struct SimilarityWitness {
  std::map<int, double> coeffs;
  double theta = 0.0;
};

struct SimilarityVerdict {
  bool similar = false;
  /// R_r = a^Q_{qr} when similar.
  std::optional<SimilarityWitness> witness;
  double max_coeff_gap = 0.0;
  std::string reason;
};

/// p/q-similarity of Q (a limit of S^q-type powers) and P: supp Q in qZ,
/// supp P in pZ, a^Q_{qr} = a^P_{pr} and equal theta, all within tol.
/// Coefficients are compared only where both windows cover them.
SimilarityVerdict is_pq_similar(const LimitPolynomial& Q, const LimitPolynomial& P, std::int64_t p, std::int64_t q,
                                double tol = kCoefficientTolerance, double tau = kSupportThreshold);

struct DisjointnessConfig {
  WeakLimitConfig limit;
  double coefficient_tol = kCoefficientTolerance;
  double residual_acceptance = kResidualAcceptance;
};

struct DisjointnessVerdict {
  enum class Kind { EvidenceDisjoint, SimilarLimits, Inconclusive };
  Kind kind = Kind::Inconclusive;
  WeakLimitReport q_limit;  // T^{q n_k}
  WeakLimitReport p_limit;  // T^{p n_k}
  SimilarityVerdict similarity;
  std::string diagnostics;

  std::string label() const;
};

/// Numerical evidence (not a proof) for disjointness of T^p and T^q.
DisjointnessVerdict disjointness_certificate(const Construction& params, std::int64_t p, std::int64_t q,
                                             const DisjointnessConfig& config = {});

struct IdentityMix {
  double eps = 0.0;
  /// Remaining mass renormalized to 1 (no identity term).
  LimitPolynomial rest;
  /// "(I,Theta)" when the rest is Theta, otherwise "(I,P)".
  std::string shape;
};

/// Match L = (1 - m eps) I + m eps P' with eps in (0, 1/m].
std::optional<IdentityMix> match_identity_mix(const LimitPolynomial& L, int m, double tol = kCoefficientTolerance);

struct CascadeResult {
  /// holds[m-1]: supp P_{1,m} inside p^m Z.
  std::vector<bool> holds;
  /// Largest M with holds[0..M-1] all true.
  int max_level = 0;
};

/// supports[i] is the support of P_{1,m} for m = i + 1.
CascadeResult divisibility_cascade(const std::vector<SupportSet>& supports, std::int64_t p);

struct FlatnessConsequence {
  struct Level {
    int m = 0;
    std::int64_t modulus = 1;  // p^m
    std::vector<int> stages;
    /// Largest |s(i) - s(i')| over i, i' <= r - 1 on those stages.
    int max_difference = 0;
    bool divisible = true;
    /// p^m exceeds the spacer bound, so differences must vanish.
    bool flat_forced = false;
    bool cascade_holds = false;
    bool consistent = true;
  };
  std::vector<Level> levels;
  int spacer_bound = 0;
  /// Largest m such that p^{m'} divides every difference for all m' <= m.
  int divisible_through = 0;
  bool consistent = true;
};

/// Parameter-side check of the cascade: spacer differences on stages j_k + m
/// (tail of the window list) must be divisible by p^m wherever the cascade
/// holds. Levels are checked for m = 1..max(cascade size, first m with p^m > s).
FlatnessConsequence flatness_consequence(const Construction& params, const WindowSet& windows, std::int64_t p,
                                         const CascadeResult& cascade);

}  // namespace rankone
