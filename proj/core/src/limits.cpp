#include "rankone/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "rankone/error.hpp"
#include "rankone/simplex_lsq.hpp"

namespace rankone {

namespace {

constexpr const char* kModule = "limits";

using SparseVector = std::vector<std::pair<std::uint64_t, double>>;

SparseVector normalized_entries(const CorrelationMatrix& c) {
  const std::uint64_t cells = std::uint64_t{c.levels()} + 1;
  const std::uint64_t abs_shift = static_cast<std::uint64_t>(c.shift() < 0 ? -c.shift() : c.shift());
  const auto pairs = static_cast<double>(c.denominator() - abs_shift);
  SparseVector out;
  out.reserve(c.entries().size());
  for (const auto& e : c.entries()) out.emplace_back(e.a * cells + e.b, static_cast<double>(e.count) / pairs);
  return out;
}

double dot(const SparseVector& x, const SparseVector& y) {
  double sum = 0.0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      sum += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return sum;
}

double dot_theta(const SparseVector& x, const std::vector<double>& nu) {
  const auto cells = static_cast<std::uint64_t>(nu.size());
  double sum = 0.0;
  for (const auto& [key, v] : x) sum += v * nu[key / cells] * nu[key % cells];
  return sum;
}

std::int64_t checked_power(std::int64_t p, int m) {
  std::int64_t out = 1;
  for (int i = 0; i < m; ++i) {
    if (out > std::numeric_limits<std::int64_t>::max() / p) {
      throw InvalidArgument(kModule, "p^m overflows 64 bits");
    }
    out *= p;
  }
  return out;
}

/// Shifts in merge-priority order: 0, 1, -1, 2, -2, ...
std::vector<int> priority_order(int Z) {
  std::vector<int> out{0};
  for (int z = 1; z <= Z; ++z) {
    out.push_back(z);
    out.push_back(-z);
  }
  return out;
}

}  // namespace

LimitPolynomial LimitPolynomial::from_terms(const std::vector<std::pair<int, double>>& terms, double theta,
                                            int min_window) {
  LimitPolynomial out;
  out.window = min_window;
  for (const auto& [z, a] : terms) out.window = std::max(out.window, std::abs(z));
  out.coeffs.assign(static_cast<std::size_t>(2 * out.window + 1), 0.0);
  for (const auto& [z, a] : terms) out.coeff_ref(z) += a;
  out.theta = theta;
  return out;
}

double LimitPolynomial::mass() const { return std::accumulate(coeffs.begin(), coeffs.end(), 0.0) + theta; }

std::string LimitPolynomial::to_string(double threshold) const {
  std::string out;
  for (int z = -window; z <= window; ++z) {
    const double a = coeff(z);
    if (a <= threshold) continue;
    if (!out.empty()) out += " + ";
    out += fmt::format("{:.4f}", a);
    if (z != 0) out += fmt::format("*T^{}", z);
    else out += "*I";
  }
  if (theta > threshold) {
    if (!out.empty()) out += " + ";
    out += fmt::format("{:.4f}*Theta", theta);
  }
  return out.empty() ? "0" : out;
}

void write_polynomial_csv(std::ostream& out, const LimitPolynomial& poly) {
  out << "z,a_z\n";
  for (int z = -poly.window; z <= poly.window; ++z) out << fmt::format("{},{}\n", z, poly.coeff(z));
  out << fmt::format("theta,{}\n", poly.theta);
  out << fmt::format("residual,{}\n", poly.fit_residual);
}

bool SupportSet::subset_of_multiples(std::int64_t modulus) const {
  return std::all_of(points.begin(), points.end(), [&](int z) { return z % modulus == 0; });
}

SupportSet support(const LimitPolynomial& poly, double tau, int index) {
  SupportSet out;
  out.index = index;
  for (int z = -poly.window; z <= poly.window; ++z) {
    if (poly.coeff(z) > tau) out.points.push_back(z);
  }
  return out;
}

LimitPolynomial fit_limit_polynomial(const CorrelationMatrix& target, const std::vector<CorrelationMatrix>& basis,
                                     const LevelMeasures& measures, int Z, const FitOptions& options) {
  if (Z < 0) throw InvalidArgument(kModule, "window Z must be >= 0");
  if (static_cast<std::uint64_t>(Z) >= target.denominator()) {
    throw InvalidArgument(kModule, "window Z = " + std::to_string(Z) + " is infeasible for a tower of " +
                                       std::to_string(target.denominator()) + " levels");
  }
  if (basis.size() != static_cast<std::size_t>(2 * Z + 1)) {
    throw InvalidArgument(kModule, "basis must hold the 2Z+1 shifts -Z..Z");
  }
  for (int z = -Z; z <= Z; ++z) {
    const auto& c = basis[static_cast<std::size_t>(z + Z)];
    if (c.shift() != z || c.stage() != target.stage() || c.levels() != target.levels()) {
      throw InvalidArgument(kModule, "basis matrix for shift " + std::to_string(z) +
                                         " does not match the target's stage or ordering");
    }
  }
  if (measures.counts.size() != target.levels()) {
    throw InvalidArgument(kModule, "level measures do not match the correlation stage");
  }

  std::vector<double> nu(measures.counts.size() + 1);
  for (std::size_t a = 0; a < measures.counts.size(); ++a) nu[a] = measures.value(a);
  nu.back() = measures.spacer_value();
  const double nu_sq = std::inner_product(nu.begin(), nu.end(), nu.begin(), 0.0);

  const SparseVector y = normalized_entries(target);
  const double yy = dot(y, y);
  if (yy <= 0.0) throw InvalidArgument(kModule, "target correlation matrix is identically zero");

  std::vector<SparseVector> columns(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) columns[k] = normalized_entries(basis[k]);

  // Merge basis shifts that are indistinguishable on this partition.
  std::vector<int> kept;
  for (int z : priority_order(Z)) {
    const auto& col = columns[static_cast<std::size_t>(z + Z)];
    const double self = dot(col, col);
    bool duplicate = false;
    for (int k : kept) {
      const auto& other = columns[static_cast<std::size_t>(k + Z)];
      const double other_self = dot(other, other);
      const double dist = self + other_self - 2.0 * dot(col, other);
      if (dist <= 1e-12 * std::max(self, other_self)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(z);
  }

  const std::size_t m = kept.size() + 1;  // + Theta
  std::vector<double> gram(m * m);
  std::vector<double> rhs(m);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& xr = columns[static_cast<std::size_t>(kept[r] + Z)];
    for (std::size_t c = r; c < kept.size(); ++c) {
      const double v = dot(xr, columns[static_cast<std::size_t>(kept[c] + Z)]) / yy;
      gram[r * m + c] = v;
      gram[c * m + r] = v;
    }
    const double th = dot_theta(xr, nu) / yy;
    gram[r * m + (m - 1)] = th;
    gram[(m - 1) * m + r] = th;
    rhs[r] = dot(xr, y) / yy;
  }
  gram[(m - 1) * m + (m - 1)] = nu_sq * nu_sq / yy;
  rhs[m - 1] = dot_theta(y, nu) / yy;

  const SimplexLsqResult sol = solve_simplex_lsq(gram, rhs, 1.0, {options.max_iterations, options.tolerance});

  LimitPolynomial out;
  out.window = Z;
  out.coeffs.assign(static_cast<std::size_t>(2 * Z + 1), 0.0);
  for (std::size_t r = 0; r < kept.size(); ++r) out.coeff_ref(kept[r]) = std::max(sol.weights[r], 0.0);
  out.theta = std::max(sol.weights[m - 1], 0.0);
  const double total = out.mass();
  for (double& a : out.coeffs) a /= total;
  out.theta /= total;
  out.fit_residual = std::sqrt(sol.objective);
  return out;
}

std::vector<HTerm> h_sequence(const Construction& params, std::int64_t d, int m, const WindowSet& windows, int count,
                              int min_start) {
  if (d < 1) throw InvalidArgument(kModule, "h_sequence multiplier d must be >= 1");
  if (m < 0) throw InvalidArgument(kModule, "h_sequence offset m must be >= 0");
  if (count < 1) throw InvalidArgument(kModule, "h_sequence count must be >= 1");
  if (windows.empty()) throw InvalidArgument(kModule, "h_sequence needs at least one window");
  const bool any_long = std::any_of(windows.windows.begin(), windows.windows.end(),
                                    [&](const StageWindow& w) { return w.length() >= m; });
  if (!any_long) {
    throw InvalidArgument(kModule, "offset m = " + std::to_string(m) + " exceeds every window length");
  }

  std::vector<int> starts;
  if (static_cast<int>(windows.size()) >= count) {
    for (const auto& w : windows.windows) {
      if (w.first >= min_start && w.length() >= m) starts.push_back(w.first);
    }
  } else {
    for (const auto& w : windows.windows) {
      for (int j = std::max(w.first, min_start); j + m <= w.last; ++j) starts.push_back(j);
    }
  }
  if (static_cast<int>(starts.size()) < count) {
    throw InvalidArgument(kModule, "only " + std::to_string(starts.size()) + " admissible starts j_k >= " +
                                       std::to_string(min_start) + " for offset " + std::to_string(m) +
                                       "; widen the windows or horizon");
  }
  starts.resize(static_cast<std::size_t>(count));

  const HeightTable table = heights(params, starts.back() + m);
  std::vector<HTerm> out;
  for (int j : starts) {
    const int stage = j + m;
    const BigInt H = -(table.levels(stage) + params.stage(stage).spacer_min_first());
    const BigInt n = H * d;
    if (n < std::numeric_limits<std::int64_t>::min()) {
      throw InvalidArgument(kModule, "H-sequence term at stage " + std::to_string(stage) + " overflows 64 bits");
    }
    out.push_back({j, stage, n.convert_to<std::int64_t>()});
  }
  return out;
}

int default_ref_stage(const Construction& params, int window) {
  BigInt L = params.h1() + 1;
  int j = 1;
  while (L <= 2 * window) {
    const StageParams st = params.stage(j);
    L = L * st.r + st.spacer_sum();
    ++j;
  }
  return j;
}

double coefficient_gap(const LimitPolynomial& a, const LimitPolynomial& b) {
  const int Z = std::max(a.window, b.window);
  double gap = std::abs(a.theta - b.theta);
  for (int z = -Z; z <= Z; ++z) gap = std::max(gap, std::abs(a.coeff(z) - b.coeff(z)));
  return gap;
}

WeakLimitReport weak_limit(const Construction& params, std::int64_t d, int m, const WindowSet& windows,
                           const WeakLimitConfig& config) {
  const int Z = config.window;
  WeakLimitReport report;
  report.ref_stage = config.ref_stage > 0 ? config.ref_stage : default_ref_stage(params, Z);
  const int min_start = config.min_start > 0 ? config.min_start : report.ref_stage + 2;
  const auto terms = h_sequence(params, d, m, windows, config.count, min_start);

  const int base_depth = depth_for_levels(params, report.ref_stage, config.min_levels);
  struct DepthData {
    TowerModel model;
    LevelMeasures measures;
    std::vector<CorrelationMatrix> basis;
  };
  std::map<int, DepthData> cache;

  for (const HTerm& term : terms) {
    const double abs_n = std::abs(static_cast<double>(term.shift));
    const auto needed = static_cast<std::uint64_t>(std::ceil(config.shift_ratio * abs_n));
    const int K = std::max({base_depth, depth_for_levels(params, report.ref_stage, needed), term.stage + 1});
    auto it = cache.find(K);
    if (it == cache.end()) {
      TowerModel model = build_labels(params, report.ref_stage, K);
      LevelMeasures measures = level_measures(model);
      std::vector<CorrelationMatrix> basis;
      basis.reserve(static_cast<std::size_t>(2 * Z + 1));
      for (int z = -Z; z <= Z; ++z) basis.push_back(correlate(params, model, z));
      it = cache.emplace(K, DepthData{std::move(model), std::move(measures), std::move(basis)}).first;
    }
    const CorrelationMatrix target = correlate(params, it->second.model, term.shift);
    report.steps.push_back({term, K, fit_limit_polynomial(target, it->second.basis, it->second.measures, Z, config.fit)});
  }
  for (std::size_t k = 1; k < report.steps.size(); ++k) {
    report.stability_gap =
        std::max(report.stability_gap, coefficient_gap(report.steps[k - 1].poly, report.steps[k].poly));
  }
  report.final = report.steps.back().poly;
  return report;
}

WeakLimitReport weak_limit(const Construction& params, std::int64_t d, int m, const WeakLimitConfig& config) {
  WindowSet windows;
  windows.windows.push_back({1, config.horizon});
  return weak_limit(params, d, m, windows, config);
}

SimilarityVerdict is_pq_similar(const LimitPolynomial& Q, const LimitPolynomial& P, std::int64_t p, std::int64_t q,
                                double tol, double tau) {
  if (p < 1 || q < 1 || std::gcd(p, q) != 1) {
    throw InvalidArgument(kModule, "p and q must be coprime positive integers (got p=" + std::to_string(p) +
                                       ", q=" + std::to_string(q) + ")");
  }
  SimilarityVerdict out;
  for (int z : support(Q, tau).points) {
    if (z % q != 0) {
      if (out.reason.empty()) out.reason = fmt::format("supp Q contains {} which is not a multiple of q={}", z, q);
      out.max_coeff_gap = std::max(out.max_coeff_gap, Q.coeff(z));
    }
  }
  for (int z : support(P, tau).points) {
    if (z % p != 0) {
      if (out.reason.empty()) out.reason = fmt::format("supp P contains {} which is not a multiple of p={}", z, p);
      out.max_coeff_gap = std::max(out.max_coeff_gap, P.coeff(z));
    }
  }

  SimilarityWitness witness;
  const auto r_max = static_cast<int>(std::max(Q.window / q, P.window / p));
  for (int r = -r_max; r <= r_max; ++r) {
    const std::int64_t zq = q * r;
    const std::int64_t zp = p * r;
    const bool q_known = Q.in_window(static_cast<int>(zq));
    const bool p_known = P.in_window(static_cast<int>(zp));
    if (!q_known && !p_known) continue;
    const double aq = q_known ? Q.coeff(static_cast<int>(zq)) : P.coeff(static_cast<int>(zp));
    const double ap = p_known ? P.coeff(static_cast<int>(zp)) : aq;
    const double gap = std::abs(aq - ap);
    if (gap > out.max_coeff_gap) out.max_coeff_gap = gap;
    if (gap > tol && out.reason.empty()) {
      out.reason = fmt::format("a^Q_{} = {:.4f} differs from a^P_{} = {:.4f}", zq, aq, zp, ap);
    }
    if (aq != 0.0) witness.coeffs[r] = aq;
  }
  const double theta_gap = std::abs(Q.theta - P.theta);
  out.max_coeff_gap = std::max(out.max_coeff_gap, theta_gap);
  if (theta_gap > tol && out.reason.empty()) {
    out.reason = fmt::format("theta components differ ({:.4f} vs {:.4f})", Q.theta, P.theta);
  }
  out.similar = out.reason.empty();
  if (out.similar) {
    out.reason = "supports and coefficients agree";
    witness.theta = Q.theta;
    out.witness = std::move(witness);
  }
  return out;
}

std::string DisjointnessVerdict::label() const {
  switch (kind) {
    case Kind::EvidenceDisjoint: return "EvidenceDisjoint";
    case Kind::SimilarLimits: return "SimilarLimits";
    case Kind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

DisjointnessVerdict disjointness_certificate(const Construction& params, std::int64_t p, std::int64_t q,
                                             const DisjointnessConfig& config) {
  if (p < 1 || q < 1 || p == q || std::gcd(p, q) != 1) {
    throw InvalidArgument(kModule, "disjointness needs distinct coprime positive p, q (got p=" +
                                       std::to_string(p) + ", q=" + std::to_string(q) + ")");
  }
  DisjointnessVerdict out;
  out.q_limit = weak_limit(params, q, 0, config.limit);
  out.p_limit = weak_limit(params, p, 0, config.limit);
  out.similarity = is_pq_similar(out.q_limit.final, out.p_limit.final, p, q, config.coefficient_tol,
                                 config.limit.fit.tau);

  const double tol = config.limit.stability_tol;
  std::vector<std::string> problems;
  if (!out.q_limit.stable(tol)) problems.push_back(fmt::format("Q fit unstable (gap {:.4f})", out.q_limit.stability_gap));
  if (!out.p_limit.stable(tol)) problems.push_back(fmt::format("P fit unstable (gap {:.4f})", out.p_limit.stability_gap));
  if (out.q_limit.final.fit_residual > config.residual_acceptance) {
    problems.push_back(fmt::format("Q residual {:.4f} above {}", out.q_limit.final.fit_residual, config.residual_acceptance));
  }
  if (out.p_limit.final.fit_residual > config.residual_acceptance) {
    problems.push_back(fmt::format("P residual {:.4f} above {}", out.p_limit.final.fit_residual, config.residual_acceptance));
  }

  if (out.similarity.similar) {
    out.kind = DisjointnessVerdict::Kind::SimilarLimits;
  } else if (!problems.empty()) {
    out.kind = DisjointnessVerdict::Kind::Inconclusive;
  } else {
    out.kind = DisjointnessVerdict::Kind::EvidenceDisjoint;
  }
  std::string diag = fmt::format("Q = lim T^(q n_k) = {} (residual {:.4g}, gap {:.4g})\n", out.q_limit.final.to_string(0.005),
                                 out.q_limit.final.fit_residual, out.q_limit.stability_gap);
  diag += fmt::format("P = lim T^(p n_k) = {} (residual {:.4g}, gap {:.4g})\n", out.p_limit.final.to_string(0.005),
                      out.p_limit.final.fit_residual, out.p_limit.stability_gap);
  diag += "similarity: " + out.similarity.reason + "\n";
  for (const auto& s : problems) diag += "warning: " + s + "\n";
  out.diagnostics = std::move(diag);
  return out;
}

std::optional<IdentityMix> match_identity_mix(const LimitPolynomial& L, int m, double tol) {
  if (m < 1) throw InvalidArgument(kModule, "match_identity_mix requires m >= 1");
  const double a0 = L.coeff(0);
  const double rest_mass = L.mass() - a0;
  if (rest_mass <= tol || a0 < -tol) return std::nullopt;
  IdentityMix out;
  out.eps = rest_mass / m;
  out.rest = L;
  out.rest.coeff_ref(0) = 0.0;
  for (double& a : out.rest.coeffs) a /= rest_mass;
  out.rest.theta /= rest_mass;
  out.rest.fit_residual = 0.0;
  out.shape = out.rest.theta >= 1.0 - tol ? "(I,Theta)" : "(I,P)";
  return out;
}

CascadeResult divisibility_cascade(const std::vector<SupportSet>& supports, std::int64_t p) {
  if (p < 2) throw InvalidArgument(kModule, "divisibility cascade needs p >= 2");
  if (supports.empty()) throw InvalidArgument(kModule, "divisibility cascade needs at least one support");
  CascadeResult out;
  bool chain = true;
  for (std::size_t i = 0; i < supports.size(); ++i) {
    const bool ok = supports[i].subset_of_multiples(checked_power(p, static_cast<int>(i) + 1));
    out.holds.push_back(ok);
    chain = chain && ok;
    if (chain) out.max_level = static_cast<int>(i) + 1;
  }
  return out;
}

FlatnessConsequence flatness_consequence(const Construction& params, const WindowSet& windows, std::int64_t p,
                                         const CascadeResult& cascade) {
  if (p < 2) throw InvalidArgument(kModule, "flatness_consequence needs p >= 2");
  if (windows.empty()) throw InvalidArgument(kModule, "flatness_consequence needs at least one window");
  FlatnessConsequence out;
  for (const auto& w : windows.windows) {
    for (int j = w.first; j <= w.last; ++j) out.spacer_bound = std::max(out.spacer_bound, params.stage(j).spacer_max());
  }

  auto stages_for = [&](int m) {
    std::vector<int> stages;
    if (windows.size() >= 2) {
      for (std::size_t k = windows.size() / 2; k < windows.size(); ++k) {
        const auto& w = windows.windows[k];
        if (w.length() >= m) stages.push_back(w.first + m);
      }
    } else {
      const auto& w = windows.windows.front();
      for (int j = w.first + w.length() / 2; j <= w.last; ++j) stages.push_back(j);
    }
    return stages;
  };

  int levels = static_cast<int>(cascade.holds.size());
  for (int m = 1; checked_power(p, m) <= out.spacer_bound; ++m) levels = std::max(levels, m + 1);
  levels = std::max(levels, 1);

  bool chain = true;
  for (int m = 1; m <= levels; ++m) {
    FlatnessConsequence::Level level;
    level.m = m;
    level.modulus = checked_power(p, m);
    level.stages = stages_for(m);
    for (int j : level.stages) {
      const StageParams st = params.stage(j);
      const auto head_end = st.s.end() - 1;
      const int hi = *std::max_element(st.s.begin(), head_end);
      const int lo = *std::min_element(st.s.begin(), head_end);
      for (auto it = st.s.begin(); it != head_end; ++it) {
        if ((*it - st.s.front()) % level.modulus != 0) level.divisible = false;
      }
      level.max_difference = std::max(level.max_difference, hi - lo);
    }
    level.flat_forced = level.modulus > out.spacer_bound;
    level.cascade_holds = m <= static_cast<int>(cascade.holds.size()) && cascade.holds[static_cast<std::size_t>(m - 1)];
    level.consistent = !level.cascade_holds || level.divisible;
    chain = chain && level.divisible;
    if (chain) out.divisible_through = m;
    out.consistent = out.consistent && level.consistent;
    out.levels.push_back(std::move(level));
  }
  return out;
}

}  // namespace rankone
