#include "cli/run.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "rankone/error.hpp"
#include "rankone/limits.hpp"
#include "rankone/mobius.hpp"
#include "rankone/sarnak.hpp"
#include "rankone/tower.hpp"

namespace rankone::cli {

namespace {

constexpr std::uint64_t kDefaultLevels = 10000;

std::string conventions(const CommandParams& p) {
  return fmt::format(
      "conventions:\n"
      "  levels L_j = h_j + 1; L_(j+1) = L_j r_j + sum_i s_j(i)\n"
      "  return times L_j + s_j(i); H_j = -(L_j + min_(i<r_j) s_j(i))\n"
      "  tolerances: support tau={} coefficient tol={} stability tol={} residual acceptance={}\n"
      "  limits and verdicts are finite-depth numerical evidence\n",
      p.tau, p.tol, p.stability_tol, p.residual);
}

std::string header(const RunConfig& c) {
  return fmt::format("command: {}\nconstruction: {}\n", c.command, c.construction.describe());
}

std::string label_text(LevelLabel l) {
  return l.is_reference() ? std::to_string(l.index()) : "sp" + std::to_string(l.spacer_stage());
}

int default_depth(const Construction& params, int j, std::uint64_t need) {
  return depth_for_levels(params, j, std::max(kDefaultLevels, need));
}

WeakLimitConfig limit_config(const CommandParams& p) {
  WeakLimitConfig c;
  c.window = p.Z;
  c.ref_stage = p.j;
  c.count = p.count;
  c.min_levels = p.min_levels;
  c.stability_tol = p.stability_tol;
  c.fit.tau = p.tau;
  c.horizon = p.horizon;
  return c;
}

std::string describe_steps(const WeakLimitReport& r) {
  std::string out = fmt::format("reference stage j={}\n", r.ref_stage);
  for (const auto& s : r.steps) {
    out += fmt::format("  j_k={} stage={} n_k={} depth K={}: {} (residual {:.6g})\n", s.term.start, s.term.stage,
                       s.term.shift, s.depth, s.poly.to_string(1e-4), s.poly.fit_residual);
  }
  out += fmt::format("stability gap: {:.6g}\n", r.stability_gap);
  return out;
}

std::string rational_text(const Rational& x) {
  if (x.denominator() == 1) return std::to_string(x.numerator());
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string support_text(const SupportSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.points.size(); ++i) out += (i ? "," : "") + std::to_string(s.points[i]);
  return out + "}";
}

std::string pair_csv(const LimitPolynomial& Q, const LimitPolynomial& P) {
  std::string out = "z,a_z_Q,a_z_P\n";
  const int Z = std::max(Q.window, P.window);
  for (int z = -Z; z <= Z; ++z) out += fmt::format("{},{},{}\n", z, Q.coeff(z), P.coeff(z));
  out += fmt::format("theta,{},{}\n", Q.theta, P.theta);
  out += fmt::format("residual,{},{}\n", Q.fit_residual, P.fit_residual);
  return out;
}

void cmd_heights(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const HeightTable table = heights(c.construction, p.J);
  const BoundedProfile profile = bounded_profile(c.construction, p.J);
  r.report += fmt::format("stages: {}\nL_{} = {}\nr_sup = {}, s_sup = {}\n", p.J, p.J, table.levels(p.J).str(),
                          profile.r_sup, profile.s_sup);
  r.csv = "j,levels,height,r,spacers\n";
  for (int j = 1; j <= p.J; ++j) {
    const StageParams st = c.construction.stage(j);
    std::string s;
    for (std::size_t i = 0; i < st.s.size(); ++i) s += (i ? " " : "") + std::to_string(st.s[i]);
    r.csv += fmt::format("{},{},{},{},{}\n", j, table.levels(j).str(), table.height(j).str(), st.r, s);
  }
}

void cmd_classify(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const ClassLabel label = classify(c.construction, p.horizon, p.bound);
  const BoundedProfile profile = bounded_profile(c.construction, p.horizon, p.bound);
  const int first = tail_start(p.horizon);
  r.report += fmt::format("horizon: {} (tail stages {}..{})\nr_sup = {}, s_sup = {}\n", p.horizon, first, p.horizon,
                          profile.r_sup, profile.s_sup);
  if (label.kind != ClassLabel::Kind::Odometer) {
    const EigenvalueOrder order = eigenvalue_order(c.construction, first, p.horizon);
    const Flatness flat = flatness(c.construction, {first, p.horizon});
    r.report += fmt::format("eigenvalue order d = {} (stable since stage {})\nflat_first = {}, flat_strict = {}\n",
                            order.d, order.stable_since, flat.flat_first, flat.flat_strict);
  }
  r.report += fmt::format("class: {}\n", label.to_string());
}

void cmd_labels(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const int j = p.j > 0 ? p.j : 1;
  const int K = p.K > 0 ? p.K : default_depth(c.construction, j, 0);
  const TowerModel model = build_labels(c.construction, j, K);
  r.report += fmt::format("reference stage j={}, depth K={}, L_K={}, copies={}, spacers={}\n", j, K, model.size(),
                          model.copies(), model.spacer_count());
  std::string csv = "level,label\n";
  for (std::uint64_t l = 0; l < model.size(); ++l) csv += fmt::format("{},{}\n", l, label_text(model.label(l)));
  r.csv = std::move(csv);
}

void cmd_correlate(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const int j = p.j > 0 ? p.j : 2;
  const std::uint64_t abs_n = static_cast<std::uint64_t>(p.n < 0 ? -p.n : p.n);
  const int K = p.K > 0 ? p.K : default_depth(c.construction, j, abs_n + 1);
  const TowerModel model = build_labels(c.construction, j, K);
  const CorrelationMatrix m = correlate(c.construction, model, p.n);
  const LevelMeasures nu = level_measures(model);
  double worst = 0.0;
  for (std::uint32_t a = 0; a < m.levels(); ++a) worst = std::max(worst, std::abs(m.row_sum(a) - nu.value(a)));
  r.report += fmt::format(
      "reference stage j={}, depth K={}, L_K={}, shift n={}\nerror bound {:.6g} (top exit {:.6g}, tail {:.6g})\n"
      "max_A |sum_B C(A,B) - nu(A)| = {:.6g}\n",
      j, K, model.size(), p.n, m.error_bound(), static_cast<double>(abs_n) / static_cast<double>(model.size()),
      m.tail(), worst);
  std::ostringstream os;
  write_correlation_csv(os, m);
  r.csv = os.str();
}

void cmd_weak_limit(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const WeakLimitReport rep = weak_limit(c.construction, p.d, p.m, limit_config(p));
  r.report += fmt::format("limit of T^(d H_(j_k+m)) with d={}, m={}, window Z={}\n", p.d, p.m, p.Z);
  r.report += describe_steps(rep);
  r.report += fmt::format("limit: {}\nsupport (tau={}): {}\n", rep.final.to_string(1e-4), p.tau,
                          support_text(support(rep.final, p.tau)));
  r.report += fmt::format("stable: {}\n", rep.stable(p.stability_tol) ? "yes" : "no");
  if (const auto mix = match_identity_mix(rep.final, static_cast<int>(p.d), p.tol)) {
    r.report += fmt::format("shape: {} with eps={:.6g}, rest {}\n", mix->shape, mix->eps, mix->rest.to_string(1e-4));
  } else {
    r.report += "shape: no identity mix\n";
  }
  std::ostringstream os;
  write_polynomial_csv(os, rep.final);
  r.csv = os.str();
}

void cmd_similarity(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const WeakLimitConfig cfg = limit_config(p);
  const WeakLimitReport Q = weak_limit(c.construction, p.q, 0, cfg);
  const WeakLimitReport P = weak_limit(c.construction, p.p, 0, cfg);
  const SimilarityVerdict v = is_pq_similar(Q.final, P.final, p.p, p.q, p.tol, p.tau);
  r.report += "Q = lim T^(q H_(j_k)):\n" + describe_steps(Q) + "P = lim T^(p H_(j_k)):\n" + describe_steps(P);
  r.report += fmt::format("p={}, q={}\nQ = {}\nP = {}\nsimilar: {} ({})\nmax coefficient gap: {:.6g}\n", p.p, p.q,
                          Q.final.to_string(1e-4), P.final.to_string(1e-4), v.similar ? "yes" : "no", v.reason,
                          v.max_coeff_gap);
  if (v.witness) {
    std::string w;
    for (const auto& [k, a] : v.witness->coeffs) w += fmt::format(" R_{}={:.4f}", k, a);
    r.report += "witness:" + w + fmt::format(" theta={:.4f}\n", v.witness->theta);
  }
  r.csv = pair_csv(Q.final, P.final);
}

void cmd_disjointness(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  DisjointnessConfig cfg;
  cfg.limit = limit_config(p);
  cfg.coefficient_tol = p.tol;
  cfg.residual_acceptance = p.residual;
  const DisjointnessVerdict v = disjointness_certificate(c.construction, p.p, p.q, cfg);
  r.report += fmt::format("p={}, q={}\n", p.p, p.q);
  r.report += "Q = lim T^(q H_(j_k)):\n" + describe_steps(v.q_limit) + "P = lim T^(p H_(j_k)):\n" +
              describe_steps(v.p_limit);
  r.report += v.diagnostics;
  r.report += "verdict: " + v.label() + " (numerical evidence)\n";
  r.csv = pair_csv(v.q_limit.final, v.p_limit.final);
}

void cmd_cascade(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const WindowSet windows = find_windows(c.construction, p.horizon, p.bound);
  if (windows.empty()) throw InvalidArgument("cli", "no stage within the horizon satisfies the bound");
  std::vector<SupportSet> supports;
  for (int m = 1; m <= p.levels; ++m) {
    const WeakLimitReport rep = weak_limit(c.construction, 1, m, windows, limit_config(p));
    supports.push_back(support(rep.final, p.tau, m));
    r.report += fmt::format("P_(1,{}) = {} support {} (gap {:.4g})\n", m, rep.final.to_string(1e-4),
                            support_text(supports.back()), rep.stability_gap);
  }
  const CascadeResult cascade = divisibility_cascade(supports, p.p);
  const FlatnessConsequence fc = flatness_consequence(c.construction, windows, p.p, cascade);
  r.report += fmt::format("windows: {}\ncascade with p={} holds through M={}\n", windows.size(), p.p, cascade.max_level);
  r.report += fmt::format("spacer bound s={}; differences divisible by p^m through m={}\nconsistent: {}\n",
                          fc.spacer_bound, fc.divisible_through, fc.consistent ? "yes" : "no");
  r.csv = "m,modulus,support,cascade_holds,max_difference,divisible,flat_forced,consistent\n";
  for (const auto& level : fc.levels) {
    const std::string supp = level.m <= static_cast<int>(supports.size())
                                 ? support_text(supports[static_cast<std::size_t>(level.m - 1)])
                                 : "";
    std::string quoted = supp;
    std::replace(quoted.begin(), quoted.end(), ',', ' ');
    r.csv += fmt::format("{},{},{},{},{},{},{},{}\n", level.m, level.modulus, quoted, level.cascade_holds ? 1 : 0,
                         level.max_difference, level.divisible ? 1 : 0, level.flat_forced ? 1 : 0,
                         level.consistent ? 1 : 0);
  }
}

Observable resolve_observable(const RunConfig& c, int j, const std::vector<std::uint64_t>& default_support) {
  const auto& p = c.params;
  const std::uint64_t levels = heights(c.construction, j).levels_u64(j);
  if (p.observable.empty()) return Observable::indicator(j, levels, default_support);
  if (p.observable.size() != levels) {
    throw InvalidArgument("cli", "params.observable has " + std::to_string(p.observable.size()) +
                                     " coefficients but stage " + std::to_string(j) + " has " +
                                     std::to_string(levels) + " levels");
  }
  return Observable(j, p.observable);
}

void cmd_mobius_sum(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const int j = p.j > 0 ? p.j : 1;
  const Observable f = resolve_observable(c, j, {0});
  const int K = p.K > 0 ? p.K : default_depth(c.construction, j, p.start + p.N + 1);
  const MobiusTable table(p.N);
  const MobiusSum sum = mobius_weighted_sum(build_labels(c.construction, j, K), f, p.start, p.N, table);
  r.report += fmt::format("observable on stage {} ({} levels), start level {}, depth K={}\n", j, f.levels(), p.start, K);
  r.report += fmt::format("S_N = {} at N = {}; |S_N|/N = {:.6g}\n", rational_text(sum.total), p.N,
                          sum.checkpoints.back().ratio);
  std::ostringstream os;
  write_decay_csv(os, sum);
  r.csv = os.str();
}

void cmd_telescope(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const int j = p.j > 0 ? p.j : 1;
  const int K = p.K > 0 ? p.K : default_depth(c.construction, j, p.start + p.N + 1);
  const FactorPartition partition = compact_factor(c.construction, p.horizon, K);
  const std::int64_t d = p.d_given ? p.d : partition.d;
  if (d < 2) throw InvalidArgument("cli", "the factor order is 1; no prime extension to check");
  const std::uint64_t levels = heights(c.construction, j).levels_u64(j);
  std::vector<std::uint64_t> in_E;
  for (std::uint64_t a = 0; a < levels; a += static_cast<std::uint64_t>(partition.d)) in_E.push_back(a);
  const Observable f = resolve_observable(c, j, in_E);
  const TowerModel model = build_labels(c.construction, j, K);
  const MobiusTable table(p.N);
  r.report += fmt::format("factor order {}, d={}, N={}, start level {}, depth K={}\n", partition.d, d, p.N, p.start, K);
  r.csv = "d,stride,N,lhs,leading,correction,rhs,equal\n";
  bool ok = true;
  const auto as_text = rational_text;
  if (is_prime(static_cast<std::uint64_t>(d)) && p.M > 1) {
    const PrimeExtensionReport rep = prime_extension_report(model, partition, f, d, p.start, p.N, p.M, table);
    r.report += fmt::format("S_N = {}\n", as_text(rep.total));
    r.csv = "u,term,remainder,crude_bound\n";
    for (const auto& u : rep.unfoldings) {
      r.report += fmt::format("  u={}: term {} remainder {} bound N||f||/d^u = {:.6g}\n", u.u, as_text(u.term),
                              as_text(u.remainder), u.crude_bound);
      r.csv += fmt::format("{},{},{},{}\n", u.u, as_text(u.term), as_text(u.remainder), u.crude_bound);
    }
    r.report += fmt::format("identity holds: {}\nbound holds: {}\n", rep.identity_holds, rep.bound_holds);
    ok = rep.identity_holds && rep.bound_holds;
  } else {
    const auto results = composite_extension_check(model, partition, f, d, p.start, p.N, table);
    for (const auto& t : results) {
      r.report += fmt::format("  prime {} at stride {}: lhs {} = leading {} - correction {} -> {}\n", t.d, t.stride,
                              as_text(t.lhs), as_text(t.leading), as_text(t.correction), t.equal ? "equal" : "NOT equal");
      r.csv += fmt::format("{},{},{},{},{},{},{},{}\n", t.d, t.stride, t.N, as_text(t.lhs), as_text(t.leading),
                           as_text(t.correction), as_text(t.rhs), t.equal ? 1 : 0);
      ok = ok && t.equal;
    }
  }
  r.report += fmt::format("result: {}\n", ok ? "identity verified" : "IDENTITY FAILED");
  if (!ok) r.exit_code = kExitComputation;
}

void cmd_factor(const RunConfig& c, RunResult& r) {
  const auto& p = c.params;
  const int j = p.j > 0 ? p.j : 1;
  const int K = p.K > 0 ? p.K : default_depth(c.construction, j, 0);
  const FactorPartition partition = compact_factor(c.construction, p.horizon, K);
  const TowerModel model = build_labels(c.construction, j, K);
  const CyclicityCheck check = verify_factor_cyclicity(partition, model);
  r.report += fmt::format("factor order d = {}, depth K={}, L_K={}\n", partition.d, K, model.size());
  r.report += fmt::format("column offsets divisible by d from stage {}\n", partition.consistent_from);
  r.report += fmt::format("cyclicity: {} transitions, {} failures; {} labeled levels, {} class mismatches\n",
                          check.transitions, check.transition_failures, check.reference_levels, check.label_mismatches);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(partition.d), 0);
  for (auto cls : partition.classes) ++counts[cls];
  r.csv = "class,levels\n";
  for (std::size_t k = 0; k < counts.size(); ++k) r.csv += fmt::format("{},{}\n", k, counts[k]);
  if (!check.ok()) r.exit_code = kExitComputation;
}

}  // namespace

RunResult run(const RunConfig& config) {
  RunResult result;
  result.report = header(config);
  try {
    const std::string& cmd = config.command;
    if (cmd == "heights") cmd_heights(config, result);
    else if (cmd == "classify") cmd_classify(config, result);
    else if (cmd == "labels") cmd_labels(config, result);
    else if (cmd == "correlate") cmd_correlate(config, result);
    else if (cmd == "weak-limit") cmd_weak_limit(config, result);
    else if (cmd == "similarity") cmd_similarity(config, result);
    else if (cmd == "disjointness") cmd_disjointness(config, result);
    else if (cmd == "cascade") cmd_cascade(config, result);
    else if (cmd == "mobius-sum") cmd_mobius_sum(config, result);
    else if (cmd == "telescope") cmd_telescope(config, result);
    else if (cmd == "factor") cmd_factor(config, result);
    else throw ConfigError("command: unknown command '" + cmd + "'");
    result.report += conventions(config.params);
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    result.error = e.what();
  } catch (const rankone::Error& e) {
    result.exit_code = kExitComputation;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitComputation;
    result.error = std::string("internal: ") + e.what();
  }
  return result;
}

int emit(const RunConfig& config, const RunResult& result) {
  if (!result.error.empty()) {
    std::cerr << "error: " << result.error << "\n";
    return result.exit_code;
  }
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
  };
  if (config.report_path) {
    if (!write(*config.report_path, result.report)) {
      std::cerr << "error: cannot write report to " << *config.report_path << "\n";
      return kExitComputation;
    }
  } else {
    std::cout << result.report;
  }
  if (!result.csv.empty()) {
    if (config.csv_path) {
      if (!write(*config.csv_path, result.csv)) {
        std::cerr << "error: cannot write CSV to " << *config.csv_path << "\n";
        return kExitComputation;
      }
    } else {
      std::cout << "\n" << result.csv;
    }
  }
  return result.exit_code;
}

}  // namespace rankone::cli
