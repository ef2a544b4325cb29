#include "cli/config.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "rankone/error.hpp"

namespace rankone::cli {

namespace {

using nlohmann::json;

const std::map<std::string, std::vector<std::string>, std::less<>>& schema() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> table = {
      {"heights", {"J"}},
      {"classify", {"horizon", "bound"}},
      {"labels", {"j", "K"}},
      {"correlate", {"j", "K", "n"}},
      {"weak-limit", {"d", "m", "Z", "j", "count", "tau", "stability_tol", "min_levels", "horizon"}},
      {"similarity", {"p", "q", "Z", "j", "count", "tau", "tol", "stability_tol", "min_levels", "horizon"}},
      {"disjointness",
       {"p", "q", "Z", "j", "count", "tau", "tol", "stability_tol", "residual", "min_levels", "horizon"}},
      {"cascade", {"p", "levels", "Z", "j", "count", "tau", "stability_tol", "min_levels", "horizon", "bound"}},
      {"mobius-sum", {"N", "j", "K", "start", "observable"}},
      {"telescope", {"d", "N", "M", "j", "K", "start", "observable", "horizon"}},
      {"factor", {"horizon", "K", "j"}},
  };
  return table;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      fail(where.empty() ? key : where + "." + key,
           "unknown key (allowed: " + join(std::vector<std::string>(allowed.begin(), allowed.end())) + ")");
    }
  }
}

const json& require_object(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  return v;
}

std::int64_t get_int(const json& v, const std::string& where, std::int64_t lo, std::int64_t hi) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > hi) fail(where, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

double get_double(const json& v, const std::string& where, double lo, double hi) {
  if (!v.is_number()) fail(where, "expected a number");
  const auto x = v.get<double>();
  if (!(x >= lo && x <= hi)) fail(where, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

StageParams parse_stage(const json& v, const std::string& where) {
  require_object(v, where);
  reject_unknown(v, where, {"r", "s"});
  if (!v.contains("r")) fail(where + ".r", "missing");
  if (!v.contains("s")) fail(where + ".s", "missing");
  const auto r = static_cast<int>(get_int(v["r"], where + ".r", std::numeric_limits<int>::min(), 1 << 16));
  if (r < 2) fail(where + ".r", "r must be >= 2");
  if (!v["s"].is_array()) fail(where + ".s", "expected an array of spacer heights");
  std::vector<int> s;
  for (std::size_t i = 0; i < v["s"].size(); ++i) {
    const std::string at = where + ".s[" + std::to_string(i) + "]";
    const auto x = get_int(v["s"][i], at, std::numeric_limits<int>::min(), 1 << 20);
    if (x < 0) fail(at, "spacer heights must be >= 0");
    s.push_back(static_cast<int>(x));
  }
  if (static_cast<int>(s.size()) != r) {
    fail(where + ".s", "has " + std::to_string(s.size()) + " entries but r = " + std::to_string(r));
  }
  return StageParams(r, std::move(s));
}

std::vector<StageParams> parse_stage_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of stages");
  std::vector<StageParams> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_stage(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Construction parse_construction(const json& v, std::uint64_t& seed) {
  const std::string where = "construction";
  require_object(v, where);
  std::optional<int> h1;
  if (v.contains("h1")) h1 = static_cast<int>(get_int(v["h1"], where + ".h1", 0, 1 << 20));

  if (v.contains("preset")) {
    reject_unknown(v, where, {"preset", "h1"});
    const std::string name = get_string(v["preset"], where + ".preset");
    try {
      Construction c = Construction::preset(name);
      return h1 ? c.with_h1(*h1) : c;
    } catch (const rankone::Error& e) {
      fail(where + ".preset", e.what());
    }
  }

  reject_unknown(v, where, {"h1", "stages"});
  if (!h1) fail(where + ".h1", "missing (required unless a preset is given)");
  if (!v.contains("stages")) fail(where + ".stages", "missing (or give a preset)");
  const json& st = require_object(v["stages"], where + ".stages");
  if (!st.contains("kind")) fail(where + ".stages.kind", "missing (periodic, explicit or random)");
  const std::string kind = get_string(st["kind"], where + ".stages.kind");
  if (kind == "periodic") {
    reject_unknown(st, where + ".stages", {"kind", "pattern", "prefix"});
    if (!st.contains("pattern")) fail(where + ".stages.pattern", "missing");
    auto pattern = parse_stage_list(st["pattern"], where + ".stages.pattern");
    if (pattern.empty()) fail(where + ".stages.pattern", "must contain at least one stage");
    std::vector<StageParams> prefix;
    if (st.contains("prefix")) prefix = parse_stage_list(st["prefix"], where + ".stages.prefix");
    return Construction::periodic(*h1, std::move(pattern), std::move(prefix));
  }
  if (kind == "explicit") {
    reject_unknown(st, where + ".stages", {"kind", "list"});
    if (!st.contains("list")) fail(where + ".stages.list", "missing");
    auto list = parse_stage_list(st["list"], where + ".stages.list");
    if (list.empty()) fail(where + ".stages.list", "must contain at least one stage");
    return Construction::explicit_stages(*h1, std::move(list));
  }
  if (kind == "random") {
    reject_unknown(st, where + ".stages", {"kind", "r_max", "s_max", "seed"});
    if (!st.contains("r_max")) fail(where + ".stages.r_max", "missing");
    if (!st.contains("s_max")) fail(where + ".stages.s_max", "missing");
    const auto r_max = static_cast<int>(get_int(st["r_max"], where + ".stages.r_max", 2, 1 << 10));
    const auto s_max = static_cast<int>(get_int(st["s_max"], where + ".stages.s_max", 0, 1 << 10));
    if (st.contains("seed")) {
      seed = static_cast<std::uint64_t>(
          get_int(st["seed"], where + ".stages.seed", 0, std::numeric_limits<std::int64_t>::max()));
    }
    return Construction::random_bounded(*h1, r_max, s_max, seed);
  }
  fail(where + ".stages.kind", "unknown kind '" + kind + "' (expected periodic, explicit or random)");
}

CommandParams parse_params(const json& v, const std::string& command) {
  const std::string where = "params";
  require_object(v, where);
  const auto& keys = command_keys(command);
  reject_unknown(v, where, std::set<std::string>(keys.begin(), keys.end()));

  constexpr std::int64_t kBig = std::int64_t{1} << 40;
  CommandParams out;
  auto at = [&](const char* key) { return where + "." + key; };
  auto int_param = [&](const char* key, auto& field, std::int64_t lo, std::int64_t hi) {
    if (v.contains(key)) field = static_cast<std::remove_reference_t<decltype(field)>>(get_int(v[key], at(key), lo, hi));
  };
  auto real_param = [&](const char* key, double& field, double lo, double hi) {
    if (v.contains(key)) field = get_double(v[key], at(key), lo, hi);
  };
  int_param("J", out.J, 1, 4096);
  int_param("horizon", out.horizon, 1, 4096);
  int_param("bound", out.bound, 1, 1 << 20);
  int_param("j", out.j, 1, 4096);
  int_param("K", out.K, 1, 4096);
  int_param("n", out.n, -kBig, kBig);
  int_param("d", out.d, 1, 1 << 20);
  out.d_given = v.contains("d");
  int_param("m", out.m, 0, 64);
  int_param("Z", out.Z, 0, 256);
  int_param("count", out.count, 2, 64);
  int_param("p", out.p, 1, 1 << 20);
  int_param("q", out.q, 1, 1 << 20);
  int_param("N", out.N, 1, 100000000);
  int_param("M", out.M, 1, 64);
  int_param("start", out.start, 0, kBig);
  int_param("min_levels", out.min_levels, 1, std::int64_t{1} << 26);
  int_param("levels", out.levels, 1, 16);
  real_param("tau", out.tau, 0.0, 1.0);
  real_param("tol", out.tol, 0.0, 1.0);
  real_param("stability_tol", out.stability_tol, 0.0, 1.0);
  real_param("residual", out.residual, 0.0, 1.0);
  if (v.contains("observable")) {
    const json& obs = v["observable"];
    if (!obs.is_array() || obs.empty()) fail(at("observable"), "expected a nonempty array of integer coefficients");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      out.observable.push_back(get_int(obs[i], at("observable") + "[" + std::to_string(i) + "]", -(1 << 30), 1 << 30));
    }
  }
  if (command == "similarity" || command == "disjointness") {
    if (out.p == out.q) fail(at("q"), "p and q must differ");
  }
  if (command == "cascade" && out.p < 2) fail(at("p"), "must be >= 2");
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, keys] : schema()) out.push_back(name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& command_keys(std::string_view command) {
  const auto it = schema().find(command);
  if (it == schema().end()) {
    throw ConfigError("command: unknown command '" + std::string(command) + "' (valid commands: " +
                      join(command_names()) + ")");
  }
  return it->second;
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  require_object(root, "config");
  reject_unknown(root, "", {"construction", "command", "params", "output"});
  if (!root.contains("command")) fail("command", "missing (valid commands: " + join(command_names()) + ")");
  if (!root.contains("construction")) fail("construction", "missing");

  RunConfig out;
  out.command = get_string(root["command"], "command");
  command_keys(out.command);
  try {
    out.construction = parse_construction(root["construction"], out.seed);
  } catch (const rankone::Error& e) {
    fail("construction", e.what());
  }
  out.params = parse_params(root.contains("params") ? root["params"] : json::object(), out.command);
  if (root.contains("output")) {
    const json& o = require_object(root["output"], "output");
    reject_unknown(o, "output", {"csv", "report"});
    if (o.contains("csv")) out.csv_path = get_string(o["csv"], "output.csv");
    if (o.contains("report")) out.report_path = get_string(o["report"], "output.report");
  }
  return out;
}

}  // namespace rankone::cli
