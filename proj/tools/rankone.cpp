#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "cli/run.hpp"

namespace {

using nlohmann::json;
using namespace rankone::cli;

// Flag values are parsed as JSON when they look like it (numbers, arrays),
// otherwise kept as strings so the schema check reports the type mismatch.
json flag_value(const std::string& text) {
  const json parsed = json::parse(text, nullptr, false);
  return parsed.is_discarded() ? json(text) : parsed;
}

std::string read_all(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-one cutting-and-stacking constructions: towers, weak limits and Möbius sums"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string csv_path;
  std::string report_path;
  app.add_option("--config", config_path, "JSON run configuration file, or - for stdin");
  app.add_option("--csv", csv_path, "write the CSV artifact here (overrides the config)");
  app.add_option("--report", report_path, "write the text report here (overrides the config)");

  std::string preset = "chacon";
  int h1 = -1;
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " command");
    sub->add_option("--preset", preset, "odometerP, chacon, flat3 or class4");
    sub->add_option("--h1", h1, "initial tower height");
    for (const auto& key : command_keys(name)) {
      sub->add_option("--" + key, flags[name][key], "params." + key);
    }
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::string text;
  if (!config_path.empty()) {
    if (!app.get_subcommands().empty()) {
      std::cerr << "error: give either --config or a subcommand, not both\n";
      return kExitConfig;
    }
    if (config_path == "-") {
      text = read_all(std::cin);
    } else {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot read " << config_path << "\n";
        return kExitConfig;
      }
      text = read_all(in);
    }
  } else if (!app.get_subcommands().empty()) {
    const std::string name = app.get_subcommands().front()->get_name();
    json doc;
    doc["construction"]["preset"] = preset;
    if (h1 >= 0) doc["construction"]["h1"] = h1;
    doc["command"] = name;
    doc["params"] = json::object();
    for (const auto& [key, value] : flags[name]) {
      if (subs[name]->count("--" + key) > 0) doc["params"][key] = flag_value(value);
    }
    text = doc.dump();
  } else {
    std::cerr << app.help();
    return kExitConfig;
  }

  RunConfig config;
  try {
    config = parse_config(text);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!csv_path.empty()) config.csv_path = csv_path;
  if (!report_path.empty()) config.report_path = report_path;
  return emit(config, run(config));
}
