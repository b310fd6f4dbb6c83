// Command-line front end: validate / run / sweep an experiment config.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stochmetric/config.hpp"
#include "stochmetric/errors.hpp"
#include "stochmetric/experiment.hpp"

namespace fs = std::filesystem;
using namespace stochmetric;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kIo = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

IniDocument load_document(const std::string& path, std::optional<std::uint64_t> seed) {
  std::vector<std::string> errors;
  IniDocument doc = IniDocument::parse(read_file(path), errors);
  if (!errors.empty()) {
    try {
      parse_config(doc);
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.issues.begin(), e.issues.end());
    }
    throw ConfigError(std::move(errors));
  }
  if (seed) doc.set("experiment.seed", std::to_string(*seed));
  return doc;
}

int report(const Error& e) {
  const int code = e.kind() == "config" ? kValidation : e.kind() == "io" ? kIo : kRuntime;
  json record{{"kind", e.kind()}, {"message", e.what()}, {"exit_code", code}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    record["issues"] = ce->issues;
    for (const auto& issue : ce->issues) std::cerr << "error: " << issue << '\n';
  } else {
    std::cerr << "error: " << e.what() << '\n';
  }
  std::cerr << json{{"error", record}}.dump() << '\n';
  return code;
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_manifest(const RunManifest& m) {
  std::cout << "wrote " << m.outputs.size() << " file(s) to " << m.output_dir.string() << '\n';
  for (const auto& f : m.outputs) std::cout << "  " << f.name << " (" << f.bytes << " bytes)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochmetric: stochastic metric background laboratory"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;

  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a config; print it with defaults filled");
  validate_cmd->add_option("config", config_path, "Config file")->required();
  validate_cmd->add_option("--seed", seed, "Override experiment.seed");

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config");
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("--seed", seed, "Override experiment.seed");

  std::string param, values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a config once per value of one parameter");
  sweep_cmd->add_option("config", config_path, "Config file")->required();
  sweep_cmd->add_option("--param", param, "Parameter path, section.key")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--seed", seed, "Override experiment.seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    const IniDocument doc = load_document(config_path, seed);

    if (*validate_cmd) {
      std::cout << serialize(parse_config(doc));
      return kOk;
    }

    if (*run_cmd) {
      print_manifest(run_experiment(parse_config(doc)));
      return kOk;
    }

    // sweep: validate every variant before running any.
    const auto list = split_values(values);
    if (list.empty()) throw ConfigError("--values: no values given");
    std::vector<ExperimentConfig> variants;
    for (const auto& v : list) {
      IniDocument variant = doc;
      variant.set(param, v);
      variants.push_back(parse_config(variant));
    }
    const fs::path base = resolve_output_dir(variants.front());
    json runs = json::array();
    for (std::size_t i = 0; i < variants.size(); ++i) {
      const fs::path dir = base / (param + "=" + list[i]);
      const RunManifest m = run_experiment(variants[i], dir);
      print_manifest(m);
      runs.push_back({{"value", list[i]}, {"output_dir", dir.lexically_relative(base).string()}});
    }
    std::ofstream out(base / "sweep.json", std::ios::trunc);
    out << json{{"param", param}, {"runs", runs}}.dump(2) << '\n';
    if (!out) throw IoError("cannot write sweep.json");
    return kOk;
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    return report(Error("runtime", e.what()));
  }
}
