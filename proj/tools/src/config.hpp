#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace symco::cli {

// Configuration or schema problem; reported with exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"rates",   "simulate-coalescent", "simulate-forward", "simulate-sde",
                                              "duality", "metric",              "asymptotics",      "mohle"};
  return names;
}

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::size_t replicates = 1000;
  unsigned workers = 1;
  std::string output_dir;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json document;  // effective configuration after overrides
};

struct Overrides {
  std::optional<std::string> command;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<unsigned> workers;
  std::optional<std::string> output_dir;
  std::vector<std::string> assignments;  // key=value under "parameters"
};

// Reads the config file (if any), applies overrides, validates against the schema and fills defaults.
// The output directory falls back to $SYMCO_OUT_DIR, then "symco_out".
RunConfig load_config(const Overrides& o);

// "a.b=3" sets parameters.a.b; the value is parsed as JSON when possible, otherwise kept as a string.
void apply_assignment(nlohmann::json& parameters, const std::string& assignment);

}  // namespace symco::cli
