#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "schema.hpp"

namespace symco::cli {

using nlohmann::json;

void apply_assignment(json& parameters, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got \"" + assignment + "\"");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &parameters;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: empty path component in \"" + key + "\"");
    if (!node->is_object()) throw ConfigError("--set: \"" + key + "\" descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig load_config(const Overrides& o) {
  json doc = json::object();
  if (o.config_path) {
    std::ifstream in(*o.config_path);
    if (!in) throw ConfigError("cannot read config file " + *o.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    doc = json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file " + *o.config_path + " is not valid JSON");
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  if (o.command) {
    if (doc.contains("command") && doc["command"] != *o.command)
      throw ConfigError("command \"" + *o.command + "\" conflicts with config command " + doc["command"].dump());
    doc["command"] = *o.command;
  }
  if (!doc.contains("parameters")) doc["parameters"] = json::object();
  if (!o.assignments.empty() && !doc["parameters"].is_object())
    throw ConfigError("parameters must be an object");
  for (const auto& a : o.assignments) apply_assignment(doc["parameters"], a);
  if (o.seed) doc["seed"] = *o.seed;
  if (o.replicates) doc["replicates"] = *o.replicates;
  if (o.workers) doc["workers"] = *o.workers;
  if (o.output_dir) doc["output_dir"] = *o.output_dir;

  const SchemaValidator validator(run_config_schema());
  const auto errors = validator.validate(doc);
  if (!errors.empty()) {
    std::string msg = "configuration does not match the schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }

  RunConfig c;
  c.command = doc["command"].get<std::string>();
  if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("replicates")) c.replicates = doc["replicates"].get<std::size_t>();
  if (doc.contains("workers")) c.workers = doc["workers"].get<unsigned>();
  if (doc.contains("output_dir")) {
    c.output_dir = doc["output_dir"].get<std::string>();
  } else if (const char* env = std::getenv("SYMCO_OUT_DIR"); env && *env) {
    c.output_dir = env;
  } else {
    c.output_dir = "symco_out";
  }
  c.parameters = doc["parameters"];
  doc["seed"] = c.seed;
  doc["replicates"] = c.replicates;
  doc["workers"] = c.workers;
  doc["output_dir"] = c.output_dir;
  c.document = std::move(doc);
  return c;
}

}  // namespace symco::cli
