#include "schema.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "run_config_schema.hpp"

namespace symco::cli {

using nlohmann::json;

namespace {

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && std::floor(d) == d;
    }
    return false;
  }
  throw std::logic_error("schema: unknown type " + t);
}

// Numbers compare by value across integer and float representations.
bool json_equal(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    if (a.is_number_float() || b.is_number_float()) return a.get<double>() == b.get<double>();
  }
  return a == b;
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

}  // namespace

SchemaValidator::SchemaValidator(json schema) : root_(std::move(schema)) {}

std::vector<std::string> SchemaValidator::validate(const json& doc) const {
  std::vector<std::string> errors;
  check(root_, doc, "", errors);
  return errors;
}

const json& SchemaValidator::resolve(const json& schema) const {
  const json* s = &schema;
  for (int depth = 0; s->is_object() && s->contains("$ref"); ++depth) {
    if (depth > 32) throw std::logic_error("schema: $ref cycle");
    const auto ref = (*s)["$ref"].get<std::string>();
    if (ref.rfind("#/", 0) != 0) throw std::logic_error("schema: only local references are supported: " + ref);
    s = &root_.at(json::json_pointer(ref.substr(1)));
  }
  return *s;
}

void SchemaValidator::check(const json& raw, const json& v, const std::string& path,
                            std::vector<std::string>& errors) const {
  const json& s = resolve(raw);
  if (s.is_boolean()) {
    if (!s.get<bool>()) errors.push_back((path.empty() ? "/" : path) + ": not allowed");
    return;
  }
  const std::string where = path.empty() ? "/" : path;
  if (s.contains("type")) {
    const json& t = s["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(v, t.get<std::string>());
    } else {
      for (const auto& e : t) ok = ok || has_type(v, e.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump() + ", got " + v.type_name());
      return;
    }
  }
  if (s.contains("const") && !json_equal(s["const"], v))
    errors.push_back(where + ": must equal " + s["const"].dump());
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || json_equal(e, v);
    if (!found) errors.push_back(where + ": must be one of " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (s.contains("minimum") && d < s["minimum"].get<double>())
      errors.push_back(where + ": below minimum " + s["minimum"].dump());
    if (s.contains("maximum") && d > s["maximum"].get<double>())
      errors.push_back(where + ": above maximum " + s["maximum"].dump());
    if (s.contains("exclusiveMinimum") && d <= s["exclusiveMinimum"].get<double>())
      errors.push_back(where + ": must exceed " + s["exclusiveMinimum"].dump());
    if (s.contains("exclusiveMaximum") && d >= s["exclusiveMaximum"].get<double>())
      errors.push_back(where + ": must be below " + s["exclusiveMaximum"].dump());
  }
  if (v.is_string() && s.contains("minLength") && v.get<std::string>().size() < s["minLength"].get<std::size_t>())
    errors.push_back(where + ": shorter than " + s["minLength"].dump());
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      errors.push_back(where + ": fewer than " + s["minItems"].dump() + " items");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      errors.push_back(where + ": more than " + s["maxItems"].dump() + " items");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(s["items"], v[i], child(path, std::to_string(i)), errors);
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s["required"])
        if (!v.contains(r.get<std::string>())) errors.push_back(where + ": missing required key " + r.dump());
    const json empty = json::object();
    const json& props = s.contains("properties") ? s["properties"] : empty;
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        check(props[key], value, child(path, key), errors);
      } else if (s.contains("additionalProperties")) {
        const json& extra = s["additionalProperties"];
        if (extra.is_boolean() && !extra.get<bool>()) {
          errors.push_back(where + ": unknown key \"" + key + "\"");
        } else if (extra.is_object()) {
          check(extra, value, child(path, key), errors);
        }
      }
    }
  }
  if (s.contains("allOf"))
    for (const auto& sub : s["allOf"]) check(sub, v, path, errors);
  if (s.contains("anyOf")) {
    bool any = false;
    for (const auto& sub : s["anyOf"]) {
      std::vector<std::string> e;
      check(sub, v, path, e);
      any = any || e.empty();
    }
    if (!any) errors.push_back(where + ": matches none of the allowed forms");
  }
  if (s.contains("oneOf")) {
    int matches = 0;
    // report the alternative that got furthest: deepest shallowest error, then fewest errors
    std::vector<std::string> closest;
    std::size_t closest_depth = 0;
    auto depth = [](const std::vector<std::string>& e) {
      std::size_t d = std::string::npos;
      for (const auto& m : e) d = std::min(d, m.substr(0, m.find(':')).size());
      return d;
    };
    for (const auto& sub : s["oneOf"]) {
      std::vector<std::string> e;
      check(sub, v, path, e);
      if (e.empty()) {
        ++matches;
        continue;
      }
      const std::size_t d = depth(e);
      if (closest.empty() || d > closest_depth || (d == closest_depth && e.size() < closest.size())) {
        closest = std::move(e);
        closest_depth = d;
      }
    }
    if (matches == 0) {
      errors.push_back(where + ": matches none of the allowed forms");
      errors.insert(errors.end(), closest.begin(), closest.end());
    } else if (matches > 1) {
      errors.push_back(where + ": matches more than one allowed form");
    }
  }
  if (s.contains("if")) {
    std::vector<std::string> e;
    check(s["if"], v, path, e);
    if (e.empty()) {
      if (s.contains("then")) check(s["then"], v, path, errors);
    } else if (s.contains("else")) {
      check(s["else"], v, path, errors);
    }
  }
}

const json& run_config_schema() {
  static const json schema = json::parse(kRunConfigSchema);
  return schema;
}

}  // namespace symco::cli
