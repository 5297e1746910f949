#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace symco::cli {

// Draft-07 subset: type, enum, const, properties, required, additionalProperties, items,
// minItems, maxItems, minLength, minimum, maximum, exclusiveMinimum, exclusiveMaximum,
// allOf, anyOf, oneOf, if/then/else and local $ref ("#/definitions/...").
class SchemaValidator {
 public:
  explicit SchemaValidator(nlohmann::json schema);

  // Returns one message per violation, each prefixed with a JSON pointer.
  std::vector<std::string> validate(const nlohmann::json& doc) const;

 private:
  void check(const nlohmann::json& schema, const nlohmann::json& value, const std::string& path,
             std::vector<std::string>& errors) const;
  const nlohmann::json& resolve(const nlohmann::json& schema) const;

  nlohmann::json root_;
};

// The run-configuration schema compiled into the binary.
const nlohmann::json& run_config_schema();

}  // namespace symco::cli
