#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "symco/forward.hpp"
#include "symco/measures.hpp"
#include "symco/metric.hpp"
#include "symco/sde.hpp"

namespace symco::cli {

// Converters from validated configuration fragments to module types. Values the modules
// reject surface as ConfigError.
CoagulationMeasure measure_param(const nlohmann::json& j);
DiscreteLaw discrete_law_param(const nlohmann::json& j);
PositiveLaw positive_law_param(const nlohmann::json& j);
RLaw r_law_param(const nlohmann::json& j);
Demography demography_param(const nlohmann::json& j);
SdeModel sde_model_param(const nlohmann::json& j);
StepPath step_path_param(const nlohmann::json& j);

// Wraps module-side argument errors raised while building parameters.
template <class Fn>
auto as_config(const std::string& what, Fn fn) -> decltype(fn());

double demography_alpha(const Demography& d);

}  // namespace symco::cli

#include "config.hpp"

namespace symco::cli {

template <class Fn>
auto as_config(const std::string& what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace symco::cli
