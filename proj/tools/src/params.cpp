#include "params.hpp"

#include <fstream>

namespace symco::cli {

using nlohmann::json;

CoagulationMeasure measure_param(const json& j) {
  return as_config("measure", [&] {
    auto f = measure_from_json(j.dump());
    require_valid(f);
    return f;
  });
}

DiscreteLaw discrete_law_param(const json& j) {
  return as_config("discrete law", [&] { return discrete_law_from_json(j.dump()); });
}

PositiveLaw positive_law_param(const json& j) {
  return as_config("positive law", [&] { return positive_law_from_json(j.dump()); });
}

RLaw r_law_param(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "constant") return ConstantR{j.at("r").get<double>()};
  const UniformR u{j.value("lo", 0.0), j.value("hi", 1.0)};
  if (!(u.lo < u.hi)) throw ConfigError("r_law: uniform requires lo < hi");
  return u;
}

Demography demography_param(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "short_drastic") {
    ShortDrastic d;
    d.alpha = j.value("alpha", 1.0);
    d.gamma = j.value("gamma", 0.25);
    d.f0 = j.contains("f0") ? measure_param(j["f0"]) : CoagulationMeasure::explicit_masses({{2, 1.0}});
    return d;
  }
  if (type == "long_drastic") {
    LongDrastic d;
    d.alpha = j.value("alpha", 1.0);
    d.eta = j.value("eta", 1.0);
    d.f0 = j.contains("f0") ? discrete_law_param(j["f0"]) : DiscreteLaw::point(2);
    d.durations = j.contains("durations") ? discrete_law_param(j["durations"]) : DiscreteLaw::point(1);
    return d;
  }
  if (type == "long_soft") {
    LongSoft d;
    d.alpha = j.value("alpha", 1.0);
    d.eta = j.value("eta", 1.0);
    d.soft_durations = j.contains("soft_durations") ? positive_law_param(j["soft_durations"]) : PositiveLaw(PointMass{0.5});
    d.b_exponent = j.value("b_exponent", 0.5);
    return d;
  }
  return IIDSizes{j.contains("r_law") ? r_law_param(j["r_law"]) : RLaw{UniformR{}}};
}

double demography_alpha(const Demography& d) {
  return std::visit(
      [](const auto& v) {
        if constexpr (requires { v.alpha; }) {
          return v.alpha;
        } else {
          return 1.0;
        }
      },
      d);
}

SdeModel sde_model_param(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "sde1") {
    return Sde1{j.contains("f0") ? discrete_law_param(j["f0"]) : DiscreteLaw::point(2), j.value("rate", 1.0)};
  }
  if (type == "sde2") {
    return Sde2{j.contains("f0") ? discrete_law_param(j["f0"]) : DiscreteLaw::point(2),
                j.contains("durations") ? discrete_law_param(j["durations"]) : DiscreteLaw::point(1),
                j.value("eta", 1.0)};
  }
  return Sde3{j.contains("soft_durations") ? positive_law_param(j["soft_durations"]) : PositiveLaw(PointMass{0.5}),
              j.value("eta", 1.0)};
}

StepPath step_path_param(const json& j) {
  if (j.is_string()) {
    const auto path = j.get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read path file " + path);
    return as_config("path file " + path, [&] { return read_path_csv(in); });
  }
  return as_config("step path", [&] {
    return StepPath(j.at("horizon").get<double>(), j.at("times").get<std::vector<double>>(),
                    j.at("values").get<std::vector<double>>());
  });
}

}  // namespace symco::cli
