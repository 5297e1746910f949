#include "symco/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numerics.hpp"

namespace symco {

using nlohmann::json;

CoagulationMeasure CoagulationMeasure::kingman(double a) { return {a, ExplicitBody{}}; }

CoagulationMeasure CoagulationMeasure::explicit_masses(std::map<std::int64_t, double> masses, double a) {
  return {a, ExplicitBody{std::move(masses)}};
}

CoagulationMeasure CoagulationMeasure::power_law(double beta, std::optional<std::int64_t> truncation,
                                                 double a) {
  return {a, PowerLawBody{beta, truncation}};
}

double CoagulationMeasure::mass(std::int64_t k) const {
  if (k < 0) return 0.0;
  if (k == 0) return kingman_atom;
  if (const auto* e = std::get_if<ExplicitBody>(&body)) {
    const auto it = e->masses.find(k);
    return it == e->masses.end() ? 0.0 : it->second;
  }
  const auto& p = std::get<PowerLawBody>(body);
  if (p.truncation && k > *p.truncation) return 0.0;
  return std::pow(static_cast<double>(k), -p.beta);
}

bool CoagulationMeasure::has_finite_support() const {
  if (is_explicit()) return true;
  return std::get<PowerLawBody>(body).truncation.has_value();
}

std::int64_t CoagulationMeasure::support_max() const {
  if (const auto* e = std::get_if<ExplicitBody>(&body)) {
    std::int64_t m = 0;
    for (const auto& [k, v] : e->masses)
      if (v > 0.0) m = std::max(m, k);
    return m;
  }
  const auto& p = std::get<PowerLawBody>(body);
  if (!p.truncation) throw std::logic_error("support_max: untruncated power law");
  return *p.truncation;
}

std::vector<std::pair<std::int64_t, double>> CoagulationMeasure::finite_atoms() const {
  std::vector<std::pair<std::int64_t, double>> out;
  if (const auto* e = std::get_if<ExplicitBody>(&body)) {
    for (const auto& [k, v] : e->masses)
      if (v > 0.0) out.emplace_back(k, v);
    return out;
  }
  const std::int64_t kmax = support_max();
  out.reserve(static_cast<std::size_t>(kmax));
  for (std::int64_t k = 1; k <= kmax; ++k) out.emplace_back(k, mass(k));
  return out;
}

ValidationReport validate(const CoagulationMeasure& f) {
  ValidationReport r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.failures.push_back(std::move(msg));
  };
  if (!std::isfinite(f.kingman_atom)) fail("kingman atom is not finite");
  if (f.kingman_atom < 0.0) fail("kingman atom is negative");
  if (const auto* e = std::get_if<ExplicitBody>(&f.body)) {
    detail::CompensatedSum s;
    for (const auto& [k, v] : e->masses) {
      if (k < 1) fail("explicit body has a key below 1: " + std::to_string(k));
      if (!std::isfinite(v)) {
        fail("explicit mass at k=" + std::to_string(k) + " is not finite");
        continue;
      }
      if (v < 0.0) fail("explicit mass at k=" + std::to_string(k) + " is negative");
      if (k >= 1) s.add(v / static_cast<double>(k));
    }
    r.sum_mass_over_k = s.value();
    if (!std::isfinite(r.sum_mass_over_k)) fail("sum F(k)/k is not finite");
    return r;
  }
  const auto& p = std::get<PowerLawBody>(f.body);
  if (!std::isfinite(p.beta) || p.beta <= 0.0) {
    fail("power law exponent must be positive (sum F(k)/k diverges otherwise)");
    r.sum_mass_over_k = INFINITY;
    return r;
  }
  if (p.truncation && *p.truncation < 1) fail("power law truncation must be >= 1");
  const double s = 1.0 + p.beta;
  if (p.truncation) {
    detail::CompensatedSum acc;
    const std::int64_t K = *p.truncation;
    const std::int64_t direct = std::min<std::int64_t>(K, 100000);
    for (std::int64_t k = 1; k <= direct; ++k) acc.add(std::pow(static_cast<double>(k), -s));
    if (K > direct) {
      acc.add(detail::hurwitz_tail(s, static_cast<double>(direct + 1)) -
              detail::hurwitz_tail(s, static_cast<double>(K + 1)));
    }
    r.sum_mass_over_k = acc.value();
  } else {
    r.sum_is_symbolic = true;
    detail::CompensatedSum acc;
    for (int k = 1; k < 1000; ++k) acc.add(std::pow(static_cast<double>(k), -s));
    acc.add(detail::hurwitz_tail(s, 1000.0));
    r.sum_mass_over_k = acc.value();
    // first omitted Euler-Maclaurin term
    r.sum_error_bound = s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * (s + 5) * (s + 6) *
                        std::pow(1000.0, -s - 9) / 1209600.0;
  }
  return r;
}

void require_valid(const CoagulationMeasure& f) {
  const auto r = validate(f);
  if (r.ok) return;
  std::string msg = "invalid coagulation measure:";
  for (const auto& m : r.failures) msg += " " + m + ";";
  throw std::invalid_argument(msg);
}

std::vector<std::pair<std::int64_t, double>> s_view(const CoagulationMeasure& f, std::int64_t max_k) {
  require_valid(f);
  std::vector<std::pair<std::int64_t, double>> out;
  if (f.kingman_atom > 0.0) out.emplace_back(0, f.kingman_atom);
  if (const auto* e = std::get_if<ExplicitBody>(&f.body)) {
    for (const auto& [k, v] : e->masses)
      if (v > 0.0) out.emplace_back(k, v / static_cast<double>(k));
    return out;
  }
  const auto& p = std::get<PowerLawBody>(f.body);
  const std::int64_t kmax = p.truncation ? std::min(*p.truncation, max_k) : max_k;
  for (std::int64_t k = 1; k <= kmax; ++k)
    out.emplace_back(k, std::pow(static_cast<double>(k), -p.beta) / static_cast<double>(k));
  return out;
}

bool cdi_check(const CoagulationMeasure& f) {
  if (f.kingman_atom > 0.0) return true;
  if (f.is_explicit()) return false;
  const auto& p = std::get<PowerLawBody>(f.body);
  if (p.truncation) return false;
  return p.beta <= 1.0;
}

namespace {

json measure_to_json_value(const CoagulationMeasure& f) {
  json j;
  j["a"] = f.kingman_atom;
  if (const auto* e = std::get_if<ExplicitBody>(&f.body)) {
    json masses = json::array();
    for (const auto& [k, v] : e->masses) masses.push_back({{"k", k}, {"mass", v}});
    j["body"] = {{"type", "explicit"}, {"masses", masses}};
  } else {
    const auto& p = std::get<PowerLawBody>(f.body);
    json b = {{"type", "powerlaw"}, {"beta", p.beta}};
    if (p.truncation) b["truncation"] = *p.truncation;
    j["body"] = b;
  }
  return j;
}

}  // namespace

std::string to_json(const CoagulationMeasure& f) { return measure_to_json_value(f).dump(); }

CoagulationMeasure measure_from_json(std::string_view text) {
  const json j = json::parse(text);
  CoagulationMeasure f;
  f.kingman_atom = j.value("a", 0.0);
  if (!j.contains("body") || j["body"].is_null()) {
    f.body = ExplicitBody{};
    return f;
  }
  const json& b = j.at("body");
  const std::string type = b.at("type").get<std::string>();
  if (type == "explicit") {
    ExplicitBody e;
    for (const auto& m : b.value("masses", json::array())) {
      const auto k = m.at("k").get<std::int64_t>();
      if (!e.masses.emplace(k, m.at("mass").get<double>()).second)
        throw std::invalid_argument("duplicate explicit mass at k=" + std::to_string(k));
    }
    f.body = std::move(e);
  } else if (type == "powerlaw") {
    PowerLawBody p;
    p.beta = b.at("beta").get<double>();
    if (b.contains("truncation") && !b["truncation"].is_null()) p.truncation = b["truncation"].get<std::int64_t>();
    f.body = p;
  } else {
    throw std::invalid_argument("unknown measure body type: " + type);
  }
  return f;
}

DiscreteLaw::DiscreteLaw(std::vector<std::pair<std::int64_t, double>> support) : support_(std::move(support)) {
  if (support_.empty()) throw std::invalid_argument("DiscreteLaw: empty support");
  std::sort(support_.begin(), support_.end());
  detail::CompensatedSum total;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const auto& [v, p] = support_[i];
    if (v < 1) throw std::invalid_argument("DiscreteLaw: values must be positive integers");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("DiscreteLaw: probability outside [0,1]");
    if (i > 0 && support_[i - 1].first == v) throw std::invalid_argument("DiscreteLaw: repeated value");
    total.add(p);
    cumulative_.push_back(total.value());
  }
  if (std::abs(total.value() - 1.0) > 1e-12) throw std::invalid_argument("DiscreteLaw: probabilities do not sum to 1");
}

DiscreteLaw DiscreteLaw::point(std::int64_t value) { return DiscreteLaw({{value, 1.0}}); }

double DiscreteLaw::probability(std::int64_t value) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), std::make_pair(value, -1.0));
  return it != support_.end() && it->first == value ? it->second : 0.0;
}

double DiscreteLaw::mean() const {
  double m = 0.0;
  for (const auto& [v, p] : support_) m += static_cast<double>(v) * p;
  return m;
}

std::int64_t DiscreteLaw::max_value() const {
  std::int64_t m = 0;
  for (const auto& [v, p] : support_)
    if (p > 0.0) m = std::max(m, v);
  return m;
}

std::int64_t DiscreteLaw::sample(Rng& rng) const {
  if (support_.size() == 1) return support_.front().first;
  const double u = uniform01(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), support_.size() - 1);
  return support_[idx].first;
}

ExplicitBody DiscreteLaw::as_body(double scale) const {
  ExplicitBody b;
  for (const auto& [v, p] : support_)
    if (p > 0.0) b.masses[v] += scale * p;
  return b;
}

PositiveLaw::PositiveLaw(Variant v) : law_(std::move(v)) {
  if (const auto* pm = std::get_if<PointMass>(&law_)) {
    if (!(pm->sigma > 0.0) || !std::isfinite(pm->sigma)) throw std::invalid_argument("PositiveLaw: point mass must be positive");
  } else if (const auto* ex = std::get_if<ExponentialLaw>(&law_)) {
    if (!(ex->mean > 0.0) || !std::isfinite(ex->mean)) throw std::invalid_argument("PositiveLaw: exponential mean must be positive");
  } else {
    const auto& at = std::get<PositiveAtoms>(law_);
    if (at.atoms.empty()) throw std::invalid_argument("PositiveLaw: no atoms");
    double total = 0.0;
    for (const auto& [x, p] : at.atoms) {
      if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("PositiveLaw: atom outside (0, inf)");
      if (!(p >= 0.0)) throw std::invalid_argument("PositiveLaw: negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("PositiveLaw: probabilities do not sum to 1");
  }
}

double PositiveLaw::sample(Rng& rng) const {
  if (const auto* pm = std::get_if<PointMass>(&law_)) return pm->sigma;
  if (const auto* ex = std::get_if<ExponentialLaw>(&law_)) return exponential(rng, 1.0 / ex->mean);
  const auto& at = std::get<PositiveAtoms>(law_).atoms;
  double u = uniform01(rng);
  for (const auto& [x, p] : at) {
    if (u < p) return x;
    u -= p;
  }
  return at.back().first;
}

double PositiveLaw::mean() const {
  if (const auto* pm = std::get_if<PointMass>(&law_)) return pm->sigma;
  if (const auto* ex = std::get_if<ExponentialLaw>(&law_)) return ex->mean;
  double m = 0.0;
  for (const auto& [x, p] : std::get<PositiveAtoms>(law_).atoms) m += x * p;
  return m;
}

std::optional<std::vector<std::pair<double, double>>> PositiveLaw::finite_atoms() const {
  if (const auto* pm = std::get_if<PointMass>(&law_)) return std::vector<std::pair<double, double>>{{pm->sigma, 1.0}};
  if (std::holds_alternative<ExponentialLaw>(law_)) return std::nullopt;
  return std::get<PositiveAtoms>(law_).atoms;
}

std::string to_json(const DiscreteLaw& law) {
  json arr = json::array();
  for (const auto& [v, p] : law.support()) arr.push_back({{"value", v}, {"p", p}});
  return json{{"support", arr}}.dump();
}

DiscreteLaw discrete_law_from_json(std::string_view text) {
  const json j = json::parse(text);
  if (j.is_number_integer()) return DiscreteLaw::point(j.get<std::int64_t>());
  if (j.contains("point")) return DiscreteLaw::point(j["point"].get<std::int64_t>());
  std::vector<std::pair<std::int64_t, double>> s;
  for (const auto& e : j.at("support")) s.emplace_back(e.at("value").get<std::int64_t>(), e.at("p").get<double>());
  return DiscreteLaw(std::move(s));
}

std::string to_json(const PositiveLaw& law) {
  json j;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          j = {{"type", "point"}, {"sigma", v.sigma}};
        } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
          j = {{"type", "exponential"}, {"mean", v.mean}};
        } else {
          json arr = json::array();
          for (const auto& [x, p] : v.atoms) arr.push_back({{"value", x}, {"p", p}});
          j = {{"type", "atoms"}, {"atoms", arr}};
        }
      },
      law.variant());
  return j.dump();
}

PositiveLaw positive_law_from_json(std::string_view text) {
  const json j = json::parse(text);
  const std::string type = j.at("type").get<std::string>();
  if (type == "point") return PositiveLaw(PointMass{j.at("sigma").get<double>()});
  if (type == "exponential") return PositiveLaw(ExponentialLaw{j.at("mean").get<double>()});
  if (type == "atoms") {
    PositiveAtoms at;
    for (const auto& e : j.at("atoms")) at.atoms.emplace_back(e.at("value").get<double>(), e.at("p").get<double>());
    return PositiveLaw(std::move(at));
  }
  throw std::invalid_argument("unknown positive law type: " + type);
}

}  // namespace symco
