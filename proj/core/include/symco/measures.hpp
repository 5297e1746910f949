#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "symco/random.hpp"

namespace symco {

struct ExplicitBody {
  std::map<std::int64_t, double> masses;  // k >= 1 -> F(k)
};

struct PowerLawBody {
  double beta = 1.0;                         // F(k) = k^{-beta}
  std::optional<std::int64_t> truncation;    // support {1..K} when set
};

using MeasureBody = std::variant<ExplicitBody, PowerLawBody>;

// F = a * delta_0 + body.
struct CoagulationMeasure {
  double kingman_atom = 0.0;
  MeasureBody body = ExplicitBody{};

  static CoagulationMeasure kingman(double a = 1.0);
  static CoagulationMeasure explicit_masses(std::map<std::int64_t, double> masses, double a = 0.0);
  static CoagulationMeasure power_law(double beta, std::optional<std::int64_t> truncation = std::nullopt,
                                      double a = 0.0);

  // F(k); F(0) is the Kingman atom.
  double mass(std::int64_t k) const;
  bool is_explicit() const { return std::holds_alternative<ExplicitBody>(body); }
  bool has_finite_support() const;
  // Largest k with positive mass; throws for untruncated power laws.
  std::int64_t support_max() const;
  // Explicit support as (k, F(k)) with F(k) > 0; power laws must be truncated.
  std::vector<std::pair<std::int64_t, double>> finite_atoms() const;
};

struct ValidationReport {
  bool ok = true;
  double sum_mass_over_k = 0.0;    // sum_{k>=1} F(k)/k
  double sum_error_bound = 0.0;    // bound on the numerical error of the sum above
  bool sum_is_symbolic = false;    // finiteness decided analytically
  std::vector<std::string> failures;
};

ValidationReport validate(const CoagulationMeasure& f);
// Throws std::invalid_argument listing the failures.
void require_valid(const CoagulationMeasure& f);

// (k, S(xi^k)) pairs: (0, a) when a > 0, then (k, F(k)/k). Untruncated power laws are cut at max_k.
std::vector<std::pair<std::int64_t, double>> s_view(const CoagulationMeasure& f,
                                                   std::int64_t max_k = 1000);

// Comes down from infinity: a > 0 or sum_k F(k) diverges.
bool cdi_check(const CoagulationMeasure& f);

std::string to_json(const CoagulationMeasure& f);
CoagulationMeasure measure_from_json(std::string_view text);

// Probability law on positive integers.
class DiscreteLaw {
 public:
  DiscreteLaw() = default;
  explicit DiscreteLaw(std::vector<std::pair<std::int64_t, double>> support);
  static DiscreteLaw point(std::int64_t value);

  const std::vector<std::pair<std::int64_t, double>>& support() const { return support_; }
  double probability(std::int64_t value) const;
  double mean() const;
  std::int64_t max_value() const;
  std::int64_t sample(Rng& rng) const;
  ExplicitBody as_body(double scale = 1.0) const;

 private:
  std::vector<std::pair<std::int64_t, double>> support_;  // sorted by value
  std::vector<double> cumulative_;
};

struct PointMass {
  double sigma = 1.0;
};
struct ExponentialLaw {
  double mean = 1.0;
};
struct PositiveAtoms {
  std::vector<std::pair<double, double>> atoms;  // (value > 0, probability)
};

// Probability law on (0, inf).
class PositiveLaw {
 public:
  using Variant = std::variant<PointMass, ExponentialLaw, PositiveAtoms>;

  PositiveLaw() : PositiveLaw(PointMass{}) {}
  explicit PositiveLaw(Variant v);

  const Variant& variant() const { return law_; }
  double sample(Rng& rng) const;
  double mean() const;
  // Atoms for finite-atom laws, std::nullopt for continuous ones.
  std::optional<std::vector<std::pair<double, double>>> finite_atoms() const;

 private:
  Variant law_;
};

std::string to_json(const DiscreteLaw& law);
DiscreteLaw discrete_law_from_json(std::string_view text);
std::string to_json(const PositiveLaw& law);
PositiveLaw positive_law_from_json(std::string_view text);

}  // namespace symco
