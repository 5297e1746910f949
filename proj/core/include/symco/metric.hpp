#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace symco {

// Piecewise-constant cadlag path on [0, T]: value v_i on [t_i, t_{i+1}), t_0 = 0.
class StepPath {
 public:
  StepPath(double horizon, std::vector<double> times, std::vector<double> values);
  static StepPath constant(double horizon, double value);

  double horizon() const { return horizon_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double value_at(double t) const;
  double final_value() const { return values_.back(); }
  // Times t_i > 0 at which the value changes.
  std::vector<double> jump_times() const;
  std::size_t jump_count() const { return jump_times().size(); }

 private:
  double horizon_;
  std::vector<double> times_;
  std::vector<double> values_;
};

// Piecewise-linear strictly increasing bijection of [0, T] through (x_i, y_i) knots.
class Srt {
 public:
  Srt(double horizon, std::vector<std::pair<double, double>> knots);
  static Srt identity(double horizon);

  double horizon() const { return horizon_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  double operator()(double t) const;
  Srt inverse() const;
  // sup_t |t - f(t)|
  double sup_deviation() const;

 private:
  double horizon_;
  std::vector<std::pair<double, double>> knots_;
};

// Finite union of disjoint half-open intervals [a, b) inside [0, T].
class ExclusionSet {
 public:
  ExclusionSet() = default;
  explicit ExclusionSet(std::vector<std::pair<double, double>> intervals);

  const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
  double measure() const;
  bool contains(double t) const;

 private:
  std::vector<std::pair<double, double>> intervals_;
};

struct J1Result {
  double distance = 0.0;
  bool exact = false;
  Srt f = Srt::identity(1.0);
};

J1Result j1_match(const StepPath& x, const StepPath& y, std::size_t budget = 10000);
double j1_distance(const StepPath& x, const StepPath& y, std::size_t budget = 10000);

struct DLambdaTerms {
  double kept_mismatch = 0.0;   // sup over A of |x(t) - y(f(t))|
  double time_deviation = 0.0;  // sup |t - f(t)|
  double excluded_measure = 0.0;
  double final_gap = 0.0;
  double value() const;
};

struct DLambdaWitness {
  ExclusionSet kept;  // the set A on which the mismatch is measured
  Srt f = Srt::identity(1.0);
  bool swapped = false;  // witness applies to (y, x)
};

struct DLambdaResult {
  double bound = 0.0;
  DLambdaTerms terms;
  DLambdaWitness witness;
};

// Independent re-evaluation of the four terms for a given (A, f).
DLambdaTerms evaluate_dlambda_terms(const StepPath& x, const StepPath& y, const ExclusionSet& kept, const Srt& f);

// Best A for a fixed f (exact threshold sweep over the mismatch profile).
DLambdaResult d_lambda_for_f(const StepPath& x, const StepPath& y, const Srt& f);

// Upper bound on d_lambda with witness. Hints are extra SRTs tried for the (x, y) direction
// and, inverted, for (y, x).
DLambdaResult d_lambda_upper(const StepPath& x, const StepPath& y, std::size_t budget = 10000,
                             std::span<const Srt> hints = {});

double uniform_distance(const StepPath& x, const StepPath& y);

using TestFunction = std::function<double(double, double)>;
// primitive(s, v) = int_0^s g(u, v) du, used for closed-form segment integrals.
struct NamedTestFunction {
  std::string name;
  TestFunction g;
  TestFunction primitive;
};
// Polynomials in (s, v) up to degree 3 and clipped sinusoids.
std::vector<NamedTestFunction> default_test_functions(double horizon);

// |int g(s, x(s)) ds - int g(s, y(s)) ds| for each g, then |x(T) - y(T)|.
std::vector<double> convergence_in_measure_stat(const StepPath& x, const StepPath& y,
                                                std::span<const NamedTestFunction> tests);

void write_path_csv(std::ostream& out, const StepPath& p);
StepPath read_path_csv(std::istream& in);

}  // namespace symco
