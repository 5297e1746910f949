#pragma once

#include <cstdint>
#include <ostream>
#include <variant>
#include <vector>

#include "symco/measures.hpp"
#include "symco/metric.hpp"
#include "symco/random.hpp"

namespace symco {

// One-generation bottlenecks: each generation is a bottleneck with probability k^(N)/N^alpha,
// of size min(N, F_g) with F_g drawn from the body of f0 restricted to {k <= N^gamma}.
struct ShortDrastic {
  double alpha = 1.0;
  double gamma = 0.25;
  CoagulationMeasure f0;  // body only
};

// Bottlenecks of size k ~ f0 lasting g ~ durations generations, spaced Geometric(eta / N^alpha).
struct LongDrastic {
  double alpha = 1.0;
  double eta = 1.0;
  DiscreteLaw f0;
  DiscreteLaw durations;
};

// Bottlenecks of size N b (b = N^{-b_exponent}) lasting round(gamma N b) generations, gamma ~ soft_durations.
struct LongSoft {
  double alpha = 1.0;
  double eta = 1.0;
  PositiveLaw soft_durations;
  double b_exponent = 0.5;
};

struct UniformR {
  double lo = 0.0;
  double hi = 1.0;
};
struct ConstantR {
  double r = 0.0;
};
using RLaw = std::variant<UniformR, ConstantR>;

// Sizes R^N_g = floor(N r_g) + 1 with r_g iid.
struct IIDSizes {
  RLaw r_law;
};

using Demography = std::variant<ShortDrastic, LongDrastic, LongSoft, IIDSizes>;

struct ForwardTrajectory {
  std::int64_t population = 0;  // N
  std::vector<std::uint32_t> sizes;
  std::vector<std::uint32_t> counts;  // type-1 individuals
  std::vector<std::uint8_t> in_bottleneck;

  std::size_t length() const { return sizes.size(); }
  double frequency(std::size_t g) const { return static_cast<double>(counts[g]) / sizes[g]; }
};

// k^(N) = sum_{k <= N^gamma} F0(k) for the short drastic regime.
double short_drastic_mass(const ShortDrastic& d, std::int64_t n);

ForwardTrajectory simulate_sizes(const Demography& d, std::int64_t n, std::size_t generations, Rng& rng);
ForwardTrajectory simulate_forward(const Demography& d, std::int64_t n, double x0, std::size_t generations, Rng& rng);
// Binomial resampling on an existing size schedule.
void resample_counts(ForwardTrajectory& t, double x0, Rng& rng);

struct BottleneckSpan {
  std::size_t start = 0;   // first bottleneck generation
  std::size_t length = 0;  // number of consecutive bottleneck generations
};

std::vector<BottleneckSpan> bottleneck_spans(const ForwardTrajectory& t);

struct CollapsedTrajectory {
  ForwardTrajectory collapsed;
  std::vector<std::size_t> kept_generations;  // g_i
  std::vector<BottleneckSpan> spans;
};

CollapsedTrajectory collapse_bottlenecks(const ForwardTrajectory& t);

// Step path t -> X_{floor(N^alpha t)} on [0, T].
StepPath rescale_time(const ForwardTrajectory& t, double alpha, double horizon);

// SRT aligning the rescaled raw path onto the rescaled collapsed path: each non-bottleneck
// generation g_i maps to index i, bottlenecks are crossed linearly, and the accumulated shift is
// released over the last 1/N^alpha before the horizon.
Srt collapse_alignment(const CollapsedTrajectory& c, double alpha, double horizon);

// Block counts of a sample traced backwards from the last generation; entry m is the count m generations back.
std::vector<int> sample_ancestry(const ForwardTrajectory& t, int sample_size, Rng& rng);

// Descendant counts per founder after `generations` Wright-Fisher generations at constant size k.
std::vector<std::uint32_t> wf_family_sizes(std::int64_t k, int generations, Rng& rng);

struct MohleCoefficients {
  double c = 0.0;  // sum P(R = i) / i
  double d = 0.0;  // sum P(R = i) / i^2
  double ratio() const { return d / c; }
};

// P(R^N = i), i = 1..N (index i-1), for R^N = floor(N r) + 1.
std::vector<double> discretize_size_law(const RLaw& law, std::int64_t n);
MohleCoefficients mohle_coefficients(const std::vector<double>& size_law, std::int64_t n);

void write_trajectory_csv(std::ostream& out, const ForwardTrajectory& t);

}  // namespace symco
