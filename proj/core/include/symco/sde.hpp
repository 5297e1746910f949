#pragma once

#include <span>
#include <variant>
#include <vector>

#include "symco/ensemble.hpp"
#include "symco/measures.hpp"
#include "symco/metric.hpp"
#include "symco/random.hpp"

namespace symco {

// x <- (1/k) sum_i 1{u_i <= x} at rate `rate`, k ~ f0.
struct Sde1 {
  DiscreteLaw f0;
  double rate = 1.0;
};

// x <- sum_i (a_i/k) 1{u_i <= x} at rate eta, k ~ f0, a = family sizes after g-1 generations, g ~ durations.
struct Sde2 {
  DiscreteLaw f0;
  DiscreteLaw durations;
  double eta = 1.0;
};

// x <- sum_i zeta_i 1{u_i <= x} at rate eta, sigma ~ soft_durations, j ~ Kingman lineages at sigma,
// zeta ~ sorted Dirichlet(1..1) of dimension j.
struct Sde3 {
  PositiveLaw soft_durations;
  double eta = 1.0;
};

using SdeModel = std::variant<Sde1, Sde2, Sde3>;

struct JumpDiffusionSpec {
  SdeModel model;
  double alpha = 1.0;  // diffusion active iff alpha == 1
  double x0 = 0.5;
  double horizon = 1.0;
  double dt = 1e-3;
  double dt_out = 0.0;              // record every dt_out when positive
  std::vector<double> checkpoints;  // extra recording times
};

struct SdePath {
  StepPath path = StepPath::constant(1.0, 0.0);  // exact at the recorded times
  std::vector<double> jump_times;
};

SdePath simulate_sde(const JumpDiffusionSpec& spec, Rng& rng);

// P(K_sigma = j), j = 1.., for the Kingman lineage count started from infinity (index j-1).
std::vector<double> kingman_lineages_pmf(double sigma, double tail_cut = 1e-14);
double kingman_lineages_mean(double sigma);

// Lineage count after running a Kingman coalescent from n0 lineages for time sigma.
int kingman_lineages_from(int n0, double sigma, Rng& rng);

std::vector<double> sorted_dirichlet(int j, Rng& rng);

Estimate moment_estimate(std::span<const SdePath> ensemble, int n, double t);

// One jump of each model applied to x.
double sde1_jump(const Sde1& m, double x, Rng& rng);
double sde2_jump(const Sde2& m, double x, Rng& rng);

}  // namespace symco
