#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "symco/measures.hpp"

namespace symco {

// A [b, (k_1..k_r)] collision: b blocks merge into r groups of the given sizes.
class CollisionSignature {
 public:
  CollisionSignature(int b, std::vector<int> parts);

  int blocks() const { return b_; }
  int groups() const { return static_cast<int>(parts_.size()); }
  const std::vector<int>& parts() const { return parts_; }
  bool is_kingman_pair() const;
  bool is_merger() const { return groups() < b_; }
  std::string to_string() const;  // "(2,1)"

 private:
  int b_;
  std::vector<int> parts_;  // non-increasing
};

// Integer partitions of n in descending-generation order, each non-increasing.
std::vector<std::vector<int>> integer_partitions(int n);
std::vector<std::vector<int>> integer_partitions(int n, int parts);

// P(W^{k,i} = j) for j = 1..min(k,i); index j-1.
std::vector<double> occupancy_pmf(std::int64_t k, int i);
// Same law through the alternating closed form (compensated); for moderate k, i.
std::vector<double> occupancy_pmf_alternating(std::int64_t k, int i);

// Probability that n balls in k boxes produce at least one shared box.
double collision_prob(std::int64_t k, std::int64_t n);
// Continuous extension in k (used by integral tails and samplers).
double collision_prob_real(double k, double n);

double collision_rate(const CoagulationMeasure& f, const CollisionSignature& sig);

// Number of set partitions of [n] with the given block sizes. Throws std::overflow_error beyond 64 bits.
std::uint64_t arrangements_count(int n, std::span<const int> parts);
double log_arrangements_count(int n, std::span<const int> parts);

class GeneratorMatrix {
 public:
  explicit GeneratorMatrix(int n);

  int size() const { return n_; }
  // q_ij for 1 <= j < i <= n; setting keeps the diagonal consistent.
  double rate(int i, int j) const;
  void set_rate(int i, int j, double q);
  double diagonal(int i) const;
  // sum_{j<i} q_ij
  double exit_rate(int i) const;
  // Throws std::invalid_argument if not a lower-triangular generator within tol.
  void validate(double tol = 1e-10) const;
  std::vector<std::vector<double>> dense() const;

 private:
  int n_;
  std::vector<std::vector<double>> q_;  // q_[i][j], 1-based, j < i
};

GeneratorMatrix block_counting_generator(const CoagulationMeasure& f, int n);

enum class RateMethod { partition_sum, collision_prob_sum };

struct TotalRateOptions {
  double crossover_factor = 50.0;  // K0 = c n^2 for power-law tails
};

struct TotalRate {
  double value = 0.0;
  double error_bound = 0.0;
};

inline constexpr int kPartitionSumMaxN = 40;

TotalRate total_rate(const CoagulationMeasure& f, int n, RateMethod method, TotalRateOptions opts = {});
// Predicted lambda_n for F(k) = k^{-beta}, beta in (0, 1].
double total_rate_asymptotic(double beta, double n);
// Limit of n^{2(beta-1)} lambda_n for beta < 1.
double total_rate_limit_constant(double beta);

}  // namespace symco
