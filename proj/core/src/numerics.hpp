#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace symco::detail {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

// sum_{k >= K} k^{-s} for s > 1 and K >= 1 (Euler-Maclaurin for large K).
double hurwitz_tail(double s, double K);

// log prod_{m=1}^{n-1} (1 - m/k) for real k >= n.
double log_no_collision(double k, double n);

// Coefficients c_l with prod_{m=0}^{r-1} (1 - m/k) = sum_{l=0}^{r-1} c_l k^{-l}.
std::vector<double> falling_factorial_coefficients(int r);

// sum_{k >= K} k^{-beta} * prod_{m<r}(1 - m/k) * k^{r-b}; requires K >= max(1000, 50 r^2) and beta + b - r > 1.
double falling_tail(double beta, int b, int r, double K);

// Stirling numbers of the second kind S2(i, j), 0 <= j <= i <= n, as doubles.
std::vector<std::vector<double>> stirling2_table(int n);

// Occupancy law for i = 0..n balls into k boxes: row i holds P(j occupied), j = 0..i.
// Uses the positive recurrence, valid for real k >= 1.
std::vector<std::vector<double>> occupancy_table(double k, int n);

}  // namespace symco::detail
