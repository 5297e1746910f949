#include "numerics.hpp"

#include <algorithm>
#include <stdexcept>

#include "symco/ensemble.hpp"

namespace symco {

Estimate summarize(std::span<const double> values) {
  RunningStats s;
  for (double v : values) s.add(v);
  return s.estimate();
}

}  // namespace symco

namespace symco::detail {

double hurwitz_tail(double s, double K) {
  if (!(s > 1.0)) throw std::domain_error("hurwitz_tail: exponent must exceed 1");
  if (K < 1.0) throw std::domain_error("hurwitz_tail: start below 1");
  CompensatedSum head;
  double k = K;
  // push the start far enough for the asymptotic expansion to be accurate
  const double start = std::max(K, 64.0);
  for (; k < start; k += 1.0) head.add(std::pow(k, -s));
  const double ks = std::pow(k, -s);
  double tail = k * ks / (s - 1.0) + 0.5 * ks;
  const double inv = 1.0 / k;
  const double inv2 = inv * inv;
  // Bernoulli corrections B2/2!, B4/4!, B6/6!, B8/8!
  double term = s * ks * inv;  // s k^{-s-1}
  tail += term / 12.0;
  term *= (s + 1.0) * (s + 2.0) * inv2;
  tail -= term / 720.0;
  term *= (s + 3.0) * (s + 4.0) * inv2;
  tail += term / 30240.0;
  term *= (s + 5.0) * (s + 6.0) * inv2;
  tail -= term / 1209600.0;
  head.add(tail);
  return head.value();
}

namespace {

// (1-u) log1p(-u) + u = sum_{p>=2} u^p / (p (p-1)), for 0 <= u < 1.
double integral_kernel(double u) {
  if (u < 0.1) {
    double sum = 0.0;
    double up = u * u;
    for (int p = 2; p < 60; ++p) {
      const double t = up / (static_cast<double>(p) * (p - 1));
      sum += t;
      if (t < 1e-18 * sum) break;
      up *= u;
    }
    return sum;
  }
  return (1.0 - u) * std::log1p(-u) + u;
}

}  // namespace

double log_no_collision(double k, double n) {
  if (n <= 1.0) return 0.0;
  if (n > k) return -INFINITY;
  const double m_last = n - 1.0;
  if (k < 2.0 * n || n < 40.0) {
    CompensatedSum s;
    for (double m = 1.0; m <= m_last; m += 1.0) s.add(std::log1p(-m / k));
    return s.value();
  }
  // Euler-Maclaurin for sum_{m=0}^{M} f(m), f(x) = log1p(-x/k), f(0) = 0.
  const double u = m_last / k;
  const double integral = -k * integral_kernel(u);
  const double fM = std::log1p(-u);
  const double d1M = -1.0 / (k - m_last);
  const double d1_0 = -1.0 / k;
  const double d3M = -2.0 / std::pow(k - m_last, 3);
  const double d3_0 = -2.0 / (k * k * k);
  const double d5M = -24.0 / std::pow(k - m_last, 5);
  const double d5_0 = -24.0 / std::pow(k, 5);
  return integral + 0.5 * fM + (d1M - d1_0) / 12.0 - (d3M - d3_0) / 720.0 + (d5M - d5_0) / 30240.0;
}

std::vector<double> falling_factorial_coefficients(int r) {
  std::vector<double> c{1.0};
  for (int m = 1; m < r; ++m) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t l = 0; l < c.size(); ++l) {
      next[l] += c[l];
      next[l + 1] -= static_cast<double>(m) * c[l];
    }
    c = std::move(next);
  }
  return c;
}

double falling_tail(double beta, int b, int r, double K) {
  const auto c = falling_factorial_coefficients(r);
  CompensatedSum s;
  for (std::size_t l = 0; l < c.size(); ++l) {
    if (c[l] == 0.0) continue;
    s.add(c[l] * hurwitz_tail(beta + b - r + static_cast<double>(l), K));
  }
  return s.value();
}

std::vector<std::vector<double>> stirling2_table(int n) {
  std::vector<std::vector<double>> s(n + 1, std::vector<double>(n + 1, 0.0));
  s[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= i; ++j) s[i][j] = static_cast<double>(j) * s[i - 1][j] + s[i - 1][j - 1];
  }
  return s;
}

std::vector<std::vector<double>> occupancy_table(double k, int n) {
  std::vector<std::vector<double>> p(n + 1);
  p[0] = {1.0};
  for (int i = 1; i <= n; ++i) {
    p[i].assign(i + 1, 0.0);
    for (int j = 1; j <= i; ++j) {
      double v = 0.0;
      if (j <= i - 1) v += p[i - 1][j] * (static_cast<double>(j) / k);
      const double fresh = (k - static_cast<double>(j - 1)) / k;
      if (fresh > 0.0) v += p[i - 1][j - 1] * fresh;
      p[i][j] = v;
    }
  }
  return p;
}

}  // namespace symco::detail
