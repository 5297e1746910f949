#include "symco/rates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "numerics.hpp"

namespace symco {

namespace {

using detail::CompensatedSum;

// Direct-summation horizon before switching to the exact polynomial tail.
double direct_horizon(int rows) { return std::max(1000.0, 2.0 * rows * rows); }

double powerlaw_term(double beta, double k, int b, int r) {
  // k^{-beta} * k^{(r)} / k^b
  double prod = 1.0;
  for (int m = 1; m < r; ++m) prod *= 1.0 - m / k;
  return prod * std::exp(-(beta + b - r) * std::log(k));
}

}  // namespace

CollisionSignature::CollisionSignature(int b, std::vector<int> parts) : b_(b), parts_(std::move(parts)) {
  if (b_ < 1) throw std::invalid_argument("CollisionSignature: b must be positive");
  if (parts_.empty()) throw std::invalid_argument("CollisionSignature: no parts");
  for (int p : parts_)
    if (p < 1) throw std::invalid_argument("CollisionSignature: parts must be positive");
  if (std::accumulate(parts_.begin(), parts_.end(), 0) != b_)
    throw std::invalid_argument("CollisionSignature: parts do not sum to b");
  std::sort(parts_.begin(), parts_.end(), std::greater<>());
}

bool CollisionSignature::is_kingman_pair() const { return groups() == b_ - 1 && parts_.front() == 2; }

std::string CollisionSignature::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(parts_[i]);
  }
  return s + ")";
}

std::vector<std::vector<int>> integer_partitions(int n) {
  std::vector<std::vector<int>> out;
  if (n < 1) return out;
  std::vector<int> a{n};
  while (true) {
    out.push_back(a);
    // find rightmost part > 1
    int rem = 0;
    while (!a.empty() && a.back() == 1) {
      rem += 1;
      a.pop_back();
    }
    if (a.empty()) break;
    const int v = a.back() - 1;
    a.back() = v;
    rem += 1;
    while (rem > v) {
      a.push_back(v);
      rem -= v;
    }
    if (rem > 0) a.push_back(rem);
  }
  return out;
}

std::vector<std::vector<int>> integer_partitions(int n, int parts) {
  std::vector<std::vector<int>> out;
  for (auto& p : integer_partitions(n))
    if (static_cast<int>(p.size()) == parts) out.push_back(std::move(p));
  return out;
}

std::vector<double> occupancy_pmf(std::int64_t k, int i) {
  if (k < 1 || i < 1) throw std::invalid_argument("occupancy_pmf: k and i must be positive");
  const int jmax = static_cast<int>(std::min<std::int64_t>(k, i));
  // while k^i is exact in a double, count allocations in integers and divide once (correctly rounded)
  if (i * std::log2(static_cast<double>(k)) <= 53.0) {
    std::vector<std::uint64_t> counts(jmax + 1, 0);  // counts[j]: allocations with j occupied boxes
    counts[0] = 1;
    const auto uk = static_cast<std::uint64_t>(k);
    for (int b = 1; b <= i; ++b) {
      for (int j = std::min(b, jmax); j >= 1; --j)
        counts[j] = counts[j] * static_cast<std::uint64_t>(j) + counts[j - 1] * (uk - static_cast<std::uint64_t>(j) + 1);
      counts[0] = 0;
    }
    double total = 1.0;
    for (int b = 0; b < i; ++b) total *= static_cast<double>(k);
    std::vector<double> out(jmax);
    for (int j = 1; j <= jmax; ++j) out[j - 1] = static_cast<double>(counts[j]) / total;
    return out;
  }
  const auto table = detail::occupancy_table(static_cast<double>(k), i);
  return std::vector<double>(table[i].begin() + 1, table[i].begin() + 1 + jmax);
}

std::vector<double> occupancy_pmf_alternating(std::int64_t k, int i) {
  if (k < 1 || i < 1) throw std::invalid_argument("occupancy_pmf_alternating: k and i must be positive");
  const int jmax = static_cast<int>(std::min<std::int64_t>(k, i));
  // the alternating sum cancels heavily, so it is carried in 50-digit arithmetic
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big kb(k);
  std::vector<double> out(jmax);
  Big binom_kj = 1;  // C(k, j)
  for (int j = 1; j <= jmax; ++j) {
    binom_kj = binom_kj * (kb - (j - 1)) / j;
    Big sum = 0;
    Big binom_jr = 1;  // C(j, r)
    for (int r = 0; r < j; ++r) {
      const Big mag = binom_jr * pow(Big(j - r) / j, i);
      sum += r % 2 == 0 ? mag : Big(-mag);
      binom_jr = binom_jr * (j - r) / (r + 1);
    }
    const Big v = binom_kj * pow(Big(j) / kb, i) * sum;
    out[j - 1] = std::clamp(static_cast<double>(v), 0.0, 1.0);
  }
  return out;
}

double collision_prob_real(double k, double n) {
  if (n <= 1.0) return 0.0;
  if (n > k) return 1.0;
  return std::clamp(-std::expm1(detail::log_no_collision(k, n)), 0.0, 1.0);
}

double collision_prob(std::int64_t k, std::int64_t n) {
  if (k < 1 || n < 1) throw std::invalid_argument("collision_prob: k and n must be positive");
  return collision_prob_real(static_cast<double>(k), static_cast<double>(n));
}

double collision_rate(const CoagulationMeasure& f, const CollisionSignature& sig) {
  require_valid(f);
  if (!sig.is_merger()) throw std::invalid_argument("collision_rate: signature " + sig.to_string() + " is not a merger");
  const int b = sig.blocks();
  const int r = sig.groups();
  CompensatedSum total;
  if (sig.is_kingman_pair()) total.add(f.kingman_atom);
  if (const auto* e = std::get_if<ExplicitBody>(&f.body)) {
    for (const auto& [k, v] : e->masses) {
      if (k < r || v == 0.0) continue;
      double term = v;
      const double kd = static_cast<double>(k);
      for (int m = 0; m < r; ++m) term *= (kd - m) / kd;
      for (int m = r; m < b; ++m) term /= kd;
      total.add(term);
    }
    return total.value();
  }
  const auto& p = std::get<PowerLawBody>(f.body);
  const double horizon = std::max(1000.0, 50.0 * r * r);
  const double kmax = p.truncation ? static_cast<double>(*p.truncation) : INFINITY;
  const double direct_end = std::min(kmax, horizon - 1.0);
  for (double k = r; k <= direct_end; k += 1.0) total.add(powerlaw_term(p.beta, k, b, r));
  if (kmax > direct_end) {
    double tail = detail::falling_tail(p.beta, b, r, horizon);
    if (std::isfinite(kmax)) tail -= detail::falling_tail(p.beta, b, r, kmax + 1.0);
    total.add(tail);
  }
  return total.value();
}

namespace {

struct PartCounts {
  std::map<int, int> multiplicity;
};

PartCounts count_parts(int n, std::span<const int> parts) {
  if (parts.empty()) throw std::invalid_argument("arrangements_count: no parts");
  int sum = 0;
  PartCounts pc;
  for (int p : parts) {
    if (p < 1) throw std::invalid_argument("arrangements_count: parts must be positive");
    sum += p;
    pc.multiplicity[p] += 1;
  }
  if (sum != n) throw std::invalid_argument("arrangements_count: parts do not sum to n");
  return pc;
}

}  // namespace

std::uint64_t arrangements_count(int n, std::span<const int> parts) {
  const auto pc = count_parts(n, parts);
  using u128 = unsigned __int128;
  const u128 limit = static_cast<u128>(~std::uint64_t{0});
  auto binom = [&](int top, int bottom) {
    u128 c = 1;
    for (int t = 0; t < bottom; ++t) {
      c = c * static_cast<u128>(top - t) / static_cast<u128>(t + 1);
      if (c > limit) throw std::overflow_error("arrangements_count: exceeds 64 bits");
    }
    return c;
  };
  auto mul = [&](u128 x, u128 y) {
    if (y != 0 && x > limit / y) throw std::overflow_error("arrangements_count: exceeds 64 bits");
    return x * y;
  };
  // split [n] among size classes, then within a class of size s and multiplicity m
  // the block holding the least unplaced element is chosen first: prod C(R - t s - 1, s - 1)
  u128 result = 1;
  int remaining = n;
  for (const auto& [size, mult] : pc.multiplicity) {
    const int members = size * mult;
    result = mul(result, binom(remaining, members));
    remaining -= members;
    for (int t = 0; t < mult; ++t) result = mul(result, binom(members - t * size - 1, size - 1));
  }
  return static_cast<std::uint64_t>(result);
}

double log_arrangements_count(int n, std::span<const int> parts) {
  const auto pc = count_parts(n, parts);
  double v = std::lgamma(n + 1.0);
  for (int p : parts) v -= std::lgamma(p + 1.0);
  for (const auto& [size, mult] : pc.multiplicity) v -= std::lgamma(mult + 1.0);
  return v;
}

GeneratorMatrix::GeneratorMatrix(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("GeneratorMatrix: n must be positive");
  q_.resize(n + 1);
  for (int i = 1; i <= n; ++i) q_[i].assign(i, 0.0);
}

double GeneratorMatrix::rate(int i, int j) const {
  if (i < 1 || i > n_ || j < 1 || j > n_) throw std::out_of_range("GeneratorMatrix: index");
  if (j >= i) return j == i ? diagonal(i) : 0.0;
  return q_[i][j];
}

void GeneratorMatrix::set_rate(int i, int j, double q) {
  if (i < 1 || i > n_ || j < 1 || j >= i) throw std::invalid_argument("GeneratorMatrix: only 1 <= j < i <= n");
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("GeneratorMatrix: rates must be finite and non-negative");
  q_[i][j] = q;
}

double GeneratorMatrix::exit_rate(int i) const {
  CompensatedSum s;
  for (int j = 1; j < i; ++j) s.add(q_[i][j]);
  return s.value();
}

double GeneratorMatrix::diagonal(int i) const { return -exit_rate(i); }

void GeneratorMatrix::validate(double tol) const {
  for (int i = 1; i <= n_; ++i) {
    double scale = 0.0;
    for (int j = 1; j < i; ++j) {
      const double q = q_[i][j];
      if (!std::isfinite(q) || q < -tol) {
        throw std::invalid_argument("GeneratorMatrix: invalid off-diagonal entry at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
      scale = std::max(scale, std::abs(q));
    }
    const double row = exit_rate(i) + diagonal(i);
    if (std::abs(row) > tol * std::max(1.0, scale))
      throw std::invalid_argument("GeneratorMatrix: row " + std::to_string(i) + " does not sum to zero");
  }
}

std::vector<std::vector<double>> GeneratorMatrix::dense() const {
  std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
  for (int i = 1; i <= n_; ++i) {
    for (int j = 1; j < i; ++j) d[i - 1][j - 1] = q_[i][j];
    d[i - 1][i - 1] = diagonal(i);
  }
  return d;
}

GeneratorMatrix block_counting_generator(const CoagulationMeasure& f, int n) {
  require_valid(f);
  if (n < 1) throw std::invalid_argument("block_counting_generator: n must be positive");
  GeneratorMatrix g(n);
  std::vector<std::vector<CompensatedSum>> acc(n + 1, std::vector<CompensatedSum>(n + 1));
  for (int i = 2; i <= n; ++i) acc[i][i - 1].add(f.kingman_atom * i * (i - 1) / 2.0);
  auto add_box_count = [&](double k, double weight) {
    const auto table = detail::occupancy_table(k, n);
    for (int i = 2; i <= n; ++i)
      for (int j = 1; j < i; ++j)
        if (table[i][j] != 0.0) acc[i][j].add(weight * table[i][j]);
  };
  if (const auto* e = std::get_if<ExplicitBody>(&f.body)) {
    for (const auto& [k, v] : e->masses)
      if (v != 0.0) add_box_count(static_cast<double>(k), v);
  } else {
    const auto& p = std::get<PowerLawBody>(f.body);
    const double horizon = direct_horizon(n);
    const double kmax = p.truncation ? static_cast<double>(*p.truncation) : INFINITY;
    const double direct_end = std::min(kmax, horizon - 1.0);
    for (double k = 1.0; k <= direct_end; k += 1.0) add_box_count(k, std::pow(k, -p.beta));
    if (kmax > direct_end) {
      const auto s2 = detail::stirling2_table(n);
      for (int i = 2; i <= n; ++i) {
        for (int j = 1; j < i; ++j) {
          double tail = detail::falling_tail(p.beta, i, j, horizon);
          if (std::isfinite(kmax)) tail -= detail::falling_tail(p.beta, i, j, kmax + 1.0);
          acc[i][j].add(s2[i][j] * tail);
        }
      }
    }
  }
  for (int i = 2; i <= n; ++i)
    for (int j = 1; j < i; ++j) g.set_rate(i, j, acc[i][j].value());
  return g;
}

namespace {

TotalRate total_rate_partition_sum(const CoagulationMeasure& f, int n) {
  if (n > kPartitionSumMaxN)
    throw std::invalid_argument("total_rate: partition_sum refuses n > " + std::to_string(kPartitionSumMaxN));
  std::map<std::pair<int, bool>, double> cache;
  CompensatedSum total;
  for (const auto& parts : integer_partitions(n)) {
    if (static_cast<int>(parts.size()) == n) continue;
    CollisionSignature sig(n, parts);
    const auto key = std::make_pair(sig.groups(), sig.is_kingman_pair());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, collision_rate(f, sig)).first;
    total.add(std::exp(log_arrangements_count(n, parts)) * it->second);
  }
  return {total.value(), 0.0};
}

// G(y) = int_0^y t^{beta-2} (1 - e^{-t}) dt
double tail_antiderivative(double beta, double y) {
  if (y <= 0.0) return 0.0;
  CompensatedSum s;
  double term = 1.0;  // y^p / p!
  for (int p = 1; p < 200; ++p) {
    term *= y / p;
    const double e = beta - 1.0 + p;
    const double v = term * std::pow(y, beta - 1.0) / e;
    s.add(p % 2 == 1 ? v : -v);
    if (std::abs(v) < 1e-18 * std::abs(s.value())) break;
  }
  return s.value();
}

// int_{x0}^{x1} x^{-beta} P(collision among n in x boxes) dx for x0 >= 50 n^2 (x1 may be infinite).
// With c = n(n-1)/2, P = 1 - e^{-c/x} D(1/x), D = exp(-sum_{p>=2} S_p / (p x^p)), S_p = sum_{m<n} m^p,
// and every term integrates in closed form through lower incomplete gamma functions.
double collision_tail_integral(double beta, int n, double x0, double x1, double& error) {
  const double c = n * (n - 1.0) / 2.0;
  const double y1 = std::isfinite(x1) ? c / x1 : 0.0;
  CompensatedSum s;
  s.add(std::pow(c, 1.0 - beta) * (tail_antiderivative(beta, c / x0) - tail_antiderivative(beta, y1)));
  constexpr int kTerms = 40;
  std::vector<double> a(kTerms + 1, 0.0);  // coefficients of -r(y)
  for (int p = 2; p <= kTerms; ++p) {
    CompensatedSum sp;
    for (int m = 1; m < n; ++m) sp.add(std::pow(static_cast<double>(m), p));
    a[p] = -sp.value() / p;
  }
  std::vector<double> d(kTerms + 1, 0.0);
  d[0] = 1.0;
  // x^{-beta-q} e^{-c/x} integrates to x^{1-beta-q} gamma(a, y) / y^a with a = beta + q - 1, y = c/x
  auto piece = [&](double x, int q) {
    if (!std::isfinite(x)) return 0.0;
    const double shape = beta + q - 1.0;
    const double y = c / x;
    return std::pow(x, 1.0 - beta - q) * boost::math::tgamma_lower(shape, y) / std::pow(y, shape);
  };
  double last = 0.0;
  for (int q = 2; q <= kTerms; ++q) {
    CompensatedSum dq;
    for (int m = 1; m <= q; ++m) dq.add(m * a[m] * d[q - m]);
    d[q] = dq.value() / q;
    last = d[q] * (piece(x0, q) - piece(x1, q));
    s.add(-last);
    if (std::abs(last) < 1e-18 * std::abs(s.value())) break;
  }
  error += 2.0 * std::abs(last);
  return s.value();
}

TotalRate total_rate_collision_sum(const CoagulationMeasure& f, int n, const TotalRateOptions& opts) {
  const double nd = n;
  CompensatedSum total;
  total.add(f.kingman_atom * nd * (nd - 1.0) / 2.0);
  if (const auto* e = std::get_if<ExplicitBody>(&f.body)) {
    for (const auto& [k, v] : e->masses)
      if (v != 0.0) total.add(v * collision_prob(k, n));
    return {total.value(), 0.0};
  }
  const auto& p = std::get<PowerLawBody>(f.body);
  const double beta = p.beta;
  const double kmax = p.truncation ? static_cast<double>(*p.truncation) : INFINITY;
  const double k0 = opts.crossover_factor * nd * nd;
  const double kd = std::min({k0, std::max(4.0 * nd, 200000.0), kmax});
  auto term = [&](double k) { return std::pow(k, -beta) * collision_prob_real(k, nd); };
  auto deriv = [&](double x) {
    const double h = 1e-3 * x;
    return (term(x + h) - term(x - h)) / (2.0 * h);
  };
  for (double k = 1.0; k <= kd; k += 1.0) total.add(term(k));
  double error = 0.0;
  const double mid_end = std::min(k0, kmax);
  if (mid_end > kd) {
    // sum_{k=kd+1}^{mid_end} via Euler-Maclaurin around a Gauss-Kronrod integral
    const double a = kd + 1.0;
    const double b = std::floor(mid_end);
    CompensatedSum integral;
    const int panels = 64;
    const double ratio = std::log(b / a) / panels;
    for (int i = 0; i < panels; ++i) {
      const double lo = a * std::exp(ratio * i);
      const double hi = i + 1 == panels ? b : a * std::exp(ratio * (i + 1));
      double err = 0.0;
      integral.add(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(term, lo, hi, 0, 0.0, &err));
      error += err;
    }
    total.add(integral.value());
    total.add(0.5 * (term(a) + term(b)));
    total.add((deriv(b) - deriv(a)) / 12.0);
    // f''' is bounded by its small-x (f ~ x^{-beta}) and large-x (f ~ c x^{-1-beta}) forms
    error += ((1.0 + beta) * (2.0 + beta) * (3.0 + beta) * nd * nd * std::pow(a, -4.0 - beta) +
              beta * (1.0 + beta) * (2.0 + beta) * std::pow(a, -3.0 - beta)) /
             360.0;
  }
  if (kmax > mid_end) {
    const double x0 = std::floor(mid_end);
    const double x1 = std::isfinite(kmax) ? kmax : INFINITY;
    total.add(collision_tail_integral(beta, n, x0, x1, error));
    // Euler-Maclaurin: sum_{x0 < k <= x1} f = int f - f(x0)/2 + f(x1)/2 - (f1(x0) - f1(x1))/12 + R, |R| <= |f3(x0)|/360
    total.add(-0.5 * term(x0) - deriv(x0) / 12.0);
    if (std::isfinite(x1)) total.add(0.5 * term(x1) + deriv(x1) / 12.0);
    const double c = nd * (nd - 1.0) / 2.0;
    error += (1.0 + beta) * (2.0 + beta) * (3.0 + beta) * c * std::pow(x0, -4.0 - beta) / 360.0;
  }
  return {total.value(), error};
}

}  // namespace

TotalRate total_rate(const CoagulationMeasure& f, int n, RateMethod method, TotalRateOptions opts) {
  require_valid(f);
  if (n < 1) throw std::invalid_argument("total_rate: n must be positive");
  if (!(opts.crossover_factor > 0.0)) throw std::invalid_argument("total_rate: crossover factor must be positive");
  if (n == 1) return {0.0, 0.0};
  if (method == RateMethod::partition_sum) return total_rate_partition_sum(f, n);
  return total_rate_collision_sum(f, n, opts);
}

double total_rate_limit_constant(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("total_rate_limit_constant: beta must lie in (0,1)");
  return std::pow(2.0, beta - 1.0) * std::tgamma(beta) / (1.0 - beta);
}

double total_rate_asymptotic(double beta, double n) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("total_rate_asymptotic: beta must lie in (0,1]");
  if (!(n > 1.0)) throw std::invalid_argument("total_rate_asymptotic: n must exceed 1");
  if (beta == 1.0) return 2.0 * std::log(n);
  return total_rate_limit_constant(beta) * std::pow(n, 2.0 * (1.0 - beta));
}

}  // namespace symco
