#include "symco/sde.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "symco/forward.hpp"

namespace symco {

namespace {

namespace mp = boost::multiprecision;

// log |c_{j,k}| for the k-th term of P(K_sigma = j).
double log_term(double sigma, int j, int k) {
  return -0.5 * k * (k - 1.0) * sigma + std::log(2.0 * k - 1.0) + std::lgamma(j + k - 1.0) - std::lgamma(j) -
         std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
}

// Last index beyond which terms of row j are negligible at `digits` decimal digits.
int row_end(double sigma, int j, double log_peak_floor) {
  int k = j;
  double prev = log_term(sigma, j, k);
  while (true) {
    ++k;
    const double cur = log_term(sigma, j, k);
    if (cur < prev && cur < log_peak_floor) return k;
    prev = cur;
    if (k > j + 1000000) throw std::domain_error("kingman_lineages_pmf: series does not converge");
  }
}

template <class Real>
std::vector<double> tavare_rows(double sigma, int jmax, const std::vector<int>& ends) {
  using std::exp;
  using std::lgamma;
  std::vector<double> out(jmax);
  const Real s(sigma);
  for (int j = 1; j <= jmax; ++j) {
    Real sum = 0, comp = 0;
    // term at k = j, then multiply by the ratio of consecutive terms
    Real term = exp(Real(-0.5) * j * (j - 1.0) * s + lgamma(Real(2 * j - 1)) - lgamma(Real(j)) - lgamma(Real(j + 1))) *
                Real(2 * j - 1);
    for (int k = j; k <= ends[j - 1]; ++k) {
      const Real t = sum + term;
      if (abs(sum) >= abs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
      term *= -exp(-s * k) * Real(2 * k + 1) / Real(2 * k - 1) * Real(j + k - 1) / Real(k - j + 1);
    }
    out[j - 1] = static_cast<double>(sum + comp);
  }
  return out;
}

}  // namespace

std::vector<double> kingman_lineages_pmf(double sigma, double tail_cut) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::domain_error("kingman_lineages_pmf: sigma must be positive");
  if (!(tail_cut > 0.0 && tail_cut < 1.0)) throw std::domain_error("kingman_lineages_pmf: tail cut must lie in (0,1)");
  // rows are needed until P(K = j) is below the cut past the mean (about 2/sigma)
  const int jcap = static_cast<int>(std::ceil(12.0 / sigma + 30.0));
  double log_max = -INFINITY;
  std::vector<double> row_peak(jcap);
  for (int j = 1; j <= jcap; ++j) {
    double best = -INFINITY;
    for (int k = j;; ++k) {
      const double v = log_term(sigma, j, k);
      best = std::max(best, v);
      if (v < best - 80.0 && v < -80.0) break;
    }
    row_peak[j - 1] = best;
    log_max = std::max(log_max, best);
  }
  const double digits = std::max(0.0, log_max / std::log(10.0)) + 20.0;
  const double floor_log = -(digits + 5.0) * std::log(10.0);
  std::vector<int> ends(jcap);
  for (int j = 1; j <= jcap; ++j) ends[j - 1] = row_end(sigma, j, floor_log);
  std::vector<double> rows;
  if (digits <= 18.0) {
    rows = tavare_rows<long double>(sigma, jcap, ends);
  } else if (digits <= 50.0) {
    rows = tavare_rows<mp::cpp_bin_float_50>(sigma, jcap, ends);
  } else if (digits <= 100.0) {
    rows = tavare_rows<mp::cpp_bin_float_100>(sigma, jcap, ends);
  } else if (digits <= 200.0) {
    rows = tavare_rows<mp::number<mp::cpp_bin_float<200>>>(sigma, jcap, ends);
  } else if (digits <= 400.0) {
    rows = tavare_rows<mp::number<mp::cpp_bin_float<400>>>(sigma, jcap, ends);
  } else {
    throw std::domain_error("kingman_lineages_pmf: sigma too small for the supported precision");
  }
  const double mean_guess = 2.0 / sigma;
  std::vector<double> out;
  for (int j = 1; j <= jcap; ++j) {
    const double p = std::max(0.0, rows[j - 1]);
    if (j > mean_guess + 1.0 && p < tail_cut) break;
    out.push_back(p);
  }
  return out;
}

double kingman_lineages_mean(double sigma) {
  const auto p = kingman_lineages_pmf(sigma);
  double m = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) m += (j + 1.0) * p[j];
  return m;
}

int kingman_lineages_from(int n0, double sigma, Rng& rng) {
  if (n0 < 1) throw std::invalid_argument("kingman_lineages_from: n0 must be positive");
  int b = n0;
  double t = 0.0;
  while (b > 1) {
    t += exponential(rng, 0.5 * b * (b - 1.0));
    if (t > sigma) break;
    --b;
  }
  return b;
}

std::vector<double> sorted_dirichlet(int j, Rng& rng) {
  if (j < 1) throw std::invalid_argument("sorted_dirichlet: dimension must be positive");
  if (j == 1) return {1.0};
  std::vector<double> e(j);
  double total = 0.0;
  for (double& v : e) {
    v = exponential(rng, 1.0);
    total += v;
  }
  for (double& v : e) v /= total;
  std::sort(e.begin(), e.end(), std::greater<>());
  return e;
}

namespace {

struct LineageTable {
  std::vector<double> cumulative;
};

// Lineage-count laws are shared across paths and threads.
const LineageTable& lineage_table(double sigma) {
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<LineageTable>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(sigma);
  if (it == cache.end()) {
    auto table = std::make_unique<LineageTable>();
    double c = 0.0;
    for (double p : kingman_lineages_pmf(sigma)) {
      c += p;
      table->cumulative.push_back(c);
    }
    it = cache.emplace(sigma, std::move(table)).first;
  }
  return *it->second;
}

int sample_lineages(double sigma, Rng& rng) {
  const auto& c = lineage_table(sigma).cumulative;
  const double u = uniform01(rng) * c.back();
  const auto it = std::upper_bound(c.begin(), c.end(), u);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(it - c.begin()), c.size() - 1)) + 1;
}

double jump_rate(const SdeModel& m) {
  if (const auto* a = std::get_if<Sde1>(&m)) return a->rate;
  if (const auto* b = std::get_if<Sde2>(&m)) return b->eta;
  return std::get<Sde3>(m).eta;
}

}  // namespace

double sde1_jump(const Sde1& m, double x, Rng& rng) {
  const auto k = m.f0.sample(rng);
  return static_cast<double>(binomial(rng, static_cast<std::uint64_t>(k), x)) / static_cast<double>(k);
}

double sde2_jump(const Sde2& m, double x, Rng& rng) {
  const auto k = m.f0.sample(rng);
  const auto g = m.durations.sample(rng);
  const auto a = wf_family_sizes(k, static_cast<int>(g - 1), rng);
  double y = 0.0;
  for (std::uint32_t ai : a)
    if (ai > 0 && uniform01(rng) <= x) y += ai;
  return y / static_cast<double>(k);
}

namespace {

double sde3_jump(const Sde3& m, double x, Rng& rng) {
  const double sigma = m.soft_durations.sample(rng);
  const int j = sample_lineages(sigma, rng);
  const auto zeta = sorted_dirichlet(j, rng);
  double y = 0.0;
  for (double z : zeta)
    if (uniform01(rng) <= x) y += z;
  return std::clamp(y, 0.0, 1.0);
}

}  // namespace

SdePath simulate_sde(const JumpDiffusionSpec& spec, Rng& rng) {
  if (!(spec.dt > 0.0)) throw std::invalid_argument("simulate_sde: dt must be positive");
  if (!(spec.x0 >= 0.0 && spec.x0 <= 1.0)) throw std::invalid_argument("simulate_sde: x0 outside [0, 1]");
  if (!(spec.horizon > 0.0)) throw std::invalid_argument("simulate_sde: horizon must be positive");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) throw std::invalid_argument("simulate_sde: alpha must lie in (0, 1]");
  const double rate = jump_rate(spec.model);
  if (!(rate >= 0.0)) throw std::invalid_argument("simulate_sde: jump rate must be non-negative");
  const bool diffusion = spec.alpha == 1.0;
  const double T = spec.horizon;

  std::vector<double> marks;
  for (double c : spec.checkpoints)
    if (c > 0.0 && c < T) marks.push_back(c);
  if (spec.dt_out > 0.0)
    for (double t = spec.dt_out; t < T; t += spec.dt_out) marks.push_back(t);
  marks.push_back(T);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  std::vector<double> times{0.0};
  std::vector<double> values{spec.x0};
  SdePath out;
  auto record = [&](double t, double x) {
    if (t > times.back()) {
      times.push_back(t);
      values.push_back(x);
    } else {
      values.back() = x;
    }
  };
  double x = spec.x0;
  double t = 0.0;
  double next_jump = rate > 0.0 ? exponential(rng, rate) : INFINITY;
  std::size_t mark = 0;
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    const double target = std::min(next_jump, marks[mark]);
    if (diffusion) {
      while (t < target) {
        const double h = std::min(spec.dt, target - t);
        const double vol = x * (1.0 - x);
        if (vol > 0.0) x = std::clamp(x + std::sqrt(vol * h) * normal(rng), 0.0, 1.0);
        t += h;
      }
    }
    t = target;
    if (next_jump == target) {
      if (const auto* m1 = std::get_if<Sde1>(&spec.model)) {
        x = sde1_jump(*m1, x, rng);
      } else if (const auto* m2 = std::get_if<Sde2>(&spec.model)) {
        x = sde2_jump(*m2, x, rng);
      } else {
        x = sde3_jump(std::get<Sde3>(spec.model), x, rng);
      }
      out.jump_times.push_back(t);
      record(t, x);
      next_jump += exponential(rng, rate);
    }
    if (marks[mark] == target) {
      record(t, x);
      if (target >= T) break;
      ++mark;
    }
  }
  out.path = StepPath(T, std::move(times), std::move(values));
  return out;
}

Estimate moment_estimate(std::span<const SdePath> ensemble, int n, double t) {
  if (ensemble.size() < 2) throw std::invalid_argument("moment_estimate: need at least two paths");
  if (n < 1) throw std::invalid_argument("moment_estimate: n must be positive");
  RunningStats s;
  for (const auto& p : ensemble) {
    if (t > p.path.horizon()) throw std::invalid_argument("moment_estimate: t beyond horizon");
    s.add(std::pow(p.path.value_at(t), n));
  }
  return s.estimate();
}

}  // namespace symco
