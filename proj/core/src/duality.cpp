#include "symco/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numerics.hpp"
#include "symco/coalescent.hpp"
#include "symco/ensemble.hpp"

namespace symco {

namespace {

struct Uniformized {
  double lambda = 0.0;
  std::vector<std::vector<double>> p;  // p[i][j], 1-based, j <= i
};

Uniformized uniformize(const GeneratorMatrix& q, int n) {
  Uniformized u;
  for (int i = 1; i <= n; ++i) u.lambda = std::max(u.lambda, q.exit_rate(i));
  u.p.assign(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 1; i <= n; ++i) {
    if (u.lambda == 0.0) {
      u.p[i][i] = 1.0;
      continue;
    }
    for (int j = 1; j < i; ++j) u.p[i][j] = q.rate(i, j) / u.lambda;
    u.p[i][i] = 1.0 - q.exit_rate(i) / u.lambda;
  }
  return u;
}

// Poisson(mu) weights streamed from m = 0 until the tail is below eps past the mode.
template <class Visit>
double poisson_stream(double mu, Visit visit) {
  detail::CompensatedSum cum;
  const double log_mu = std::log(mu);
  for (long m = 0;; ++m) {
    const double w = std::exp(-mu + m * log_mu - std::lgamma(m + 1.0));
    visit(m, w);
    cum.add(w);
    const double tail = 1.0 - cum.value();
    if (m > mu && tail < 1e-13) return std::max(0.0, tail);
    if (m > mu + 50.0 * std::sqrt(mu) + 1000.0) return std::max(0.0, tail);
  }
}

}  // namespace

ChainMoment exact_chain_moment(const GeneratorMatrix& q, int n, double x, double t) {
  q.validate();
  if (n < 1 || n > q.size()) throw std::invalid_argument("exact_chain_moment: n outside the state space");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("exact_chain_moment: x outside [0, 1]");
  if (!(t >= 0.0)) throw std::invalid_argument("exact_chain_moment: t must be non-negative");
  std::vector<double> h(n + 1);
  for (int i = 1; i <= n; ++i) h[i] = std::pow(x, i);
  const auto u = uniformize(q, n);
  if (t == 0.0 || u.lambda == 0.0) return {h[n], 0.0};
  // v_m = P^m h restricted to states <= n
  std::vector<double> v = h;
  detail::CompensatedSum acc;
  const double tail = poisson_stream(u.lambda * t, [&](long m, double w) {
    if (m > 0) {
      std::vector<double> next(n + 1, 0.0);
      for (int i = 1; i <= n; ++i) {
        detail::CompensatedSum s;
        for (int j = 1; j <= i; ++j) s.add(u.p[i][j] * v[j]);
        next[i] = s.value();
      }
      v = std::move(next);
    }
    acc.add(w * v[n]);
  });
  return {acc.value(), tail};
}

std::vector<double> transition_distribution(const GeneratorMatrix& q, int from, double t) {
  q.validate();
  if (from < 1 || from > q.size()) throw std::invalid_argument("transition_distribution: state outside range");
  if (!(t >= 0.0)) throw std::invalid_argument("transition_distribution: t must be non-negative");
  const int n = from;
  std::vector<double> out(n, 0.0);
  const auto u = uniformize(q, n);
  if (t == 0.0 || u.lambda == 0.0) {
    out[n - 1] = 1.0;
    return out;
  }
  std::vector<double> pi(n + 1, 0.0);
  pi[n] = 1.0;
  std::vector<detail::CompensatedSum> acc(n + 1);
  poisson_stream(u.lambda * t, [&](long m, double w) {
    if (m > 0) {
      std::vector<double> next(n + 1, 0.0);
      for (int i = 1; i <= n; ++i)
        if (pi[i] != 0.0)
          for (int j = 1; j <= i; ++j) next[j] += pi[i] * u.p[i][j];
      pi = std::move(next);
    }
    for (int j = 1; j <= n; ++j) acc[j].add(w * pi[j]);
  });
  for (int j = 1; j <= n; ++j) out[j - 1] = std::clamp(acc[j].value(), 0.0, 1.0);
  return out;
}

GeneratorMatrix drastic_generator(const DiscreteLaw& f0, const DiscreteLaw& durations, double eta, double a, int n) {
  if (n < 1) throw std::invalid_argument("drastic_generator: n must be positive");
  if (!(eta >= 0.0) || !(a >= 0.0)) throw std::invalid_argument("drastic_generator: eta and a must be non-negative");
  std::vector<std::vector<detail::CompensatedSum>> acc(n + 1, std::vector<detail::CompensatedSum>(n + 1));
  for (int i = 2; i <= n; ++i) acc[i][i - 1].add(a * i * (i - 1) / 2.0);
  for (const auto& [k, pk] : f0.support()) {
    if (pk == 0.0) continue;
    const auto step = ancestral_count_matrix(k, n);
    for (int i = 2; i <= n; ++i) {
      // law of the count after the first paintbox step
      std::vector<double> dist(n + 1, 0.0);
      const auto w = occupancy_pmf(k, i);
      for (std::size_t j = 0; j < w.size(); ++j) dist[j + 1] = w[j];
      std::int64_t done = 1;
      for (const auto& [g, pg] : durations.support()) {
        // advance to g - 1 ancestral generations (support is sorted)
        for (; done < g; ++done) {
          std::vector<double> next(n + 1, 0.0);
          for (int from = 1; from <= n; ++from)
            if (dist[from] != 0.0)
              for (int to = 1; to <= from; ++to) next[to] += dist[from] * step[from - 1][to - 1];
          dist = std::move(next);
        }
        if (pg == 0.0) continue;
        for (int j = 1; j < i; ++j)
          if (dist[j] != 0.0) acc[i][j].add(eta * pk * pg * dist[j]);
      }
    }
  }
  GeneratorMatrix q(n);
  for (int i = 2; i <= n; ++i)
    for (int j = 1; j < i; ++j) q.set_rate(i, j, acc[i][j].value());
  return q;
}

GeneratorMatrix soft_generator(const PositiveLaw& soft_durations, double eta, double a, int n) {
  if (n < 1) throw std::invalid_argument("soft_generator: n must be positive");
  if (!(eta >= 0.0) || !(a >= 0.0)) throw std::invalid_argument("soft_generator: eta and a must be non-negative");
  const auto atoms = soft_durations.finite_atoms();
  if (!atoms) throw std::invalid_argument("soft_generator: soft duration law must have finitely many atoms");
  GeneratorMatrix kingman(n);
  for (int i = 2; i <= n; ++i) kingman.set_rate(i, i - 1, i * (i - 1) / 2.0);
  std::vector<std::vector<detail::CompensatedSum>> acc(n + 1, std::vector<detail::CompensatedSum>(n + 1));
  for (int i = 2; i <= n; ++i) acc[i][i - 1].add(a * i * (i - 1) / 2.0);
  for (const auto& [sigma, ps] : *atoms) {
    if (ps == 0.0) continue;
    for (int i = 2; i <= n; ++i) {
      const auto dist = transition_distribution(kingman, i, sigma);
      for (int j = 1; j < i; ++j) acc[i][j].add(eta * ps * dist[j - 1]);
    }
  }
  GeneratorMatrix q(n);
  for (int i = 2; i <= n; ++i)
    for (int j = 1; j < i; ++j) q.set_rate(i, j, acc[i][j].value());
  return q;
}

std::string to_string(DualityModel m) {
  switch (m) {
    case DualityModel::short_drastic:
      return "short_drastic";
    case DualityModel::long_drastic:
      return "long_drastic";
    case DualityModel::long_soft:
      return "long_soft";
  }
  return "unknown";
}

DualityModel duality_model_from_string(const std::string& s) {
  if (s == "short_drastic") return DualityModel::short_drastic;
  if (s == "long_drastic") return DualityModel::long_drastic;
  if (s == "long_soft") return DualityModel::long_soft;
  throw std::invalid_argument("unknown duality model: " + s);
}

double kingman_weight(const DualityParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw std::invalid_argument("duality: alpha must lie in (0, 1]");
  return p.alpha == 1.0 ? 1.0 : 0.0;
}

GeneratorMatrix dual_generator(const DualityParams& p, int n) {
  const double a = kingman_weight(p);
  switch (p.model) {
    case DualityModel::short_drastic: {
      CoagulationMeasure f{a, p.f0.as_body(p.eta)};
      return block_counting_generator(f, n);
    }
    case DualityModel::long_drastic:
      return drastic_generator(p.f0, p.durations, p.eta, a, n);
    case DualityModel::long_soft:
      return soft_generator(p.soft_durations, p.eta, a, n);
  }
  throw std::invalid_argument("dual_generator: unknown model");
}

JumpDiffusionSpec dual_sde_spec(const DualityParams& p, double x, double t) {
  kingman_weight(p);
  if (!(p.eta >= 0.0)) throw std::invalid_argument("duality: eta must be non-negative");
  if (!(p.dt > 0.0)) throw std::invalid_argument("duality: dt must be positive");
  JumpDiffusionSpec s;
  switch (p.model) {
    case DualityModel::short_drastic:
      s.model = Sde1{p.f0, p.eta};
      break;
    case DualityModel::long_drastic:
      s.model = Sde2{p.f0, p.durations, p.eta};
      break;
    case DualityModel::long_soft:
      if (!p.soft_durations.finite_atoms()) throw std::invalid_argument("duality: long_soft needs a finite-atom law");
      s.model = Sde3{p.soft_durations, p.eta};
      break;
  }
  s.alpha = p.alpha;
  s.x0 = x;
  s.horizon = t;
  s.dt = p.dt;
  return s;
}

double dt_bias_allowance(const DualityParams& p) { return kingman_weight(p) == 1.0 ? 5.0 * p.dt : 0.0; }

std::string DualityReport::to_json() const {
  nlohmann::json j{{"model", symco::to_string(model)},
                   {"x", x},
                   {"n", n},
                   {"t", t},
                   {"lhs", lhs},
                   {"lhs_se", lhs_se},
                   {"rhs", rhs},
                   {"rhs_se", rhs_se},
                   {"rhs_truncation_error", rhs_truncation_error},
                   {"z", z},
                   {"z_adjusted", z_adjusted},
                   {"bias_allowance", bias_allowance},
                   {"reps", reps},
                   {"passed", passed()}};
  return j.dump();
}

namespace {

std::vector<double> terminal_values(const DualityParams& p, double x, double t, std::size_t reps, std::uint64_t seed,
                                    unsigned workers) {
  const JumpDiffusionSpec spec = dual_sde_spec(p, x, t);
  return run_replicates(reps, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    return simulate_sde(spec, rng).path.final_value();
  });
}

double score(double diff, double se) {
  if (se > 0.0) return diff / se;
  return diff > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

std::vector<DualityReport> duality_grid(const DualityParams& p, const std::vector<double>& xs,
                                        const std::vector<int>& ns, double t, std::size_t reps, std::uint64_t seed,
                                        unsigned workers) {
  if (reps < 2) throw std::invalid_argument("duality: need at least two replicates");
  if (!(t >= 0.0)) throw std::invalid_argument("duality: t must be non-negative");
  int nmax = 1;
  for (int n : ns) {
    if (n < 1) throw std::invalid_argument("duality: n must be positive");
    nmax = std::max(nmax, n);
  }
  const GeneratorMatrix q = dual_generator(p, nmax);
  const double allowance = dt_bias_allowance(p);
  std::vector<DualityReport> out;
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    const double x = xs[xi];
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("duality: x outside [0, 1]");
    std::vector<double> finals;
    if (t > 0.0) {
      finals = terminal_values(p, x, t, reps, derive_stream(seed, xi), workers);
    } else {
      finals.assign(reps, x);
    }
    for (int n : ns) {
      RunningStats s;
      for (double v : finals) s.add(std::pow(v, n));
      DualityReport r;
      r.model = p.model;
      r.x = x;
      r.n = n;
      r.t = t;
      r.lhs = s.mean();
      r.lhs_se = s.standard_error();
      const auto cm = exact_chain_moment(q, n, x, t);
      r.rhs = cm.value;
      r.rhs_truncation_error = cm.truncation_error;
      r.bias_allowance = allowance;
      r.reps = reps;
      const double se = std::sqrt(r.lhs_se * r.lhs_se + r.rhs_se * r.rhs_se);
      const double diff = std::abs(r.lhs - r.rhs);
      r.z = score(diff, se);
      r.z_adjusted = score(std::max(0.0, diff - allowance - cm.truncation_error), se);
      out.push_back(r);
    }
  }
  return out;
}

DualityReport duality_check(const DualityParams& p, double x, int n, double t, std::size_t reps, std::uint64_t seed,
                            unsigned workers) {
  return duality_grid(p, {x}, {n}, t, reps, seed, workers).front();
}

BiasCalibration calibrate_dt_bias(const DualityParams& p, double x, int n, double t, std::size_t reps,
                                  std::uint64_t seed, unsigned workers) {
  if (!(t > 0.0)) throw std::invalid_argument("calibrate_dt_bias: t must be positive");
  DualityParams fine = p;
  fine.dt = p.dt / 2.0;
  const auto a = terminal_values(p, x, t, reps, derive_stream(seed, 0), workers);
  const auto b = terminal_values(fine, x, t, reps, derive_stream(seed, 1), workers);
  RunningStats sa, sb;
  for (double v : a) sa.add(std::pow(v, n));
  for (double v : b) sb.add(std::pow(v, n));
  BiasCalibration c;
  c.coarse = sa.mean();
  c.fine = sb.mean();
  c.difference = c.coarse - c.fine;
  c.difference_se = std::sqrt(sa.standard_error() * sa.standard_error() + sb.standard_error() * sb.standard_error());
  c.allowance = dt_bias_allowance(p);
  return c;
}

}  // namespace symco
