#include "symco/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "numerics.hpp"
#include "symco/coalescent.hpp"

namespace symco {

namespace {

std::uint32_t to_size(double v, std::int64_t n) {
  const double c = std::clamp(v, 1.0, static_cast<double>(n));
  return static_cast<std::uint32_t>(c);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("demography: alpha must lie in (0, 1]");
}

class Sizer {
 public:
  Sizer(const Demography& d, std::int64_t n) : d_(d), n_(n) {
    std::visit([this](const auto& v) { init(v); }, d_);
  }

  // Size and bottleneck flag for the next generation.
  std::pair<std::uint32_t, bool> next(Rng& rng) {
    return std::visit([&](const auto& v) { return step(v, rng); }, d_);
  }

 private:
  void init(const ShortDrastic& s) {
    check_alpha(s.alpha);
    if (!(s.gamma > 0.0 && s.gamma < s.alpha / 2.0))
      throw std::invalid_argument("short drastic: gamma must lie in (0, alpha/2)");
    require_valid(CoagulationMeasure{0.0, s.f0.body});
    const double cap = std::floor(std::pow(static_cast<double>(n_), s.gamma));
    std::vector<std::pair<std::int64_t, double>> atoms;
    const CoagulationMeasure body{0.0, s.f0.body};
    if (body.has_finite_support()) {
      for (const auto& [k, v] : body.finite_atoms())
        if (static_cast<double>(k) <= cap && v > 0.0) atoms.emplace_back(k, v);
    } else {
      for (std::int64_t k = 1; static_cast<double>(k) <= cap; ++k) atoms.emplace_back(k, body.mass(k));
    }
    double mass = 0.0;
    for (const auto& a : atoms) mass += a.second;
    if (!(mass > 0.0)) throw std::invalid_argument("short drastic: no mass of F0 below N^gamma");
    p_ = mass / std::pow(static_cast<double>(n_), s.alpha);
    if (p_ > 1.0) throw std::invalid_argument("short drastic: bottleneck probability k^(N)/N^alpha exceeds 1");
    for (auto& a : atoms) a.second /= mass;
    law_ = DiscreteLaw(std::move(atoms));
  }
  void init(const LongDrastic& s) {
    check_alpha(s.alpha);
    if (!(s.eta > 0.0)) throw std::invalid_argument("long drastic: eta must be positive");
    p_ = s.eta / std::pow(static_cast<double>(n_), s.alpha);
    if (p_ > 1.0) throw std::invalid_argument("long drastic: eta / N^alpha exceeds 1");
  }
  void init(const LongSoft& s) {
    check_alpha(s.alpha);
    if (!(s.eta > 0.0)) throw std::invalid_argument("long soft: eta must be positive");
    if (!(s.b_exponent > 0.0 && s.b_exponent < 1.0)) throw std::invalid_argument("long soft: b exponent must lie in (0,1)");
    p_ = s.eta / std::pow(static_cast<double>(n_), s.alpha);
    if (p_ > 1.0) throw std::invalid_argument("long soft: eta / N^alpha exceeds 1");
  }
  void init(const IIDSizes& s) {
    if (const auto* u = std::get_if<UniformR>(&s.r_law)) {
      if (!(u->lo >= 0.0 && u->lo < u->hi && u->hi <= 1.0)) throw std::invalid_argument("iid sizes: need 0 <= lo < hi <= 1");
    } else {
      const double r = std::get<ConstantR>(s.r_law).r;
      if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("iid sizes: r must lie in [0, 1)");
    }
  }

  std::pair<std::uint32_t, bool> step(const ShortDrastic&, Rng& rng) {
    if (uniform01(rng) < p_) return {to_size(static_cast<double>(law_.sample(rng)), n_), true};
    return {static_cast<std::uint32_t>(n_), false};
  }
  std::pair<std::uint32_t, bool> step(const LongDrastic& s, Rng& rng) {
    return long_step(rng, [&] {
      const auto k = s.f0.sample(rng);
      const auto g = s.durations.sample(rng);
      return std::make_pair(to_size(static_cast<double>(k), n_), static_cast<std::uint64_t>(g));
    });
  }
  std::pair<std::uint32_t, bool> step(const LongSoft& s, Rng& rng) {
    return long_step(rng, [&] {
      const double b = std::pow(static_cast<double>(n_), -s.b_exponent);
      const double size = std::max(1.0, std::round(b * static_cast<double>(n_)));
      const double gamma = s.soft_durations.sample(rng);
      const double l = std::max(1.0, std::round(gamma * static_cast<double>(n_) * b));
      return std::make_pair(to_size(size, n_), static_cast<std::uint64_t>(l));
    });
  }
  std::pair<std::uint32_t, bool> step(const IIDSizes& s, Rng& rng) {
    double r;
    if (const auto* u = std::get_if<UniformR>(&s.r_law)) {
      r = u->lo + (u->hi - u->lo) * uniform01(rng);
    } else {
      r = std::get<ConstantR>(s.r_law).r;
    }
    return {to_size(std::floor(static_cast<double>(n_) * r) + 1.0, n_), false};
  }

  template <class Draw>
  std::pair<std::uint32_t, bool> long_step(Rng& rng, Draw draw) {
    if (remaining_bottleneck_ > 0) {
      --remaining_bottleneck_;
      return {bottleneck_size_, true};
    }
    if (remaining_normal_ == 0) remaining_normal_ = geometric(rng, p_);
    if (remaining_normal_ > 1) {
      --remaining_normal_;
      return {static_cast<std::uint32_t>(n_), false};
    }
    remaining_normal_ = 0;
    // this generation is the last normal one; the bottleneck starts next
    const auto [size, length] = draw();
    bottleneck_size_ = size;
    remaining_bottleneck_ = length;
    return {static_cast<std::uint32_t>(n_), false};
  }

  const Demography& d_;
  std::int64_t n_;
  double p_ = 0.0;
  DiscreteLaw law_;
  std::uint64_t remaining_normal_ = 0;
  std::uint64_t remaining_bottleneck_ = 0;
  std::uint32_t bottleneck_size_ = 0;
};

}  // namespace

double short_drastic_mass(const ShortDrastic& d, std::int64_t n) {
  const double cap = std::floor(std::pow(static_cast<double>(n), d.gamma));
  const CoagulationMeasure body{0.0, d.f0.body};
  double mass = 0.0;
  if (body.has_finite_support()) {
    for (const auto& [k, v] : body.finite_atoms())
      if (static_cast<double>(k) <= cap) mass += v;
  } else {
    for (std::int64_t k = 1; static_cast<double>(k) <= cap; ++k) mass += body.mass(k);
  }
  return mass;
}

ForwardTrajectory simulate_sizes(const Demography& d, std::int64_t n, std::size_t generations, Rng& rng) {
  if (n < 2) throw std::invalid_argument("simulate_forward: N must be at least 2");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("simulate_forward: N exceeds 32 bits");
  Sizer sizer(d, n);
  ForwardTrajectory t;
  t.population = n;
  t.sizes.reserve(generations + 1);
  t.in_bottleneck.reserve(generations + 1);
  t.sizes.push_back(static_cast<std::uint32_t>(n));
  t.in_bottleneck.push_back(0);
  for (std::size_t g = 1; g <= generations; ++g) {
    const auto [size, flag] = sizer.next(rng);
    t.sizes.push_back(size);
    t.in_bottleneck.push_back(flag ? 1 : 0);
  }
  return t;
}

void resample_counts(ForwardTrajectory& t, double x0, Rng& rng) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw std::invalid_argument("simulate_forward: x0 outside [0, 1]");
  t.counts.assign(t.sizes.size(), 0);
  t.counts[0] = static_cast<std::uint32_t>(std::llround(x0 * static_cast<double>(t.sizes[0])));
  for (std::size_t g = 1; g < t.sizes.size(); ++g) {
    const std::uint32_t prev = t.counts[g - 1];
    if (prev == 0) {
      t.counts[g] = 0;
    } else if (prev == t.sizes[g - 1]) {
      t.counts[g] = t.sizes[g];
    } else {
      const double p = static_cast<double>(prev) / t.sizes[g - 1];
      t.counts[g] = static_cast<std::uint32_t>(binomial(rng, t.sizes[g], p));
    }
  }
}

ForwardTrajectory simulate_forward(const Demography& d, std::int64_t n, double x0, std::size_t generations, Rng& rng) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw std::invalid_argument("simulate_forward: x0 outside [0, 1]");
  ForwardTrajectory t = simulate_sizes(d, n, generations, rng);
  resample_counts(t, x0, rng);
  return t;
}

std::vector<BottleneckSpan> bottleneck_spans(const ForwardTrajectory& t) {
  std::vector<BottleneckSpan> spans;
  for (std::size_t g = 0; g < t.in_bottleneck.size(); ++g) {
    if (!t.in_bottleneck[g]) continue;
    if (!spans.empty() && spans.back().start + spans.back().length == g) {
      spans.back().length += 1;
    } else {
      spans.push_back({g, 1});
    }
  }
  return spans;
}

CollapsedTrajectory collapse_bottlenecks(const ForwardTrajectory& t) {
  if (t.in_bottleneck.size() != t.sizes.size()) throw std::invalid_argument("collapse_bottlenecks: missing flags");
  CollapsedTrajectory c;
  c.collapsed.population = t.population;
  c.spans = bottleneck_spans(t);
  for (std::size_t g = 0; g < t.sizes.size(); ++g) {
    if (t.in_bottleneck[g]) continue;
    c.kept_generations.push_back(g);
    c.collapsed.sizes.push_back(t.sizes[g]);
    if (!t.counts.empty()) c.collapsed.counts.push_back(t.counts[g]);
    c.collapsed.in_bottleneck.push_back(0);
  }
  return c;
}

StepPath rescale_time(const ForwardTrajectory& t, double alpha, double horizon) {
  check_alpha(alpha);
  if (!(horizon > 0.0)) throw std::invalid_argument("rescale_time: horizon must be positive");
  if (t.counts.size() != t.sizes.size() || t.sizes.empty()) throw std::invalid_argument("rescale_time: trajectory has no counts");
  const double scale = std::pow(static_cast<double>(t.population), alpha);
  const auto last = static_cast<std::size_t>(std::floor(scale * horizon));
  if (t.sizes.size() < last + 1)
    throw std::invalid_argument("rescale_time: trajectory shorter than N^alpha T generations");
  std::vector<double> times{0.0};
  std::vector<double> values{t.frequency(0)};
  for (std::size_t g = 1; g <= last; ++g) {
    const double v = t.frequency(g);
    if (v == values.back()) continue;
    const double at = static_cast<double>(g) / scale;
    if (at > horizon || !(at > times.back())) continue;
    times.push_back(at);
    values.push_back(v);
  }
  return StepPath(horizon, std::move(times), std::move(values));
}

Srt collapse_alignment(const CollapsedTrajectory& c, double alpha, double horizon) {
  check_alpha(alpha);
  const double scale = std::pow(static_cast<double>(c.collapsed.population), alpha);
  std::vector<std::pair<double, double>> knots{{0.0, 0.0}};
  auto push = [&](double u, double v) {
    if (u > knots.back().first && v > knots.back().second && u < horizon && v < horizon) knots.emplace_back(u, v);
  };
  const auto& kept = c.kept_generations;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (kept[i] == kept[i - 1] + 1) continue;
    // a bottleneck sits between kept[i-1] and kept[i]
    push(static_cast<double>(kept[i - 1]) / scale, static_cast<double>(i - 1) / scale);
    push(static_cast<double>(kept[i]) / scale, static_cast<double>(i) / scale);
  }
  const double shift = knots.back().first - knots.back().second;
  if (shift > 0.0) push(horizon - 1.0 / scale, horizon - 1.0 / scale - shift);
  knots.emplace_back(horizon, horizon);
  return Srt(horizon, std::move(knots));
}

std::vector<int> sample_ancestry(const ForwardTrajectory& t, int sample_size, Rng& rng) {
  if (t.sizes.empty()) throw std::invalid_argument("sample_ancestry: empty trajectory");
  if (sample_size < 1 || static_cast<std::uint32_t>(sample_size) > t.sizes.back())
    throw std::invalid_argument("sample_ancestry: sample size must lie in [1, final size]");
  std::vector<int> path{sample_size};
  path.reserve(t.sizes.size());
  int blocks = sample_size;
  for (std::size_t g = t.sizes.size() - 1; g > 0; --g) {
    if (blocks > 1) blocks = paintbox_block_count(blocks, t.sizes[g - 1], rng);
    path.push_back(blocks);
  }
  return path;
}

std::vector<std::uint32_t> wf_family_sizes(std::int64_t k, int generations, Rng& rng) {
  if (k < 1) throw std::invalid_argument("wf_family_sizes: k must be positive");
  if (generations < 0) throw std::invalid_argument("wf_family_sizes: negative generation count");
  std::vector<std::uint32_t> a(static_cast<std::size_t>(k), 1);
  for (int g = 0; g < generations; ++g) {
    // multinomial(k; a_i / k) by conditional binomials
    std::uint64_t left = static_cast<std::uint64_t>(k);
    std::uint64_t mass = static_cast<std::uint64_t>(k);
    std::vector<std::uint32_t> next(a.size(), 0);
    for (std::size_t i = 0; i < a.size() && left > 0; ++i) {
      if (a[i] == 0) continue;
      const double p = mass == a[i] ? 1.0 : static_cast<double>(a[i]) / static_cast<double>(mass);
      const auto draw = binomial(rng, left, p);
      next[i] = static_cast<std::uint32_t>(draw);
      left -= draw;
      mass -= a[i];
    }
    a = std::move(next);
  }
  return a;
}

std::vector<double> discretize_size_law(const RLaw& law, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("discretize_size_law: N must be positive");
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  const double nd = static_cast<double>(n);
  if (const auto* u = std::get_if<UniformR>(&law)) {
    if (!(u->lo >= 0.0 && u->lo < u->hi && u->hi <= 1.0)) throw std::invalid_argument("discretize_size_law: need 0 <= lo < hi <= 1");
    const double width = u->hi - u->lo;
    for (std::int64_t i = 1; i <= n; ++i) {
      const double a = std::max(u->lo, static_cast<double>(i - 1) / nd);
      const double b = std::min(u->hi, static_cast<double>(i) / nd);
      if (b > a) p[static_cast<std::size_t>(i - 1)] = (b - a) / width;
    }
  } else {
    const double r = std::get<ConstantR>(law).r;
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("discretize_size_law: r must lie in [0, 1)");
    const auto i = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(nd * r)) + 1);
    p[static_cast<std::size_t>(i - 1)] = 1.0;
  }
  return p;
}

MohleCoefficients mohle_coefficients(const std::vector<double>& size_law, std::int64_t n) {
  if (static_cast<std::int64_t>(size_law.size()) != n) throw std::invalid_argument("mohle_coefficients: law must cover 1..N");
  detail::CompensatedSum total, c, d;
  for (std::size_t i = 0; i < size_law.size(); ++i) {
    const double p = size_law[i];
    if (!(p >= 0.0)) throw std::invalid_argument("mohle_coefficients: negative probability");
    const double inv = 1.0 / static_cast<double>(i + 1);
    total.add(p);
    c.add(p * inv);
    d.add(p * inv * inv);
  }
  if (std::abs(total.value() - 1.0) > 1e-9) throw std::invalid_argument("mohle_coefficients: law does not sum to 1");
  return {c.value(), d.value()};
}

void write_trajectory_csv(std::ostream& out, const ForwardTrajectory& t) {
  out << "generation,size,count,in_bottleneck\n";
  for (std::size_t g = 0; g < t.sizes.size(); ++g) {
    out << g << ',' << t.sizes[g] << ',' << (t.counts.empty() ? 0 : t.counts[g]) << ','
        << static_cast<int>(t.in_bottleneck[g]) << '\n';
  }
}

}  // namespace symco
