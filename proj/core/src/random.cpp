#include "symco/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symco {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t binomial_inversion(Rng& rng, std::uint64_t n, double p) {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = (static_cast<double>(n) + 1.0) * s;
  double r = std::exp(static_cast<double>(n) * std::log1p(-p));
  double u = uniform01(rng);
  std::uint64_t x = 0;
  while (u > r) {
    u -= r;
    ++x;
    if (x > n) {
      // rounding residue; restart keeps the draw exact
      x = 0;
      r = std::exp(static_cast<double>(n) * std::log1p(-p));
      u = uniform01(rng);
      continue;
    }
    r *= a / static_cast<double>(x) - s;
  }
  return x;
}

}  // namespace

std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t replicate_index) {
  return splitmix_finalize(master_seed + (replicate_index + 1) * kGolden);
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t replicate_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_stream(master_seed, replicate_index)),
                    static_cast<std::uint32_t>(derive_stream(master_seed, replicate_index) >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform_open(Rng& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u == 0.0);
  return u;
}

double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

double standard_normal(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  return nd(rng);
}

double gamma_variate(Rng& rng, double shape) {
  std::gamma_distribution<double> gd(shape, 1.0);
  return gd(rng);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  // Lemire's multiply-shift with rejection of the biased zone
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t binomial(Rng& rng, std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0,1]");
  std::uint64_t offset = 0;
  // Knuth's splitting: X ~ Beta(a, n+1-a) is the a-th order statistic of n uniforms.
  while (true) {
    if (n == 0 || p == 0.0) break;
    if (p == 1.0) {
      offset += n;
      break;
    }
    if (static_cast<double>(n) * std::min(p, 1.0 - p) < 30.0) {
      if (p <= 0.5) {
        offset += binomial_inversion(rng, n, p);
      } else {
        offset += n - binomial_inversion(rng, n, 1.0 - p);
      }
      break;
    }
    const std::uint64_t a = 1 + n / 2;
    const std::uint64_t b = n + 1 - a;
    const double ga = gamma_variate(rng, static_cast<double>(a));
    const double gb = gamma_variate(rng, static_cast<double>(b));
    const double x = ga / (ga + gb);
    if (x >= p) {
      n = a - 1;
      p = p / x;
    } else {
      offset += a;
      n = b - 1;
      p = (p - x) / (1.0 - x);
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return offset;
}

std::uint64_t geometric(Rng& rng, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric: p outside (0,1]");
  if (p == 1.0) return 1;
  const double g = std::floor(std::log(uniform_open(rng)) / std::log1p(-p));
  if (g >= 9.0e18) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(g) + 1;
}

}  // namespace symco
