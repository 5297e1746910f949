#pragma once

#include <cstdint>
#include <random>

namespace symco {

using Rng = std::mt19937_64;

// SplitMix64 finalizer applied to master + (index + 1) * golden gamma.
// Bijective in index for a fixed master seed, so derived seeds never collide.
std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t replicate_index);
Rng make_stream(std::uint64_t master_seed, std::uint64_t replicate_index);

// Uniform on [0,1) with 53 random bits.
double uniform01(Rng& rng);
// Uniform on (0,1).
double uniform_open(Rng& rng);
double exponential(Rng& rng, double rate);
double standard_normal(Rng& rng);
double gamma_variate(Rng& rng, double shape);
// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);
// Exact binomial: inversion when the smaller tail mean is small,
// beta-splitting recursion otherwise.
std::uint64_t binomial(Rng& rng, std::uint64_t n, double p);
// Number of trials up to and including the first success, support {1, 2, ...}.
std::uint64_t geometric(Rng& rng, double p);

}  // namespace symco
