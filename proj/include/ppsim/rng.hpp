#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace ppsim {

using Rng = std::mt19937_64;

// splitmix64 finalizer. Used everywhere a derived seed is needed.
std::uint64_t mix64(std::uint64_t x);

// Seed for work unit `index` under `master_seed`. Documented derivation:
// mix64(master ^ golden_gamma * (index + 1)), so unit streams are
// independent of execution order and thread count.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

Rng make_rng(std::uint64_t seed);

double runif(Rng& rng);
double rnorm(Rng& rng, double mean, double sd);
double rexp_rate(Rng& rng, double rate);
// Gamma with shape/rate parameterization (mean = shape / rate).
double rgamma_rate(Rng& rng, double shape, double rate);
double rbeta(Rng& rng, double a, double b);
long rbinom(Rng& rng, long n, double p);
// Index drawn proportional to the (unnormalized, non-negative) weights.
int rcategorical(Rng& rng, std::span<const double> weights);
Eigen::VectorXd rdirichlet(Rng& rng, const Eigen::VectorXd& concentration);

}  // namespace ppsim
