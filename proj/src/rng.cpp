#include "ppsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ppsim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

Rng make_rng(std::uint64_t seed) { return Rng(seed); }

double runif(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double rnorm(Rng& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

double rexp_rate(Rng& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

double rgamma_rate(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double rbeta(Rng& rng, double a, double b) {
  // Ratio of gammas; stable for the conjugate-update ranges used here.
  double x = rgamma_rate(rng, a, 1.0);
  double y = rgamma_rate(rng, b, 1.0);
  if (x + y <= 0.0) return 0.5;
  return x / (x + y);
}

long rbinom(Rng& rng, long n, double p) {
  if (n <= 0) return 0;
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<long>(n, p)(rng);
}

int rcategorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw std::runtime_error("rcategorical: weights sum to zero");
  }
  double u = runif(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size() - 1);
}

Eigen::VectorXd rdirichlet(Rng& rng, const Eigen::VectorXd& concentration) {
  Eigen::VectorXd out(concentration.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < concentration.size(); ++i) {
    out[i] = rgamma_rate(rng, concentration[i], 1.0);
    total += out[i];
  }
  if (total <= 0.0) {
    // All-zero gammas can only happen for microscopic concentrations.
    out.setConstant(1.0 / static_cast<double>(concentration.size()));
    return out;
  }
  out /= total;
  return out;
}

}  // namespace ppsim
