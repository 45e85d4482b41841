#include "ppsim/posterior.hpp"

#include <stdexcept>

namespace ppsim {

PosteriorDraws sample_posterior_dichotomous(const DichotomousData& data,
                                            BetaPrior prior_treatment,
                                            BetaPrior prior_control,
                                            long n_draws, Rng& rng) {
  if (prior_treatment.a <= 0.0 || prior_treatment.b <= 0.0 ||
      prior_control.a <= 0.0 || prior_control.b <= 0.0) {
    throw std::domain_error("Beta prior parameters must be positive");
  }
  if (n_draws < 1) throw std::domain_error("draw count must be >= 1");

  const double ac = prior_control.a + data.control.events;
  const double bc = prior_control.b + (data.control.total - data.control.events);
  const double at = prior_treatment.a + data.treatment.events;
  const double bt =
      prior_treatment.b + (data.treatment.total - data.treatment.events);

  PosteriorDraws out;
  out.model = "beta-dichotomous";
  out.draws.resize(n_draws, 2);
  for (long i = 0; i < n_draws; ++i) {
    out.draws(i, 0) = rbeta(rng, ac, bc);
    out.draws(i, 1) = rbeta(rng, at, bt);
  }
  return out;
}

PosteriorDraws sample_posterior_tte(const SurvivalSummary& data,
                                    GammaPrior prior, long n_draws, Rng& rng) {
  if (prior.shape <= 0.0 || prior.rate <= 0.0) {
    throw std::domain_error("Gamma prior parameters must be positive");
  }
  if (n_draws < 1) throw std::domain_error("draw count must be >= 1");

  PosteriorDraws out;
  out.model = "gamma-exponential";
  out.draws.resize(n_draws, 2);
  for (long i = 0; i < n_draws; ++i) {
    out.draws(i, 0) = rgamma_rate(rng, prior.shape + data.events_control,
                                  prior.rate + data.exposure_control);
    out.draws(i, 1) = rgamma_rate(rng, prior.shape + data.events_treatment,
                                  prior.rate + data.exposure_treatment);
  }
  return out;
}

PosteriorDraws sample_posterior_ordinal(const OrdinalCounts& data,
                                        const Eigen::VectorXd& concentration,
                                        long n_draws, Rng& rng) {
  const int k = data.n_categories();
  if (concentration.size() != k) {
    throw std::domain_error("concentration size must match category count");
  }
  if ((concentration.array() <= 0.0).any()) {
    throw std::domain_error("Dirichlet concentrations must be positive");
  }
  if (n_draws < 1) throw std::domain_error("draw count must be >= 1");

  const Eigen::VectorXd conc_c =
      concentration + data.counts.row(0).transpose();
  const Eigen::VectorXd conc_t =
      concentration + data.counts.row(1).transpose();

  PosteriorDraws out;
  out.model = "dirichlet-ordinal";
  out.draws.resize(n_draws, 2 * k);
  for (long i = 0; i < n_draws; ++i) {
    out.draws.row(i).head(k) = rdirichlet(rng, conc_c).transpose();
    out.draws.row(i).tail(k) = rdirichlet(rng, conc_t).transpose();
  }
  return out;
}

}  // namespace ppsim
