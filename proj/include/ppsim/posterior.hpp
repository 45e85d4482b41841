#pragma once

#include <string>

#include <Eigen/Core>

#include "ppsim/freq_tests.hpp"
#include "ppsim/rng.hpp"

namespace ppsim {

// Posterior parameter draws, one row per draw; column layout is fixed per
// model tag and documented at each sampler.
struct PosteriorDraws {
  Eigen::MatrixXd draws;
  std::string model;

  long n_draws() const { return draws.rows(); }
};

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;
};

struct GammaPrior {
  double shape = 0.001;
  double rate = 0.001;
};

// Independent Beta posteriors per arm. Columns: [p_control, p_treatment].
PosteriorDraws sample_posterior_dichotomous(const DichotomousData& data,
                                            BetaPrior prior_treatment,
                                            BetaPrior prior_control,
                                            long n_draws, Rng& rng);

struct SurvivalSummary {
  long events_control = 0;
  double exposure_control = 0.0;
  long events_treatment = 0;
  double exposure_treatment = 0.0;
};

// Conjugate exponential-Gamma hazard posteriors per arm.
// Columns: [hazard_control, hazard_treatment].
PosteriorDraws sample_posterior_tte(const SurvivalSummary& data,
                                    GammaPrior prior, long n_draws, Rng& rng);

// Dirichlet category-probability posteriors per arm. Columns: the control
// simplex then the treatment simplex (K columns each).
PosteriorDraws sample_posterior_ordinal(const OrdinalCounts& data,
                                        const Eigen::VectorXd& concentration,
                                        long n_draws, Rng& rng);

}  // namespace ppsim
