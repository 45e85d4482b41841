#pragma once

#include <vector>

#include <Eigen/Core>

#include "ppsim/freq_tests.hpp"
#include "ppsim/posterior.hpp"
#include "ppsim/rng.hpp"

namespace ppsim {

struct McmcSettings {
  int chains = 2;
  int burn_in = 1000;
  int keep = 1000;

  void validate() const;
};

// Split-R-hat over per-chain draws of one scalar parameter (each column is
// one chain). 1.0 means indistinguishable chain halves.
double split_rhat(const Eigen::MatrixXd& chain_draws);

// Priors shared by the ordinal regression models. cutpoint_prior_sd == 0
// selects the default flat (improper) prior on ordered cutpoints; a positive
// value selects independent normals restricted to the ordered region, which
// is proper and supports prior-predictive simulation.
struct OrdinalRegressionSpec {
  double theta_prior_sd = 10.0;
  double cutpoint_prior_sd = 0.0;
};

struct OrdinalRegressionFit {
  // Columns: [alpha_0 .. alpha_{K-2}, theta]
  PosteriorDraws draws;
  double prob_benefit = 0.0;  // fraction of draws with benefit-direction OR > 1
  double theta_mean = 0.0;
  double theta_variance = 0.0;
  double rhat_theta = 1.0;
  bool converged = false;
};

// Bayesian cumulative logistic regression with a treatment indicator,
// sampled by adaptive random-walk Metropolis. Used as the completers-only
// reference analysis, the final analysis of the modeling designs, and the
// per-imputation refit of the longitudinal design.
OrdinalRegressionFit fit_ordinal_regression(const OrdinalCounts& data,
                                            const OrdinalRegressionSpec& spec,
                                            CategoryDirection direction,
                                            const McmcSettings& settings,
                                            Rng& rng);

enum class InvGammaParameterization { shape_scale, shape_inverse_scale };

// Hierarchical prior linking the trial treatment effect to an external
// cohort's, with a data-driven between-effect variance.
struct BorrowingModelSpec {
  double mu_prior_mean = 0.0;
  double mu_prior_sd = 1.0;
  double tau2_shape = 0.125;
  double tau2_scale = 0.00281;  // == shape * 0.15^2: InvGamma "weight" 0.25
                                // with central value 0.15
  InvGammaParameterization tau2_parameterization =
      InvGammaParameterization::shape_scale;
  double beta_prior_sd = 10.0;
  double cutpoint_prior_sd = 0.0;

  double tau2_scale_effective() const;
};

struct BorrowingFit {
  // Columns: [alpha_0 .. alpha_{K-2}, beta, theta_trial, theta_external,
  //           mu_theta, tau2_theta]
  PosteriorDraws draws;
  double prob_benefit = 0.0;
  double theta_trial_mean = 0.0;
  double theta_trial_variance = 0.0;
  double rhat_theta = 1.0;
  bool converged = false;

  int n_cutpoints() const { return static_cast<int>(draws.draws.cols()) - 5; }
};

// Fits the dynamic-borrowing model on trial plus external ordinal data.
// Cutpoints, beta and the two treatment effects move by adaptive
// Metropolis; the hierarchical mean and variance use conjugate Gibbs steps.
BorrowingFit fit_borrowing_model(const OrdinalCounts& trial,
                                 const OrdinalCounts& external,
                                 const BorrowingModelSpec& spec,
                                 CategoryDirection direction,
                                 const McmcSettings& settings, Rng& rng);

// Joint 90-day ordinal regression with a reverse-transition model for
// 30-day outcomes.
struct LongitudinalModelSpec {
  double transition_concentration = 1.0 / 6.0;
  OrdinalRegressionSpec regression;
};

struct PartialSubject {
  int arm = 0;
  int cat30 = 0;
};

struct LongitudinalFit {
  // Columns: [alpha_0 .. alpha_{K-2}, theta, rho row-major (K*K)] where
  // rho(j, i) = P(30-day category i | 90-day category j).
  PosteriorDraws draws;
  double prob_benefit = 0.0;
  double theta_mean = 0.0;
  double theta_variance = 0.0;
  double rhat_theta = 1.0;
  bool converged = false;
  // One row per kept draw: the imputed 90-day category of each partial
  // subject at that draw.
  Eigen::MatrixXi imputed_cat90;
};

// Completers carry both outcomes (counts90 per arm plus the pooled
// 90-day-to-30-day transition table); partially followed subjects carry only
// a 30-day outcome and have their 90-day outcome imputed inside the chain.
LongitudinalFit fit_longitudinal_model(
    const OrdinalCounts& completers90,
    const Eigen::MatrixXd& completer_transitions,  // K x K: (cat90, cat30)
    const std::vector<PartialSubject>& partials,
    const LongitudinalModelSpec& spec, CategoryDirection direction,
    const McmcSettings& settings, Rng& rng);

// Category probabilities implied by cutpoints and a linear shift on the
// cumulative logit scale.
Eigen::VectorXd ordinal_probabilities(const Eigen::VectorXd& cutpoints,
                                      double shift);

}  // namespace ppsim
