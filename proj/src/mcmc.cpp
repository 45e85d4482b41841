#include "ppsim/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace ppsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool strictly_increasing(const Eigen::VectorXd& v) {
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (!(v[j] > v[j - 1])) return false;
  }
  return true;
}

// Log-likelihood of one group's category counts under cumulative logits
// alpha_j + shift.
double group_loglik(const Eigen::VectorXd& cutpoints, double shift,
                    const Eigen::RowVectorXd& counts) {
  const int k = static_cast<int>(counts.size());
  double ll = 0.0;
  double prev = 0.0;
  for (int j = 0; j < k; ++j) {
    const double cur = (j < k - 1) ? sigmoid(cutpoints[j] + shift) : 1.0;
    const double p = cur - prev;
    if (counts[j] > 0.0) {
      if (!(p > 0.0)) return kNegInf;
      ll += counts[j] * std::log(p);
    }
    prev = cur;
  }
  return ll;
}

double log_normal_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd);
}

// Ordered cutpoint prior: flat on the ordered region when sd == 0,
// otherwise independent normals restricted to the ordered region.
double cutpoint_log_prior(const Eigen::VectorXd& cutpoints, double sd) {
  if (!strictly_increasing(cutpoints)) return kNegInf;
  if (sd <= 0.0) return 0.0;
  double lp = 0.0;
  for (Eigen::Index j = 0; j < cutpoints.size(); ++j) {
    lp += log_normal_density(cutpoints[j], 0.0, sd);
  }
  return lp;
}

// Random-walk proposal scale with Roberts-Rosenthal diminishing adaptation
// toward 0.44 acceptance; adaptation happens only during burn-in.
struct AdaptiveStep {
  double log_step = std::log(0.25);
  int accepted = 0;
  int tried = 0;
  int batch = 0;

  double step() const { return std::exp(log_step); }
  void record(bool accept) {
    ++tried;
    if (accept) ++accepted;
    if (tried == 50) {
      ++batch;
      const double delta = std::min(0.05, 1.0 / std::sqrt(double(batch)));
      const double rate = accepted / 50.0;
      log_step += (rate > 0.44) ? delta : -delta;
      log_step = std::clamp(log_step, std::log(1e-4), std::log(10.0));
      accepted = 0;
      tried = 0;
    }
  }
};

// Empirical-covariance block proposal (Haario-style adaptive Metropolis).
// The per-coordinate sweep explores each direction; the block move follows
// the correlated directions that a coordinate walk mixes slowly along.
// Covariance accumulates over burn-in states and is frozen afterward.
struct BlockProposal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd m2;
  Eigen::MatrixXd chol;
  long n = 0;
  bool ready = false;
  double log_scale = 0.0;
  int accepted = 0;
  int tried = 0;

  void observe(const Eigen::VectorXd& x) {
    if (n == 0) {
      mean = x;
      m2 = Eigen::MatrixXd::Zero(x.size(), x.size());
      ++n;
      return;
    }
    ++n;
    const Eigen::VectorXd delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean).transpose();
  }

  void refresh() {
    if (n < 20) return;
    const auto dim = mean.size();
    Eigen::MatrixXd cov = m2 / static_cast<double>(n - 1);
    cov.diagonal().array() += 1e-9;
    const double scale = 2.38 * 2.38 / static_cast<double>(dim);
    Eigen::LLT<Eigen::MatrixXd> llt(scale * cov);
    if (llt.info() == Eigen::Success) {
      chol = llt.matrixL();
      ready = true;
    }
  }

  // Returns true if the move was accepted. LogPost must evaluate the full
  // conditional log posterior of the block.
  template <typename LogPost>
  bool move(Eigen::VectorXd& x, double& lp, Rng& rng, bool adapting,
            LogPost&& log_post) {
    if (!ready) return false;
    Eigen::VectorXd z(x.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rnorm(rng, 0.0, 1.0);
    const Eigen::VectorXd proposal =
        x + std::exp(log_scale) * (chol * z);
    const double lp_new = log_post(proposal);
    const bool accept =
        lp_new > kNegInf && std::log(runif(rng)) < lp_new - lp;
    if (accept) {
      x = proposal;
      lp = lp_new;
    }
    if (adapting) {
      ++tried;
      if (accept) ++accepted;
      if (tried == 50) {
        const double rate = accepted / 50.0;
        log_scale += (rate > 0.23) ? 0.05 : -0.05;
        log_scale = std::clamp(log_scale, -3.0, 3.0);
        accepted = 0;
        tried = 0;
      }
    }
    return accept;
  }
};

Eigen::VectorXd empirical_cutpoints(const Eigen::RowVectorXd& pooled_counts) {
  const int k = static_cast<int>(pooled_counts.size());
  Eigen::VectorXd cut(k - 1);
  const double total = pooled_counts.sum();
  double cum = 0.0;
  double prev = kNegInf;
  for (int j = 0; j < k - 1; ++j) {
    cum += pooled_counts[j];
    const double frac = (cum + 0.5) / (total + 1.0);
    double a = std::log(frac / (1.0 - frac));
    if (a <= prev) a = prev + 1e-3;
    cut[j] = a;
    prev = a;
  }
  return cut;
}

double sample_variance(const Eigen::VectorXd& v) {
  const double n = static_cast<double>(v.size());
  if (n < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / (n - 1.0);
}

}  // namespace

void McmcSettings::validate() const {
  if (chains < 2) throw std::domain_error("mcmc: chains must be >= 2");
  if (burn_in < 0) throw std::domain_error("mcmc: burn_in must be >= 0");
  if (keep < 1) throw std::domain_error("mcmc: keep must be >= 1");
}

double split_rhat(const Eigen::MatrixXd& chain_draws) {
  const long n = chain_draws.rows();
  const long m = chain_draws.cols();
  if (n < 4 || m < 1) return 1.0;
  const long half = n / 2;
  const long n_seq = 2 * m;

  Eigen::VectorXd means(n_seq), vars(n_seq);
  for (long c = 0; c < m; ++c) {
    for (int s = 0; s < 2; ++s) {
      const Eigen::VectorXd seg = chain_draws.col(c).segment(s * half, half);
      means[2 * c + s] = seg.mean();
      vars[2 * c + s] = sample_variance(seg);
    }
  }
  const double w = vars.mean();
  const double b_over_n = sample_variance(means);
  if (!(w > 0.0)) return 1.0;
  const double var_hat =
      (static_cast<double>(half - 1) / half) * w + b_over_n;
  return std::sqrt(var_hat / w);
}

double BorrowingModelSpec::tau2_scale_effective() const {
  return tau2_parameterization == InvGammaParameterization::shape_scale
             ? tau2_scale
             : 1.0 / tau2_scale;
}

Eigen::VectorXd ordinal_probabilities(const Eigen::VectorXd& cutpoints,
                                      double shift) {
  const int k = static_cast<int>(cutpoints.size()) + 1;
  Eigen::VectorXd probs(k);
  double prev = 0.0;
  for (int j = 0; j < k; ++j) {
    const double cur = (j < k - 1) ? sigmoid(cutpoints[j] + shift) : 1.0;
    probs[j] = std::max(cur - prev, 0.0);
    prev = cur;
  }
  return probs;
}

// ---------------------------------------------------------------------------
// Plain Bayesian ordinal regression
// ---------------------------------------------------------------------------

OrdinalRegressionFit fit_ordinal_regression(const OrdinalCounts& data,
                                            const OrdinalRegressionSpec& spec,
                                            CategoryDirection direction,
                                            const McmcSettings& settings,
                                            Rng& rng) {
  settings.validate();
  const int k = data.n_categories();
  const int n_cut = k - 1;
  const int dim = n_cut + 1;

  auto posterior = [&](const Eigen::VectorXd& x) {
    const auto cut = x.head(n_cut);
    const double theta = x[n_cut];
    double lp = cutpoint_log_prior(cut, spec.cutpoint_prior_sd);
    if (lp == kNegInf) return kNegInf;
    lp += log_normal_density(theta, 0.0, spec.theta_prior_sd);
    lp += group_loglik(cut, 0.0, data.counts.row(0));
    lp += group_loglik(cut, theta, data.counts.row(1));
    return lp;
  };

  const long total_kept = static_cast<long>(settings.chains) * settings.keep;
  OrdinalRegressionFit fit;
  fit.draws.model = "ordinal-regression";
  fit.draws.draws.resize(total_kept, dim);
  Eigen::MatrixXd theta_by_chain(settings.keep, settings.chains);

  const Eigen::RowVectorXd pooled = data.counts.colwise().sum();
  for (int chain = 0; chain < settings.chains; ++chain) {
    Rng chain_rng = make_rng(derive_seed(rng(), chain));
    Eigen::VectorXd x(dim);
    x.head(n_cut) = empirical_cutpoints(pooled);
    // Overdisperse chain starts so R-hat can see disagreement.
    x[n_cut] = 0.2 * rnorm(chain_rng, 0.0, 1.0);
    double lp = posterior(x);
    std::vector<AdaptiveStep> steps(dim);
    BlockProposal block;

    const int total_iter = settings.burn_in + settings.keep;
    for (int it = 0; it < total_iter; ++it) {
      const bool adapting = it < settings.burn_in;
      for (int p = 0; p < dim; ++p) {
        const double old_value = x[p];
        x[p] = old_value + rnorm(chain_rng, 0.0, steps[p].step());
        const double lp_new = posterior(x);
        const bool accept =
            lp_new > kNegInf &&
            std::log(runif(chain_rng)) < lp_new - lp;
        if (accept) lp = lp_new; else x[p] = old_value;
        if (adapting) steps[p].record(accept);
      }
      if (adapting) {
        block.observe(x);
        if (it % 100 == 99) block.refresh();
      }
      block.move(x, lp, chain_rng, adapting, posterior);
      if (!adapting) {
        const long row =
            static_cast<long>(chain) * settings.keep + (it - settings.burn_in);
        fit.draws.draws.row(row) = x.transpose();
        theta_by_chain(it - settings.burn_in, chain) = x[n_cut];
      }
    }
  }

  const double sign =
      (direction == CategoryDirection::lower_is_better) ? 1.0 : -1.0;
  const Eigen::VectorXd thetas = fit.draws.draws.col(n_cut);
  fit.prob_benefit =
      (sign * thetas.array() > 0.0).cast<double>().mean();
  fit.theta_mean = thetas.mean();
  fit.theta_variance = sample_variance(thetas);
  fit.rhat_theta = split_rhat(theta_by_chain);
  fit.converged = fit.rhat_theta < 1.05;
  return fit;
}

// ---------------------------------------------------------------------------
// Dynamic borrowing model
// ---------------------------------------------------------------------------

BorrowingFit fit_borrowing_model(const OrdinalCounts& trial,
                                 const OrdinalCounts& external,
                                 const BorrowingModelSpec& spec,
                                 CategoryDirection direction,
                                 const McmcSettings& settings, Rng& rng) {
  settings.validate();
  if (trial.counts.sum() <= 0.0 || external.counts.sum() <= 0.0) {
    throw std::domain_error("fit_borrowing_model: both datasets must be "
                            "non-empty");
  }
  const int k = trial.n_categories();
  if (external.n_categories() != k) {
    throw std::domain_error("fit_borrowing_model: category counts differ");
  }
  const int n_cut = k - 1;
  // MH block: cutpoints, beta, theta_trial, theta_external.
  const int mh_dim = n_cut + 3;

  const double tau2_shape = spec.tau2_shape;
  const double tau2_scale = spec.tau2_scale_effective();
  if (!(tau2_shape > 0.0) || !(tau2_scale > 0.0)) {
    throw std::domain_error("fit_borrowing_model: InvGamma parameters must "
                            "be positive");
  }

  auto loglik = [&](const Eigen::VectorXd& cut, double beta, double theta0,
                    double theta1) {
    double ll = group_loglik(cut, 0.0, trial.counts.row(0));
    ll += group_loglik(cut, theta0, trial.counts.row(1));
    ll += group_loglik(cut, beta, external.counts.row(0));
    ll += group_loglik(cut, beta + theta1, external.counts.row(1));
    return ll;
  };

  const long total_kept = static_cast<long>(settings.chains) * settings.keep;
  BorrowingFit fit;
  fit.draws.model = "borrowing";
  fit.draws.draws.resize(total_kept, n_cut + 5);
  Eigen::MatrixXd theta_by_chain(settings.keep, settings.chains);

  Eigen::RowVectorXd pooled =
      trial.counts.colwise().sum() + external.counts.colwise().sum();

  for (int chain = 0; chain < settings.chains; ++chain) {
    Rng chain_rng = make_rng(derive_seed(rng(), chain));
    // MH block layout: [cutpoints..., beta, theta_trial, theta_external].
    Eigen::VectorXd x(mh_dim);
    x.head(n_cut) = empirical_cutpoints(pooled);
    x[n_cut] = 0.0;
    x[n_cut + 1] = 0.2 * rnorm(chain_rng, 0.0, 1.0);
    x[n_cut + 2] = 0.2 * rnorm(chain_rng, 0.0, 1.0);
    double mu = 0.0;
    double tau2 = tau2_scale / (tau2_shape + 1.0) + 0.01;  // near prior mode

    auto log_post = [&](const Eigen::VectorXd& v) {
      const auto cut = v.head(n_cut);
      const double beta = v[n_cut];
      const double theta0 = v[n_cut + 1];
      const double theta1 = v[n_cut + 2];
      double lp = cutpoint_log_prior(cut, spec.cutpoint_prior_sd);
      if (lp == kNegInf) return kNegInf;
      lp += log_normal_density(beta, 0.0, spec.beta_prior_sd);
      const double tau = std::sqrt(tau2);
      lp += log_normal_density(theta0, mu, tau);
      lp += log_normal_density(theta1, mu, tau);
      lp += loglik(cut, beta, theta0, theta1);
      return lp;
    };

    double lp = log_post(x);
    std::vector<AdaptiveStep> steps(mh_dim);
    BlockProposal block;

    const int total_iter = settings.burn_in + settings.keep;
    for (int it = 0; it < total_iter; ++it) {
      const bool adapting = it < settings.burn_in;
      for (int p = 0; p < mh_dim; ++p) {
        const double old_value = x[p];
        x[p] = old_value + rnorm(chain_rng, 0.0, steps[p].step());
        const double lp_new = log_post(x);
        const bool accept =
            lp_new > kNegInf && std::log(runif(chain_rng)) < lp_new - lp;
        if (accept) lp = lp_new; else x[p] = old_value;
        if (adapting) steps[p].record(accept);
      }
      if (adapting) {
        block.observe(x);
        if (it % 100 == 99) block.refresh();
      }
      block.move(x, lp, chain_rng, adapting, log_post);

      // Gibbs: hierarchical mean, then between-effect variance.
      {
        const double theta0 = x[n_cut + 1];
        const double theta1 = x[n_cut + 2];
        const double prior_prec =
            1.0 / (spec.mu_prior_sd * spec.mu_prior_sd);
        const double like_prec = 2.0 / tau2;
        const double prec = prior_prec + like_prec;
        const double mean =
            (spec.mu_prior_mean * prior_prec + (theta0 + theta1) / tau2) /
            prec;
        mu = rnorm(chain_rng, mean, 1.0 / std::sqrt(prec));

        const double resid =
            (theta0 - mu) * (theta0 - mu) + (theta1 - mu) * (theta1 - mu);
        const double shape_post = tau2_shape + 1.0;
        const double scale_post = tau2_scale + 0.5 * resid;
        tau2 = 1.0 / rgamma_rate(chain_rng, shape_post, scale_post);
        // Conditioning on (mu, tau2) changed: refresh the cached density.
        lp = log_post(x);
      }

      if (!adapting) {
        const long row =
            static_cast<long>(chain) * settings.keep + (it - settings.burn_in);
        fit.draws.draws.row(row).head(mh_dim) = x.transpose();
        fit.draws.draws(row, n_cut + 3) = mu;
        fit.draws.draws(row, n_cut + 4) = tau2;
        theta_by_chain(it - settings.burn_in, chain) = x[n_cut + 1];
      }
    }
  }

  const double sign =
      (direction == CategoryDirection::lower_is_better) ? 1.0 : -1.0;
  const Eigen::VectorXd thetas = fit.draws.draws.col(n_cut + 1);
  fit.prob_benefit = (sign * thetas.array() > 0.0).cast<double>().mean();
  fit.theta_trial_mean = thetas.mean();
  fit.theta_trial_variance = sample_variance(thetas);
  fit.rhat_theta = split_rhat(theta_by_chain);
  fit.converged = fit.rhat_theta < 1.05;
  return fit;
}

// ---------------------------------------------------------------------------
// Longitudinal reverse-transition model
// ---------------------------------------------------------------------------

LongitudinalFit fit_longitudinal_model(
    const OrdinalCounts& completers90,
    const Eigen::MatrixXd& completer_transitions,
    const std::vector<PartialSubject>& partials,
    const LongitudinalModelSpec& spec, CategoryDirection direction,
    const McmcSettings& settings, Rng& rng) {
  settings.validate();
  const int k = completers90.n_categories();
  if (completer_transitions.rows() != k || completer_transitions.cols() != k) {
    throw std::domain_error(
        "fit_longitudinal_model: transition table must be K x K");
  }
  for (const auto& s : partials) {
    if (s.cat30 < 0 || s.cat30 >= k) {
      throw std::domain_error(
          "fit_longitudinal_model: 30-day category out of range");
    }
  }
  const int n_cut = k - 1;
  const int n_partial = static_cast<int>(partials.size());
  const int dim = n_cut + 1;

  const long total_kept = static_cast<long>(settings.chains) * settings.keep;
  LongitudinalFit fit;
  fit.draws.model = "longitudinal";
  fit.draws.draws.resize(total_kept, dim + k * k);
  fit.imputed_cat90.resize(total_kept, n_partial);
  Eigen::MatrixXd theta_by_chain(settings.keep, settings.chains);

  const Eigen::RowVectorXd pooled = completers90.counts.colwise().sum();

  for (int chain = 0; chain < settings.chains; ++chain) {
    Rng chain_rng = make_rng(derive_seed(rng(), chain));
    Eigen::VectorXd x(dim);  // [cutpoints..., theta]
    x.head(n_cut) = empirical_cutpoints(pooled);
    x[n_cut] = 0.2 * rnorm(chain_rng, 0.0, 1.0);

    // rho rows: distribution of the 30-day category given 90-day category j.
    Eigen::MatrixXd rho(k, k);
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd conc =
          completer_transitions.row(j).transpose().array() +
          spec.transition_concentration;
      rho.row(j) = rdirichlet(chain_rng, conc).transpose();
    }

    std::vector<int> imputed(n_partial, 0);
    Eigen::MatrixXd counts90 = completers90.counts;

    auto posterior = [&](const Eigen::VectorXd& v) {
      const auto cut = v.head(n_cut);
      const double theta = v[n_cut];
      double lp = cutpoint_log_prior(cut, spec.regression.cutpoint_prior_sd);
      if (lp == kNegInf) return kNegInf;
      lp += log_normal_density(theta, 0.0, spec.regression.theta_prior_sd);
      lp += group_loglik(cut, 0.0, counts90.row(0));
      lp += group_loglik(cut, theta, counts90.row(1));
      return lp;
    };

    std::vector<AdaptiveStep> steps(dim);
    BlockProposal block;
    std::vector<double> weights(k);

    const int total_iter = settings.burn_in + settings.keep;
    for (int it = 0; it < total_iter; ++it) {
      const bool adapting = it < settings.burn_in;

      // 1. Impute 90-day outcomes for partially followed subjects from
      //    P(Y90 = j | arm) * rho(j, y30).
      counts90 = completers90.counts;
      Eigen::MatrixXd transitions = completer_transitions;
      const Eigen::VectorXd probs_control =
          ordinal_probabilities(x.head(n_cut), 0.0);
      const Eigen::VectorXd probs_treat =
          ordinal_probabilities(x.head(n_cut), x[n_cut]);
      for (int i = 0; i < n_partial; ++i) {
        const auto& subj = partials[i];
        const Eigen::VectorXd& base =
            (subj.arm == 1) ? probs_treat : probs_control;
        for (int j = 0; j < k; ++j) {
          weights[j] = base[j] * rho(j, subj.cat30);
        }
        const int draw = rcategorical(chain_rng, weights);
        imputed[i] = draw;
        counts90(subj.arm, draw) += 1.0;
        transitions(draw, subj.cat30) += 1.0;
      }

      // 2. Conjugate update of the reverse-transition rows.
      for (int j = 0; j < k; ++j) {
        Eigen::VectorXd conc = transitions.row(j).transpose().array() +
                               spec.transition_concentration;
        rho.row(j) = rdirichlet(chain_rng, conc).transpose();
      }

      // 3. Metropolis sweep over cutpoints and the treatment effect,
      //    conditional on the completed data.
      double lp = posterior(x);
      for (int p = 0; p < dim; ++p) {
        const double old_value = x[p];
        x[p] = old_value + rnorm(chain_rng, 0.0, steps[p].step());
        const double lp_new = posterior(x);
        const bool accept =
            lp_new > kNegInf && std::log(runif(chain_rng)) < lp_new - lp;
        if (accept) lp = lp_new; else x[p] = old_value;
        if (adapting) steps[p].record(accept);
      }
      if (adapting) {
        block.observe(x);
        if (it % 100 == 99) block.refresh();
      }
      block.move(x, lp, chain_rng, adapting, posterior);

      if (!adapting) {
        const long row =
            static_cast<long>(chain) * settings.keep + (it - settings.burn_in);
        fit.draws.draws.row(row).head(dim) = x.transpose();
        for (int j = 0; j < k; ++j) {
          fit.draws.draws.row(row).segment(dim + j * k, k) = rho.row(j);
        }
        for (int i = 0; i < n_partial; ++i) {
          fit.imputed_cat90(row, i) = imputed[i];
        }
        theta_by_chain(it - settings.burn_in, chain) = x[n_cut];
      }
    }
  }

  const double sign =
      (direction == CategoryDirection::lower_is_better) ? 1.0 : -1.0;
  const Eigen::VectorXd thetas = fit.draws.draws.col(n_cut);
  fit.prob_benefit = (sign * thetas.array() > 0.0).cast<double>().mean();
  fit.theta_mean = thetas.mean();
  fit.theta_variance = sample_variance(thetas);
  fit.rhat_theta = split_rhat(theta_by_chain);
  fit.converged = fit.rhat_theta < 1.05;
  return fit;
}

}  // namespace ppsim
