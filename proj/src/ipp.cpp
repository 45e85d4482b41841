#include "ppsim/ipp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppsim/normal.hpp"

namespace ppsim {

namespace {

struct FutureArms {
  long control = 0;
  long treatment = 0;
};

FutureArms future_arms(long enrolled, long n_max) {
  FutureArms out;
  for (long g = enrolled; g < n_max; ++g) {
    (arm_of(g) == 0 ? out.control : out.treatment)++;
  }
  return out;
}

double binomial_se(double p, long n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

IppResult impute_dichotomous(const TrialSnapshot& snap,
                             const DesignSpec& design, IppTarget target,
                             long n_imp, Rng& rng) {
  const auto posterior = sample_posterior_dichotomous(
      snap.binary_completers, BetaPrior{}, BetaPrior{}, n_imp, rng);
  const FutureArms future = (target == IppTarget::n_max)
                                ? future_arms(snap.enrolled, design.n_max)
                                : FutureArms{};

  const long miss_c = snap.binary_pending_control + future.control;
  const long miss_t = snap.binary_pending_treatment + future.treatment;
  const std::uint64_t stream_seed = rng();

  long successes = 0, flagged = 0;
  for (long it = 0; it < n_imp; ++it) {
    Rng iter_rng = make_rng(derive_seed(stream_seed, it));
    const double p_c = posterior.draws(it, 0);
    const double p_t = posterior.draws(it, 1);
    DichotomousData full = snap.binary_completers;
    full.control.events += rbinom(iter_rng, miss_c, p_c);
    full.control.total += miss_c;
    full.treatment.events += rbinom(iter_rng, miss_t, p_t);
    full.treatment.total += miss_t;
    const TestResult res = two_prop_ztest(full, design.binary_direction);
    if (res.degenerate) ++flagged;
    if (!res.degenerate && res.p_one_sided < design.alpha) ++successes;
  }
  const double ipp = static_cast<double>(successes) / n_imp;
  return {ipp, binomial_se(ipp, n_imp), flagged};
}

IppResult impute_tte(const TrialSnapshot& snap, const DesignSpec& design,
                     IppTarget target, long n_imp, Rng& rng) {
  SurvivalSummary summary;
  for (std::size_t i = 0; i < snap.tte_observed.size(); ++i) {
    const auto& s = snap.tte_observed[i];
    if (s.arm == 1) {
      summary.exposure_treatment += s.time;
      if (s.event) ++summary.events_treatment;
    } else {
      summary.exposure_control += s.time;
      if (s.event) ++summary.events_control;
    }
  }
  const auto posterior =
      sample_posterior_tte(summary, GammaPrior{}, n_imp, rng);
  const FutureArms future = (target == IppTarget::n_max)
                                ? future_arms(snap.enrolled, design.n_max)
                                : FutureArms{};
  const double cap = snap.follow_up_cap;
  const std::uint64_t stream_seed = rng();

  std::vector<SurvivalSubject> full;
  long successes = 0, flagged = 0;
  for (long it = 0; it < n_imp; ++it) {
    Rng iter_rng = make_rng(derive_seed(stream_seed, it));
    const double hazard_c = posterior.draws(it, 0);
    const double hazard_t = posterior.draws(it, 1);
    full.clear();
    full.reserve(snap.tte_observed.size() + future.control +
                 future.treatment);
    for (std::size_t i = 0; i < snap.tte_observed.size(); ++i) {
      SurvivalSubject s = snap.tte_observed[i];
      const double remaining = snap.tte_remaining[i];
      if (!s.event && remaining > 0.0) {
        const double hazard = (s.arm == 1) ? hazard_t : hazard_c;
        // Memoryless completion of the censored observation.
        const double extra =
            hazard > 0.0 ? rexp_rate(iter_rng, hazard)
                         : std::numeric_limits<double>::infinity();
        if (extra <= remaining) {
          s.time += extra;
          s.event = true;
        } else {
          s.time += remaining;
        }
      }
      full.push_back(s);
    }
    auto add_future = [&](int arm, long count) {
      const double hazard = (arm == 1) ? hazard_t : hazard_c;
      for (long i = 0; i < count; ++i) {
        const double t = hazard > 0.0
                             ? rexp_rate(iter_rng, hazard)
                             : std::numeric_limits<double>::infinity();
        full.push_back({arm, std::min(t, cap), t <= cap});
      }
    };
    add_future(0, future.control);
    add_future(1, future.treatment);

    const TestResult res = logrank_test(full);
    if (res.degenerate) ++flagged;
    if (!res.degenerate && res.p_one_sided < design.alpha) ++successes;
  }
  const double ipp = static_cast<double>(successes) / n_imp;
  return {ipp, binomial_se(ipp, n_imp), flagged};
}

void add_categorical_counts(Rng& rng, const Eigen::VectorXd& probs, long n,
                            int arm, OrdinalCounts& counts) {
  const int k = static_cast<int>(probs.size());
  std::vector<double> weights(probs.data(), probs.data() + k);
  for (long i = 0; i < n; ++i) {
    counts.add(arm, rcategorical(rng, weights));
  }
}

IppResult impute_ordinal(const TrialSnapshot& snap, const DesignSpec& design,
                         IppTarget target, long n_imp, Rng& rng) {
  const int k = snap.ordinal_completers.n_categories();
  const Eigen::VectorXd concentration =
      Eigen::VectorXd::Constant(k, 1.0 / k);
  const auto posterior = sample_posterior_ordinal(snap.ordinal_completers,
                                                  concentration, n_imp, rng);
  const FutureArms future = (target == IppTarget::n_max)
                                ? future_arms(snap.enrolled, design.n_max)
                                : FutureArms{};
  const long miss_c = snap.ordinal_pending_control + future.control;
  const long miss_t = snap.ordinal_pending_treatment + future.treatment;
  const std::uint64_t stream_seed = rng();

  long successes = 0, flagged = 0;
  for (long it = 0; it < n_imp; ++it) {
    Rng iter_rng = make_rng(derive_seed(stream_seed, it));
    OrdinalCounts full = snap.ordinal_completers;
    add_categorical_counts(iter_rng, posterior.draws.row(it).head(k), miss_c,
                           0, full);
    add_categorical_counts(iter_rng, posterior.draws.row(it).tail(k), miss_t,
                           1, full);
    const PropOddsResult res =
        prop_odds_test(full, design.ordinal_direction);
    if (res.degenerate) ++flagged;
    if (!res.degenerate && res.p_one_sided < design.alpha) ++successes;
  }
  const double ipp = static_cast<double>(successes) / n_imp;
  return {ipp, binomial_se(ipp, n_imp), flagged};
}

// Evenly spaced row indices so a shortened imputation pass still spans the
// whole posterior.
long subsample_row(long it, long n_imp, long kept) {
  if (kept >= n_imp) return (it * kept) / n_imp;
  return it % kept;
}

IppResult impute_borrowing(const TrialSnapshot& snap, const DesignSpec& design,
                           IppTarget target, long n_imp, Rng& rng) {
  if (!snap.borrowing_fit) {
    throw std::runtime_error("imputed_pp: borrowing fit missing from snapshot");
  }
  const BorrowingFit& fit = *snap.borrowing_fit;
  const int n_cut = fit.n_cutpoints();
  const FutureArms future = (target == IppTarget::n_max)
                                ? future_arms(snap.enrolled, design.n_max)
                                : FutureArms{};
  const long miss_c = snap.ordinal_pending_control + future.control;
  const long miss_t = snap.ordinal_pending_treatment + future.treatment;
  const long kept = fit.draws.n_draws();
  const std::uint64_t stream_seed = rng();

  long successes = 0, flagged = 0;
  for (long it = 0; it < n_imp; ++it) {
    Rng iter_rng = make_rng(derive_seed(stream_seed, it));
    const long row = subsample_row(it, n_imp, kept);
    const Eigen::VectorXd cut = fit.draws.draws.row(row).head(n_cut);
    const double theta_trial = fit.draws.draws(row, n_cut + 1);

    OrdinalCounts full = snap.ordinal_completers;
    add_categorical_counts(iter_rng, ordinal_probabilities(cut, 0.0), miss_c,
                           0, full);
    add_categorical_counts(iter_rng, ordinal_probabilities(cut, theta_trial),
                           miss_t, 1, full);

    const BorrowingFit refit =
        fit_borrowing_model(full, snap.external, design.borrowing,
                            design.ordinal_direction, design.refit_mcmc,
                            iter_rng);
    if (!refit.converged) ++flagged;
    if (refit.prob_benefit > design.eta) ++successes;
  }
  const double ipp = static_cast<double>(successes) / n_imp;
  return {ipp, binomial_se(ipp, n_imp), flagged};
}

IppResult impute_longitudinal(const TrialSnapshot& snap,
                              const DesignSpec& design, IppTarget target,
                              long n_imp, Rng& rng) {
  if (!snap.longitudinal_fit) {
    throw std::runtime_error(
        "imputed_pp: longitudinal fit missing from snapshot");
  }
  const LongitudinalFit& fit = *snap.longitudinal_fit;
  const int k = snap.ordinal_completers.n_categories();
  const int n_cut = k - 1;
  const FutureArms future = (target == IppTarget::n_max)
                                ? future_arms(snap.enrolled, design.n_max)
                                : FutureArms{};
  const long kept = fit.draws.n_draws();
  const std::uint64_t stream_seed = rng();

  long successes = 0, flagged = 0;
  for (long it = 0; it < n_imp; ++it) {
    Rng iter_rng = make_rng(derive_seed(stream_seed, it));
    const long row = subsample_row(it, n_imp, kept);
    const Eigen::VectorXd cut = fit.draws.draws.row(row).head(n_cut);
    const double theta = fit.draws.draws(row, n_cut);

    OrdinalCounts full = snap.ordinal_completers;
    // Partial subjects take the chain's own imputation at this draw; it
    // already conditions on their 30-day outcome.
    for (std::size_t i = 0; i < snap.partials.size(); ++i) {
      full.add(snap.partials[i].arm, fit.imputed_cat90(row, i));
    }
    const Eigen::VectorXd probs_c = ordinal_probabilities(cut, 0.0);
    const Eigen::VectorXd probs_t = ordinal_probabilities(cut, theta);
    add_categorical_counts(iter_rng, probs_c,
                           snap.nodata_control + future.control, 0, full);
    add_categorical_counts(iter_rng, probs_t,
                           snap.nodata_treatment + future.treatment, 1, full);

    const OrdinalRegressionFit refit = fit_ordinal_regression(
        full, design.longitudinal.regression, design.ordinal_direction,
        design.refit_mcmc, iter_rng);
    if (!refit.converged) ++flagged;
    if (refit.prob_benefit > design.eta) ++successes;
  }
  const double ipp = static_cast<double>(successes) / n_imp;
  return {ipp, binomial_se(ipp, n_imp), flagged};
}

}  // namespace

IppResult imputed_pp(const TrialSnapshot& snapshot, const DesignSpec& design,
                     IppTarget target, long n_imputations, Rng& rng) {
  if (n_imputations < 100) {
    throw std::domain_error("imputed_pp: n_imputations must be >= 100");
  }
  switch (design.analysis) {
    case AnalysisModel::borrowing:
      return impute_borrowing(snapshot, design, target, n_imputations, rng);
    case AnalysisModel::longitudinal:
      return impute_longitudinal(snapshot, design, target, n_imputations, rng);
    case AnalysisModel::frequentist:
      break;
  }
  switch (design.endpoint) {
    case EndpointKind::dichotomous:
      return impute_dichotomous(snapshot, design, target, n_imputations, rng);
    case EndpointKind::time_to_event:
      return impute_tte(snapshot, design, target, n_imputations, rng);
    case EndpointKind::ordinal:
      return impute_ordinal(snapshot, design, target, n_imputations, rng);
    default:
      throw std::domain_error("imputed_pp: unsupported endpoint");
  }
}

double gaussian_ipp(const CanonicalState& state, double alpha, long n_draws,
                    Rng& rng) {
  if (n_draws < 1) throw std::domain_error("gaussian_ipp: n_draws must be >= 1");
  const double z_crit = normal_quantile(1.0 - alpha);
  const double sqrt_in = std::sqrt(state.info_interim);
  const double sqrt_rem = std::sqrt(state.info_final - state.info_interim);
  const double sqrt_fin = std::sqrt(state.info_final);
  const GaussianMoments post = posterior_given_interim(state);

  long successes = 0;
  for (long i = 0; i < n_draws; ++i) {
    const double theta = rnorm(rng, post.mean, std::sqrt(post.variance));
    const double z_remaining = rnorm(rng, theta * sqrt_rem, 1.0);
    const double z_final =
        (state.z * sqrt_in + z_remaining * sqrt_rem) / sqrt_fin;
    if (z_final > z_crit) ++successes;
  }
  return static_cast<double>(successes) / n_draws;
}

}  // namespace ppsim
