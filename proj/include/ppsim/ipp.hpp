#pragma once

#include <memory>
#include <vector>

#include "ppsim/design.hpp"
#include "ppsim/pp_core.hpp"

namespace ppsim {

enum class IppTarget { current_n, n_max };

struct IppResult {
  double value = 0.0;
  double mc_se = 0.0;  // binomial Monte Carlo standard error
  long flagged = 0;    // imputations whose final analysis was degenerate
};

// Randomization sequence shared by trial generation and imputation:
// alternating blocks of two for exact 1:1.
inline int arm_of(long patient_index) {
  return static_cast<int>(patient_index % 2);
}

// Everything the imputation needs about one interim, independent of how the
// data were produced. Only the fields for the design's endpoint are used.
struct TrialSnapshot {
  long enrolled = 0;
  double follow_up_cap = 0.0;

  // dichotomous
  DichotomousData binary_completers;
  long binary_pending_control = 0;
  long binary_pending_treatment = 0;

  // time-to-event: every enrolled subject's observation so far plus the
  // follow-up they still have ahead of them (zero after an event or a
  // completed cap)
  std::vector<SurvivalSubject> tte_observed;
  std::vector<double> tte_remaining;

  // ordinal
  OrdinalCounts ordinal_completers{2};
  long ordinal_pending_control = 0;
  long ordinal_pending_treatment = 0;

  // longitudinal extras: completer transition table, 30-day-only subjects,
  // and enrolled subjects with no visit yet
  Eigen::MatrixXd completer_transitions;
  std::vector<PartialSubject> partials;
  long nodata_control = 0;
  long nodata_treatment = 0;

  // borrowing extras
  OrdinalCounts external{2};

  // interim model fits shared with the approximate methods
  std::shared_ptr<const BorrowingFit> borrowing_fit;
  std::shared_ptr<const LongitudinalFit> longitudinal_fit;
};

// Monte Carlo imputed predictive probability: for each imputation, draw
// parameters from the interim posterior, complete the dataset to the target
// sample size, rerun the design's final analysis, and count successes.
// Iterations use index-derived RNG substreams, so the result is independent
// of evaluation order.
IppResult imputed_pp(const TrialSnapshot& snapshot, const DesignSpec& design,
                     IppTarget target, long n_imputations, Rng& rng);

// Monte Carlo success fraction under the exact canonical Gaussian model;
// the analytic oracle companion of approx_pp.
double gaussian_ipp(const CanonicalState& state, double alpha, long n_draws,
                    Rng& rng);

}  // namespace ppsim
