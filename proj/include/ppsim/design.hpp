#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ppsim/info_model.hpp"
#include "ppsim/mcmc.hpp"
#include "ppsim/pp_core.hpp"

namespace ppsim {

enum class PpMethod { npp, epp, ipp };
enum class AnalysisModel { frequentist, borrowing, longitudinal };
enum class Decision { continue_enrollment, stop_success, stop_futility };

std::string to_string(PpMethod method);
std::string to_string(Decision decision);
std::optional<PpMethod> pp_method_from_string(const std::string& name);

// A Goldilocks design: enrollment-triggered interims, stop for expected
// success when PP_N exceeds the success threshold, stop for futility when
// PP_max falls below the futility threshold (both strict).
struct DesignSpec {
  EndpointKind endpoint = EndpointKind::dichotomous;
  AnalysisModel analysis = AnalysisModel::frequentist;
  long n_max = 0;
  std::vector<long> interims;
  double success_threshold = 0.90;
  double futility_threshold = 0.05;
  double alpha = 0.025;  // one-sided final test level (frequentist analyses)
  double eta = 0.975;    // posterior superiority threshold (Bayesian analyses)
  double follow_up = 0.0;     // readout delay / follow-up cap, in accrual time units
  double follow_up_30 = 0.0;  // early-visit delay (longitudinal designs)
  BenefitDirection binary_direction = BenefitDirection::fewer_events;
  CategoryDirection ordinal_direction = CategoryDirection::lower_is_better;
  // Design-assumed event probability over the follow-up window; only used
  // when a zero-event interim leaves the hazard unidentified.
  double assumed_event_prob = 0.3;
  std::vector<PpMethod> methods = {PpMethod::npp, PpMethod::ipp};
  // Which method's decisions drive the official trial path; the others are
  // recorded as shadows. Empty = record-only (no adaptive stopping).
  std::optional<PpMethod> decision_method;
  long n_imputations = 1000;
  McmcSettings mcmc;                        // interim fits
  McmcSettings refit_mcmc{2, 200, 200};     // per-imputation refits
  BorrowingModelSpec borrowing;
  LongitudinalModelSpec longitudinal;

  bool final_is_bayesian() const { return analysis != AnalysisModel::frequentist; }
  bool has_method(PpMethod m) const;
  void validate() const;
};

// Data-generating truth for one scenario.
struct ScenarioSpec {
  double accrual_rate = 0.0;  // patients per time unit
  bool poisson_accrual = false;
  // dichotomous endpoint: probability of the tracked outcome per arm
  double control_event_prob = 0.5;
  double treatment_event_prob = 0.5;
  // time-to-event: control event probability within the follow-up cap and
  // the treatment hazard ratio
  double control_event_prob_at_cap = 0.3;
  double hazard_ratio = 1.0;
  // ordinal: control category distribution and the proportional odds ratio
  // (OR > 1 shifts treatment mass toward lower categories)
  Eigen::VectorXd control_simplex;
  double odds_ratio = 1.0;
  // 30-day category given the 90-day category, used to generate early visits
  Eigen::MatrixXd transition;
  // external cohort for borrowing designs
  long external_n = 0;
  double external_odds_ratio = 1.0;
  Eigen::VectorXd external_control_simplex;

  void validate(const DesignSpec& design) const;
};

// Internal property-test default, not a value from any study:
// (0.35, 0.25, 0.15, 0.10, 0.10, 0.05).
Eigen::VectorXd default_control_simplex();

// 60% diagonal mass, remainder spread geometrically to neighbors.
Eigen::MatrixXd default_transition_matrix(int n_categories);

// Treatment simplex implied by a proportional odds ratio on the cumulative
// scale: odds_t(Y <= j) = or * odds_c(Y <= j).
Eigen::VectorXd apply_odds_ratio(const Eigen::VectorXd& simplex,
                                 double odds_ratio);

struct MethodInterimRecord {
  double pp_n = 0.0;
  double pp_max = 0.0;
  Decision decision = Decision::continue_enrollment;
  double ipp_se = 0.0;     // binomial Monte Carlo SE (iPP only)
  long flagged = 0;        // imputations with degenerate final analyses
};

struct InterimRecord {
  int index = 0;
  double time = 0.0;
  long enrolled = 0;
  long completers = 0;  // subjects contributing full information
  double info_n = 0.0;
  double info_current_n = 0.0;  // final information if enrollment stopped now
  double info_max = 0.0;        // final information at N_max
  double info_estimated = 0.0;  // effective information (ePP designs, else 0)
  EvidenceKind evidence_kind = EvidenceKind::frequentist;
  double evidence = 0.5;
  bool evidence_degenerate = false;
  std::map<PpMethod, MethodInterimRecord> by_method;
};

struct MethodOutcome {
  int stop_interim = -1;  // -1: ran to N_max
  Decision stop_reason = Decision::continue_enrollment;
  long final_n = 0;
  bool final_ran = false;
  bool final_success = false;
  double final_stat = 0.0;  // final p-value or posterior probability
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<InterimRecord> interims;
  std::map<PpMethod, MethodOutcome> outcomes;
};

struct MethodInterimSummary {
  double stop_success = 0.0;
  double stop_futility = 0.0;
  // Decision agreement with the imputed method at this interim, and mean
  // absolute PP differences (only populated when iPP was recorded).
  double agreement_vs_ipp = 1.0;
  double mean_abs_diff_pp_n = 0.0;
  double mean_abs_diff_pp_max = 0.0;
};

struct BatchSummary {
  long n_sims = 0;
  std::map<PpMethod, std::vector<MethodInterimSummary>> by_method;
  std::map<PpMethod, double> total_stop_prob;
  std::map<PpMethod, double> success_prob;  // trial ends in declared success
};

}  // namespace ppsim
