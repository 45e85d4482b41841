#pragma once

#include <stdexcept>

namespace ppsim {

// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any quantile
// transform so extreme simulated interims stay finite.
inline constexpr double kProbEps = 1e-12;

double clamp_probability(double p);

// Ratio of interim to final statistical information, strictly inside (0, 1).
// Values outside the open interval are a modeling bug in the caller, so
// construction throws rather than clamping.
class InformationFraction {
 public:
  explicit InformationFraction(double r);
  static InformationFraction from_counts(double interim_info,
                                         double final_info);
  double value() const { return r_; }

 private:
  double r_;
};

enum class EvidenceKind { frequentist, bayesian };

// One interim's strength of evidence: a one-sided p-value or a posterior
// probability of superiority, strictly inside (0, 1) after clamping.
struct InterimEvidence {
  EvidenceKind kind;
  double value;

  static InterimEvidence p_value(double p);
  static InterimEvidence posterior_probability(double prob);
};

enum class CriterionKind { alpha_level, posterior_threshold };

// Final-analysis success rule: a one-sided alpha level or a posterior
// superiority threshold.
struct SuccessCriterion {
  CriterionKind kind;
  double value;

  static SuccessCriterion alpha_level(double alpha);
  static SuccessCriterion posterior_threshold(double eta);
};

// Standardized interim statistic plus interim/final information levels under
// the canonical group-sequential model.
struct CanonicalState {
  double z;            // standardized interim test statistic
  double info_interim; // I_n, endpoint-specific units
  double info_final;   // I_N, same units; must exceed info_interim

  CanonicalState(double z_n, double interim, double final_info);
};

struct GaussianMoments {
  double mean;
  double variance;
};

// Predictive probability that a one-sided level-alpha test succeeds at the
// final analysis, given the interim p-value and information fraction.
double approx_pp(double p_n, InformationFraction r, double alpha);

// Bayesian form: interim posterior probability of superiority against a
// final superiority threshold eta.
double approx_pp_bayes(double posterior_prob, InformationFraction r,
                       double eta);

// Dispatch on the evidence/criterion pairing (p-value with alpha, posterior
// probability with eta).
double approx_pp(const InterimEvidence& evidence, InformationFraction r,
                 const SuccessCriterion& criterion);

// The p-value whose approximate predictive probability equals target_pp;
// inverse of approx_pp in its first argument.
double invert_pp(double target_pp, InformationFraction r, double alpha);

// Information fraction at which equivocal data (p_n = 0.5) first drop below
// the given futility threshold. Defined for thresholds in (0, 0.5).
InformationFraction futility_onset(double threshold, double alpha);

// Flat-prior posterior for the standardized effect given the interim.
GaussianMoments posterior_given_interim(const CanonicalState& state);

// Predictive distribution of the statistic formed by the not-yet-observed
// data; the analytic oracle for imputation-equivalence tests.
GaussianMoments predictive_of_remaining(const CanonicalState& state);

}  // namespace ppsim
