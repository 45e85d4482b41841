#include "ppsim/pp_core.hpp"

#include <algorithm>
#include <cmath>

#include "ppsim/normal.hpp"

namespace ppsim {

double clamp_probability(double p) {
  if (std::isnan(p)) throw std::domain_error("probability is NaN");
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

namespace {
double checked_probability(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(std::string(name) + " must be in (0, 1)");
  }
  return clamp_probability(p);
}
}  // namespace

InformationFraction::InformationFraction(double r) : r_(r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::domain_error("information fraction must be in (0, 1)");
  }
}

InformationFraction InformationFraction::from_counts(double interim_info,
                                                     double final_info) {
  if (!(interim_info > 0.0) || !(final_info > interim_info)) {
    throw std::domain_error(
        "information counts must satisfy 0 < interim < final");
  }
  return InformationFraction(interim_info / final_info);
}

InterimEvidence InterimEvidence::p_value(double p) {
  return {EvidenceKind::frequentist, checked_probability(p, "p-value")};
}

InterimEvidence InterimEvidence::posterior_probability(double prob) {
  return {EvidenceKind::bayesian,
          checked_probability(prob, "posterior probability")};
}

SuccessCriterion SuccessCriterion::alpha_level(double alpha) {
  return {CriterionKind::alpha_level, checked_probability(alpha, "alpha")};
}

SuccessCriterion SuccessCriterion::posterior_threshold(double eta) {
  return {CriterionKind::posterior_threshold, checked_probability(eta, "eta")};
}

CanonicalState::CanonicalState(double z_n, double interim, double final_info)
    : z(z_n), info_interim(interim), info_final(final_info) {
  if (!(interim > 0.0 && final_info > interim)) {
    throw std::domain_error("canonical state requires 0 < I_n < I_N");
  }
}

double approx_pp(double p_n, InformationFraction r, double alpha) {
  p_n = checked_probability(p_n, "p_n");
  alpha = checked_probability(alpha, "alpha");
  const double rv = r.value();
  const double num =
      normal_quantile(1.0 - p_n) - normal_quantile(1.0 - alpha) * std::sqrt(rv);
  return normal_cdf(num / std::sqrt(1.0 - rv));
}

double approx_pp_bayes(double posterior_prob, InformationFraction r,
                       double eta) {
  posterior_prob = checked_probability(posterior_prob, "posterior probability");
  eta = checked_probability(eta, "eta");
  const double rv = r.value();
  const double num =
      normal_quantile(posterior_prob) - normal_quantile(eta) * std::sqrt(rv);
  return normal_cdf(num / std::sqrt(1.0 - rv));
}

double approx_pp(const InterimEvidence& evidence, InformationFraction r,
                 const SuccessCriterion& criterion) {
  if (evidence.kind == EvidenceKind::frequentist) {
    if (criterion.kind != CriterionKind::alpha_level) {
      throw std::domain_error("p-value evidence requires an alpha level");
    }
    return approx_pp(evidence.value, r, criterion.value);
  }
  if (criterion.kind != CriterionKind::posterior_threshold) {
    throw std::domain_error(
        "posterior evidence requires a posterior threshold");
  }
  return approx_pp_bayes(evidence.value, r, criterion.value);
}

double invert_pp(double target_pp, InformationFraction r, double alpha) {
  target_pp = checked_probability(target_pp, "target_pp");
  alpha = checked_probability(alpha, "alpha");
  const double rv = r.value();
  const double z = normal_quantile(target_pp) * std::sqrt(1.0 - rv) +
                   normal_quantile(1.0 - alpha) * std::sqrt(rv);
  return 1.0 - normal_cdf(z);
}

InformationFraction futility_onset(double threshold, double alpha) {
  alpha = checked_probability(alpha, "alpha");
  if (!(threshold > 0.0 && threshold < 0.5)) {
    // Equivocal data never reach a predictive probability of 0.5 or more
    // when alpha < 0.5, so the onset is undefined there.
    throw std::domain_error("futility threshold must be in (0, 0.5)");
  }
  const double q = normal_quantile(1.0 - threshold) /
                   normal_quantile(1.0 - alpha);
  return InformationFraction(q * q / (1.0 + q * q));
}

GaussianMoments posterior_given_interim(const CanonicalState& state) {
  return {state.z / std::sqrt(state.info_interim), 1.0 / state.info_interim};
}

GaussianMoments predictive_of_remaining(const CanonicalState& state) {
  const double remaining = state.info_final - state.info_interim;
  return {state.z * std::sqrt(remaining / state.info_interim),
          state.info_final / state.info_interim};
}

}  // namespace ppsim
