#include "ppsim/info_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppsim {

InformationPair nominal_information(const InformationSpec& spec) {
  if (!spec.final_count.has_value()) {
    throw std::domain_error(
        "final information must be projected before use");
  }
  const double interim = spec.interim_count;
  const double final_info = *spec.final_count;
  if (!(interim >= 0.0)) {
    throw std::domain_error("interim information must be non-negative");
  }
  if (!(final_info > 0.0)) {
    throw std::domain_error("final information must be positive");
  }
  if (!(interim < final_info)) {
    throw std::domain_error(
        "interim information must be strictly below final information");
  }
  return {interim, final_info};
}

double effective_information(double reference_variance, double target_variance,
                             double reference_information) {
  if (!(reference_variance > 0.0) || !(target_variance > 0.0)) {
    throw std::domain_error("variances must be positive");
  }
  if (!(reference_information > 0.0)) {
    throw std::domain_error("reference information must be positive");
  }
  return reference_variance / target_variance * reference_information;
}

BorrowedObservations borrowed_observations(double estimated_information,
                                           double current_completers) {
  if (!(estimated_information >= 0.0)) {
    throw std::domain_error("estimated information must be non-negative");
  }
  const double raw = estimated_information - current_completers;
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

EventProjection project_final_events(long interim_events,
                                     double interim_exposure,
                                     std::span<const EnrolledSubject> enrolled,
                                     double follow_up_cap, double analysis_time,
                                     double design_hazard_guess) {
  if (interim_events < 0) {
    throw std::domain_error("interim event count must be non-negative");
  }
  if (!(follow_up_cap > 0.0)) {
    throw std::domain_error("follow-up cap must be positive");
  }

  bool fallback = false;
  double hazard;
  if (interim_events >= 1) {
    if (!(interim_exposure > 0.0)) {
      throw std::domain_error("interim exposure must be positive");
    }
    hazard = static_cast<double>(interim_events) / interim_exposure;
  } else {
    if (!(design_hazard_guess > 0.0)) {
      throw std::domain_error(
          "zero-event interim needs a positive design hazard guess");
    }
    hazard = design_hazard_guess;
    fallback = true;
  }

  double expected_additional = 0.0;
  for (const auto& subject : enrolled) {
    if (subject.event_observed) continue;
    const double observed =
        std::clamp(analysis_time - subject.accrual_time, 0.0, follow_up_cap);
    const double remaining = follow_up_cap - observed;
    if (remaining <= 0.0) continue;
    expected_additional += 1.0 - std::exp(-hazard * remaining);
  }

  const double raw = static_cast<double>(interim_events) + expected_additional;
  double rounded;
  if (expected_additional <= 0.0) {
    rounded = static_cast<double>(interim_events);
  } else {
    // Round for reporting but keep the total strictly above the interim
    // count so the information fraction stays below one.
    rounded = std::max(static_cast<double>(interim_events) + 1.0,
                       std::round(raw));
  }
  return {raw, rounded, fallback};
}

}  // namespace ppsim
