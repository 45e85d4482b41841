#pragma once

#include <optional>
#include <span>

namespace ppsim {

enum class EndpointKind { continuous, dichotomous, time_to_event, ordinal, count };

// How information is counted for an endpoint: sample size for continuous,
// dichotomous and ordinal analyses, events for time-to-event, exposure for
// count endpoints. final_count empty means "to be projected".
struct InformationSpec {
  EndpointKind endpoint;
  double interim_count = 0.0;
  std::optional<double> final_count;
};

struct InformationPair {
  double interim;
  double final;
};

// Information levels for the endpoint. Pure lookup plus validation; callers
// with a projected final analysis must project before calling.
InformationPair nominal_information(const InformationSpec& spec);

// Information of an analysis whose level is unknown, inferred from the
// variance ratio against a reference analysis with known information.
double effective_information(double reference_variance, double target_variance,
                             double reference_information);

struct BorrowedObservations {
  double value;   // estimated information minus current completers
  bool clamped;   // true if a negative raw difference was clamped to zero
};

// Observations borrowed beyond the n completers, per the effective-sample
// size reading of the estimated information.
BorrowedObservations borrowed_observations(double estimated_information,
                                           double current_completers);

// One enrolled (or hypothetical future) subject as seen by the event
// projection: when they entered, and whether their event already happened.
struct EnrolledSubject {
  double accrual_time = 0.0;
  bool event_observed = false;
};

struct EventProjection {
  double raw;        // expected final event count, unrounded
  double rounded;    // reporting value; exceeds interim_events whenever any
                     // follow-up remains
  bool fallback_hazard;  // true when a zero-event interim used the design guess
};

// Expected event count at full follow-up under a pooled exponential hazard
// fit to the interim. Subjects with events contribute nothing further;
// everyone else contributes the probability of an event within their
// remaining follow-up. Subjects accruing after analysis_time count as fully
// unobserved (used to extend the projection to a larger enrollment).
EventProjection project_final_events(long interim_events,
                                     double interim_exposure,
                                     std::span<const EnrolledSubject> enrolled,
                                     double follow_up_cap, double analysis_time,
                                     double design_hazard_guess);

}  // namespace ppsim
