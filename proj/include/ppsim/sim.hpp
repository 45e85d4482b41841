#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ppsim/design.hpp"
#include "ppsim/ipp.hpp"

namespace ppsim {

struct MethodTimings {
  std::map<PpMethod, double> seconds;

  void add(PpMethod m, double s) { seconds[m] += s; }
  void merge(const MethodTimings& other) {
    for (const auto& [m, s] : other.seconds) seconds[m] += s;
  }
};

// One virtual trial, fully determined by (design, scenario, seed). The full
// accrual path is generated up front and decisions per method are derived
// from the recorded predictive probabilities, so every configured method's
// stopping behaviour is observable from a single run.
TrialResult simulate_trial(const DesignSpec& design,
                           const ScenarioSpec& scenario, std::uint64_t seed,
                           MethodTimings* timings = nullptr);

struct BatchResult {
  BatchSummary summary;
  std::vector<TrialResult> trials;
  MethodTimings timings;
};

// Runs n_sims independent trials with per-trial seeds derive_seed(master,
// index). Output is independent of the parallelism degree: trials write to
// their own slots and summaries aggregate by index.
BatchResult run_batch(const DesignSpec& design, const ScenarioSpec& scenario,
                      long n_sims, std::uint64_t master_seed, int parallelism);

BatchSummary summarize(const DesignSpec& design,
                       std::span<const TrialResult> trials);

// Agreement fraction of paired predictive probabilities at each threshold:
// how often (first > t) == (second > t).
std::vector<double> concordance_curve(
    std::span<const std::pair<double, double>> pp_pairs,
    std::span<const double> thresholds);

}  // namespace ppsim
