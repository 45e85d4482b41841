#include "ppsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "ppsim/info_model.hpp"

namespace ppsim {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct GeneratedTrial {
  int n_categories = 0;
  std::vector<double> accrual;
  std::vector<int> arm;
  std::vector<int> binary;
  std::vector<double> event_time;
  std::vector<int> cat90;
  std::vector<int> cat30;
  OrdinalCounts external{2};
  double hazard_control = 0.0;
};

GeneratedTrial generate(const DesignSpec& design, const ScenarioSpec& scenario,
                        Rng& rng) {
  GeneratedTrial out;
  const long n = design.n_max;
  out.accrual.resize(n);
  out.arm.resize(n);
  double t = 0.0;
  for (long g = 0; g < n; ++g) {
    t = scenario.poisson_accrual
            ? t + rexp_rate(rng, scenario.accrual_rate)
            : static_cast<double>(g + 1) / scenario.accrual_rate;
    out.accrual[g] = t;
    out.arm[g] = arm_of(g);
  }

  switch (design.endpoint) {
    case EndpointKind::dichotomous: {
      out.binary.resize(n);
      for (long g = 0; g < n; ++g) {
        const double p = out.arm[g] == 1 ? scenario.treatment_event_prob
                                         : scenario.control_event_prob;
        out.binary[g] = runif(rng) < p ? 1 : 0;
      }
      break;
    }
    case EndpointKind::time_to_event: {
      out.event_time.resize(n);
      out.hazard_control =
          -std::log1p(-scenario.control_event_prob_at_cap) / design.follow_up;
      const double hazard_t = out.hazard_control * scenario.hazard_ratio;
      for (long g = 0; g < n; ++g) {
        const double hazard = out.arm[g] == 1 ? hazard_t : out.hazard_control;
        out.event_time[g] = rexp_rate(rng, hazard);
      }
      break;
    }
    case EndpointKind::ordinal: {
      const int k = static_cast<int>(scenario.control_simplex.size());
      out.n_categories = k;
      const Eigen::VectorXd treat =
          apply_odds_ratio(scenario.control_simplex, scenario.odds_ratio);
      std::vector<double> wc(scenario.control_simplex.data(),
                             scenario.control_simplex.data() + k);
      std::vector<double> wt(treat.data(), treat.data() + k);
      const bool with_30day = scenario.transition.rows() == k;
      out.cat90.resize(n);
      if (with_30day) out.cat30.resize(n);
      std::vector<double> row(k);
      for (long g = 0; g < n; ++g) {
        const auto& w = out.arm[g] == 1 ? wt : wc;
        const int c90 = rcategorical(rng, w);
        out.cat90[g] = c90;
        if (with_30day) {
          for (int i = 0; i < k; ++i) row[i] = scenario.transition(c90, i);
          out.cat30[g] = rcategorical(rng, row);
        }
      }
      if (design.analysis == AnalysisModel::borrowing) {
        const Eigen::VectorXd ext_control =
            scenario.external_control_simplex.size() > 0
                ? scenario.external_control_simplex
                : scenario.control_simplex;
        const Eigen::VectorXd ext_treat =
            apply_odds_ratio(ext_control, scenario.external_odds_ratio);
        std::vector<double> ewc(ext_control.data(), ext_control.data() + k);
        std::vector<double> ewt(ext_treat.data(), ext_treat.data() + k);
        out.external = OrdinalCounts(k);
        for (long g = 0; g < scenario.external_n; ++g) {
          const int arm = arm_of(g);
          out.external.add(arm, rcategorical(rng, arm == 1 ? ewt : ewc));
        }
      }
      break;
    }
    default:
      throw std::domain_error("generate: unsupported endpoint");
  }
  return out;
}

TrialSnapshot make_snapshot(const GeneratedTrial& data,
                            const DesignSpec& design, long enrolled,
                            double time) {
  TrialSnapshot snap;
  snap.enrolled = enrolled;
  snap.follow_up_cap = design.follow_up;

  switch (design.endpoint) {
    case EndpointKind::dichotomous: {
      for (long g = 0; g < enrolled; ++g) {
        if (data.accrual[g] + design.follow_up <= time) {
          auto& arm_counts = data.arm[g] == 1
                                 ? snap.binary_completers.treatment
                                 : snap.binary_completers.control;
          arm_counts.total += 1;
          arm_counts.events += data.binary[g];
        } else {
          (data.arm[g] == 1 ? snap.binary_pending_treatment
                            : snap.binary_pending_control)++;
        }
      }
      break;
    }
    case EndpointKind::time_to_event: {
      snap.tte_observed.reserve(enrolled);
      snap.tte_remaining.reserve(enrolled);
      for (long g = 0; g < enrolled; ++g) {
        const double window =
            std::clamp(time - data.accrual[g], 0.0, design.follow_up);
        SurvivalSubject s;
        s.arm = data.arm[g];
        if (data.event_time[g] <= window) {
          s.time = data.event_time[g];
          s.event = true;
          snap.tte_remaining.push_back(0.0);
        } else {
          s.time = window;
          s.event = false;
          snap.tte_remaining.push_back(design.follow_up - window);
        }
        snap.tte_observed.push_back(s);
      }
      break;
    }
    case EndpointKind::ordinal: {
      const int k = data.n_categories;
      snap.ordinal_completers = OrdinalCounts(k);
      snap.external = data.external;
      const bool longitudinal = design.analysis == AnalysisModel::longitudinal;
      if (longitudinal) {
        snap.completer_transitions = Eigen::MatrixXd::Zero(k, k);
      }
      for (long g = 0; g < enrolled; ++g) {
        if (data.accrual[g] + design.follow_up <= time) {
          snap.ordinal_completers.add(data.arm[g], data.cat90[g]);
          if (longitudinal) {
            snap.completer_transitions(data.cat90[g], data.cat30[g]) += 1.0;
          }
        } else if (longitudinal) {
          if (data.accrual[g] + design.follow_up_30 <= time) {
            snap.partials.push_back({data.arm[g], data.cat30[g]});
          } else {
            (data.arm[g] == 1 ? snap.nodata_treatment : snap.nodata_control)++;
          }
        } else {
          (data.arm[g] == 1 ? snap.ordinal_pending_treatment
                            : snap.ordinal_pending_control)++;
        }
      }
      break;
    }
    default:
      break;
  }
  return snap;
}

// Approximate predictive probability with the information boundaries handled
// at the simulation layer: no interim information means PP equals the chance
// the final data alone succeed (the r -> 0 limit), complete information
// means PP is the indicator of current success.
double guarded_pp(EvidenceKind kind, double evidence, double info_n,
                  double info_final, double criterion) {
  if (info_n <= 0.0) {
    return kind == EvidenceKind::frequentist ? 1.0 - evidence : evidence;
  }
  if (info_n >= info_final) {
    const bool success = (kind == EvidenceKind::frequentist)
                             ? evidence < criterion
                             : evidence > criterion;
    if (evidence == criterion) return 0.5;
    return success ? 1.0 : 0.0;
  }
  const auto r = InformationFraction::from_counts(info_n, info_final);
  return kind == EvidenceKind::frequentist
             ? approx_pp(evidence, r, criterion)
             : approx_pp_bayes(evidence, r, criterion);
}

Decision decide(const DesignSpec& design, double pp_n, double pp_max) {
  if (pp_n > design.success_threshold) return Decision::stop_success;
  if (pp_max < design.futility_threshold) return Decision::stop_futility;
  return Decision::continue_enrollment;
}

struct FinalOutcome {
  bool ran = false;
  bool success = false;
  double stat = 0.5;
};

FinalOutcome final_analysis(const GeneratedTrial& data,
                            const DesignSpec& design, long n_final, Rng& rng) {
  FinalOutcome out;
  out.ran = true;
  switch (design.analysis) {
    case AnalysisModel::frequentist: {
      switch (design.endpoint) {
        case EndpointKind::dichotomous: {
          DichotomousData counts;
          for (long g = 0; g < n_final; ++g) {
            auto& arm = data.arm[g] == 1 ? counts.treatment : counts.control;
            arm.total += 1;
            arm.events += data.binary[g];
          }
          const TestResult res =
              two_prop_ztest(counts, design.binary_direction);
          out.stat = res.p_one_sided;
          out.success = !res.degenerate && res.p_one_sided < design.alpha;
          return out;
        }
        case EndpointKind::time_to_event: {
          std::vector<SurvivalSubject> subjects;
          subjects.reserve(n_final);
          for (long g = 0; g < n_final; ++g) {
            const bool event = data.event_time[g] <= design.follow_up;
            subjects.push_back({data.arm[g],
                                event ? data.event_time[g] : design.follow_up,
                                event});
          }
          const TestResult res = logrank_test(subjects);
          out.stat = res.p_one_sided;
          out.success = !res.degenerate && res.p_one_sided < design.alpha;
          return out;
        }
        case EndpointKind::ordinal: {
          OrdinalCounts counts(data.n_categories);
          for (long g = 0; g < n_final; ++g) {
            counts.add(data.arm[g], data.cat90[g]);
          }
          const PropOddsResult res =
              prop_odds_test(counts, design.ordinal_direction);
          out.stat = res.p_one_sided;
          out.success = !res.degenerate && res.p_one_sided < design.alpha;
          return out;
        }
        default:
          throw std::domain_error("final_analysis: unsupported endpoint");
      }
    }
    case AnalysisModel::longitudinal: {
      // All subjects have 90-day outcomes at the final analysis, so the
      // longitudinal component drops out of the primary model.
      OrdinalCounts counts(data.n_categories);
      for (long g = 0; g < n_final; ++g) {
        counts.add(data.arm[g], data.cat90[g]);
      }
      const OrdinalRegressionFit fit = fit_ordinal_regression(
          counts, design.longitudinal.regression, design.ordinal_direction,
          design.mcmc, rng);
      out.stat = fit.prob_benefit;
      out.success = fit.prob_benefit > design.eta;
      return out;
    }
    case AnalysisModel::borrowing: {
      OrdinalCounts counts(data.n_categories);
      for (long g = 0; g < n_final; ++g) {
        counts.add(data.arm[g], data.cat90[g]);
      }
      const BorrowingFit fit = fit_borrowing_model(
          counts, data.external, design.borrowing, design.ordinal_direction,
          design.mcmc, rng);
      out.stat = fit.prob_benefit;
      out.success = fit.prob_benefit > design.eta;
      return out;
    }
  }
  return out;
}

}  // namespace

TrialResult simulate_trial(const DesignSpec& design,
                           const ScenarioSpec& scenario, std::uint64_t seed,
                           MethodTimings* timings) {
  design.validate();
  scenario.validate(design);

  Rng rng = make_rng(seed);
  const GeneratedTrial data = generate(design, scenario, rng);

  TrialResult result;
  result.seed = seed;
  result.interims.reserve(design.interims.size());

  const double hazard_guess =
      -std::log1p(-design.assumed_event_prob) / design.follow_up;

  for (std::size_t idx = 0; idx < design.interims.size(); ++idx) {
    const long enrolled = design.interims[idx];
    const double time = data.accrual[enrolled - 1];

    InterimRecord rec;
    rec.index = static_cast<int>(idx);
    rec.time = time;
    rec.enrolled = enrolled;

    TrialSnapshot snap = make_snapshot(data, design, enrolled, time);

    // ---- evidence and information -------------------------------------
    double ref_variance = 0.0;   // completers-only / no-borrowing variance
    double main_variance = 0.0;  // analysis-of-interest variance
    double fit_seconds = 0.0;

    switch (design.analysis) {
      case AnalysisModel::frequentist: {
        const auto start = Clock::now();
        rec.evidence_kind = EvidenceKind::frequentist;
        switch (design.endpoint) {
          case EndpointKind::dichotomous: {
            rec.completers = snap.binary_completers.treatment.total +
                             snap.binary_completers.control.total;
            const TestResult res =
                two_prop_ztest(snap.binary_completers,
                               design.binary_direction);
            rec.evidence = res.p_one_sided;
            rec.evidence_degenerate = res.degenerate;
            rec.info_n = static_cast<double>(rec.completers);
            rec.info_current_n = static_cast<double>(enrolled);
            rec.info_max = static_cast<double>(design.n_max);
            break;
          }
          case EndpointKind::time_to_event: {
            std::vector<SurvivalSubject> testable;
            testable.reserve(snap.tte_observed.size());
            long events = 0, complete = 0;
            for (std::size_t i = 0; i < snap.tte_observed.size(); ++i) {
              const auto& s = snap.tte_observed[i];
              if (s.time > 0.0) testable.push_back(s);
              if (s.event) ++events;
            }
            for (long g = 0; g < enrolled; ++g) {
              // Subjects with the opportunity for full follow-up.
              if (time - data.accrual[g] >= design.follow_up) ++complete;
            }
            const TestResult res = logrank_test(testable);
            rec.evidence = res.p_one_sided;
            rec.evidence_degenerate = res.degenerate;
            rec.completers = complete;
            rec.info_n = static_cast<double>(events);

            std::vector<EnrolledSubject> projection_in;
            projection_in.reserve(design.n_max);
            for (long g = 0; g < enrolled; ++g) {
              projection_in.push_back(
                  {data.accrual[g], data.event_time[g] <=
                                        std::clamp(time - data.accrual[g], 0.0,
                                                   design.follow_up)});
            }
            double exposure = 0.0;
            for (const auto& s : snap.tte_observed) exposure += s.time;
            const EventProjection current = project_final_events(
                events, exposure, projection_in, design.follow_up, time,
                hazard_guess);
            for (long g = enrolled; g < design.n_max; ++g) {
              projection_in.push_back({data.accrual[g], false});
            }
            const EventProjection maximum = project_final_events(
                events, exposure, projection_in, design.follow_up, time,
                hazard_guess);
            rec.info_current_n = current.raw;
            rec.info_max = maximum.raw;
            break;
          }
          case EndpointKind::ordinal: {
            rec.completers =
                static_cast<long>(snap.ordinal_completers.counts.sum());
            const PropOddsResult res =
                prop_odds_test(snap.ordinal_completers,
                               design.ordinal_direction);
            rec.evidence = res.p_one_sided;
            rec.evidence_degenerate = res.degenerate;
            rec.info_n = static_cast<double>(rec.completers);
            rec.info_current_n = static_cast<double>(enrolled);
            rec.info_max = static_cast<double>(design.n_max);
            break;
          }
          default:
            throw std::domain_error("simulate_trial: unsupported endpoint");
        }
        fit_seconds = elapsed_seconds(start);
        break;
      }
      case AnalysisModel::borrowing: {
        const auto start = Clock::now();
        auto fit = std::make_shared<BorrowingFit>(fit_borrowing_model(
            snap.ordinal_completers, snap.external, design.borrowing,
            design.ordinal_direction, design.mcmc, rng));
        fit_seconds = elapsed_seconds(start);
        rec.evidence_kind = EvidenceKind::bayesian;
        rec.evidence = clamp_probability(fit->prob_benefit);
        rec.evidence_degenerate = !fit->converged;
        rec.completers =
            static_cast<long>(snap.ordinal_completers.counts.sum());
        rec.info_n = static_cast<double>(rec.completers);
        rec.info_current_n = static_cast<double>(enrolled);
        rec.info_max = static_cast<double>(design.n_max);
        main_variance = fit->theta_trial_variance;
        snap.borrowing_fit = fit;
        break;
      }
      case AnalysisModel::longitudinal: {
        const auto start = Clock::now();
        auto fit = std::make_shared<LongitudinalFit>(fit_longitudinal_model(
            snap.ordinal_completers, snap.completer_transitions, snap.partials,
            design.longitudinal, design.ordinal_direction, design.mcmc, rng));
        fit_seconds = elapsed_seconds(start);
        rec.evidence_kind = EvidenceKind::bayesian;
        rec.evidence = clamp_probability(fit->prob_benefit);
        rec.evidence_degenerate = !fit->converged;
        rec.completers =
            static_cast<long>(snap.ordinal_completers.counts.sum());
        rec.info_n = static_cast<double>(rec.completers);
        rec.info_current_n = static_cast<double>(enrolled);
        rec.info_max = static_cast<double>(design.n_max);
        main_variance = fit->theta_variance;
        snap.longitudinal_fit = fit;
        break;
      }
    }

    // The interim model fit feeds every configured method.
    if (timings) {
      for (PpMethod m : design.methods) timings->add(m, fit_seconds);
    }

    // Reference fit for the estimated information fraction.
    if (design.has_method(PpMethod::epp)) {
      const auto start = Clock::now();
      const OrdinalRegressionSpec ref_spec =
          design.analysis == AnalysisModel::longitudinal
              ? design.longitudinal.regression
              : OrdinalRegressionSpec{};
      const OrdinalRegressionFit ref = fit_ordinal_regression(
          snap.ordinal_completers, ref_spec, design.ordinal_direction,
          design.mcmc, rng);
      ref_variance = ref.theta_variance;
      if (timings) timings->add(PpMethod::epp, elapsed_seconds(start));
    }

    const double criterion = design.final_is_bayesian() ? design.eta
                                                        : design.alpha;

    for (PpMethod m : design.methods) {
      MethodInterimRecord mrec;
      const auto start = Clock::now();
      switch (m) {
        case PpMethod::npp: {
          mrec.pp_n = guarded_pp(rec.evidence_kind, rec.evidence, rec.info_n,
                                 rec.info_current_n, criterion);
          mrec.pp_max = guarded_pp(rec.evidence_kind, rec.evidence, rec.info_n,
                                   rec.info_max, criterion);
          break;
        }
        case PpMethod::epp: {
          const double n_completers = rec.info_n;
          double info_hat = n_completers;
          if (main_variance > 0.0 && ref_variance > 0.0 &&
              n_completers > 0.0) {
            info_hat = effective_information(ref_variance, main_variance,
                                             n_completers);
          }
          if (design.analysis == AnalysisModel::borrowing) {
            const auto bor = borrowed_observations(info_hat, n_completers);
            const double n_bor =
                std::min(bor.value, static_cast<double>(scenario.external_n));
            rec.info_estimated = n_completers + n_bor;
            mrec.pp_n = guarded_pp(rec.evidence_kind, rec.evidence,
                                   n_completers + n_bor,
                                   static_cast<double>(enrolled) + n_bor,
                                   criterion);
            mrec.pp_max = guarded_pp(rec.evidence_kind, rec.evidence,
                                     n_completers + n_bor,
                                     static_cast<double>(design.n_max) + n_bor,
                                     criterion);
          } else {
            // Longitudinal: completers plus partial-information subjects
            // cannot be fewer than n or more than everyone enrolled.
            info_hat = std::clamp(info_hat, n_completers,
                                  static_cast<double>(enrolled));
            rec.info_estimated = info_hat;
            mrec.pp_n = guarded_pp(rec.evidence_kind, rec.evidence, info_hat,
                                   rec.info_current_n, criterion);
            mrec.pp_max = guarded_pp(rec.evidence_kind, rec.evidence, info_hat,
                                     rec.info_max, criterion);
          }
          break;
        }
        case PpMethod::ipp: {
          const IppResult pp_n = imputed_pp(snap, design, IppTarget::current_n,
                                            design.n_imputations, rng);
          const IppResult pp_max = imputed_pp(snap, design, IppTarget::n_max,
                                              design.n_imputations, rng);
          mrec.pp_n = pp_n.value;
          mrec.pp_max = pp_max.value;
          mrec.ipp_se = std::max(pp_n.mc_se, pp_max.mc_se);
          mrec.flagged = pp_n.flagged + pp_max.flagged;
          break;
        }
      }
      if (timings) timings->add(m, elapsed_seconds(start));
      mrec.decision = decide(design, mrec.pp_n, mrec.pp_max);
      rec.by_method[m] = mrec;
    }

    result.interims.push_back(std::move(rec));
  }

  // ---- per-method stopping paths and final analyses ---------------------
  std::map<long, FinalOutcome> final_cache;
  for (PpMethod m : design.methods) {
    MethodOutcome outcome;
    for (const auto& rec : result.interims) {
      const Decision d = rec.by_method.at(m).decision;
      if (d != Decision::continue_enrollment) {
        outcome.stop_interim = rec.index;
        outcome.stop_reason = d;
        outcome.final_n = rec.enrolled;
        break;
      }
    }
    if (outcome.stop_interim < 0) outcome.final_n = design.n_max;

    if (outcome.stop_reason != Decision::stop_futility) {
      auto it = final_cache.find(outcome.final_n);
      if (it == final_cache.end()) {
        it = final_cache
                 .emplace(outcome.final_n,
                          final_analysis(data, design, outcome.final_n, rng))
                 .first;
      }
      outcome.final_ran = true;
      outcome.final_success = it->second.success;
      outcome.final_stat = it->second.stat;
    }
    result.outcomes[m] = outcome;
  }
  return result;
}

BatchResult run_batch(const DesignSpec& design, const ScenarioSpec& scenario,
                      long n_sims, std::uint64_t master_seed, int parallelism) {
  if (n_sims < 1) throw std::domain_error("run_batch: n_sims must be >= 1");
  design.validate();
  scenario.validate(design);

  BatchResult out;
  out.trials.resize(n_sims);
  const int workers = static_cast<int>(
      std::max<long>(1, std::min<long>(parallelism, n_sims)));

  std::vector<MethodTimings> worker_timings(workers);
  std::atomic<long> next{0};
  auto work = [&](int w) {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n_sims) break;
      out.trials[i] = simulate_trial(design, scenario,
                                     derive_seed(master_seed, i),
                                     &worker_timings[w]);
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }

  for (const auto& t : worker_timings) out.timings.merge(t);
  out.summary = summarize(design, out.trials);
  return out;
}

BatchSummary summarize(const DesignSpec& design,
                       std::span<const TrialResult> trials) {
  BatchSummary summary;
  summary.n_sims = static_cast<long>(trials.size());
  const std::size_t n_interims = design.interims.size();
  const bool with_ipp = design.has_method(PpMethod::ipp);
  const double denom = std::max<std::size_t>(trials.size(), 1);

  for (PpMethod m : design.methods) {
    std::vector<MethodInterimSummary> rows(n_interims);
    long stopped = 0, successes = 0;
    std::vector<long> agree(n_interims, 0);
    std::vector<double> diff_n(n_interims, 0.0), diff_max(n_interims, 0.0);

    for (const auto& trial : trials) {
      const auto& outcome = trial.outcomes.at(m);
      if (outcome.stop_interim >= 0) {
        ++stopped;
        auto& row = rows[outcome.stop_interim];
        (outcome.stop_reason == Decision::stop_success ? row.stop_success
                                                       : row.stop_futility) +=
            1.0;
      }
      if (outcome.final_ran && outcome.final_success) ++successes;
      if (with_ipp) {
        for (std::size_t k = 0; k < n_interims; ++k) {
          const auto& mine = trial.interims[k].by_method.at(m);
          const auto& ipp = trial.interims[k].by_method.at(PpMethod::ipp);
          if (mine.decision == ipp.decision) ++agree[k];
          diff_n[k] += std::abs(mine.pp_n - ipp.pp_n);
          diff_max[k] += std::abs(mine.pp_max - ipp.pp_max);
        }
      }
    }

    for (std::size_t k = 0; k < n_interims; ++k) {
      rows[k].stop_success /= denom;
      rows[k].stop_futility /= denom;
      if (with_ipp) {
        rows[k].agreement_vs_ipp = agree[k] / denom;
        rows[k].mean_abs_diff_pp_n = diff_n[k] / denom;
        rows[k].mean_abs_diff_pp_max = diff_max[k] / denom;
      }
    }
    summary.by_method[m] = std::move(rows);
    summary.total_stop_prob[m] = stopped / denom;
    summary.success_prob[m] = successes / denom;
  }
  return summary;
}

std::vector<double> concordance_curve(
    std::span<const std::pair<double, double>> pp_pairs,
    std::span<const double> thresholds) {
  std::vector<double> agreement;
  agreement.reserve(thresholds.size());
  for (double t : thresholds) {
    long agree = 0;
    for (const auto& [a, b] : pp_pairs) {
      if ((a > t) == (b > t)) ++agree;
    }
    agreement.push_back(pp_pairs.empty()
                            ? 1.0
                            : static_cast<double>(agree) / pp_pairs.size());
  }
  return agreement;
}

}  // namespace ppsim
