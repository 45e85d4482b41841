#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppsim/design.hpp"
#include "ppsim/sim.hpp"

namespace ppsim {

// RFC 4180 field escaping (quotes fields containing separators, quotes or
// line breaks).
std::string csv_escape(const std::string& field);

// Fixed-width float formatting: 6 significant digits by default, %.17g when
// full precision is requested.
std::string format_double(double v, bool full_precision);

// One row per (trial, interim, method); the documented column order is the
// header row written by write_result_rows.
struct ResultRow {
  long sim_id = 0;
  int interim = 0;
  double time = 0.0;
  long enrolled = 0;
  long completers = 0;
  double info_n = 0.0;
  double info_current_n = 0.0;
  double info_max = 0.0;
  double info_estimated = 0.0;
  std::string evidence_kind;
  double evidence = 0.0;
  bool evidence_degenerate = false;
  std::string method;
  double pp_n = 0.0;
  double pp_max = 0.0;
  double ipp_se = 0.0;
  long flagged = 0;
  std::string decision;
};

std::vector<ResultRow> flatten_results(const std::vector<TrialResult>& trials);

void write_result_rows(const std::string& path,
                       const std::vector<ResultRow>& rows,
                       bool full_precision);
std::vector<ResultRow> read_result_rows(const std::string& path);

void write_batch_summary(const std::string& path, const DesignSpec& design,
                         const BatchSummary& summary, bool full_precision);

// Per-interim, per-method, per-PP-kind agreement curves against the imputed
// method over a threshold grid.
struct ConcordanceRow {
  int interim = 0;
  std::string method;
  std::string pp_kind;  // "pp_n" or "pp_max"
  double threshold = 0.0;
  double agreement = 1.0;
};

std::vector<ConcordanceRow> concordance_rows(
    const std::vector<ResultRow>& rows, const std::vector<double>& thresholds);

// Per-interim decision agreement between each method and the imputed method.
struct InterimAgreementRow {
  int interim = 0;
  std::string method;
  double agreement = 1.0;
  double mean_abs_diff_pp_n = 0.0;
  double mean_abs_diff_pp_max = 0.0;
  long n = 0;
};

std::vector<InterimAgreementRow> interim_agreement(
    const std::vector<ResultRow>& rows);

void write_concordance(const std::string& path,
                       const std::vector<ConcordanceRow>& rows,
                       bool full_precision);
void write_interim_agreement(const std::string& path,
                             const std::vector<InterimAgreementRow>& rows,
                             bool full_precision);

struct ManifestInfo {
  std::string status;  // "incomplete" or "complete"
  std::string config_hash;
  std::string config_path;
  std::uint64_t master_seed = 0;
  long n_sims = 0;
  int parallelism = 1;
  double total_seconds = 0.0;
  std::map<std::string, double> method_seconds;
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const ManifestInfo& info);

// ---------------------------------------------------------------------------
// Shadow SHINE re-analysis: four interim looks with published predictive
// probabilities, plus this library's direct evaluation under r = n / 1400
// and alpha = 0.025.
// ---------------------------------------------------------------------------

struct ShineInterim {
  long enrolled;       // N
  long completers;     // n with 90-day outcomes
  double rate_treatment;
  double rate_control;
  double p_n;
  double published_ipp;   // PP_max, imputation method
  double published_app;   // PP_max, approximation
};

const std::vector<ShineInterim>& shine_interims();

struct ShineAnalysisRow {
  ShineInterim interim;
  double direct_app = 0.0;    // Eq.-direct PP_max at r = n / 1400
  double direct_pp_n = 0.0;   // PP at the current enrollment
  bool direct_futility = false;
  bool published_futility = false;
  bool near_futility = false;  // |direct - boundary| < 0.05
};

inline constexpr long kShineMaxEnrollment = 1400;
inline constexpr double kShineAlpha = 0.025;
inline constexpr double kShineFutilityThreshold = 0.05;
inline constexpr double kShineSuccessThreshold = 0.99;

std::vector<ShineAnalysisRow> shine_analysis();

}  // namespace ppsim
