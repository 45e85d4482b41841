#include "ppsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ppsim/pp_core.hpp"

namespace ppsim {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string format_double(double v, bool full_precision) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), full_precision ? "%.17g" : "%.6g", v);
  return buf;
}

std::vector<ResultRow> flatten_results(const std::vector<TrialResult>& trials) {
  std::vector<ResultRow> rows;
  for (std::size_t sim = 0; sim < trials.size(); ++sim) {
    const auto& trial = trials[sim];
    for (const auto& interim : trial.interims) {
      for (const auto& [method, mrec] : interim.by_method) {
        ResultRow row;
        row.sim_id = static_cast<long>(sim);
        row.interim = interim.index;
        row.time = interim.time;
        row.enrolled = interim.enrolled;
        row.completers = interim.completers;
        row.info_n = interim.info_n;
        row.info_current_n = interim.info_current_n;
        row.info_max = interim.info_max;
        row.info_estimated = interim.info_estimated;
        row.evidence_kind = interim.evidence_kind == EvidenceKind::frequentist
                                ? "p_value"
                                : "posterior";
        row.evidence = interim.evidence;
        row.evidence_degenerate = interim.evidence_degenerate;
        row.method = to_string(method);
        row.pp_n = mrec.pp_n;
        row.pp_max = mrec.pp_max;
        row.ipp_se = mrec.ipp_se;
        row.flagged = mrec.flagged;
        row.decision = to_string(mrec.decision);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

namespace {
constexpr const char* kResultHeader =
    "sim_id,interim,time,enrolled,completers,info_n,info_current_n,info_max,"
    "info_estimated,evidence_kind,evidence,evidence_degenerate,method,pp_n,"
    "pp_max,ipp_se,flagged,decision";
}  // namespace

void write_result_rows(const std::string& path,
                       const std::vector<ResultRow>& rows,
                       bool full_precision) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kResultHeader << "\r\n";
  for (const auto& r : rows) {
    out << r.sim_id << ',' << r.interim << ','
        << format_double(r.time, full_precision) << ',' << r.enrolled << ','
        << r.completers << ',' << format_double(r.info_n, full_precision)
        << ',' << format_double(r.info_current_n, full_precision) << ','
        << format_double(r.info_max, full_precision) << ','
        << format_double(r.info_estimated, full_precision) << ','
        << r.evidence_kind << ',' << format_double(r.evidence, full_precision)
        << ',' << (r.evidence_degenerate ? 1 : 0) << ',' << r.method << ','
        << format_double(r.pp_n, full_precision) << ','
        << format_double(r.pp_max, full_precision) << ','
        << format_double(r.ipp_se, full_precision) << ',' << r.flagged << ','
        << r.decision << "\r\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  // Our own files never quote numeric fields; handle quotes anyway.
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // swallow
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::vector<ResultRow> read_result_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty result file");
  }
  {
    std::string header = line;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kResultHeader) {
      throw std::runtime_error(path + ": unexpected result header");
    }
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 18) {
      throw std::runtime_error(path + ": malformed row");
    }
    ResultRow r;
    r.sim_id = std::stol(f[0]);
    r.interim = std::stoi(f[1]);
    r.time = std::stod(f[2]);
    r.enrolled = std::stol(f[3]);
    r.completers = std::stol(f[4]);
    r.info_n = std::stod(f[5]);
    r.info_current_n = std::stod(f[6]);
    r.info_max = std::stod(f[7]);
    r.info_estimated = std::stod(f[8]);
    r.evidence_kind = f[9];
    r.evidence = std::stod(f[10]);
    r.evidence_degenerate = f[11] == "1";
    r.method = f[12];
    r.pp_n = std::stod(f[13]);
    r.pp_max = std::stod(f[14]);
    r.ipp_se = std::stod(f[15]);
    r.flagged = std::stol(f[16]);
    r.decision = f[17];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_batch_summary(const std::string& path, const DesignSpec&,
                         const BatchSummary& summary, bool full_precision) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,interim,stop_success,stop_futility,stop_any,"
         "agreement_vs_ipp,mean_abs_diff_pp_n,mean_abs_diff_pp_max,"
         "final_success_prob\r\n";
  for (const auto& [method, rows] : summary.by_method) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& row = rows[k];
      out << to_string(method) << ',' << (k + 1) << ','
          << format_double(row.stop_success, full_precision) << ','
          << format_double(row.stop_futility, full_precision) << ','
          << format_double(row.stop_success + row.stop_futility,
                           full_precision)
          << ',' << format_double(row.agreement_vs_ipp, full_precision) << ','
          << format_double(row.mean_abs_diff_pp_n, full_precision) << ','
          << format_double(row.mean_abs_diff_pp_max, full_precision) << ','
          << "\r\n";
    }
    out << to_string(method) << ",total,"
        << format_double(
               std::accumulate(rows.begin(), rows.end(), 0.0,
                               [](double acc, const MethodInterimSummary& r) {
                                 return acc + r.stop_success;
                               }),
               full_precision)
        << ','
        << format_double(
               std::accumulate(rows.begin(), rows.end(), 0.0,
                               [](double acc, const MethodInterimSummary& r) {
                                 return acc + r.stop_futility;
                               }),
               full_precision)
        << ','
        << format_double(summary.total_stop_prob.at(method), full_precision)
        << ",,,,"
        << format_double(summary.success_prob.at(method), full_precision)
        << "\r\n";
  }
}

std::vector<ConcordanceRow> concordance_rows(
    const std::vector<ResultRow>& rows,
    const std::vector<double>& thresholds) {
  // Group (pp_n, pp_max) pairs by (interim, method) against ipp.
  std::map<std::pair<int, std::string>,
           std::vector<std::pair<double, double>>>
      pp_n_pairs, pp_max_pairs;
  std::map<std::pair<long, int>, const ResultRow*> ipp_rows;
  for (const auto& r : rows) {
    if (r.method == "ipp") ipp_rows[{r.sim_id, r.interim}] = &r;
  }
  if (ipp_rows.empty()) {
    throw std::runtime_error(
        "concordance: results contain no imputed (ipp) rows");
  }
  bool has_other = false;
  for (const auto& r : rows) {
    if (r.method == "ipp") continue;
    has_other = true;
    auto it = ipp_rows.find({r.sim_id, r.interim});
    if (it == ipp_rows.end()) continue;
    pp_n_pairs[{r.interim, r.method}].push_back({r.pp_n, it->second->pp_n});
    pp_max_pairs[{r.interim, r.method}].push_back(
        {r.pp_max, it->second->pp_max});
  }
  if (!has_other) {
    throw std::runtime_error(
        "concordance: need at least two methods in the results");
  }

  std::vector<ConcordanceRow> out;
  auto emit = [&](const auto& groups, const char* kind) {
    for (const auto& [key, pairs] : groups) {
      const auto agreement = concordance_curve(pairs, thresholds);
      for (std::size_t i = 0; i < thresholds.size(); ++i) {
        out.push_back({key.first, key.second, kind, thresholds[i],
                       agreement[i]});
      }
    }
  };
  emit(pp_n_pairs, "pp_n");
  emit(pp_max_pairs, "pp_max");
  return out;
}

std::vector<InterimAgreementRow> interim_agreement(
    const std::vector<ResultRow>& rows) {
  std::map<std::pair<long, int>, const ResultRow*> ipp_rows;
  for (const auto& r : rows) {
    if (r.method == "ipp") ipp_rows[{r.sim_id, r.interim}] = &r;
  }
  if (ipp_rows.empty()) {
    throw std::runtime_error(
        "concordance: results contain no imputed (ipp) rows");
  }
  struct Acc {
    long n = 0;
    long agree = 0;
    double diff_n = 0.0;
    double diff_max = 0.0;
  };
  std::map<std::pair<int, std::string>, Acc> acc;
  for (const auto& r : rows) {
    if (r.method == "ipp") continue;
    auto it = ipp_rows.find({r.sim_id, r.interim});
    if (it == ipp_rows.end()) continue;
    auto& a = acc[{r.interim, r.method}];
    ++a.n;
    if (r.decision == it->second->decision) ++a.agree;
    a.diff_n += std::abs(r.pp_n - it->second->pp_n);
    a.diff_max += std::abs(r.pp_max - it->second->pp_max);
  }
  if (acc.empty()) {
    throw std::runtime_error(
        "concordance: need at least two methods in the results");
  }
  std::vector<InterimAgreementRow> out;
  for (const auto& [key, a] : acc) {
    InterimAgreementRow row;
    row.interim = key.first;
    row.method = key.second;
    row.n = a.n;
    row.agreement = a.n > 0 ? static_cast<double>(a.agree) / a.n : 1.0;
    row.mean_abs_diff_pp_n = a.n > 0 ? a.diff_n / a.n : 0.0;
    row.mean_abs_diff_pp_max = a.n > 0 ? a.diff_max / a.n : 0.0;
    out.push_back(row);
  }
  return out;
}

void write_concordance(const std::string& path,
                       const std::vector<ConcordanceRow>& rows,
                       bool full_precision) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "interim,method,pp_kind,threshold,agreement\r\n";
  for (const auto& r : rows) {
    out << (r.interim + 1) << ',' << r.method << ',' << r.pp_kind << ','
        << format_double(r.threshold, full_precision) << ','
        << format_double(r.agreement, full_precision) << "\r\n";
  }
}

void write_interim_agreement(const std::string& path,
                             const std::vector<InterimAgreementRow>& rows,
                             bool full_precision) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "interim,method,n,decision_agreement,mean_abs_diff_pp_n,"
         "mean_abs_diff_pp_max\r\n";
  for (const auto& r : rows) {
    out << (r.interim + 1) << ',' << r.method << ',' << r.n << ','
        << format_double(r.agreement, full_precision) << ','
        << format_double(r.mean_abs_diff_pp_n, full_precision) << ','
        << format_double(r.mean_abs_diff_pp_max, full_precision) << "\r\n";
  }
}

void write_manifest(const std::string& path, const ManifestInfo& info) {
  nlohmann::json doc;
  doc["schema"] = "ppsim-manifest/1";
  doc["status"] = info.status;
  doc["config_hash"] = info.config_hash;
  doc["config_file"] = info.config_path;
  doc["master_seed"] = info.master_seed;
  doc["n_sims"] = info.n_sims;
  doc["parallelism"] = info.parallelism;
  doc["version"] = "1.0.0";
  doc["wall_clock_seconds"]["total"] = info.total_seconds;
  for (const auto& [method, seconds] : info.method_seconds) {
    doc["wall_clock_seconds"]["per_method"][method] = seconds;
  }
  doc["outputs"] = info.outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << "\n";
}

const std::vector<ShineInterim>& shine_interims() {
  static const std::vector<ShineInterim> rows = {
      {498, 432, 0.264, 0.244, 0.3535, 0.194, 0.182},
      {579, 515, 0.256, 0.221, 0.2058, 0.372, 0.349},
      {700, 621, 0.250, 0.232, 0.3372, 0.125, 0.129},
      {800, 715, 0.231, 0.228, 0.4994, 0.028, 0.026},
  };
  return rows;
}

std::vector<ShineAnalysisRow> shine_analysis() {
  std::vector<ShineAnalysisRow> out;
  for (const auto& interim : shine_interims()) {
    ShineAnalysisRow row;
    row.interim = interim;
    const auto r_max = InformationFraction::from_counts(
        static_cast<double>(interim.completers),
        static_cast<double>(kShineMaxEnrollment));
    row.direct_app = approx_pp(interim.p_n, r_max, kShineAlpha);
    const auto r_n = InformationFraction::from_counts(
        static_cast<double>(interim.completers),
        static_cast<double>(interim.enrolled));
    row.direct_pp_n = approx_pp(interim.p_n, r_n, kShineAlpha);
    row.direct_futility = row.direct_app < kShineFutilityThreshold;
    row.published_futility = interim.published_app < kShineFutilityThreshold;
    row.near_futility =
        std::abs(row.direct_app - kShineFutilityThreshold) < 0.05;
    out.push_back(row);
  }
  return out;
}

}  // namespace ppsim
