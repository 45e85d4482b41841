// ppsim - predictive probability toolkit and adaptive trial simulator.
//
// Subcommands:
//   pp           evaluate an approximate predictive probability
//   boundary     inverted decision-boundary curves and futility onsets
//   shine        the Shadow SHINE re-analysis table
//   simulate     run a simulation batch from a JSON config
//   concordance  agreement tables from previously written result files

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppsim/config.hpp"
#include "ppsim/pp_core.hpp"
#include "ppsim/report.hpp"
#include "ppsim/sim.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int default_parallelism() {
  if (const char* env = std::getenv("PPSIM_PARALLELISM")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-12; v += step) grid.push_back(v);
  return grid;
}

struct PpArgs {
  std::optional<double> p;
  std::optional<double> posterior;
  std::optional<double> r;
  std::optional<double> info_n;
  std::optional<double> info_final;
  double alpha = 0.025;
  double eta = 0.975;
};

int run_pp(const PpArgs& args) {
  using namespace ppsim;
  if (args.p.has_value() == args.posterior.has_value()) {
    throw ConfigError("pp: provide exactly one of --p or --posterior");
  }
  InformationFraction r = [&]() {
    if (args.r.has_value()) {
      if (args.info_n || args.info_final) {
        throw ConfigError("pp: give either --r or --info-n/--info-N");
      }
      return InformationFraction(*args.r);
    }
    if (!args.info_n || !args.info_final) {
      throw ConfigError("pp: provide --r or both --info-n and --info-N");
    }
    return InformationFraction::from_counts(*args.info_n, *args.info_final);
  }();

  char buf[64];
  if (args.p) {
    const double pp = approx_pp(*args.p, r, args.alpha);
    std::snprintf(buf, sizeof(buf), "%.6f", pp);
    std::cout << "PP = " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", invert_pp(0.90, r, args.alpha));
    std::cout << "p-value boundary at this r: PP=0.90 needs p_n < " << buf;
    std::snprintf(buf, sizeof(buf), "%.6f", invert_pp(0.05, r, args.alpha));
    std::cout << "; PP=0.05 at p_n = " << buf << "\n";
  } else {
    const double pp = approx_pp_bayes(*args.posterior, r, args.eta);
    std::snprintf(buf, sizeof(buf), "%.6f", pp);
    std::cout << "PP = " << buf << "\n";
    // Inverting the Bayesian form reuses invert_pp with alpha = 1 - eta.
    std::snprintf(buf, sizeof(buf), "%.6f",
                  1.0 - invert_pp(0.90, r, 1.0 - args.eta));
    std::cout << "posterior boundary at this r: PP=0.90 needs P_n > " << buf;
    std::snprintf(buf, sizeof(buf), "%.6f",
                  1.0 - invert_pp(0.05, r, 1.0 - args.eta));
    std::cout << "; PP=0.05 at P_n = " << buf << "\n";
  }
  return 0;
}

struct BoundaryArgs {
  std::vector<double> thresholds = {0.20, 0.10, 0.05};
  double alpha = 0.025;
  double r_min = 0.01, r_max = 0.99, r_step = 0.01;
  std::string out_path;
};

int run_boundary(const BoundaryArgs& args) {
  using namespace ppsim;
  if (args.thresholds.empty()) {
    throw ConfigError("boundary: at least one threshold required");
  }
  for (double t : args.thresholds) {
    if (!(t > 0.0 && t < 0.5)) {
      throw ConfigError(
          "boundary: futility onset undefined for threshold outside (0, 0.5)");
    }
  }
  if (!(args.r_min > 0.0 && args.r_max < 1.0 && args.r_min <= args.r_max &&
        args.r_step > 0.0)) {
    throw ConfigError("boundary: r grid must lie strictly inside (0, 1)");
  }

  std::ostringstream csv;
  csv << "r";
  for (double t : args.thresholds) {
    csv << ",p_boundary_pp_" << format_double(t, false);
  }
  csv << "\r\n";
  for (double r = args.r_min; r <= args.r_max + 1e-12; r += args.r_step) {
    const InformationFraction frac(r);
    csv << format_double(r, false);
    for (double t : args.thresholds) {
      csv << ',' << format_double(invert_pp(t, frac, args.alpha), false);
    }
    csv << "\r\n";
  }

  if (args.out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + args.out_path);
    out << csv.str();
  }

  for (double t : args.thresholds) {
    const auto onset = futility_onset(t, args.alpha);
    std::cout << "futility onset for threshold "
              << format_double(t, false) << ": r* = "
              << format_double(onset.value(), false) << "\n";
  }
  return 0;
}

int run_shine(const std::string& csv_path) {
  using namespace ppsim;
  const auto rows = shine_analysis();

  std::printf("Shadow SHINE re-analysis (PP_max, futility boundary %.2f, "
              "r = n/%ld, alpha = %.3f)\n",
              kShineFutilityThreshold, kShineMaxEnrollment, kShineAlpha);
  std::printf("%-8s %-5s %-5s %-6s %-6s %-7s %-10s %-10s %-10s %-9s %s\n",
              "interim", "N", "n", "trt", "ctl", "p_n", "direct_aPP",
              "paper_aPP", "paper_iPP", "decision", "notes");
  int idx = 1;
  for (const auto& row : rows) {
    const char* decision = row.direct_futility ? "futility" : "continue";
    const bool same =
        row.direct_futility == row.published_futility;
    std::string notes;
    if (row.near_futility) notes += "near-futility ";
    notes += same ? "(same decision as published)"
                  : "(DIFFERS from published decision)";
    std::printf("%-8d %-5ld %-5ld %-6.3f %-6.3f %-7.4f %-10.3f %-10.3f "
                "%-10.3f %-9s %s\n",
                idx, row.interim.enrolled, row.interim.completers,
                row.interim.rate_treatment, row.interim.rate_control,
                row.interim.p_n, row.direct_app, row.interim.published_app,
                row.interim.published_ipp, decision, notes.c_str());
    ++idx;
  }
  std::printf("PP_N stays below the %.2f success rule at every interim "
              "(largest direct PP_N = %.4f).\n",
              kShineSuccessThreshold,
              std::max_element(rows.begin(), rows.end(),
                               [](const auto& a, const auto& b) {
                                 return a.direct_pp_n < b.direct_pp_n;
                               })
                  ->direct_pp_n);

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << "interim,enrolled,completers,rate_treatment,rate_control,p_n,"
           "direct_app,paper_app,paper_ipp,direct_pp_n,decision\r\n";
    idx = 1;
    for (const auto& row : rows) {
      out << idx << ',' << row.interim.enrolled << ','
          << row.interim.completers << ','
          << format_double(row.interim.rate_treatment, false) << ','
          << format_double(row.interim.rate_control, false) << ','
          << format_double(row.interim.p_n, false) << ','
          << format_double(row.direct_app, false) << ','
          << format_double(row.interim.published_app, false) << ','
          << format_double(row.interim.published_ipp, false) << ','
          << format_double(row.direct_pp_n, false) << ','
          << (row.direct_futility ? "futility" : "continue") << "\r\n";
      ++idx;
    }
  }
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::optional<long> n_sims;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<std::string> out_dir;
  bool full_precision = false;
};

int run_simulate(const SimulateArgs& args) {
  using namespace ppsim;
  namespace fs = std::filesystem;

  std::ifstream in(args.config_path);
  if (!in) throw ConfigError("config: cannot open '" + args.config_path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  RunConfig config = parse_run_config(text);
  if (args.n_sims) config.execution.n_sims = *args.n_sims;
  if (args.seed) config.execution.master_seed = *args.seed;
  if (args.parallelism) config.execution.parallelism = *args.parallelism;
  if (args.out_dir) config.output.directory = *args.out_dir;
  if (args.full_precision) config.output.full_precision = true;
  if (config.execution.n_sims < 1) {
    throw ConfigError("execution.n_sims must be >= 1");
  }
  const int parallelism = config.execution.parallelism > 0
                              ? config.execution.parallelism
                              : default_parallelism();

  fs::create_directories(config.output.directory);
  const auto out_file = [&](const char* name) {
    return (fs::path(config.output.directory) / name).string();
  };

  ManifestInfo manifest;
  manifest.status = "incomplete";
  manifest.config_hash = config_hash_hex(text);
  manifest.config_path = args.config_path;
  manifest.master_seed = config.execution.master_seed;
  manifest.n_sims = config.execution.n_sims;
  manifest.parallelism = parallelism;
  manifest.outputs = {"results.csv", "summary.csv", "concordance.csv",
                      "interim_agreement.csv"};
  write_manifest(out_file("manifest.json"), manifest);

  const auto start = std::chrono::steady_clock::now();
  const BatchResult batch =
      run_batch(config.design, config.scenario, config.execution.n_sims,
                config.execution.master_seed, parallelism);
  manifest.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const auto rows = flatten_results(batch.trials);
  write_result_rows(out_file("results.csv"), rows,
                    config.output.full_precision);
  write_batch_summary(out_file("summary.csv"), config.design, batch.summary,
                      config.output.full_precision);
  if (config.design.has_method(PpMethod::ipp) &&
      config.design.methods.size() > 1) {
    const auto thresholds = make_grid(0.05, 0.95, 0.05);
    write_concordance(out_file("concordance.csv"),
                      concordance_rows(rows, thresholds),
                      config.output.full_precision);
    write_interim_agreement(out_file("interim_agreement.csv"),
                            interim_agreement(rows),
                            config.output.full_precision);
  } else {
    manifest.outputs = {"results.csv", "summary.csv"};
  }

  for (const auto& [method, seconds] : batch.timings.seconds) {
    manifest.method_seconds[to_string(method)] = seconds;
  }
  manifest.status = "complete";
  write_manifest(out_file("manifest.json"), manifest);

  std::cout << "wrote " << config.output.directory << " ("
            << config.execution.n_sims << " trials, "
            << format_double(manifest.total_seconds, false) << " s)\n";
  return 0;
}

struct ConcordanceArgs {
  std::vector<std::string> result_files;
  double t_min = 0.05, t_max = 0.95, t_step = 0.05;
  std::string out_dir = ".";
  bool full_precision = false;
};

int run_concordance(const ConcordanceArgs& args) {
  using namespace ppsim;
  namespace fs = std::filesystem;
  if (args.result_files.empty()) {
    throw ConfigError("concordance: at least one --results file required");
  }
  std::vector<ResultRow> rows;
  for (const auto& path : args.result_files) {
    auto part = read_result_rows(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto thresholds = make_grid(args.t_min, args.t_max, args.t_step);
  fs::create_directories(args.out_dir);
  const auto curves = concordance_rows(rows, thresholds);
  const auto per_interim = interim_agreement(rows);
  write_concordance((fs::path(args.out_dir) / "concordance.csv").string(),
                    curves, args.full_precision);
  write_interim_agreement(
      (fs::path(args.out_dir) / "interim_agreement.csv").string(), per_interim,
      args.full_precision);

  for (const auto& row : per_interim) {
    std::cout << "interim " << (row.interim + 1) << " " << row.method
              << " vs ipp: decision agreement "
              << format_double(row.agreement, false) << " (n=" << row.n
              << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive probability toolkit and Goldilocks trial "
               "simulator"};
  app.require_subcommand(1);

  PpArgs pp_args;
  auto* pp_cmd = app.add_subcommand("pp", "Evaluate a predictive probability");
  double p_val = 0, post_val = 0, r_val = 0, info_n_val = 0, info_final = 0;
  auto* opt_p = pp_cmd->add_option("--p", p_val, "one-sided p-value");
  auto* opt_post =
      pp_cmd->add_option("--posterior", post_val,
                         "posterior probability of superiority");
  auto* opt_r = pp_cmd->add_option("--r", r_val, "information fraction");
  auto* opt_in = pp_cmd->add_option("--info-n", info_n_val,
                                    "interim information");
  auto* opt_if = pp_cmd->add_option("--info-N", info_final,
                                    "final information");
  pp_cmd->add_option("--alpha", pp_args.alpha, "final one-sided alpha");
  pp_cmd->add_option("--eta", pp_args.eta, "posterior success threshold");

  BoundaryArgs boundary_args;
  auto* boundary_cmd =
      app.add_subcommand("boundary", "Boundary curves and futility onsets");
  boundary_cmd->add_option("--threshold", boundary_args.thresholds,
                           "predictive probability thresholds");
  boundary_cmd->add_option("--alpha", boundary_args.alpha, "final alpha");
  boundary_cmd->add_option("--r-min", boundary_args.r_min, "grid start");
  boundary_cmd->add_option("--r-max", boundary_args.r_max, "grid end");
  boundary_cmd->add_option("--r-step", boundary_args.r_step, "grid step");
  boundary_cmd->add_option("--out", boundary_args.out_path, "CSV output path");

  std::string shine_csv;
  auto* shine_cmd =
      app.add_subcommand("shine", "Shadow SHINE re-analysis table");
  shine_cmd->add_option("--csv", shine_csv, "also write the table as CSV");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation batch");
  sim_cmd->add_option("--config", sim_args.config_path, "JSON run config")
      ->required();
  long n_sims_val = 0;
  std::uint64_t seed_val = 0;
  int par_val = 0;
  std::string out_val;
  auto* opt_nsims = sim_cmd->add_option("--n-sims", n_sims_val,
                                        "override execution.n_sims");
  auto* opt_seed =
      sim_cmd->add_option("--seed", seed_val, "override master seed");
  auto* opt_par = sim_cmd->add_option("--parallelism", par_val,
                                      "override worker count");
  auto* opt_out = sim_cmd->add_option("--out", out_val,
                                      "override output directory");
  sim_cmd->add_flag("--full-precision", sim_args.full_precision,
                    "write full-precision values");

  ConcordanceArgs conc_args;
  auto* conc_cmd =
      app.add_subcommand("concordance", "Aggregate agreement tables");
  conc_cmd->add_option("--results", conc_args.result_files,
                       "result CSV files (repeatable)");
  conc_cmd->add_option("--t-min", conc_args.t_min, "threshold grid start");
  conc_cmd->add_option("--t-max", conc_args.t_max, "threshold grid end");
  conc_cmd->add_option("--t-step", conc_args.t_step, "threshold grid step");
  conc_cmd->add_option("--out", conc_args.out_dir, "output directory");
  conc_cmd->add_flag("--full-precision", conc_args.full_precision,
                     "write full-precision values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (pp_cmd->parsed()) {
      if (opt_p->count()) pp_args.p = p_val;
      if (opt_post->count()) pp_args.posterior = post_val;
      if (opt_r->count()) pp_args.r = r_val;
      if (opt_in->count()) pp_args.info_n = info_n_val;
      if (opt_if->count()) pp_args.info_final = info_final;
      return run_pp(pp_args);
    }
    if (boundary_cmd->parsed()) return run_boundary(boundary_args);
    if (shine_cmd->parsed()) return run_shine(shine_csv);
    if (sim_cmd->parsed()) {
      if (opt_nsims->count()) sim_args.n_sims = n_sims_val;
      if (opt_seed->count()) sim_args.seed = seed_val;
      if (opt_par->count()) sim_args.parallelism = par_val;
      if (opt_out->count()) sim_args.out_dir = out_val;
      return run_simulate(sim_args);
    }
    if (conc_cmd->parsed()) return run_concordance(conc_args);
  } catch (const ppsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
