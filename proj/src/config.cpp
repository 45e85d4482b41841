#include "ppsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ppsim {

namespace {

using nlohmann::json;

// Tracks which keys of one JSON object were consumed; anything left over is
// a config-drift error.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    }
  }

  bool has(const std::string& key) {
    return node_.contains(key);
  }

  const json& require(const std::string& key) {
    if (!node_.contains(key)) {
      throw ConfigError(path_ + ": missing required key '" + key + "'");
    }
    used_.insert(key);
    return node_.at(key);
  }

  const json* optional(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    used_.insert(key);
    return &node_.at(key);
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

long as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<long>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected a boolean");
  return j.get<bool>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + ": expected a non-empty array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        as_number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + ": expected an array of rows");
  }
  const std::size_t rows = j.size();
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const Eigen::VectorXd row =
        as_vector(j[r], where + "[" + std::to_string(r) + "]");
    if (r == 0) {
      m.resize(rows, row.size());
    } else if (row.size() != m.cols()) {
      throw ConfigError(where + ": ragged rows");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

McmcSettings parse_mcmc(const json& node, const std::string& path) {
  ObjectReader r(node, path);
  McmcSettings s;
  if (const json* v = r.optional("chains"))
    s.chains = static_cast<int>(as_integer(*v, path + ".chains"));
  if (const json* v = r.optional("burn_in"))
    s.burn_in = static_cast<int>(as_integer(*v, path + ".burn_in"));
  if (const json* v = r.optional("keep"))
    s.keep = static_cast<int>(as_integer(*v, path + ".keep"));
  r.finish();
  return s;
}

BorrowingModelSpec parse_borrowing(const json& node, const std::string& path) {
  ObjectReader r(node, path);
  BorrowingModelSpec s;
  if (const json* v = r.optional("mu_prior_mean"))
    s.mu_prior_mean = as_number(*v, path + ".mu_prior_mean");
  if (const json* v = r.optional("mu_prior_sd"))
    s.mu_prior_sd = as_number(*v, path + ".mu_prior_sd");
  if (const json* v = r.optional("tau2_shape"))
    s.tau2_shape = as_number(*v, path + ".tau2_shape");
  if (const json* v = r.optional("tau2_scale"))
    s.tau2_scale = as_number(*v, path + ".tau2_scale");
  if (const json* v = r.optional("tau2_parameterization")) {
    const std::string name = as_string(*v, path + ".tau2_parameterization");
    if (name == "shape-scale") {
      s.tau2_parameterization = InvGammaParameterization::shape_scale;
    } else if (name == "shape-inverse-scale") {
      s.tau2_parameterization = InvGammaParameterization::shape_inverse_scale;
    } else {
      throw ConfigError(path + ".tau2_parameterization: unknown value '" +
                        name + "'");
    }
  }
  if (const json* v = r.optional("beta_prior_sd"))
    s.beta_prior_sd = as_number(*v, path + ".beta_prior_sd");
  if (const json* v = r.optional("cutpoint_prior_sd"))
    s.cutpoint_prior_sd = as_number(*v, path + ".cutpoint_prior_sd");
  r.finish();
  return s;
}

LongitudinalModelSpec parse_longitudinal_prior(const json& node,
                                               const std::string& path) {
  ObjectReader r(node, path);
  LongitudinalModelSpec s;
  if (const json* v = r.optional("transition_concentration"))
    s.transition_concentration =
        as_number(*v, path + ".transition_concentration");
  if (const json* v = r.optional("theta_prior_sd"))
    s.regression.theta_prior_sd = as_number(*v, path + ".theta_prior_sd");
  if (const json* v = r.optional("cutpoint_prior_sd"))
    s.regression.cutpoint_prior_sd =
        as_number(*v, path + ".cutpoint_prior_sd");
  r.finish();
  return s;
}

DesignSpec parse_design(const json& node) {
  ObjectReader r(node, "design");
  DesignSpec d;

  const std::string endpoint = as_string(r.require("endpoint"),
                                         "design.endpoint");
  if (endpoint == "dichotomous") d.endpoint = EndpointKind::dichotomous;
  else if (endpoint == "time_to_event") d.endpoint = EndpointKind::time_to_event;
  else if (endpoint == "ordinal") d.endpoint = EndpointKind::ordinal;
  else throw ConfigError("design.endpoint: unknown value '" + endpoint + "'");

  if (const json* v = r.optional("analysis")) {
    const std::string analysis = as_string(*v, "design.analysis");
    if (analysis == "frequentist") d.analysis = AnalysisModel::frequentist;
    else if (analysis == "borrowing") d.analysis = AnalysisModel::borrowing;
    else if (analysis == "longitudinal")
      d.analysis = AnalysisModel::longitudinal;
    else throw ConfigError("design.analysis: unknown value '" + analysis + "'");
  }

  d.n_max = as_integer(r.require("n_max"), "design.n_max");
  const json& interims = r.require("interims");
  if (!interims.is_array()) throw ConfigError("design.interims: expected array");
  for (const auto& v : interims) {
    d.interims.push_back(as_integer(v, "design.interims[]"));
  }
  if (const json* v = r.optional("success_threshold"))
    d.success_threshold = as_number(*v, "design.success_threshold");
  if (const json* v = r.optional("futility_threshold"))
    d.futility_threshold = as_number(*v, "design.futility_threshold");
  if (const json* v = r.optional("alpha"))
    d.alpha = as_number(*v, "design.alpha");
  if (const json* v = r.optional("eta")) d.eta = as_number(*v, "design.eta");
  d.follow_up = as_number(r.require("follow_up"), "design.follow_up");
  if (const json* v = r.optional("follow_up_30"))
    d.follow_up_30 = as_number(*v, "design.follow_up_30");
  if (const json* v = r.optional("binary_direction")) {
    const std::string dir = as_string(*v, "design.binary_direction");
    if (dir == "fewer_events") d.binary_direction = BenefitDirection::fewer_events;
    else if (dir == "more_events")
      d.binary_direction = BenefitDirection::more_events;
    else throw ConfigError("design.binary_direction: unknown value");
  }
  if (const json* v = r.optional("ordinal_direction")) {
    const std::string dir = as_string(*v, "design.ordinal_direction");
    if (dir == "lower_is_better")
      d.ordinal_direction = CategoryDirection::lower_is_better;
    else if (dir == "higher_is_better")
      d.ordinal_direction = CategoryDirection::higher_is_better;
    else throw ConfigError("design.ordinal_direction: unknown value");
  }
  if (const json* v = r.optional("assumed_event_prob"))
    d.assumed_event_prob = as_number(*v, "design.assumed_event_prob");
  if (const json* v = r.optional("methods")) {
    if (!v->is_array()) throw ConfigError("design.methods: expected array");
    d.methods.clear();
    for (const auto& m : *v) {
      const auto parsed =
          pp_method_from_string(as_string(m, "design.methods[]"));
      if (!parsed) throw ConfigError("design.methods: unknown method");
      d.methods.push_back(*parsed);
    }
  }
  if (const json* v = r.optional("decision_method")) {
    if (!v->is_null()) {
      const auto parsed =
          pp_method_from_string(as_string(*v, "design.decision_method"));
      if (!parsed) throw ConfigError("design.decision_method: unknown method");
      d.decision_method = parsed;
    }
  }
  if (const json* v = r.optional("n_imputations"))
    d.n_imputations = as_integer(*v, "design.n_imputations");
  if (const json* v = r.optional("mcmc")) d.mcmc = parse_mcmc(*v, "design.mcmc");
  if (const json* v = r.optional("refit_mcmc"))
    d.refit_mcmc = parse_mcmc(*v, "design.refit_mcmc");
  if (const json* v = r.optional("borrowing"))
    d.borrowing = parse_borrowing(*v, "design.borrowing");
  if (const json* v = r.optional("longitudinal_prior"))
    d.longitudinal = parse_longitudinal_prior(*v, "design.longitudinal_prior");
  r.finish();
  return d;
}

ScenarioSpec parse_scenario(const json& node, const DesignSpec& design) {
  ObjectReader r(node, "scenario");
  ScenarioSpec s;
  s.accrual_rate = as_number(r.require("accrual_rate"),
                             "scenario.accrual_rate");
  if (const json* v = r.optional("accrual")) {
    const std::string mode = as_string(*v, "scenario.accrual");
    if (mode == "poisson") s.poisson_accrual = true;
    else if (mode == "deterministic") s.poisson_accrual = false;
    else throw ConfigError("scenario.accrual: unknown value '" + mode + "'");
  }
  switch (design.endpoint) {
    case EndpointKind::dichotomous:
      s.control_event_prob = as_number(r.require("control_event_prob"),
                                       "scenario.control_event_prob");
      s.treatment_event_prob = as_number(r.require("treatment_event_prob"),
                                         "scenario.treatment_event_prob");
      break;
    case EndpointKind::time_to_event:
      s.control_event_prob_at_cap =
          as_number(r.require("control_event_prob_at_cap"),
                    "scenario.control_event_prob_at_cap");
      s.hazard_ratio = as_number(r.require("hazard_ratio"),
                                 "scenario.hazard_ratio");
      break;
    case EndpointKind::ordinal: {
      s.control_simplex = as_vector(r.require("control_simplex"),
                                    "scenario.control_simplex");
      s.odds_ratio = as_number(r.require("odds_ratio"),
                               "scenario.odds_ratio");
      if (const json* v = r.optional("transition")) {
        if (v->is_string()) {
          if (as_string(*v, "scenario.transition") != "default") {
            throw ConfigError("scenario.transition: unknown preset");
          }
          s.transition = default_transition_matrix(
              static_cast<int>(s.control_simplex.size()));
        } else {
          s.transition = as_matrix(*v, "scenario.transition");
        }
      } else if (design.analysis == AnalysisModel::longitudinal) {
        s.transition = default_transition_matrix(
            static_cast<int>(s.control_simplex.size()));
      }
      if (const json* v = r.optional("external_n"))
        s.external_n = as_integer(*v, "scenario.external_n");
      if (const json* v = r.optional("external_odds_ratio"))
        s.external_odds_ratio = as_number(*v, "scenario.external_odds_ratio");
      if (const json* v = r.optional("external_control_simplex"))
        s.external_control_simplex =
            as_vector(*v, "scenario.external_control_simplex");
      break;
    }
    default:
      break;
  }
  r.finish();
  return s;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ObjectReader root(doc, "config");
  const std::string schema = as_string(root.require("schema"), "schema");
  if (schema != kConfigSchema) {
    throw ConfigError("config: unsupported schema '" + schema +
                      "' (expected " + std::string(kConfigSchema) + ")");
  }

  RunConfig config;
  config.design = parse_design(root.require("design"));
  config.scenario = parse_scenario(root.require("scenario"), config.design);

  {
    ObjectReader exec(root.require("execution"), "execution");
    config.execution.n_sims =
        as_integer(exec.require("n_sims"), "execution.n_sims");
    const json& seed = exec.require("master_seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
      throw ConfigError("execution.master_seed: expected an integer");
    }
    config.execution.master_seed = seed.get<std::uint64_t>();
    if (const json* v = exec.optional("parallelism"))
      config.execution.parallelism =
          static_cast<int>(as_integer(*v, "execution.parallelism"));
    exec.finish();
  }

  if (doc.contains("output")) {
    ObjectReader out(root.require("output"), "output");
    if (const json* v = out.optional("directory"))
      config.output.directory = as_string(*v, "output.directory");
    if (const json* v = out.optional("full_precision"))
      config.output.full_precision = as_bool(*v, "output.full_precision");
    out.finish();
  }
  root.finish();

  // Full semantic validation before any simulation starts.
  try {
    config.design.validate();
    config.scenario.validate(config.design);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (config.execution.n_sims < 1) {
    throw ConfigError("execution.n_sims must be >= 1");
  }
  if (config.execution.parallelism < 0) {
    throw ConfigError("execution.parallelism must be >= 0");
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string config_hash_hex(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  const std::string canonical = doc.dump();
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

}  // namespace ppsim
