#include "ppsim/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppsim {

std::string to_string(PpMethod method) {
  switch (method) {
    case PpMethod::npp: return "npp";
    case PpMethod::epp: return "epp";
    case PpMethod::ipp: return "ipp";
  }
  return "?";
}

std::string to_string(Decision decision) {
  switch (decision) {
    case Decision::continue_enrollment: return "continue";
    case Decision::stop_success: return "success";
    case Decision::stop_futility: return "futility";
  }
  return "?";
}

std::optional<PpMethod> pp_method_from_string(const std::string& name) {
  if (name == "npp") return PpMethod::npp;
  if (name == "epp") return PpMethod::epp;
  if (name == "ipp") return PpMethod::ipp;
  return std::nullopt;
}

bool DesignSpec::has_method(PpMethod m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

void DesignSpec::validate() const {
  if (endpoint == EndpointKind::continuous || endpoint == EndpointKind::count) {
    throw std::domain_error("design: unsupported endpoint for simulation");
  }
  if (n_max < 2) throw std::domain_error("design: n_max must be >= 2");
  if (interims.empty()) {
    throw std::domain_error("design: at least one interim is required");
  }
  long prev = 0;
  for (long trigger : interims) {
    if (trigger <= prev) {
      throw std::domain_error("design: interims must be strictly increasing");
    }
    prev = trigger;
  }
  if (interims.back() >= n_max) {
    throw std::domain_error("design: interims must be below n_max");
  }
  auto check_prob = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) {
      throw std::domain_error(std::string("design: ") + name +
                              " must be in (0, 1)");
    }
  };
  check_prob(success_threshold, "success_threshold");
  check_prob(futility_threshold, "futility_threshold");
  check_prob(alpha, "alpha");
  check_prob(eta, "eta");
  if (!(follow_up > 0.0)) {
    throw std::domain_error("design: follow_up must be positive");
  }
  if (analysis == AnalysisModel::longitudinal &&
      !(follow_up_30 > 0.0 && follow_up_30 < follow_up)) {
    throw std::domain_error(
        "design: longitudinal designs need 0 < follow_up_30 < follow_up");
  }
  if (methods.empty()) {
    throw std::domain_error("design: at least one pp method is required");
  }
  if (has_method(PpMethod::epp) && analysis == AnalysisModel::frequentist) {
    throw std::domain_error(
        "design: estimated-information method applies to modeling analyses");
  }
  if (decision_method.has_value() && !has_method(*decision_method)) {
    throw std::domain_error("design: decision method must be computed");
  }
  if (n_imputations < 100) {
    throw std::domain_error("design: n_imputations must be >= 100");
  }
  if (analysis != AnalysisModel::frequentist) {
    mcmc.validate();
    refit_mcmc.validate();
  }
  if (analysis == AnalysisModel::borrowing &&
      endpoint != EndpointKind::ordinal) {
    throw std::domain_error("design: borrowing analysis needs an ordinal "
                            "endpoint");
  }
  if (analysis == AnalysisModel::longitudinal &&
      endpoint != EndpointKind::ordinal) {
    throw std::domain_error("design: longitudinal analysis needs an ordinal "
                            "endpoint");
  }
}

namespace {
void check_simplex(const Eigen::VectorXd& simplex, const char* name) {
  if (simplex.size() < 2) {
    throw std::domain_error(std::string("scenario: ") + name +
                            " needs >= 2 categories");
  }
  if ((simplex.array() < 0.0).any()) {
    throw std::domain_error(std::string("scenario: ") + name +
                            " has negative mass");
  }
  if (std::abs(simplex.sum() - 1.0) > 1e-9) {
    throw std::domain_error(std::string("scenario: ") + name +
                            " must sum to 1");
  }
}
}  // namespace

void ScenarioSpec::validate(const DesignSpec& design) const {
  if (!(accrual_rate > 0.0)) {
    throw std::domain_error("scenario: accrual rate must be positive");
  }
  switch (design.endpoint) {
    case EndpointKind::dichotomous:
      for (double p : {control_event_prob, treatment_event_prob}) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw std::domain_error("scenario: event probabilities in [0, 1]");
        }
      }
      break;
    case EndpointKind::time_to_event:
      if (!(control_event_prob_at_cap > 0.0 &&
            control_event_prob_at_cap < 1.0)) {
        throw std::domain_error(
            "scenario: control event probability must be in (0, 1)");
      }
      if (!(hazard_ratio > 0.0)) {
        throw std::domain_error("scenario: hazard ratio must be positive");
      }
      break;
    case EndpointKind::ordinal: {
      check_simplex(control_simplex, "control simplex");
      if (!(odds_ratio > 0.0)) {
        throw std::domain_error("scenario: odds ratio must be positive");
      }
      const int k = static_cast<int>(control_simplex.size());
      if (design.analysis == AnalysisModel::longitudinal) {
        if (transition.rows() != k || transition.cols() != k) {
          throw std::domain_error("scenario: transition matrix must be K x K");
        }
        for (int j = 0; j < k; ++j) {
          check_simplex(transition.row(j).transpose(), "transition row");
        }
      }
      if (design.analysis == AnalysisModel::borrowing) {
        if (external_n < 2) {
          throw std::domain_error("scenario: external cohort too small");
        }
        if (!(external_odds_ratio > 0.0)) {
          throw std::domain_error(
              "scenario: external odds ratio must be positive");
        }
        if (external_control_simplex.size() > 0) {
          check_simplex(external_control_simplex, "external control simplex");
        }
      }
      break;
    }
    default:
      throw std::domain_error("scenario: unsupported endpoint");
  }
}

Eigen::VectorXd default_control_simplex() {
  Eigen::VectorXd s(6);
  s << 0.35, 0.25, 0.15, 0.10, 0.10, 0.05;
  return s;
}

Eigen::MatrixXd default_transition_matrix(int n_categories) {
  Eigen::MatrixXd t(n_categories, n_categories);
  for (int j = 0; j < n_categories; ++j) {
    double off_total = 0.0;
    for (int i = 0; i < n_categories; ++i) {
      if (i != j) off_total += std::pow(0.5, std::abs(i - j));
    }
    for (int i = 0; i < n_categories; ++i) {
      t(j, i) = (i == j) ? 0.6
                         : 0.4 * std::pow(0.5, std::abs(i - j)) / off_total;
    }
  }
  return t;
}

Eigen::VectorXd apply_odds_ratio(const Eigen::VectorXd& simplex,
                                 double odds_ratio) {
  const int k = static_cast<int>(simplex.size());
  Eigen::VectorXd out(k);
  double prev = 0.0;
  double cum = 0.0;
  for (int j = 0; j < k - 1; ++j) {
    cum += simplex[j];
    const double shifted = odds_ratio * cum / (1.0 + (odds_ratio - 1.0) * cum);
    out[j] = shifted - prev;
    prev = shifted;
  }
  out[k - 1] = 1.0 - prev;
  return out;
}

}  // namespace ppsim
