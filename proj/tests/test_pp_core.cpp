#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ppsim/normal.hpp"
#include "ppsim/pp_core.hpp"

using namespace ppsim;

TEST_SUITE("pp_core") {

TEST_CASE("information fraction enforces the open interval") {
  CHECK(InformationFraction(0.5).value() == 0.5);
  CHECK_THROWS_AS(InformationFraction(0.0), std::domain_error);
  CHECK_THROWS_AS(InformationFraction(1.0), std::domain_error);
  CHECK_THROWS_AS(InformationFraction(-0.1), std::domain_error);
  CHECK_THROWS_AS(InformationFraction(1.5), std::domain_error);
  CHECK(InformationFraction::from_counts(235, 500).value() ==
        doctest::Approx(0.47));
  CHECK_THROWS_AS(InformationFraction::from_counts(500, 500),
                  std::domain_error);
  CHECK_THROWS_AS(InformationFraction::from_counts(0, 500), std::domain_error);
}

TEST_CASE("symmetry case: equivocal data at half information") {
  const double pp = approx_pp(0.5, InformationFraction(0.5), 0.025);
  CHECK(pp == doctest::Approx(0.025).epsilon(1e-9));
}

// Frozen from a 50-digit evaluation of the closed form. Note the SHINE
// interim-1 inputs give 0.1956, not the published 0.182 (the published
// table's exact assumptions are not recoverable).
TEST_CASE("direct evaluation at the SHINE interim-1 inputs") {
  const double pp =
      approx_pp(0.3535, InformationFraction(432.0 / 1400.0), 0.025);
  CHECK(pp == doctest::Approx(0.19564203301669518).epsilon(1e-9));
}

TEST_CASE("vanishing interim information approaches 1 - p") {
  const double pp = approx_pp(0.10, InformationFraction(1e-9), 0.025);
  CHECK(pp == doctest::Approx(0.90).epsilon(1e-4));
}

TEST_CASE("bayesian form equals the frequentist form under substitution") {
  for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    for (double r : {0.1, 0.5, 0.9}) {
      for (double alpha : {0.025, 0.1}) {
        const InformationFraction frac(r);
        CHECK(approx_pp_bayes(1.0 - p, frac, 1.0 - alpha) ==
              doctest::Approx(approx_pp(p, frac, alpha)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("bayesian symmetry case") {
  CHECK(approx_pp_bayes(0.5, InformationFraction(0.5), 0.975) ==
        doctest::Approx(0.025).epsilon(1e-9));
}

// Frozen from the 50-digit oracle evaluation of the Bayesian closed form
// at (0.95, 0.25, 0.975).
TEST_CASE("bayesian direct evaluation") {
  CHECK(approx_pp_bayes(0.95, InformationFraction(0.25), 0.975) ==
        doctest::Approx(0.77867549257987573).epsilon(1e-9));
}

TEST_CASE("evidence/criterion dispatch") {
  const InformationFraction r(0.25);
  const auto freq = InterimEvidence::p_value(0.05);
  const auto bayes = InterimEvidence::posterior_probability(0.95);
  CHECK(approx_pp(freq, r, SuccessCriterion::alpha_level(0.025)) ==
        doctest::Approx(approx_pp(0.05, r, 0.025)));
  CHECK(approx_pp(bayes, r, SuccessCriterion::posterior_threshold(0.975)) ==
        doctest::Approx(approx_pp_bayes(0.95, r, 0.975)));
  CHECK_THROWS_AS(
      approx_pp(freq, r, SuccessCriterion::posterior_threshold(0.975)),
      std::domain_error);
  CHECK_THROWS_AS(approx_pp(bayes, r, SuccessCriterion::alpha_level(0.025)),
                  std::domain_error);
}

TEST_CASE("inversion: trivial and frozen values") {
  CHECK(invert_pp(0.025, InformationFraction(0.5), 0.025) ==
        doctest::Approx(0.5).epsilon(1e-9));
  // Frozen from the 50-digit oracle.
  CHECK(invert_pp(0.5, InformationFraction(0.25), 0.025) ==
        doctest::Approx(0.16354750384557035).epsilon(1e-9));
}

TEST_CASE("round trip over the spec grid stays below 1e-10") {
  for (double p = 0.001; p < 1.0; p += 0.02) {
    for (double r = 0.05; r < 0.96; r += 0.05) {
      const InformationFraction frac(r);
      const double pp = approx_pp(p, frac, 0.025);
      if (pp <= 1e-12 || pp >= 1.0 - 1e-12) continue;  // clamped extremes
      CHECK(std::abs(invert_pp(pp, frac, 0.025) - p) < 1e-10);
    }
  }
}

TEST_CASE("monotonicity in p and alpha") {
  const InformationFraction r(0.4);
  double prev = 2.0;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double pp = approx_pp(p, r, 0.025);
    CHECK(pp < prev);
    prev = pp;
  }
  prev = -1.0;
  for (double alpha = 0.005; alpha < 0.5; alpha += 0.02) {
    const double pp = approx_pp(0.15, r, alpha);
    CHECK(pp > prev);
    prev = pp;
  }
}

TEST_CASE("limits as information completes") {
  const InformationFraction r(1.0 - 1e-6);
  CHECK(approx_pp(0.10, r, 0.025) == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(approx_pp(0.01, r, 0.025) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(approx_pp(0.025, r, 0.025) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("strong interim data make PP rise again near full information") {
  CHECK(approx_pp(0.01, InformationFraction(0.99), 0.025) >
        approx_pp(0.01, InformationFraction(0.60), 0.025));
}

TEST_CASE("futility onsets match the published rule-of-thumb values") {
  CHECK(futility_onset(0.20, 0.025).value() ==
        doctest::Approx(0.15568346238032).epsilon(1e-9));
  CHECK(futility_onset(0.10, 0.025).value() ==
        doctest::Approx(0.29949386578986).epsilon(1e-9));
  CHECK(futility_onset(0.05, 0.025).value() ==
        doctest::Approx(0.41324920025057).epsilon(1e-9));
}

TEST_CASE("futility onset is the equivocal-data crossing and decreases in "
          "the threshold") {
  double prev = 0.0;
  for (double threshold : {0.30, 0.20, 0.10, 0.05, 0.01}) {
    const auto r_star = futility_onset(threshold, 0.025);
    CHECK(approx_pp(0.5, r_star, 0.025) ==
          doctest::Approx(threshold).epsilon(1e-9));
    CHECK(r_star.value() > prev);
    prev = r_star.value();
  }
  CHECK_THROWS_AS(futility_onset(0.5, 0.025), std::domain_error);
  CHECK_THROWS_AS(futility_onset(0.7, 0.025), std::domain_error);
}

TEST_CASE("posterior given interim") {
  const CanonicalState zero{0.0, 100.0, 200.0};
  CHECK(posterior_given_interim(zero).mean == doctest::Approx(0.0));
  CHECK(posterior_given_interim(zero).variance == doctest::Approx(0.01));

  const CanonicalState state{2.0, 50.0, 100.0};
  CHECK(posterior_given_interim(state).mean ==
        doctest::Approx(0.28284271247461901).epsilon(1e-12));
  CHECK(posterior_given_interim(state).variance == doctest::Approx(0.02));

  const CanonicalState doubled{2.0, 100.0, 200.0};
  CHECK(posterior_given_interim(doubled).variance ==
        doctest::Approx(posterior_given_interim(state).variance / 2.0));
}

TEST_CASE("predictive of the remaining data") {
  const CanonicalState state{2.0, 50.0, 100.0};
  const auto pred = predictive_of_remaining(state);
  CHECK(pred.mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pred.variance == doctest::Approx(2.0).epsilon(1e-12));

  const CanonicalState zero{0.0, 20.0, 60.0};
  CHECK(predictive_of_remaining(zero).mean == doctest::Approx(0.0));
  CHECK(predictive_of_remaining(zero).variance == doctest::Approx(3.0));
}

// Marginalizing the sampling model over the flat-prior posterior must
// reproduce the predictive moments (conjugate normal algebra).
TEST_CASE("posterior and sampling model compose to the predictive") {
  const CanonicalState state{1.3, 40.0, 90.0};
  const auto post = posterior_given_interim(state);
  const double remaining = state.info_final - state.info_interim;
  const double mean = post.mean * std::sqrt(remaining);
  const double variance = 1.0 + post.variance * remaining;
  const auto pred = predictive_of_remaining(state);
  CHECK(mean == doctest::Approx(pred.mean).epsilon(1e-12));
  CHECK(variance == doctest::Approx(pred.variance).epsilon(1e-12));
}

TEST_CASE("canonical state validates information ordering") {
  CHECK_THROWS_AS(CanonicalState(1.0, 100.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(CanonicalState(1.0, 0.0, 100.0), std::domain_error);
}

TEST_CASE("probabilities just inside the interval are clamped, not rejected") {
  const InformationFraction r(0.5);
  const double a = approx_pp(1e-15, r, 0.025);
  const double b = approx_pp(1e-12, r, 0.025);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  CHECK_THROWS_AS(approx_pp(0.0, r, 0.025), std::domain_error);
  CHECK_THROWS_AS(approx_pp(1.0, r, 0.025), std::domain_error);
  CHECK_THROWS_AS(approx_pp(0.5, r, 0.0), std::domain_error);
}

}  // TEST_SUITE
