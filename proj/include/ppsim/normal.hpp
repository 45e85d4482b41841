#pragma once

namespace ppsim {

// Standard normal CDF. Built on erfc, absolute error < 1e-15.
double normal_cdf(double x);

// Standard normal density.
double normal_pdf(double x);

// Inverse standard normal CDF. Rational approximation refined by one
// Halley step against normal_cdf; absolute error below 1e-13 on
// [1e-300, 1 - 1e-16]. Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

}  // namespace ppsim
