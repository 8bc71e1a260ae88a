#pragma once

// Special functions shared by the innovation densities and the hypothesis tests.

namespace volkit::special {

/// Modified Bessel function of the second kind, order one. Requires x > 0.
double bessel_k1(double x);

/// exp(x) * K1(x); finite for every x > 0.
double bessel_k1_scaled(double x);

/// log K1(x) without overflow or underflow.
double log_bessel_k1(double x);

/// P(X > x) for X ~ chi-squared(df).
double chi_squared_upper_tail(double x, double df);

double normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double normal_log_cdf(double x);
double normal_quantile(double p);

}  // namespace volkit::special
