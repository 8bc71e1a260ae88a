#include "volkit/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "volkit/error.hpp"

namespace volkit::special {

namespace {

// Chebyshev expansion of exp(x) * sqrt(x) * K1(x) on x >= 2 in u = 4/x - 1.
constexpr std::array<double, 26> kK1Large = {
    1.360313095242221334723,      0.1039237365768172384374,     -0.0028578168596227793868,
    0.0001952155184713516311077,  -0.0000193619797416608296002, 0.000002406484947837217117059,
    -3.501960603087812542096e-7,  5.741084125450049292307e-8,   -1.034576246567809702666e-8,
    2.015049755197034616148e-9,   -4.190354759341925584241e-10, 9.218315187605314125826e-11,
    -2.129967838427791021553e-11, 5.139639673482343540396e-12,  -1.289173960949822935196e-12,
    3.348419666052243120094e-13,  -8.976705182010146069111e-14, 2.477154424219598681247e-14,
    -7.019837089214768849332e-15, 2.038703166239860875455e-15,  -6.057047270643017721228e-16,
    1.838093575243045193973e-16,  -5.689462849193643067534e-17, 1.794051047886345071565e-17,
    -5.756744482073019642899e-18, 1.877865190161668851706e-18,
};

double clenshaw(double u) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = kK1Large.size() - 1; j > 0; --j) {
    const double b0 = 2.0 * u * b1 - b2 + kK1Large[j];
    b2 = b1;
    b1 = b0;
  }
  return u * b1 - b2 + kK1Large[0];
}

// Ascending series, used for 0 < x <= 2.
double k1_series(double x) {
  const double half = 0.5 * x;
  const double q = half * half;
  constexpr double kEulerGamma = std::numbers::egamma;
  double psi_k1 = -kEulerGamma;       // psi(k + 1)
  double psi_k2 = 1.0 - kEulerGamma;  // psi(k + 2)
  double term = 1.0;                  // q^k / (k! (k+1)!)
  double i1_sum = 0.0;
  double psi_sum = 0.0;
  for (int k = 0; k < 40; ++k) {
    i1_sum += term;
    psi_sum += (psi_k1 + psi_k2) * term;
    psi_k1 += 1.0 / (k + 1);
    psi_k2 += 1.0 / (k + 2);
    term *= q / ((k + 1.0) * (k + 2.0));
    if (term < 1e-18 * i1_sum) break;
  }
  const double i1 = half * i1_sum;
  return 1.0 / x + std::log(half) * i1 - 0.5 * half * psi_sum;
}

void require_positive(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::kInvalidArgument, "Bessel K1 argument must be positive");
}

}  // namespace

double bessel_k1(double x) {
  require_positive(x);
  if (x <= 2.0) return k1_series(x);
  return std::exp(-x) * clenshaw(4.0 / x - 1.0) / std::sqrt(x);
}

double bessel_k1_scaled(double x) {
  require_positive(x);
  if (x <= 2.0) return std::exp(x) * k1_series(x);
  return clenshaw(4.0 / x - 1.0) / std::sqrt(x);
}

double log_bessel_k1(double x) {
  require_positive(x);
  if (x <= 2.0) return std::log(k1_series(x));
  return -x - 0.5 * std::log(x) + std::log(clenshaw(4.0 / x - 1.0));
}

double chi_squared_upper_tail(double x, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::kInvalidArgument, "chi-squared df must be positive");
  if (std::isnan(x)) throw Error(ErrorCode::kInvalidArgument, "chi-squared statistic is NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_log_cdf(double x) {
  if (x > -30.0) return std::log(normal_cdf(x));
  // Mills-ratio asymptotic series.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::kPOutOfRange, "normal quantile needs 0 < p < 1");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace volkit::special
