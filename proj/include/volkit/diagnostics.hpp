#pragma once

// Pre-modelling hypothesis tests: normality (Jarque-Bera, Anderson-Darling), serial
// correlation (Ljung-Box), ARCH effects (Engle's LM) and unit roots (augmented Dickey-Fuller).

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

namespace volkit {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  std::optional<int> df;  // degrees of freedom or lag order
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject_null = false;
};

/// p below 2.2e-16 renders as "< 2.2e-16", otherwise four significant digits.
std::string format_p_value(double p);

nlohmann::json to_json(const TestReport& report);
TestReport test_report_from_json(const nlohmann::json& j);

/// n (S^2 / 6 + (K - 3)^2 / 24) with K the raw (not excess) kurtosis.
double jarque_bera_statistic(std::size_t n, double skewness, double kurtosis);

TestReport jarque_bera(std::span<const double> x, double alpha = 0.05);

/// Composite normality test with mean and variance estimated; statistic is A^2 and the
/// p-value uses the small-sample adjusted A^2 (1 + 0.75/n + 2.25/n^2).
TestReport anderson_darling(std::span<const double> x, double alpha = 0.05);

/// Q = N (N + 2) sum_{k<=h} rho_k^2 / (N - k); requires 1 <= h < n / 2.
TestReport ljung_box(std::span<const double> x, int lags = 10, double alpha = 0.05);

/// Regresses x_t^2 on a constant and q lags of itself; LM = rows * R^2 ~ chi2(q).
/// Requires 1 <= q < n / 4.
TestReport arch_lm(std::span<const double> x, int lags = 12, double alpha = 0.05);

/// Regression with constant and trend; lag order picked by AIC up to max_lag
/// (default floor((n - 1)^(1/3))). The p-value is interpolated from the tabulated
/// tau distribution and clamped to [0.01, 0.99]. The null is a unit root.
TestReport adf_test(std::span<const double> x, std::optional<int> max_lag = std::nullopt, double alpha = 0.05);

/// Interpolated ADF p-value for a tau statistic at sample size n.
double adf_p_value(double tau, std::size_t n);

}  // namespace volkit
