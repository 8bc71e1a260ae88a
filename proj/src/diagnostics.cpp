#include "volkit/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <vector>

#include <Eigen/Dense>

#include "volkit/error.hpp"
#include "volkit/special.hpp"
#include "volkit/timeseries.hpp"

namespace volkit {

namespace {

constexpr double kPFloor = 2.2e-16;

TestReport make_report(std::string name, double statistic, std::optional<int> df, double p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  if (!std::isfinite(statistic)) throw Error(ErrorCode::kDegenerateSample, name + " statistic is not finite");
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.df = df;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.alpha = alpha;
  r.reject_null = r.p_value < alpha;
  return r;
}

void require_length(std::span<const double> x, std::size_t n, const char* test) {
  if (x.size() < n) {
    throw Error(ErrorCode::kSeriesTooShort, std::string(test) + " needs at least " + std::to_string(n) + " observations");
  }
}

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_err;
  double rss = 0.0;
  Eigen::Index rows = 0;
};

OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < design.cols()) throw Error(ErrorCode::kSingularRegression, "design matrix is rank deficient");
  OlsFit out;
  out.rows = design.rows();
  out.coef = qr.solve(y);
  out.rss = (y - design * out.coef).squaredNorm();
  const auto dof = design.rows() - design.cols();
  if (dof > 0) {
    const Eigen::MatrixXd xtx_inv = (design.transpose() * design).inverse();
    out.std_err = (xtx_inv.diagonal() * (out.rss / static_cast<double>(dof))).cwiseSqrt();
  }
  return out;
}

// Fuller's tau table for the regression with constant and trend.
constexpr std::array<double, 6> kAdfSizes = {25, 50, 100, 250, 500, 100000};
constexpr std::array<double, 8> kAdfProbs = {0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
constexpr std::array<std::array<double, 6>, 8> kAdfTable = {{
    {-4.38, -4.15, -4.04, -3.99, -3.98, -3.96},
    {-3.95, -3.80, -3.73, -3.69, -3.68, -3.66},
    {-3.60, -3.50, -3.45, -3.43, -3.42, -3.41},
    {-3.24, -3.18, -3.15, -3.13, -3.13, -3.12},
    {-1.14, -1.19, -1.22, -1.23, -1.24, -1.25},
    {-0.80, -0.87, -0.90, -0.92, -0.93, -0.94},
    {-0.50, -0.58, -0.62, -0.64, -0.65, -0.66},
    {-0.15, -0.24, -0.28, -0.31, -0.32, -0.33},
}};

// Piecewise-linear interpolation with constant extrapolation.
template <std::size_t N>
double interpolate(const std::array<double, N>& xs, const std::array<double, N>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  for (std::size_t i = 1; i < N; ++i) {
    if (x <= xs[i]) {
      const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
  }
  return ys.back();
}

struct AdfRegression {
  OlsFit fit;
  double tau = 0.0;
};

// Delta y_t on [1, t, y_{t-1}, dy_{t-1..t-lag}] for t = first .. n-1 (0-based levels).
AdfRegression adf_regression(std::span<const double> y, int lag, std::size_t first) {
  const std::size_t n = y.size();
  const auto rows = static_cast<Eigen::Index>(n - first);
  Eigen::MatrixXd design(rows, 3 + lag);
  Eigen::VectorXd response(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = first + static_cast<std::size_t>(r);
    response(r) = y[t] - y[t - 1];
    design(r, 0) = 1.0;
    design(r, 1) = static_cast<double>(t + 1);
    design(r, 2) = y[t - 1];
    for (int j = 1; j <= lag; ++j) design(r, 2 + j) = y[t - j] - y[t - j - 1];
  }
  AdfRegression out;
  out.fit = ols(design, response);
  out.tau = out.fit.coef(2) / out.fit.std_err(2);
  return out;
}

}  // namespace

std::string format_p_value(double p) {
  if (p < kPFloor) return "< 2.2e-16";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", p);
  return buf;
}

nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["df"] = r.df ? nlohmann::json(*r.df) : nlohmann::json(nullptr);
  j["p_value"] = r.p_value;
  j["p_display"] = format_p_value(r.p_value);
  j["alpha"] = r.alpha;
  j["reject_null"] = r.reject_null;
  return j;
}

TestReport test_report_from_json(const nlohmann::json& j) {
  TestReport r;
  r.name = j.at("name").get<std::string>();
  r.statistic = j.at("statistic").get<double>();
  if (!j.at("df").is_null()) r.df = j.at("df").get<int>();
  r.p_value = j.at("p_value").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.reject_null = j.at("reject_null").get<bool>();
  return r;
}

double jarque_bera_statistic(std::size_t n, double skewness, double kurtosis) {
  const double excess = kurtosis - 3.0;
  return static_cast<double>(n) * (skewness * skewness / 6.0 + excess * excess / 24.0);
}

TestReport jarque_bera(std::span<const double> x, double alpha) {
  require_length(x, 8, "Jarque-Bera");
  const auto stats = descriptive_stats(x);
  if (!(stats.std_dev > 0.0)) throw Error(ErrorCode::kDegenerateSample, "Jarque-Bera on a constant sample");
  const double jb = jarque_bera_statistic(x.size(), stats.skewness, stats.excess_kurtosis + 3.0);
  return make_report("jarque_bera", jb, 2, special::chi_squared_upper_tail(jb, 2.0), alpha);
}

TestReport anderson_darling(std::span<const double> x, double alpha) {
  require_length(x, 8, "Anderson-Darling");
  const double n = static_cast<double>(x.size());
  const double mean = sample_mean(x);
  const double sd = std::sqrt(sample_variance(x));
  if (!(sd > 0.0)) throw Error(ErrorCode::kDegenerateSample, "Anderson-Darling on a constant sample");
  std::vector<double> z(x.begin(), x.end());
  std::sort(z.begin(), z.end());
  for (double& v : z) v = (v - mean) / sd;
  double sum = 0.0;
  const std::size_t m = z.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double weight = 2.0 * static_cast<double>(i + 1) - 1.0;
    sum += weight * (special::normal_log_cdf(z[i]) + special::normal_log_cdf(-z[m - 1 - i]));
  }
  const double a2 = -n - sum / n;
  const double adjusted = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
  double p = 0.0;
  if (adjusted < 0.2) {
    p = 1.0 - std::exp(-13.436 + 101.14 * adjusted - 223.73 * adjusted * adjusted);
  } else if (adjusted < 0.34) {
    p = 1.0 - std::exp(-8.318 + 42.796 * adjusted - 59.938 * adjusted * adjusted);
  } else if (adjusted < 0.6) {
    p = std::exp(0.9177 - 4.279 * adjusted - 1.38 * adjusted * adjusted);
  } else if (adjusted < 10.0) {
    p = std::exp(1.2937 - 5.709 * adjusted + 0.0186 * adjusted * adjusted);
  } else {
    p = 3.7e-24;
  }
  return make_report("anderson_darling", a2, std::nullopt, p, alpha);
}

TestReport ljung_box(std::span<const double> x, int lags, double alpha) {
  const std::size_t n = x.size();
  if (lags < 1 || static_cast<double>(lags) >= static_cast<double>(n) / 2.0) {
    throw Error(ErrorCode::kLagOutOfRange, "Ljung-Box needs 1 <= h < n/2, got h = " + std::to_string(lags));
  }
  const double mean = sample_mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (!(denom > 0.0)) throw Error(ErrorCode::kDegenerateSample, "Ljung-Box on a constant sample");
  const double dn = static_cast<double>(n);
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) num += (x[t] - mean) * (x[t - k] - mean);
    const double rho = num / denom;
    q += rho * rho / (dn - k);
  }
  q *= dn * (dn + 2.0);
  return make_report("ljung_box", q, lags, special::chi_squared_upper_tail(q, lags), alpha);
}

TestReport arch_lm(std::span<const double> x, int lags, double alpha) {
  const std::size_t n = x.size();
  if (lags < 1 || static_cast<double>(lags) >= static_cast<double>(n) / 4.0) {
    throw Error(ErrorCode::kLagOutOfRange, "ARCH-LM needs 1 <= q < n/4, got q = " + std::to_string(lags));
  }
  const auto rows = static_cast<Eigen::Index>(n) - lags;
  Eigen::MatrixXd design(rows, lags + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto t = static_cast<std::size_t>(r + lags);
    y(r) = x[t] * x[t];
    design(r, 0) = 1.0;
    for (int j = 1; j <= lags; ++j) design(r, j) = x[t - j] * x[t - j];
  }
  const double tss = (y.array() - y.mean()).square().sum();
  if (!(tss > 0.0)) throw Error(ErrorCode::kSingularRegression, "squared series is constant");
  const auto fit = ols(design, y);
  const double r2 = std::max(0.0, 1.0 - fit.rss / tss);
  const double lm = static_cast<double>(rows) * r2;
  return make_report("arch_lm", lm, lags, special::chi_squared_upper_tail(lm, lags), alpha);
}

double adf_p_value(double tau, std::size_t n) {
  std::array<double, 8> critical{};
  for (std::size_t i = 0; i < kAdfProbs.size(); ++i) {
    critical[i] = interpolate(kAdfSizes, kAdfTable[i], static_cast<double>(n));
  }
  return std::clamp(interpolate(critical, kAdfProbs, tau), 0.01, 0.99);
}

TestReport adf_test(std::span<const double> x, std::optional<int> max_lag, double alpha) {
  require_length(x, 30, "ADF");
  const std::size_t n = x.size();
  const int upper = max_lag.value_or(static_cast<int>(std::floor(std::cbrt(static_cast<double>(n) - 1.0))));
  if (upper < 0 || static_cast<std::size_t>(upper) + 10 >= n) {
    throw Error(ErrorCode::kLagOutOfRange, "ADF max_lag out of range");
  }
  // Compare lag orders on the common estimation sample.
  const auto common_first = static_cast<std::size_t>(upper) + 1;
  int chosen = 0;
  double best_aic = INFINITY;
  for (int lag = 0; lag <= upper; ++lag) {
    const auto reg = adf_regression(x, lag, common_first);
    const double rows = static_cast<double>(reg.fit.rows);
    const double aic = rows * std::log(reg.fit.rss / rows) + 2.0 * (lag + 3);
    if (aic < best_aic) {
      best_aic = aic;
      chosen = lag;
    }
  }
  const auto final_fit = adf_regression(x, chosen, static_cast<std::size_t>(chosen) + 1);
  return make_report("adf", final_fit.tau, chosen, adf_p_value(final_fit.tau, n), alpha);
}

}  // namespace volkit
