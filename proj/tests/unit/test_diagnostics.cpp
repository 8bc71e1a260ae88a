#include <cmath>
#include <random>

#include "catch2/catch_amalgamated.hpp"
#include "volkit/diagnostics.hpp"
#include "volkit/error.hpp"
#include "volkit/garch.hpp"

using namespace volkit;
using Catch::Approx;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

// Deterministic, mildly non-normal and strongly autocorrelated series.
std::vector<double> wave() {
  std::vector<double> x;
  for (int i = 1; i <= 300; ++i) {
    const double s = std::sin(2.9 * i);
    x.push_back(std::sin(0.37 * i) * (1 + 0.5 * std::cos(0.11 * i)) + 0.3 * s * s * s);
  }
  return x;
}

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

}  // namespace

// Reference values below were produced by scipy / statsmodels on the same series.

TEST_CASE("Jarque-Bera", "[diagnostics]") {
  CHECK(jarque_bera_statistic(100, 1.0, 6.0) == Approx(54.1667).margin(1e-4));
  const std::vector<double> null_case{-1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 1};
  const auto zero = jarque_bera(null_case);
  CHECK(zero.statistic == Approx(0.0).margin(1e-12));
  CHECK(zero.p_value == Approx(1.0).margin(1e-12));
  CHECK_FALSE(zero.reject_null);
  const auto r = jarque_bera(wave());
  CHECK(r.statistic == Approx(8.932913112028748).epsilon(1e-10));
  CHECK(r.p_value == Approx(0.01148795072418953).epsilon(1e-9));
  CHECK(r.df == 2);
  CHECK(r.reject_null);
  CHECK(r.name == "jarque_bera");
}

TEST_CASE("Anderson-Darling", "[diagnostics]") {
  const auto r = anderson_darling(wave());
  CHECK(r.statistic == Approx(1.1419612107182502).epsilon(1e-10));
  CHECK(r.p_value == Approx(0.0054190230396263).epsilon(1e-8));
  CHECK(r.reject_null);
  std::vector<double> t3(2000);
  std::mt19937_64 rng(3);
  std::student_t_distribution<double> t(3.0);
  for (double& v : t3) v = t(rng);
  CHECK(anderson_darling(t3).reject_null);
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) accepted += anderson_darling(normal_draws(2000, seed)).reject_null ? 0 : 1;
  CHECK(accepted >= 90);
}

TEST_CASE("Ljung-Box", "[diagnostics]") {
  const auto x = wave();
  const auto r = ljung_box(x, 10);
  CHECK(r.statistic == Approx(1341.8953312351114).epsilon(1e-10));
  CHECK(r.df == 10);
  CHECK(r.p_value < 1e-200);
  std::vector<double> squared;
  for (double v : x) squared.push_back(v * v);
  const auto s = ljung_box(squared, 5);
  CHECK(s.statistic == Approx(182.42261085155965).epsilon(1e-10));
  CHECK(s.p_value == Approx(1.6255207106406285e-37).epsilon(1e-6));

  // x = [1, 0, ..., 0, -1] has zero mean and zero autocovariance at lags 1..h.
  std::vector<double> flat(20, 0.0);
  flat.front() = 1.0;
  flat.back() = -1.0;
  const auto q0 = ljung_box(flat, 5);
  CHECK(q0.statistic == Approx(0.0).margin(1e-14));
  CHECK(q0.p_value == Approx(1.0));
  CHECK(code_of([&] { ljung_box(flat, 10); }) == ErrorCode::kLagOutOfRange);
  CHECK(code_of([&] { ljung_box(flat, 0); }) == ErrorCode::kLagOutOfRange);
  CHECK(code_of([] { ljung_box(std::vector<double>(30, 2.0), 3); }) == ErrorCode::kDegenerateSample);
}

TEST_CASE("ARCH-LM", "[diagnostics]") {
  const auto r = arch_lm(wave(), 12);
  CHECK(r.statistic == Approx(278.90026730423136).epsilon(1e-9));
  CHECK(r.p_value == Approx(1.2480422312889732e-52).epsilon(1e-6));
  CHECK(r.df == 12);

  // Squares with period [1, 2, 2, 1] are uncorrelated with their first lag.
  std::vector<double> x;
  const double pattern[] = {1, std::sqrt(2.0), -std::sqrt(2.0), -1};
  for (int i = 0; i < 4 * 25 + 1; ++i) x.push_back(pattern[i % 4]);
  const auto zero = arch_lm(x, 1);
  CHECK(zero.statistic == Approx(0.0).margin(1e-10));
  CHECK(zero.p_value == Approx(1.0).margin(1e-6));

  const auto garch = simulate_path({Model::kSGarch, 0.1, 0.3, 0.6, 0.0, InnovationSpec::ged(2.0)}, 5000, 1.0, 6).returns;
  CHECK(arch_lm(garch, 5).reject_null);
  CHECK(code_of([&] { arch_lm(x, 30); }) == ErrorCode::kLagOutOfRange);
  CHECK(code_of([] { arch_lm(std::vector<double>(60, 1.0), 2); }) == ErrorCode::kSingularRegression);
}

TEST_CASE("augmented Dickey-Fuller", "[diagnostics]") {
  const auto x = wave();
  std::vector<double> level;
  double sum = 0.0;
  for (double v : x) level.push_back(sum += v);

  const auto fixed0 = adf_test(level, 0);
  CHECK(fixed0.statistic == Approx(-3.463246456394837).epsilon(1e-9));
  CHECK(fixed0.df == 0);
  const auto chosen = adf_test(level, 6);
  CHECK(chosen.df == 6);
  CHECK(chosen.statistic == Approx(-9.354685601090504).epsilon(1e-9));
  const auto on_x = adf_test(x, 6);
  CHECK(on_x.df == 6);
  CHECK(on_x.statistic == Approx(-3.819427007010077).epsilon(1e-9));

  // Tabulated critical values are reproduced exactly at the grid points.
  CHECK(adf_p_value(-3.45, 100) == Approx(0.05).epsilon(1e-12));
  CHECK(adf_p_value(-3.13, 250) == Approx(0.10).epsilon(1e-12));
  CHECK(adf_p_value(-3.60, 25) == Approx(0.05).epsilon(1e-12));
  CHECK(adf_p_value(-1.24, 500) == Approx(0.90).epsilon(1e-12));
  // Halfway between the 5% and 10% points at n = 100.
  CHECK(adf_p_value(-3.30, 100) == Approx(0.075).epsilon(1e-12));
  CHECK(adf_p_value(-10.0, 2000) == 0.01);
  CHECK(adf_p_value(2.0, 2000) == 0.99);

  const auto noise = normal_draws(2000, 12);
  const auto stationary = adf_test(noise);
  CHECK(stationary.p_value == 0.01);
  CHECK(stationary.reject_null);
  std::vector<double> walk;
  sum = 0.0;
  for (double v : normal_draws(2000, 13)) walk.push_back(sum += v);
  CHECK_FALSE(adf_test(walk).reject_null);
  CHECK(code_of([&] { adf_test(noise, -1); }) == ErrorCode::kLagOutOfRange);
}

TEST_CASE("p-value rendering and JSON", "[diagnostics]") {
  CHECK(format_p_value(1e-20) == "< 2.2e-16");
  CHECK(format_p_value(0.0) == "< 2.2e-16");
  CHECK(format_p_value(7.835e-05) == "7.835e-05");
  CHECK(format_p_value(0.01) == "0.01");
  CHECK(format_p_value(0.123456) == "0.1235");
  const auto r = jarque_bera(wave(), 0.01);
  const auto j = to_json(r);
  for (const char* key : {"name", "statistic", "df", "p_value", "p_display", "alpha", "reject_null"}) CHECK(j.contains(key));
  CHECK(j["alpha"] == 0.01);
  CHECK_FALSE(j["reject_null"].get<bool>());
  const auto back = test_report_from_json(j);
  CHECK(back.name == r.name);
  CHECK(back.statistic == r.statistic);
  CHECK(back.df == r.df);
  CHECK(back.p_value == r.p_value);
  CHECK(back.reject_null == r.reject_null);
}

TEST_CASE("size and power on simulated data", "[diagnostics]") {
  int jb_accept = 0;
  for (std::uint64_t seed = 100; seed < 200; ++seed) jb_accept += jarque_bera(normal_draws(2000, seed)).reject_null ? 0 : 1;
  CHECK(jb_accept >= 90);
  std::vector<double> t3(2000);
  std::mt19937_64 rng(3);
  std::student_t_distribution<double> t(3.0);
  for (double& v : t3) v = t(rng);
  const auto heavy = jarque_bera(t3);
  CHECK(heavy.reject_null);
  CHECK(format_p_value(heavy.p_value) == "< 2.2e-16");
}
