#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "catch2/catch_amalgamated.hpp"
#include "volkit/distributions.hpp"
#include "volkit/error.hpp"

using namespace volkit;
using Catch::Approx;

namespace {

// Oracles written from the textbook forms, sharing no code with the library.

double t_oracle(double v, double z) {
  const double s = std::sqrt(v / (v - 2.0));
  return s * boost::math::pdf(boost::math::students_t_distribution<double>(v), z * s);
}

double ged_log_oracle(double v, double z) {
  const double lambda = std::sqrt(std::pow(2.0, -2.0 / v) * std::tgamma(1.0 / v) / std::tgamma(3.0 / v));
  return std::log(v) - 0.5 * std::pow(std::abs(z / lambda), v) - std::log(lambda * std::pow(2.0, 1.0 + 1.0 / v) * std::tgamma(1.0 / v));
}

double ged_oracle(double v, double z) { return std::exp(ged_log_oracle(v, z)); }

double nig_oracle(double a, double k, double z) {
  const double g = std::sqrt(a * a - k * k);
  const double delta = g * g * g / (a * a);
  const double mu = -delta * k / g;
  const double q = std::hypot(delta, z - mu);
  const double bessel = boost::math::cyl_bessel_k(1, a * q);
  if (bessel == 0.0) return 0.0;
  return a * delta / (std::numbers::pi * q) * bessel * std::exp(delta * g + k * (z - mu));
}

// Integral over the real line split at zero.
template <class F>
double integrate_line(F f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity()) +
         integrator.integrate([&](double t) { return f(-t); }, 0.0, std::numeric_limits<double>::infinity());
}

// Split at zero, where the GED density has a cusp for v <= 1.
template <class F>
double integrate_below(F f, double upper) {
  boost::math::quadrature::exp_sinh<double> tail;
  const double split = std::min(upper, 0.0);
  double total = tail.integrate([&](double t) { return f(split - t); }, 0.0, std::numeric_limits<double>::infinity());
  if (upper > 0.0) total += boost::math::quadrature::tanh_sinh<double>().integrate(f, 0.0, upper);
  return total;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

std::vector<InnovationSpec> sample_specs() {
  return {InnovationSpec::student_t(2.5), InnovationSpec::student_t(5.0),  InnovationSpec::student_t(40.0),
          InnovationSpec::ged(0.7),       InnovationSpec::ged(1.3),        InnovationSpec::ged(2.0),
          InnovationSpec::ged(4.0),       InnovationSpec::nig(1.0, 0.0),   InnovationSpec::nig(0.4, -0.2),
          InnovationSpec::nig(2.0, 1.0),  InnovationSpec::nig(6.0, -4.5)};
}

}  // namespace

TEST_CASE("log densities match independent oracles", "[distributions]") {
  for (double z : {-9.0, -3.1, -1.0, -0.2, 0.0, 0.3, 1.7, 4.4, 12.0}) {
    INFO("z = " << z);
    for (double v : {2.2, 3.0, 5.0, 30.0}) CHECK(log_pdf(InnovationSpec::student_t(v), z) == Approx(std::log(t_oracle(v, z))).epsilon(1e-12));
    for (double v : {0.6, 1.0, 1.5, 2.0, 3.5}) CHECK(log_pdf(InnovationSpec::ged(v), z) == Approx(ged_log_oracle(v, z)).epsilon(1e-12));
    for (auto [a, k] : {std::pair{1.0, 0.0}, {0.5, 0.3}, {2.0, -1.5}, {8.0, 2.0}}) {
      CHECK(log_pdf(InnovationSpec::nig(a, k), z) == Approx(std::log(nig_oracle(a, k, z))).epsilon(1e-11));
    }
  }
}

TEST_CASE("limits: GED(2) and large-v t are standard normal", "[distributions]") {
  CHECK(log_pdf(InnovationSpec::ged(2.0), 0.0) == Approx(std::log(0.3989423)).margin(1e-6));
  CHECK(log_pdf(InnovationSpec::ged(2.0), 0.0) == Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));
  CHECK(pdf(InnovationSpec::student_t(1e6), 1.0) == Approx(std::exp(-0.5) / std::sqrt(2 * std::numbers::pi)).margin(1e-4));
}

TEST_CASE("StandardizedDensity agrees with the free function", "[distributions]") {
  for (const auto& spec : sample_specs()) {
    const StandardizedDensity d(spec);
    for (double z : {-5.0, -0.5, 0.0, 2.5}) CHECK(d.log_pdf(z) == log_pdf(spec, z));
  }
}

TEST_CASE("NIG standardization constants", "[distributions]") {
  const auto unit = standardize_nig(1.0, 0.0);
  CHECK(unit.alpha == 1.0);
  CHECK(unit.kappa == 0.0);
  CHECK(unit.mu == Approx(0.0).margin(1e-15));
  CHECK(unit.delta == Approx(1.0));
  const auto skewed = standardize_nig(2.0, 1.0);
  CHECK(skewed.delta == Approx(3.0 * std::sqrt(3.0) / 4.0).epsilon(1e-14));
  CHECK(skewed.delta == Approx(1.29904).margin(1e-5));
  CHECK(skewed.mu == Approx(-0.75).epsilon(1e-14));
}

TEST_CASE("every spec integrates to a zero-mean unit-variance law", "[distributions]") {
  for (const auto& spec : sample_specs()) {
    INFO(to_string(spec.family) << " " << spec.shape << " " << spec.skew);
    auto f = [&](double z) { return pdf(spec, z); };
    CHECK(integrate_line(f) == Approx(1.0).margin(1e-8));
    CHECK(integrate_line([&](double z) { return z * f(z); }) == Approx(0.0).margin(1e-8));
    if (spec.family != Family::kStudentT || spec.shape > 3.0) {
      CHECK(integrate_line([&](double z) { return z * z * f(z); }) == Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("cdf matches closed forms and quadrature oracles", "[distributions]") {
  for (double v : {2.5, 4.0, 9.0}) {
    const boost::math::students_t_distribution<double> t(v);
    const double s = std::sqrt(v / (v - 2.0));
    for (double z : {-6.0, -1.0, 0.0, 0.7, 3.0}) CHECK(cdf(InnovationSpec::student_t(v), z) == Approx(boost::math::cdf(t, z * s)).epsilon(1e-12));
  }
  for (double v : {0.8, 1.4, 2.0}) {
    for (double z : {-4.0, -0.3, 0.0, 1.2}) {
      CHECK(cdf(InnovationSpec::ged(v), z) == Approx(integrate_below([&](double u) { return ged_oracle(v, u); }, z)).epsilon(1e-9));
    }
  }
  for (auto [a, k] : {std::pair{1.0, 0.5}, {0.6, -0.3}, {3.0, 2.0}}) {
    for (double z : {-7.0, -1.5, 0.0, 0.4, 2.5, 9.0}) {
      INFO(a << " " << k << " z=" << z);
      CHECK(cdf(InnovationSpec::nig(a, k), z) == Approx(integrate_below([&](double u) { return nig_oracle(a, k, u); }, z)).margin(1e-9));
    }
  }
  for (const auto& spec : {InnovationSpec::student_t(5), InnovationSpec::ged(1.2), InnovationSpec::nig(1.5, 0.0)}) {
    CHECK(cdf(spec, 0.0) == Approx(0.5).margin(1e-8));
  }
}

TEST_CASE("quantile inverts cdf", "[distributions]") {
  for (double p : {0.01, 0.5, 0.99}) CHECK(cdf(InnovationSpec::student_t(4), quantile(InnovationSpec::student_t(4), p)) == Approx(p).margin(1e-6));
  CHECK(quantile(InnovationSpec::ged(2.0), 0.975) == Approx(1.959964).margin(1e-4));
  for (const auto& spec : sample_specs()) {
    INFO(to_string(spec.family) << " " << spec.shape << " " << spec.skew);
    for (double p : {1e-6, 0.003, 0.2, 0.5, 0.77, 0.999}) CHECK(cdf(spec, quantile(spec, p)) == Approx(p).margin(1e-9));
    if (spec.symmetric()) {
      CHECK(quantile(spec, 0.5) == Approx(0.0).margin(1e-8));
      for (double p : {0.01, 0.3}) CHECK(quantile(spec, p) == Approx(-quantile(spec, 1.0 - p)).margin(1e-7));
    }
  }
  CHECK(code_of([] { quantile(InnovationSpec::ged(1.0), 0.0); }) == ErrorCode::kPOutOfRange);
  CHECK(code_of([] { quantile(InnovationSpec::ged(1.0), 1.0); }) == ErrorCode::kPOutOfRange);
}

TEST_CASE("shape validation", "[distributions]") {
  CHECK(code_of([] { validate(InnovationSpec::student_t(2.0)); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { validate(InnovationSpec::ged(0.0)); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { validate(InnovationSpec::nig(1.0, 1.0)); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { validate(InnovationSpec::nig(-1.0, 0.0)); }) == ErrorCode::kInvalidShape);
  CHECK(code_of([] { log_pdf(InnovationSpec::ged(-2.0), 0.0); }) == ErrorCode::kInvalidShape);
  CHECK_NOTHROW(validate(InnovationSpec::nig(1.0, 0.999)));
  CHECK(parse_family("std") == Family::kStudentT);
  CHECK(parse_family("normal") == std::nullopt);
}

TEST_CASE("excess kurtosis matches quadrature", "[distributions]") {
  for (const auto& spec : {InnovationSpec::student_t(7), InnovationSpec::ged(1.1), InnovationSpec::nig(1.2, -0.4)}) {
    const double m4 = integrate_line([&](double z) {
      const double f = pdf(spec, z);
      return f == 0.0 ? 0.0 : z * z * z * z * f;
    });
    CHECK(excess_kurtosis(spec) == Approx(m4 - 3.0).epsilon(1e-6));
  }
  CHECK(std::isinf(excess_kurtosis(InnovationSpec::student_t(3.5))));
}

TEST_CASE("samplers reproduce the first two moments", "[distributions]") {
  for (const auto& spec : {InnovationSpec::student_t(5), InnovationSpec::ged(1.3), InnovationSpec::nig(1.5, -0.3),
                           InnovationSpec::nig(0.8, 0.5)}) {
    INFO(to_string(spec.family) << " " << spec.shape << " " << spec.skew);
    const auto draws = sample(spec, 1000000, 42);
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(draws.size());
    double m2 = 0.0, m3 = 0.0;
    for (double d : draws) {
      m2 += (d - mean) * (d - mean);
      m3 += std::pow(d - mean, 3);
    }
    m2 /= static_cast<double>(draws.size());
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(m2 - 1.0) < 0.02);
    if (spec.skew != 0.0) CHECK(std::signbit(m3) == std::signbit(spec.skew));
  }
}

TEST_CASE("sampling is deterministic per seed", "[distributions]") {
  for (const auto& spec : sample_specs()) {
    CHECK(sample(spec, 1000, 9) == sample(spec, 1000, 9));
    CHECK(sample(spec, 1000, 9) != sample(spec, 1000, 10));
  }
}

TEST_CASE("sampled distribution matches cdf", "[distributions]") {
  // Kolmogorov distance of 20000 draws; 1.63 / sqrt(n) is the 1% critical value.
  for (const auto& spec : {InnovationSpec::student_t(3.5), InnovationSpec::ged(0.9), InnovationSpec::nig(0.7, 0.35)}) {
    auto draws = sample(spec, 20000, 5);
    std::sort(draws.begin(), draws.end());
    double d = 0.0;
    for (std::size_t i = 0; i < draws.size(); i += 7) {
      const double f = cdf(spec, draws[i]);
      d = std::max({d, std::abs(f - static_cast<double>(i) / draws.size()), std::abs(f - static_cast<double>(i + 1) / draws.size())});
    }
    INFO(to_string(spec.family));
    CHECK(d < 1.63 / std::sqrt(20000.0));
  }
}
