#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "catch2/catch_amalgamated.hpp"
#include "volkit/error.hpp"
#include "volkit/garch.hpp"

using namespace volkit;
using Catch::Approx;

namespace {

GarchParams make(Model m, double omega, double alpha, double beta, double lambda = 0.0,
                 InnovationSpec spec = InnovationSpec::student_t(6)) {
  return {m, omega, alpha, beta, lambda, spec};
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

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

}  // namespace

TEST_CASE("variance step hand examples", "[garch]") {
  CHECK(variance_step(make(Model::kSGarch, 0.1, 0.2, 0.7), 1.0, 2.0) == Approx(1.6).margin(1e-12));
  CHECK(variance_step(make(Model::kIGarch, 0.1, 0.2, 0.8), 1.0, 2.0) == Approx(1.7).margin(1e-12));
  const auto t = make(Model::kTGarch, 0.1, 0.2, 0.5, 0.3);
  // 0.1 + (0.2 + 0.3) * 4 + 0.5 * 1
  CHECK(variance_step(t, 1.0, -2.0) == Approx(2.6).margin(1e-12));
  CHECK(variance_step(t, 1.0, 2.0) == Approx(1.4).margin(1e-12));
  CHECK(variance_step(t, 1.0, 0.0) == Approx(0.6).margin(1e-12));
}

TEST_CASE("five-step filtered path", "[garch]") {
  const std::vector<double> x{1, -1, 2, 0, 1};
  const auto path = filter_variance(make(Model::kSGarch, 0.1, 0.2, 0.7), x, 1.0);
  const std::vector<double> expected{1, 1.0, 1.0, 1.6, 1.22};
  REQUIRE(path.sigma2.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(path.sigma2[i] == Approx(expected[i]).margin(1e-12));
  CHECK(path.sigma2_init == 1.0);
}

TEST_CASE("degenerate constant-variance recursion", "[garch]") {
  const auto x = normal_draws(50, 3);
  const auto path = filter_variance(make(Model::kSGarch, 0.7, 0.0, 0.0), x, 2.0);
  CHECK(path.sigma2[0] == 2.0);
  for (std::size_t t = 1; t < x.size(); ++t) CHECK(path.sigma2[t] == 0.7);
}

TEST_CASE("tGARCH news asymmetry is exactly lambda x^2", "[garch]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double lambda = u(rng) / 10.0;
    const auto p = make(Model::kTGarch, 0.05, 0.05, 0.8, lambda);
    const double s2 = u(rng), x = u(rng);
    CHECK(variance_step(p, s2, -x) - variance_step(p, s2, x) == Approx(lambda * x * x).margin(1e-14));
    const auto zero = make(Model::kTGarch, 0.05, 0.05, 0.8, 0.0);
    const auto s = make(Model::kSGarch, 0.05, 0.05, 0.8);
    CHECK(variance_step(zero, s2, -x) == variance_step(s, s2, -x));
  }
}

TEST_CASE("iGARCH fixed point and convex combination", "[garch]") {
  const auto p = make(Model::kIGarch, 0.0, 0.25, 0.75);
  for (double c : {0.3, 1.0, 4.2}) CHECK(variance_step(p, c, std::sqrt(c)) == Approx(c).epsilon(1e-15));
  const double lo = 0.5, hi = 3.0;
  const double next = variance_step(p, lo, std::sqrt(hi));
  CHECK(next >= lo);
  CHECK(next <= hi);
}

TEST_CASE("positivity for feasible parameters on wild paths", "[garch]") {
  std::mt19937_64 rng(4);
  std::cauchy_distribution<double> heavy;
  std::vector<double> x(3000);
  for (double& v : x) v = heavy(rng);
  for (const auto& p : {make(Model::kSGarch, 1e-8, 0.0, 0.999), make(Model::kIGarch, 0.0, 0.01, 0.99),
                        make(Model::kTGarch, 1e-6, 0.0, 0.5, 0.9)}) {
    for (double s2 : filter_variance(p, x, 1e-3).sigma2) CHECK(s2 > 0.0);
  }
}

TEST_CASE("feasibility region", "[garch]") {
  CHECK(is_feasible(make(Model::kSGarch, 0.1, 0.2, 0.7)));
  CHECK_FALSE(is_feasible(make(Model::kSGarch, 0.1, 0.3, 0.7)));
  CHECK_FALSE(is_feasible(make(Model::kSGarch, 0.0, 0.2, 0.7)));
  CHECK_FALSE(is_feasible(make(Model::kSGarch, 0.1, -0.01, 0.7)));
  CHECK(is_feasible(make(Model::kIGarch, 0.0, 0.2, 0.8)));
  CHECK_FALSE(is_feasible(make(Model::kIGarch, 0.1, 0.3, 0.8)));
  // Symmetric laws: alpha + beta + lambda / 2 < 1.
  CHECK(is_feasible(make(Model::kTGarch, 0.1, 0.1, 0.7, 0.38)));
  CHECK_FALSE(is_feasible(make(Model::kTGarch, 0.1, 0.1, 0.7, 0.42)));
  CHECK(code_of([] { validate(make(Model::kSGarch, 0.1, 0.5, 0.5)); }) == ErrorCode::kInfeasibleParams);
  CHECK(code_of([] { validate(make(Model::kSGarch, 0.1, 0.1, 0.5, 0.0, InnovationSpec::ged(-1))); }) == ErrorCode::kInvalidShape);
  CHECK(persistence(make(Model::kTGarch, 0.1, 0.1, 0.7, 0.2)) == Approx(0.9));
  CHECK(parse_model("tgarch") == Model::kTGarch);
  CHECK(parse_model("egarch") == std::nullopt);
}

TEST_CASE("negative-news probability of a skewed NIG", "[garch]") {
  const auto spec = InnovationSpec::nig(1.2, -0.6);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double oracle = integrator.integrate([&](double t) { return pdf(spec, -t); }, 0.0, INFINITY);
  CHECK(negative_news_probability(spec) == Approx(oracle).epsilon(1e-10));
  // Left skew puts more than half the mass above the zero mean.
  CHECK(negative_news_probability(spec) < 0.5);
  CHECK(negative_news_probability(InnovationSpec::ged(1.5)) == 0.5);
}

TEST_CASE("non-positive variance is reported", "[garch]") {
  CHECK(code_of([] { variance_step(make(Model::kSGarch, 0.1, 0.2, 0.7), 0.0, 1.0); }) == ErrorCode::kNonpositiveVariance);
  const std::vector<double> x{0.0, 0.0, 0.0};
  CHECK(code_of([&] { filter_variance(make(Model::kIGarch, 0.0, 0.5, 0.5), x, 0.0); }) == ErrorCode::kNonpositiveVariance);
  CHECK(code_of([&] { filter_variance(make(Model::kSGarch, 0.1, 0.5, 0.4), x, -1.0); }) == ErrorCode::kNonpositiveVariance);
}

TEST_CASE("likelihood reduces to the iid normal case", "[garch]") {
  const auto x = normal_draws(500, 8, 1.3);
  const auto p = make(Model::kSGarch, 1.0, 0.0, 0.0, 0.0, InnovationSpec::ged(2.0));
  double oracle = 0.0;
  for (double v : x) oracle += -0.5 * std::log(2 * std::numbers::pi) - 0.5 * v * v;
  CHECK(log_likelihood(p, x, 1.0) == Approx(oracle).epsilon(1e-12));
}

TEST_CASE("likelihood equals a two-pass oracle", "[garch]") {
  const auto x = normal_draws(400, 12, 0.04);
  for (const auto& p : {make(Model::kSGarch, 1e-4, 0.1, 0.8, 0.0, InnovationSpec::student_t(4.5)),
                        make(Model::kIGarch, 2e-5, 0.15, 0.85, 0.0, InnovationSpec::ged(1.2)),
                        make(Model::kTGarch, 1e-4, 0.05, 0.8, 0.12, InnovationSpec::nig(1.1, 0.3))}) {
    double s2 = 0.002, oracle = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      if (t > 0) {
        const double bad = x[t - 1] < 0.0 ? p.lambda : 0.0;
        s2 = p.omega + (p.alpha + bad) * x[t - 1] * x[t - 1] + p.beta * s2;
      }
      oracle += std::log(pdf(p.innovation, x[t] / std::sqrt(s2))) - 0.5 * std::log(s2);
    }
    CHECK(log_likelihood(p, x, 0.002) == Approx(oracle).epsilon(1e-10));
    const auto terms = log_likelihood_terms(p, x, 0.002);
    double sum = 0.0;
    for (double v : terms) sum += v;
    CHECK(sum == Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("likelihood is continuous in the parameters", "[garch]") {
  const auto x = normal_draws(2000, 21);
  const auto p = make(Model::kTGarch, 0.05, 0.08, 0.8, 0.1, InnovationSpec::nig(1.3, -0.2));
  const double base = log_likelihood(p, x, 1.0);
  for (int which = 0; which < 6; ++which) {
    auto q = p;
    switch (which) {
      case 0: q.omega += 1e-8; break;
      case 1: q.alpha += 1e-8; break;
      case 2: q.beta += 1e-8; break;
      case 3: q.lambda += 1e-8; break;
      case 4: q.innovation.shape += 1e-8; break;
      case 5: q.innovation.skew += 1e-8; break;
    }
    CHECK(std::abs(log_likelihood(q, x, 1.0) - base) < 1e-3);
  }
}

TEST_CASE("simulation moments and determinism", "[garch]") {
  const auto iid = simulate_path(make(Model::kSGarch, 1.0, 0.0, 0.0, 0.0, InnovationSpec::ged(1.4)), 1000000, 1.0, 3);
  double m = 0.0;
  for (double v : iid.returns) m += v * v;
  CHECK(m / 1e6 == Approx(1.0).margin(0.02));

  const auto p = make(Model::kSGarch, 0.05, 0.1, 0.85, 0.0, InnovationSpec::student_t(8));
  const auto path = simulate_path(p, 1000000, 1.0, 17);
  double s = 0.0;
  for (double v : path.returns) s += v * v;
  CHECK(s / 1e6 == Approx(1.0).margin(0.05));
  CHECK(path.returns.size() == 1000000);
  CHECK(path.sigma2.size() == 1000000);

  const auto a = simulate_path(p, 500, 1.0, 5);
  const auto b = simulate_path(p, 500, 1.0, 5);
  CHECK(a.returns == b.returns);
  CHECK(a.sigma2 == b.sigma2);
  // The simulated variance path is the filter of its own returns.
  const auto refiltered = filter_variance(p, a.returns, 1.0);
  for (std::size_t t = 0; t < 500; ++t) CHECK(refiltered.sigma2[t] == Approx(a.sigma2[t]).epsilon(1e-14));
}
