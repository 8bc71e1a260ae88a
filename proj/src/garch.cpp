#include "volkit/garch.hpp"

#include <cmath>
#include <random>
#include <string>

#include "volkit/error.hpp"

namespace volkit {

namespace {

double raw_step(const GarchParams& p, double sigma2_prev, double x_prev) {
  const double x2 = x_prev * x_prev;
  switch (p.model) {
    case Model::kSGarch:
      return p.omega + p.alpha * x2 + p.beta * sigma2_prev;
    case Model::kIGarch:
      return p.omega + p.beta * sigma2_prev + (1.0 - p.beta) * x2;
    case Model::kTGarch: {
      const double news = x_prev < 0.0 ? p.alpha + p.lambda : p.alpha;
      return p.omega + news * x2 + p.beta * sigma2_prev;
    }
  }
  return NAN;
}

void check_variance(double sigma2, std::size_t t) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorCode::kNonpositiveVariance, "conditional variance " + std::to_string(sigma2) + " at t = " + std::to_string(t));
  }
}

template <typename Sink>
void run_likelihood(const GarchParams& params, std::span<const double> x, double sigma2_init, Sink&& sink) {
  validate(params);
  check_variance(sigma2_init, 0);
  const StandardizedDensity density(params.innovation);
  double sigma2 = sigma2_init;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t > 0) {
      sigma2 = raw_step(params, sigma2, x[t - 1]);
      check_variance(sigma2, t);
    }
    const double term = density.log_pdf(x[t] / std::sqrt(sigma2)) - 0.5 * std::log(sigma2);
    if (!std::isfinite(term)) {
      throw Error(ErrorCode::kNonFiniteLikelihood, "log-likelihood term is not finite at t = " + std::to_string(t));
    }
    sink(term);
  }
}

}  // namespace

std::string_view to_string(Model model) noexcept {
  switch (model) {
    case Model::kSGarch: return "sgarch";
    case Model::kIGarch: return "igarch";
    case Model::kTGarch: return "tgarch";
  }
  return "?";
}

std::optional<Model> parse_model(std::string_view name) noexcept {
  if (name == "sgarch") return Model::kSGarch;
  if (name == "igarch") return Model::kIGarch;
  if (name == "tgarch") return Model::kTGarch;
  return std::nullopt;
}

double negative_news_probability(const InnovationSpec& spec) {
  if (spec.symmetric()) return 0.5;
  return cdf(spec, 0.0);
}

double persistence(const GarchParams& p) {
  switch (p.model) {
    case Model::kSGarch: return p.alpha + p.beta;
    case Model::kIGarch: return 1.0;
    case Model::kTGarch: return p.alpha + p.beta + p.lambda * negative_news_probability(p.innovation);
  }
  return NAN;
}

void validate(const GarchParams& p) {
  validate(p.innovation);
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInfeasibleParams, why); };
  if (!std::isfinite(p.omega) || !std::isfinite(p.alpha) || !std::isfinite(p.beta) || !std::isfinite(p.lambda)) {
    fail("parameters must be finite");
  }
  switch (p.model) {
    case Model::kSGarch:
      if (!(p.omega > 0.0)) fail("sGARCH needs omega > 0");
      if (p.alpha < 0.0 || p.beta < 0.0) fail("sGARCH needs alpha, beta >= 0");
      if (!(p.alpha + p.beta < 1.0)) fail("sGARCH needs alpha + beta < 1");
      if (p.lambda != 0.0) fail("lambda applies to tGARCH only");
      break;
    case Model::kIGarch:
      if (p.omega < 0.0) fail("iGARCH needs omega >= 0");
      if (!(p.beta > 0.0 && p.beta < 1.0)) fail("iGARCH needs 0 < beta < 1");
      if (std::abs(p.alpha - (1.0 - p.beta)) > 1e-12) fail("iGARCH needs alpha = 1 - beta");
      if (p.lambda != 0.0) fail("lambda applies to tGARCH only");
      break;
    case Model::kTGarch:
      if (!(p.omega > 0.0)) fail("tGARCH needs omega > 0");
      if (p.alpha < 0.0 || p.beta < 0.0) fail("tGARCH needs alpha, beta >= 0");
      if (p.alpha + p.lambda < 0.0) fail("tGARCH needs alpha + lambda >= 0");
      if (!(persistence(p) < 1.0)) fail("tGARCH needs alpha + beta + lambda * P(eps < 0) < 1");
      break;
  }
}

bool is_feasible(const GarchParams& params) noexcept {
  try {
    validate(params);
    return true;
  } catch (const Error&) {
    return false;
  }
}

double variance_step(const GarchParams& params, double sigma2_prev, double x_prev) {
  if (!(sigma2_prev > 0.0)) throw Error(ErrorCode::kNonpositiveVariance, "previous variance must be positive");
  const double next = raw_step(params, sigma2_prev, x_prev);
  if (!(next > 0.0) || !std::isfinite(next)) {
    throw Error(ErrorCode::kNonpositiveVariance, "variance step produced " + std::to_string(next));
  }
  return next;
}

VariancePath filter_variance(const GarchParams& params, std::span<const double> x, double sigma2_init) {
  check_variance(sigma2_init, 0);
  VariancePath path;
  path.sigma2_init = sigma2_init;
  path.sigma2.reserve(x.size());
  double sigma2 = sigma2_init;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t > 0) {
      sigma2 = raw_step(params, sigma2, x[t - 1]);
      check_variance(sigma2, t);
    }
    path.sigma2.push_back(sigma2);
  }
  return path;
}

double log_likelihood(const GarchParams& params, std::span<const double> x, double sigma2_init) {
  double total = 0.0;
  run_likelihood(params, x, sigma2_init, [&](double term) { total += term; });
  return total;
}

std::vector<double> log_likelihood_terms(const GarchParams& params, std::span<const double> x, double sigma2_init) {
  std::vector<double> terms;
  terms.reserve(x.size());
  run_likelihood(params, x, sigma2_init, [&](double term) { terms.push_back(term); });
  return terms;
}

SimulatedPath simulate_path(const GarchParams& params, std::size_t n, double sigma2_init, std::uint64_t seed) {
  validate(params);
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "simulation length must be positive");
  check_variance(sigma2_init, 0);
  std::vector<double> shocks(n);
  std::mt19937_64 rng(seed);
  sample_into(params.innovation, rng, shocks);

  SimulatedPath path;
  path.returns.resize(n);
  path.sigma2.resize(n);
  double sigma2 = sigma2_init;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      sigma2 = variance_step(params, sigma2, path.returns[t - 1]);
    }
    path.sigma2[t] = sigma2;
    path.returns[t] = std::sqrt(sigma2) * shocks[t];
  }
  return path;
}

}  // namespace volkit
