#pragma once

// GARCH(1,1) conditional-variance recursions and likelihood.
//
//   sGARCH  s2_t = omega + alpha x_{t-1}^2 + beta s2_{t-1}
//   iGARCH  s2_t = omega + beta s2_{t-1} + (1 - beta) x_{t-1}^2
//   tGARCH  s2_t = omega + (alpha + lambda 1[x_{t-1} < 0]) x_{t-1}^2 + beta s2_{t-1}

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "volkit/distributions.hpp"

namespace volkit {

enum class Model { kSGarch, kIGarch, kTGarch };

/// "sgarch", "igarch", "tgarch".
std::string_view to_string(Model model) noexcept;
std::optional<Model> parse_model(std::string_view name) noexcept;

struct GarchParams {
  Model model = Model::kSGarch;
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;  // leverage, tGARCH only
  InnovationSpec innovation;
};

/// P(eps < 0) under the innovation law; 0.5 for symmetric families.
double negative_news_probability(const InnovationSpec& spec);

/// alpha + beta + lambda * P(eps < 0), i.e. E[s2_t | s2_{t-1}] / s2_{t-1} for the recursion.
double persistence(const GarchParams& params);

/// Throws INFEASIBLE_PARAMS (or INVALID_SHAPE for the innovation) outside the admissible region.
void validate(const GarchParams& params);
bool is_feasible(const GarchParams& params) noexcept;

/// One recursion step. Bad news is x_prev < 0; zero counts as good news.
double variance_step(const GarchParams& params, double sigma2_prev, double x_prev);

struct VariancePath {
  std::vector<double> sigma2;
  double sigma2_init = 0.0;
};

/// sigma2[0] = sigma2_init, sigma2[t] = variance_step(sigma2[t-1], x[t-1]).
VariancePath filter_variance(const GarchParams& params, std::span<const double> x, double sigma2_init);

/// sum_t [ log f(x_t / s_t) - log(s2_t) / 2 ].
double log_likelihood(const GarchParams& params, std::span<const double> x, double sigma2_init);

/// Per-observation terms of log_likelihood.
std::vector<double> log_likelihood_terms(const GarchParams& params, std::span<const double> x, double sigma2_init);

struct SimulatedPath {
  std::vector<double> returns;
  std::vector<double> sigma2;
};

SimulatedPath simulate_path(const GarchParams& params, std::size_t n, double sigma2_init, std::uint64_t seed);

}  // namespace volkit
