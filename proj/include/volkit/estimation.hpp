#pragma once

// Maximum-likelihood fitting of the GARCH(1,1) grid and information-criterion selection.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "volkit/error.hpp"
#include "volkit/garch.hpp"

namespace volkit {

/// Number of free parameters: variance equation plus innovation shape (and NIG skew).
int free_parameter_count(Model model, Family family) noexcept;

/// Smooth bijection from the feasible region onto R^k.
///
/// Layout: [log omega, persistence logits..., shape coordinate, (skew coordinate)].
/// The persistence logits place (alpha, beta) for sGARCH and
/// (alpha (1 - p), (alpha + lambda) p, beta) for tGARCH, p = P(eps < 0), on the open
/// simplex {c_i > 0, sum c_i < 1}; iGARCH uses logit(beta). Shapes map through
/// log(v - 2) (t), log(v) (GED), log(alpha) (NIG), and the NIG skew through
/// kappa = alpha tanh(s). Points on the boundary of the region throw INFEASIBLE_PARAMS.
Eigen::VectorXd to_unconstrained(const GarchParams& params);
GarchParams from_unconstrained(Model model, Family family, const Eigen::VectorXd& u);

/// Optional standard error per natural parameter; empty when not a free coordinate or
/// when the Hessian was unusable.
struct ParameterErrors {
  std::optional<double> omega;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<double> shape;
  std::optional<double> skew;
};

struct TraceEntry {
  int start = 0;
  std::string stage;  // "simplex", "quasi-newton", "newton"
  int evaluations = 0;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
};

struct FitConfig {
  int starts = 5;
  std::uint64_t seed = 1;
  double jitter = 0.5;
  double gradient_tolerance = 1e-5;
  int simplex_evaluations = 1500;
  int quasi_newton_iterations = 200;
  bool demean = false;
  /// Defaults to the sample variance of the (possibly demeaned) series.
  std::optional<double> sigma2_init;
  /// Huber-White errors instead of the inverse Hessian.
  bool sandwich = false;
};

struct FitResult {
  GarchParams params;
  ParameterErrors std_errors;
  bool std_errors_available = false;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  int k_params = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double hessian_asymmetry = 0.0;  // max |H_ij - H_ji| / max |H|
  double sigma2_init = 0.0;
  double mean_offset = 0.0;  // subtracted from the returns before filtering
  std::uint64_t seed = 0;
  Eigen::VectorXd unconstrained;
  std::vector<TraceEntry> trace;
  std::vector<std::string> warnings;
};

/// ALL_STARTS_FAILED together with what each start reached.
class FitError : public Error {
 public:
  FitError(const std::string& message, std::vector<TraceEntry> trace)
      : Error(ErrorCode::kAllStartsFailed, message), trace_(std::move(trace)) {}

  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// Per-observation criteria: aic = (-2 logL + 2k) / n, bic = (-2 logL + k ln n) / n.
InformationCriteria information_criteria(double log_likelihood, int k, std::size_t n);

/// Moment-matched starting point for the optimizer.
GarchParams initial_guess(Model model, Family family, std::span<const double> x);

/// Throws SERIES_TOO_SHORT below 100 observations and ALL_STARTS_FAILED when no start
/// reaches a finite likelihood. Hessian failures leave std_errors_available false.
FitResult fit(Model model, Family family, std::span<const double> returns, const FitConfig& config = {});

struct GridCell {
  Model model = Model::kSGarch;
  Family family = Family::kStudentT;
  std::optional<FitResult> fit;
  std::string error;
};

struct SelectionReport {
  std::vector<GridCell> grid;  // model-major: s/i/t GARCH x std/ged/nig
  std::size_t best_by_aic = 0;
  std::size_t best_by_bic = 0;
  std::size_t best_by_loglik = 0;
};

/// Index of the grid cell minimizing AIC, ties broken by BIC then by fewer parameters.
std::size_t best_by_aic(const std::vector<GridCell>& grid);

/// Fits all nine cells; cells run on up to `threads` workers (VOLKIT_THREADS when 0).
/// Cell i uses seed config.seed + i. Throws ALL_FITS_FAILED if every cell fails.
SelectionReport select_model(std::span<const double> returns, const FitConfig& config = {}, unsigned threads = 0);

}  // namespace volkit
