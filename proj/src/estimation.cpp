#include "volkit/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "volkit/error.hpp"
#include "volkit/optimizer.hpp"
#include "volkit/timeseries.hpp"

namespace volkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int persistence_coordinates(Model model) {
  switch (model) {
    case Model::kSGarch: return 2;
    case Model::kIGarch: return 1;
    case Model::kTGarch: return 3;
  }
  return 0;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::kInfeasibleParams, std::string(what) + " is on or outside the boundary of the parameter space");
  }
}

// log(c_i / slack) for a point strictly inside the simplex.
void simplex_to_logits(std::span<const double> c, Eigen::VectorXd& u, Eigen::Index offset) {
  double slack = 1.0;
  for (double ci : c) {
    require_positive(ci, "persistence component");
    slack -= ci;
  }
  require_positive(slack, "persistence slack");
  for (std::size_t i = 0; i < c.size(); ++i) u(offset + static_cast<Eigen::Index>(i)) = std::log(c[i] / slack);
}

std::vector<double> logits_to_simplex(const Eigen::VectorXd& u, Eigen::Index offset, int count) {
  double top = 0.0;
  for (int i = 0; i < count; ++i) top = std::max(top, u(offset + i));
  double denom = std::exp(-top);
  std::vector<double> c(count);
  for (int i = 0; i < count; ++i) {
    c[i] = std::exp(u(offset + i) - top);
    denom += c[i];
  }
  for (double& ci : c) ci /= denom;
  return c;
}

double logistic(double u) { return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

// Natural parameters that are free coordinates, in reporting order.
Eigen::VectorXd natural_vector(const GarchParams& p) {
  std::vector<double> v{p.omega};
  if (p.model != Model::kIGarch) v.push_back(p.alpha);
  v.push_back(p.beta);
  if (p.model == Model::kTGarch) v.push_back(p.lambda);
  v.push_back(p.innovation.shape);
  if (p.innovation.family == Family::kNig) v.push_back(p.innovation.skew);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GarchParams params_from_natural(Model model, Family family, const Eigen::VectorXd& v) {
  GarchParams p;
  p.model = model;
  Eigen::Index i = 0;
  p.omega = v(i++);
  if (model != Model::kIGarch) p.alpha = v(i++);
  p.beta = v(i++);
  if (model == Model::kIGarch) p.alpha = 1.0 - p.beta;
  if (model == Model::kTGarch) p.lambda = v(i++);
  const double shape = v(i++);
  switch (family) {
    case Family::kStudentT: p.innovation = InnovationSpec::student_t(shape); break;
    case Family::kGed: p.innovation = InnovationSpec::ged(shape); break;
    case Family::kNig: p.innovation = InnovationSpec::nig(shape, v(i)); break;
  }
  return p;
}

// Hessian of g in natural coordinates from one-sided differences. Each coordinate steps
// away from whichever side is infeasible, so it works for estimates on the boundary.
Eigen::MatrixXd one_sided_hessian(const optim::Objective& g, const Eigen::VectorXd& theta) {
  const Eigen::Index k = theta.size();
  const double g0 = g(theta);
  Eigen::VectorXd h(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    h(j) = 1e-4 * std::max(std::abs(theta(j)), 1e-2);
    Eigen::VectorXd probe = theta;
    probe(j) += 2.0 * h(j);
    if (!std::isfinite(g(probe))) h(j) = -h(j);
  }
  auto at = [&](Eigen::Index i, double a, Eigen::Index j, double b) {
    Eigen::VectorXd probe = theta;
    probe(i) += a * h(i);
    probe(j) += b * h(j);
    return g(probe);
  };
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out(i, i) = (at(i, 2.0, i, 0.0) - 2.0 * at(i, 1.0, i, 0.0) + g0) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      out(i, j) = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, 0.0) - at(j, 1.0, j, 0.0) + g0) / (h(i) * h(j));
      out(j, i) = out(i, j);
    }
  }
  return out;
}

ParameterErrors errors_from(Model model, Family family, const Eigen::VectorXd& se) {
  ParameterErrors e;
  Eigen::Index i = 0;
  auto next = [&]() -> std::optional<double> {
    const double s = se(i++);
    if (std::isfinite(s) && s >= 0.0) return s;
    return std::nullopt;
  };
  e.omega = next();
  if (model != Model::kIGarch) e.alpha = next();
  e.beta = next();
  if (model == Model::kTGarch) e.lambda = next();
  e.shape = next();
  if (family == Family::kNig) e.skew = next();
  return e;
}

double solve_ged_shape(double kurtosis) {
  double lo = 0.3, hi = 20.0;
  auto k = [](double v) { return excess_kurtosis(InnovationSpec::ged(v)); };
  if (kurtosis >= k(lo)) return lo;
  if (kurtosis <= k(hi)) return hi;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (k(mid) > kurtosis) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Problem {
  Model model;
  Family family;
  std::span<const double> x;
  double sigma2_init;

  double negative_log_likelihood(const Eigen::VectorXd& u) const {
    if (!u.allFinite()) return kInf;
    try {
      return -log_likelihood(from_unconstrained(model, family, u), x, sigma2_init);
    } catch (const Error&) {
      return kInf;
    }
  }

  optim::Objective objective() const {
    return [this](const Eigen::VectorXd& u) { return negative_log_likelihood(u); };
  }
};

Eigen::VectorXd jitter_start(const Eigen::VectorXd& u, double amount, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> noise(-amount, amount);
  Eigen::VectorXd out = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out(i) = u(i) * (1.0 + noise(rng));
    // Multiplicative noise cannot move a coordinate sitting at zero.
    if (std::abs(u(i)) < 0.1) out(i) += noise(rng);
  }
  return out;
}

// Newton refinement with the numerical Hessian; used when quasi-Newton stalls short of
// the gradient tolerance.
optim::Minimum newton_polish(const optim::Objective& f, optim::Minimum at, double tolerance, int max_steps) {
  for (int step = 0; step < max_steps; ++step) {
    const Eigen::VectorXd g = optim::central_gradient(f, at.x);
    at.evaluations += static_cast<int>(2 * g.size());
    if (!g.allFinite() || g.lpNorm<Eigen::Infinity>() < tolerance) break;
    Eigen::MatrixXd h = optim::central_hessian(f, at.x);
    at.evaluations += static_cast<int>(4 * g.size() * g.size());
    h = 0.5 * (h + h.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd direction = -llt.solve(g);
    bool moved = false;
    // Near the optimum f changes by less than its rounding noise, so a full step that
    // shrinks the gradient is taken even without a measurable decrease in f.
    {
      const Eigen::VectorXd candidate = at.x + direction;
      const double value = f(candidate);
      ++at.evaluations;
      if (std::isfinite(value) && value <= at.value + 1e-11 * std::max(1.0, std::abs(at.value))) {
        const Eigen::VectorXd g_new = optim::central_gradient(f, candidate);
        at.evaluations += static_cast<int>(2 * g.size());
        if (g_new.allFinite() && g_new.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
          at.x = candidate;
          at.value = value;
          moved = true;
        }
      }
    }
    double t = 1.0;
    for (int k = 0; k < 20 && !moved; ++k) {
      const Eigen::VectorXd candidate = at.x + t * direction;
      const double value = f(candidate);
      ++at.evaluations;
      if (std::isfinite(value) && value <= at.value) {
        at.x = candidate;
        at.value = value;
        moved = true;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return at;
}

unsigned thread_budget(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VOLKIT_THREADS")) {
    const long value = std::strtol(env, nullptr, 10);
    if (value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int free_parameter_count(Model model, Family family) noexcept {
  return 1 + persistence_coordinates(model) + 1 + (family == Family::kNig ? 1 : 0);
}

namespace {

constexpr double kMaxSkewRatio = 1.0 - 1e-12;

// Kept away from 0 and 1 so the tGARCH split stays finite for extreme skews. Both
// directions of the transform use the same value, so the map stays invertible.
double clamped_negative_probability(const InnovationSpec& spec) {
  return std::clamp(negative_news_probability(spec), 1e-12, 1.0 - 1e-12);
}

}  // namespace

Eigen::VectorXd to_unconstrained(const GarchParams& params) {
  validate(params);
  const Model model = params.model;
  const Family family = params.innovation.family;
  Eigen::VectorXd u(free_parameter_count(model, family));
  require_positive(params.omega, "omega");
  u(0) = std::log(params.omega);
  Eigen::Index i = 1;
  switch (model) {
    case Model::kSGarch: {
      const double c[] = {params.alpha, params.beta};
      simplex_to_logits(c, u, i);
      break;
    }
    case Model::kIGarch:
      u(i) = std::log(params.beta / (1.0 - params.beta));
      break;
    case Model::kTGarch: {
      const double p = clamped_negative_probability(params.innovation);
      const double c[] = {params.alpha * (1.0 - p), (params.alpha + params.lambda) * p, params.beta};
      simplex_to_logits(c, u, i);
      break;
    }
  }
  i += persistence_coordinates(model);
  const double v = params.innovation.shape;
  switch (family) {
    case Family::kStudentT: u(i) = std::log(v - 2.0); break;
    case Family::kGed: u(i) = std::log(v); break;
    case Family::kNig:
      u(i) = std::log(v);
      u(i + 1) = std::atanh(params.innovation.skew / v);
      break;
  }
  return u;
}

GarchParams from_unconstrained(Model model, Family family, const Eigen::VectorXd& u) {
  if (u.size() != free_parameter_count(model, family)) {
    throw Error(ErrorCode::kInvalidArgument, "unconstrained vector has the wrong length");
  }
  if (!u.allFinite()) throw Error(ErrorCode::kInfeasibleParams, "unconstrained vector is not finite");
  GarchParams p;
  p.model = model;
  const Eigen::Index shape_at = 1 + persistence_coordinates(model);
  switch (family) {
    case Family::kStudentT: p.innovation = InnovationSpec::student_t(2.0 + std::exp(u(shape_at))); break;
    case Family::kGed: p.innovation = InnovationSpec::ged(std::exp(u(shape_at))); break;
    case Family::kNig: {
      const double steepness = std::exp(u(shape_at));
      // tanh rounds to +-1 for large arguments, which would put kappa on the boundary.
      const double ratio = std::clamp(std::tanh(u(shape_at + 1)), -kMaxSkewRatio, kMaxSkewRatio);
      p.innovation = InnovationSpec::nig(steepness, steepness * ratio);
      break;
    }
  }
  p.omega = std::exp(u(0));
  switch (model) {
    case Model::kSGarch: {
      const auto c = logits_to_simplex(u, 1, 2);
      p.alpha = c[0];
      p.beta = c[1];
      break;
    }
    case Model::kIGarch:
      p.beta = logistic(u(1));
      p.alpha = 1.0 - p.beta;
      break;
    case Model::kTGarch: {
      const auto c = logits_to_simplex(u, 1, 3);
      const double neg = clamped_negative_probability(p.innovation);
      p.alpha = c[0] / (1.0 - neg);
      p.lambda = c[1] / neg - p.alpha;
      p.beta = c[2];
      break;
    }
  }
  return p;
}

InformationCriteria information_criteria(double log_likelihood, int k, std::size_t n) {
  if (k < 1 || n <= static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kInvalidCounts, "information criteria need n > k >= 1");
  }
  const double dn = static_cast<double>(n);
  return {(-2.0 * log_likelihood + 2.0 * k) / dn, (-2.0 * log_likelihood + k * std::log(dn)) / dn};
}

GarchParams initial_guess(Model model, Family family, std::span<const double> x) {
  const double variance = sample_variance(x);
  double kurt = NAN;
  if (x.size() >= 4) kurt = descriptive_stats(x).excess_kurtosis;
  const bool usable = std::isfinite(kurt) && kurt > 0.0;

  GarchParams p;
  p.model = model;
  p.omega = 0.05 * variance;
  p.alpha = 0.1;
  p.beta = 0.8;
  if (model == Model::kIGarch) p.alpha = 1.0 - p.beta;
  if (model == Model::kTGarch) p.lambda = 0.05;
  switch (family) {
    case Family::kStudentT:
      p.innovation = InnovationSpec::student_t(usable ? std::clamp(4.0 + 6.0 / kurt, 4.2, 50.0) : 5.0);
      break;
    case Family::kGed:
      p.innovation = InnovationSpec::ged(std::isfinite(kurt) ? solve_ged_shape(kurt) : 1.0);
      break;
    case Family::kNig:
      p.innovation = InnovationSpec::nig(usable ? std::clamp(std::sqrt(3.0 / kurt), 0.2, 20.0) : 1.0, 0.0);
      break;
  }
  return p;
}

FitResult fit(Model model, Family family, std::span<const double> returns, const FitConfig& config) {
  if (returns.size() < 100) {
    throw Error(ErrorCode::kSeriesTooShort, "fitting needs at least 100 returns, got " + std::to_string(returns.size()));
  }
  if (config.starts < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one start");

  FitResult result;
  result.seed = config.seed;
  if (returns.size() < 500) {
    result.warnings.push_back("only " + std::to_string(returns.size()) + " returns; estimates may be unreliable below 500");
  }
  result.mean_offset = config.demean ? sample_mean(returns) : 0.0;
  std::vector<double> x(returns.begin(), returns.end());
  for (double& v : x) v -= result.mean_offset;
  result.sigma2_init = config.sigma2_init.value_or(sample_variance(x));
  if (!(result.sigma2_init > 0.0)) throw Error(ErrorCode::kDegenerateSample, "initial variance must be positive");

  const Problem problem{model, family, x, result.sigma2_init};
  const auto f = problem.objective();

  std::mt19937_64 rng(config.seed);
  const Eigen::VectorXd base = to_unconstrained(initial_guess(model, family, x));
  const double base_value = f(base);

  optim::Minimum best;
  best.value = kInf;
  for (int s = 0; s < config.starts; ++s) {
    const Eigen::VectorXd start = s == 0 ? base : jitter_start(base, config.jitter, rng);
    optim::NelderMeadOptions nm;
    nm.max_evaluations = config.simplex_evaluations;
    auto coarse = optim::nelder_mead(f, start, nm);
    result.trace.push_back({s, "simplex", coarse.evaluations, -coarse.value, NAN});
    if (!std::isfinite(coarse.value)) continue;

    optim::BfgsOptions qn;
    qn.gradient_tolerance = 0.5 * config.gradient_tolerance;
    qn.max_iterations = config.quasi_newton_iterations;
    auto polished = optim::bfgs(f, coarse.x, qn);
    if (polished.value > coarse.value) polished = coarse;
    const double gnorm = optim::central_gradient(f, polished.x).lpNorm<Eigen::Infinity>();
    result.trace.push_back({s, "quasi-newton", polished.evaluations, -polished.value, gnorm});
    if (polished.value < best.value) best = polished;
  }
  if (!std::isfinite(best.value)) {
    throw FitError("no start reached a finite likelihood", result.trace);
  }
  // Never hand back something worse than the moment-matched start.
  if (std::isfinite(base_value) && base_value < best.value) {
    best.x = base;
    best.value = base_value;
  }

  double gnorm = optim::central_gradient(f, best.x).lpNorm<Eigen::Infinity>();
  if (!(gnorm < config.gradient_tolerance)) {
    best = newton_polish(f, best, 0.5 * config.gradient_tolerance, 8);
    gnorm = optim::central_gradient(f, best.x).lpNorm<Eigen::Infinity>();
    result.trace.push_back({-1, "newton", best.evaluations, -best.value, gnorm});
  }

  result.unconstrained = best.x;
  result.params = from_unconstrained(model, family, best.x);
  result.log_likelihood = -best.value;
  result.n_obs = x.size();
  result.k_params = free_parameter_count(model, family);
  const auto ic = information_criteria(result.log_likelihood, result.k_params, result.n_obs);
  result.aic = ic.aic;
  result.bic = ic.bic;
  result.gradient_norm = gnorm;
  result.converged = gnorm < config.gradient_tolerance;

  // Standard errors: inverse Hessian of -logL in unconstrained space, then delta method.
  Eigen::MatrixXd h = optim::central_hessian(f, best.x);
  const double scale = h.cwiseAbs().maxCoeff();
  result.hessian_asymmetry = scale > 0.0 ? (h - h.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  h = 0.5 * (h + h.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  const auto k = result.k_params;
  if (h.allFinite() && llt.info() == Eigen::Success) {
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
    if (config.sandwich) {
      Eigen::MatrixXd scores(x.size(), k);
      Eigen::VectorXd probe = best.x;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double step = 1e-5 * std::max(1.0, std::abs(best.x(j)));
        probe(j) = best.x(j) + step;
        const auto up = log_likelihood_terms(from_unconstrained(model, family, probe), x, result.sigma2_init);
        probe(j) = best.x(j) - step;
        const auto down = log_likelihood_terms(from_unconstrained(model, family, probe), x, result.sigma2_init);
        probe(j) = best.x(j);
        for (std::size_t t = 0; t < x.size(); ++t) scores(static_cast<Eigen::Index>(t), j) = (up[t] - down[t]) / (2.0 * step);
      }
      const Eigen::MatrixXd meat = scores.transpose() * scores;
      cov = cov * meat * cov;
    }
    Eigen::MatrixXd jacobian(k, k);
    Eigen::VectorXd probe = best.x;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(best.x(j)));
      probe(j) = best.x(j) + step;
      const Eigen::VectorXd up = natural_vector(from_unconstrained(model, family, probe));
      probe(j) = best.x(j) - step;
      const Eigen::VectorXd down = natural_vector(from_unconstrained(model, family, probe));
      probe(j) = best.x(j);
      jacobian.col(j) = (up - down) / (2.0 * step);
    }
    const Eigen::MatrixXd natural_cov = jacobian * cov * jacobian.transpose();
    const Eigen::VectorXd se = natural_cov.diagonal().cwiseMax(-1.0).cwiseSqrt();
    result.std_errors = errors_from(model, family, se);
    result.std_errors_available = se.allFinite();
  } else {
    // The unconstrained Hessian degenerates when an estimate sits on the boundary (e.g.
    // beta -> 0 on iid data); fall back to the natural-coordinate Hessian there.
    const optim::Objective g = [&](const Eigen::VectorXd& theta) {
      try {
        return -log_likelihood(params_from_natural(model, family, theta), x, result.sigma2_init);
      } catch (const Error&) {
        return kInf;
      }
    };
    Eigen::MatrixXd hn = one_sided_hessian(g, natural_vector(result.params));
    Eigen::LLT<Eigen::MatrixXd> natural_llt(hn);
    if (hn.allFinite() && natural_llt.info() == Eigen::Success) {
      const Eigen::VectorXd se = natural_llt.solve(Eigen::MatrixXd::Identity(k, k)).diagonal().cwiseSqrt();
      result.std_errors = errors_from(model, family, se);
      result.std_errors_available = se.allFinite();
      result.warnings.push_back("standard errors from the natural-coordinate Hessian (estimate on the boundary)");
    }
  }
  return result;
}

std::size_t best_by_aic(const std::vector<GridCell>& grid) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid[i].fit) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = *grid[i].fit;
    const auto& b = *grid[*best].fit;
    if (a.aic < b.aic || (a.aic == b.aic && (a.bic < b.bic || (a.bic == b.bic && a.k_params < b.k_params)))) best = i;
  }
  if (!best) throw Error(ErrorCode::kAllFitsFailed, "no grid cell produced a fit");
  return *best;
}

SelectionReport select_model(std::span<const double> returns, const FitConfig& config, unsigned threads) {
  SelectionReport report;
  for (Model m : {Model::kSGarch, Model::kIGarch, Model::kTGarch}) {
    for (Family f : {Family::kStudentT, Family::kGed, Family::kNig}) report.grid.push_back({m, f, std::nullopt, {}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < report.grid.size(); i = next++) {
      auto& cell = report.grid[i];
      FitConfig cell_config = config;
      cell_config.seed = config.seed + i;
      try {
        cell.fit = fit(cell.model, cell.family, returns, cell_config);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(thread_budget(threads), static_cast<unsigned>(report.grid.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  report.best_by_aic = best_by_aic(report.grid);
  std::size_t by_bic = report.best_by_aic;
  std::size_t by_loglik = report.best_by_aic;
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const auto& cell = report.grid[i];
    if (!cell.fit) continue;
    const auto& current_bic = *report.grid[by_bic].fit;
    if (cell.fit->bic < current_bic.bic ||
        (cell.fit->bic == current_bic.bic && cell.fit->aic < current_bic.aic)) {
      by_bic = i;
    }
    if (cell.fit->log_likelihood > report.grid[by_loglik].fit->log_likelihood) by_loglik = i;
  }
  report.best_by_bic = by_bic;
  report.best_by_loglik = by_loglik;
  return report;
}

}  // namespace volkit
