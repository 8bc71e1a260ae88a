#include "volkit/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "volkit/error.hpp"
#include "volkit/quadrature.hpp"
#include "volkit/special.hpp"

namespace volkit {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;

// Scale lambda(v) for which the GED has unit variance.
double ged_log_lambda(double v) {
  return 0.5 * (-(2.0 / v) * kLn2 + std::lgamma(1.0 / v) - std::lgamma(3.0 / v));
}

double nig_upper_tail(const StandardizedDensity& density, double z) {
  auto f = [&](double x) { return std::exp(density.log_pdf(x)); };
  return quadrature::upper_tail(f, z, 1e-14, 1e-12).value;
}

double nig_lower_tail(const StandardizedDensity& density, double z) {
  auto f = [&](double x) { return std::exp(density.log_pdf(x)); };
  return quadrature::lower_tail(f, z, 1e-14, 1e-12).value;
}

// Michael, Schucany and Haas transformation sampler.
double inverse_gaussian_draw(double mean, double shape, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const double nu = normal(rng);
  const double y = nu * nu;
  const double x = mean + mean * mean * y / (2.0 * shape) -
                   mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
  return uniform(rng) <= mean / (mean + x) ? x : mean * mean / x;
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::kStudentT: return "std";
    case Family::kGed: return "ged";
    case Family::kNig: return "nig";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  if (name == "std") return Family::kStudentT;
  if (name == "ged") return Family::kGed;
  if (name == "nig") return Family::kNig;
  return std::nullopt;
}

void validate(const InnovationSpec& spec) {
  const double v = spec.shape;
  switch (spec.family) {
    case Family::kStudentT:
      if (!(v > 2.0) || !std::isfinite(v)) throw Error(ErrorCode::kInvalidShape, "Student-t needs v > 2, got " + std::to_string(v));
      break;
    case Family::kGed:
      if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::kInvalidShape, "GED needs v > 0, got " + std::to_string(v));
      break;
    case Family::kNig:
      if (!(v > 0.0) || !std::isfinite(v) || !(std::abs(spec.skew) < v)) {
        throw Error(ErrorCode::kInvalidShape, "NIG needs alpha > 0 and |kappa| < alpha");
      }
      break;
  }
  if (spec.family != Family::kNig && spec.skew != 0.0) {
    throw Error(ErrorCode::kInvalidShape, "skew applies to NIG only");
  }
}

NigCanonicalParams standardize_nig(double shape, double skew) {
  validate(InnovationSpec::nig(shape, skew));
  const double gamma = std::sqrt((shape - skew) * (shape + skew));
  NigCanonicalParams p;
  p.alpha = shape;
  p.kappa = skew;
  p.delta = gamma * gamma * gamma / (shape * shape);
  p.mu = -p.delta * skew / gamma;
  return p;
}

StandardizedDensity::StandardizedDensity(const InnovationSpec& spec) : spec_(spec) {
  validate(spec);
  const double v = spec.shape;
  switch (spec.family) {
    case Family::kStudentT:
      scale_ = v - 2.0;
      exponent_ = 0.5 * (v + 1.0);
      log_norm_ = std::lgamma(exponent_) - std::lgamma(0.5 * v) - 0.5 * std::log(kPi * scale_);
      break;
    case Family::kGed: {
      const double log_lambda = ged_log_lambda(v);
      scale_ = std::exp(log_lambda);
      exponent_ = v;
      log_norm_ = std::log(v) - log_lambda - (1.0 + 1.0 / v) * kLn2 - std::lgamma(1.0 / v);
      break;
    }
    case Family::kNig: {
      nig_ = standardize_nig(v, spec.skew);
      const double gamma = std::sqrt((nig_.alpha - nig_.kappa) * (nig_.alpha + nig_.kappa));
      log_norm_ = std::log(nig_.alpha * nig_.delta / kPi) + nig_.delta * gamma;
      break;
    }
  }
}

double StandardizedDensity::log_pdf(double z) const {
  switch (spec_.family) {
    case Family::kStudentT:
      return log_norm_ - exponent_ * std::log1p(z * z / scale_);
    case Family::kGed:
      return log_norm_ - 0.5 * std::pow(std::abs(z) / scale_, exponent_);
    case Family::kNig: {
      const double d = z - nig_.mu;
      const double q = std::hypot(d, nig_.delta);
      return log_norm_ + nig_.kappa * d + special::log_bessel_k1(nig_.alpha * q) - std::log(q);
    }
  }
  return 0.0;
}

double log_pdf(const InnovationSpec& spec, double z) { return StandardizedDensity(spec).log_pdf(z); }

double pdf(const InnovationSpec& spec, double z) { return std::exp(log_pdf(spec, z)); }

double cdf(const InnovationSpec& spec, double z) {
  validate(spec);
  if (std::isnan(z)) throw Error(ErrorCode::kInvalidArgument, "cdf at NaN");
  if (z == -INFINITY) return 0.0;
  if (z == INFINITY) return 1.0;
  const double v = spec.shape;
  switch (spec.family) {
    case Family::kStudentT: {
      boost::math::students_t_distribution<double> t(v);
      const double x = z * std::sqrt(v / (v - 2.0));
      return z < 0.0 ? boost::math::cdf(t, x) : 1.0 - boost::math::cdf(boost::math::complement(t, x));
    }
    case Family::kGed: {
      const double y = 0.5 * std::pow(std::abs(z) / std::exp(ged_log_lambda(v)), v);
      const double tail = 0.5 * boost::math::gamma_q(1.0 / v, y);
      return z < 0.0 ? tail : 1.0 - tail;
    }
    case Family::kNig: {
      const StandardizedDensity density(spec);
      if (z < 0.0) return std::clamp(nig_lower_tail(density, z), 0.0, 1.0);
      return std::clamp(1.0 - nig_upper_tail(density, z), 0.0, 1.0);
    }
  }
  return 0.0;
}

double quantile(const InnovationSpec& spec, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::kPOutOfRange, "quantile needs 0 < p < 1");
  validate(spec);
  if (spec.symmetric() && p == 0.5) return 0.0;
  const double bound = 50.0 + 10.0 / std::min(p, 1.0 - p);
  double lo = -bound;
  double hi = bound;
  double best = 0.0;
  double best_gap = INFINITY;
  for (int iter = 0; iter < 300; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double gap = cdf(spec, mid) - p;
    if (std::abs(gap) < std::abs(best_gap)) {
      best = mid;
      best_gap = gap;
    }
    if (std::abs(gap) < 1e-11) break;
    if (gap < 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  if (!(std::abs(best_gap) < 1e-9)) {
    throw Error(ErrorCode::kNoConvergence, "quantile search stalled at |cdf - p| = " + std::to_string(std::abs(best_gap)));
  }
  return best;
}

void sample_into(const InnovationSpec& spec, std::mt19937_64& rng, std::span<double> out) {
  validate(spec);
  const double v = spec.shape;
  switch (spec.family) {
    case Family::kStudentT: {
      std::student_t_distribution<double> t(v);
      const double scale = std::sqrt((v - 2.0) / v);
      for (double& z : out) z = scale * t(rng);
      break;
    }
    case Family::kGed: {
      std::gamma_distribution<double> gamma(1.0 / v, 1.0);
      std::uniform_real_distribution<double> uniform;
      const double lambda = std::exp(ged_log_lambda(v));
      for (double& z : out) {
        const double magnitude = lambda * std::pow(2.0 * gamma(rng), 1.0 / v);
        z = uniform(rng) < 0.5 ? -magnitude : magnitude;
      }
      break;
    }
    case Family::kNig: {
      const auto p = standardize_nig(v, spec.skew);
      const double gamma = std::sqrt((p.alpha - p.kappa) * (p.alpha + p.kappa));
      std::normal_distribution<double> normal;
      for (double& z : out) {
        const double mix = inverse_gaussian_draw(p.delta / gamma, p.delta * p.delta, rng);
        z = p.mu + p.kappa * mix + std::sqrt(mix) * normal(rng);
      }
      break;
    }
  }
}

std::vector<double> sample(const InnovationSpec& spec, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  std::mt19937_64 rng(seed);
  sample_into(spec, rng, out);
  return out;
}

double excess_kurtosis(const InnovationSpec& spec) {
  validate(spec);
  const double v = spec.shape;
  switch (spec.family) {
    case Family::kStudentT:
      return v > 4.0 ? 6.0 / (v - 4.0) : INFINITY;
    case Family::kGed:
      return std::exp(std::lgamma(5.0 / v) + std::lgamma(1.0 / v) - 2.0 * std::lgamma(3.0 / v)) - 3.0;
    case Family::kNig: {
      const double a2 = v * v;
      const double g2 = a2 - spec.skew * spec.skew;
      return 3.0 * (1.0 + 4.0 * spec.skew * spec.skew / a2) * a2 / (g2 * g2);
    }
  }
  return 0.0;
}

}  // namespace volkit
