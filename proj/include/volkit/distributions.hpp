#pragma once

// Zero-mean, unit-variance innovation laws: Student-t, GED and NIG.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace volkit {

enum class Family { kStudentT, kGed, kNig };

/// Short CLI names: "std", "ged", "nig".
std::string_view to_string(Family family) noexcept;
std::optional<Family> parse_family(std::string_view name) noexcept;

/// `shape` is the degrees of freedom for Student-t, the tail exponent for GED and the
/// steepness alpha for NIG. `skew` is the NIG asymmetry kappa and zero otherwise.
struct InnovationSpec {
  Family family = Family::kStudentT;
  double shape = 5.0;
  double skew = 0.0;

  static InnovationSpec student_t(double dof) { return {Family::kStudentT, dof, 0.0}; }
  static InnovationSpec ged(double tail) { return {Family::kGed, tail, 0.0}; }
  static InnovationSpec nig(double steepness, double skew) { return {Family::kNig, steepness, skew}; }

  bool symmetric() const noexcept { return family != Family::kNig || skew == 0.0; }

  friend bool operator==(const InnovationSpec&, const InnovationSpec&) = default;
};

/// Throws INVALID_SHAPE outside t: v > 2, GED: v > 0, NIG: alpha > 0 and |kappa| < alpha.
void validate(const InnovationSpec& spec);

/// Classical (alpha, kappa, mu, delta) NIG parameters.
struct NigCanonicalParams {
  double alpha = 1.0;
  double kappa = 0.0;
  double mu = 0.0;
  double delta = 1.0;
};

/// Location and scale that give the NIG zero mean and unit variance:
/// gamma = sqrt(alpha^2 - kappa^2), delta = gamma^3 / alpha^2, mu = -delta * kappa / gamma.
NigCanonicalParams standardize_nig(double shape, double skew);

/// Log-density of a standardized innovation with constants hoisted out of the per-point path.
class StandardizedDensity {
 public:
  explicit StandardizedDensity(const InnovationSpec& spec);

  double log_pdf(double z) const;
  const InnovationSpec& spec() const noexcept { return spec_; }

 private:
  InnovationSpec spec_;
  double log_norm_ = 0.0;  // family-specific normalizing constant
  double scale_ = 1.0;     // t: v - 2, GED: lambda(v)
  double exponent_ = 0.0;  // t: (v + 1) / 2, GED: v
  NigCanonicalParams nig_;
};

double log_pdf(const InnovationSpec& spec, double z);
double pdf(const InnovationSpec& spec, double z);

/// Closed form for t and GED; adaptive quadrature of the density for NIG.
double cdf(const InnovationSpec& spec, double z);

/// Inverse of cdf by bracketed bisection; |cdf(result) - p| < 1e-9.
double quantile(const InnovationSpec& spec, double p);

/// Fills `out` with draws; the generator is owned by the caller.
void sample_into(const InnovationSpec& spec, std::mt19937_64& rng, std::span<double> out);
std::vector<double> sample(const InnovationSpec& spec, std::size_t n, std::uint64_t seed);

/// Excess kurtosis of the standardized law (infinite for t with v <= 4).
double excess_kurtosis(const InnovationSpec& spec);

}  // namespace volkit
