#pragma once

// Artifact serialization and plot-ready exports: fit/selection JSON, volatility, QQ and
// density CSVs.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "volkit/estimation.hpp"
#include "volkit/timeseries.hpp"

namespace volkit {

nlohmann::json to_json(const FitResult& fit);
/// Throws MISSING_ARTIFACT when required keys are absent.
FitResult fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectionReport& report);
SelectionReport selection_from_json(const nlohmann::json& j);

/// x_t / sigma_t after removing the fit's mean offset, filtered with the fitted parameters.
std::vector<double> standardized_residuals(const FitResult& fit, std::span<const double> returns);
VariancePath fitted_variance(const FitResult& fit, std::span<const double> returns);

struct VolatilityRow {
  Date date;
  double sigma2 = 0.0;
  double sigma = 0.0;
};

/// `date,sigma2,sigma` at 10 significant digits.
void write_volatility_csv(std::ostream& out, std::span<const Date> dates, const VariancePath& path);
std::vector<VolatilityRow> read_volatility_csv(std::istream& in);

struct QqPoint {
  double theoretical = 0.0;
  double empirical = 0.0;
};

/// Sorted residuals against quantile(spec, (i - 0.5) / n).
std::vector<QqPoint> qq_points(const InnovationSpec& spec, std::span<const double> residuals);
void write_qq_csv(std::ostream& out, std::span<const QqPoint> points);
std::vector<QqPoint> read_qq_csv(std::istream& in);

/// 0.9 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> sample);

/// Gaussian kernel density estimate at z; `sorted` must be ascending.
double gaussian_kde(std::span<const double> sorted, double bandwidth, double z);

struct DensityPoint {
  double z = 0.0;
  double pdf = 0.0;
  double kde = 0.0;
};

struct DensityGrid {
  double lower = -10.0;
  double upper = 10.0;
  double step = 0.01;
};

std::vector<DensityPoint> density_points(const InnovationSpec& spec, std::span<const double> residuals,
                                         std::optional<double> bandwidth = std::nullopt, const DensityGrid& grid = {});
void write_density_csv(std::ostream& out, std::span<const DensityPoint> points);
std::vector<DensityPoint> read_density_csv(std::istream& in);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace volkit
