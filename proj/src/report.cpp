#include "volkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "volkit/error.hpp"

namespace volkit {

namespace {

using nlohmann::json;

std::string g10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kMissingArtifact, std::string("artifact lacks '") + key + "'");
  return j.at(key);
}

json params_json(const GarchParams& p) {
  json out;
  out["omega"] = p.omega;
  out["alpha"] = p.alpha;
  out["beta"] = p.beta;
  if (p.model == Model::kTGarch) out["lambda"] = p.lambda;
  out["shape"] = p.innovation.shape;
  if (p.innovation.family == Family::kNig) out["skew"] = p.innovation.skew;
  return out;
}

json errors_json(const FitResult& fit) {
  const auto& e = fit.std_errors;
  json out;
  out["omega"] = optional_number(e.omega);
  out["alpha"] = optional_number(e.alpha);
  out["beta"] = optional_number(e.beta);
  if (fit.params.model == Model::kTGarch) out["lambda"] = optional_number(e.lambda);
  out["shape"] = optional_number(e.shape);
  if (fit.params.innovation.family == Family::kNig) out["skew"] = optional_number(e.skew);
  return out;
}

std::vector<std::vector<std::string>> read_numeric_csv(std::istream& in, std::size_t columns, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, std::string(what) + " file is empty");
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != columns) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kMalformedRow, "not a number: '" + s + "'");
  }
}

}  // namespace

json to_json(const FitResult& fit) {
  json j;
  j["model"] = std::string(to_string(fit.params.model));
  j["distribution"] = std::string(to_string(fit.params.innovation.family));
  j["params"] = params_json(fit.params);
  j["std_errors"] = errors_json(fit);
  j["std_errors_available"] = fit.std_errors_available;
  j["log_likelihood"] = fit.log_likelihood;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["n_obs"] = fit.n_obs;
  j["k_params"] = fit.k_params;
  j["converged"] = fit.converged;
  j["gradient_norm"] = fit.gradient_norm;
  j["hessian_asymmetry"] = fit.hessian_asymmetry;
  j["sigma2_init"] = fit.sigma2_init;
  j["mean_offset"] = fit.mean_offset;
  j["seed"] = fit.seed;
  j["warnings"] = fit.warnings;
  json trace = json::array();
  for (const auto& t : fit.trace) {
    trace.push_back({{"start", t.start},
                     {"stage", t.stage},
                     {"evaluations", t.evaluations},
                     {"log_likelihood", t.log_likelihood},
                     {"gradient_norm", std::isfinite(t.gradient_norm) ? json(t.gradient_norm) : json(nullptr)}});
  }
  j["trace"] = trace;
  return j;
}

FitResult fit_from_json(const json& j) {
  FitResult fit;
  const auto model = parse_model(require(j, "model").get<std::string>());
  const auto family = parse_family(require(j, "distribution").get<std::string>());
  if (!model || !family) throw Error(ErrorCode::kMissingArtifact, "artifact names an unknown model or distribution");
  const json& p = require(j, "params");
  fit.params.model = *model;
  fit.params.omega = require(p, "omega").get<double>();
  fit.params.alpha = require(p, "alpha").get<double>();
  fit.params.beta = require(p, "beta").get<double>();
  fit.params.lambda = read_optional(p, "lambda").value_or(0.0);
  fit.params.innovation = {*family, require(p, "shape").get<double>(), read_optional(p, "skew").value_or(0.0)};
  validate(fit.params);

  if (j.contains("std_errors")) {
    const json& e = j.at("std_errors");
    fit.std_errors = {read_optional(e, "omega"), read_optional(e, "alpha"), read_optional(e, "beta"),
                      read_optional(e, "lambda"), read_optional(e, "shape"), read_optional(e, "skew")};
  }
  fit.std_errors_available = j.value("std_errors_available", false);
  fit.log_likelihood = require(j, "log_likelihood").get<double>();
  fit.aic = require(j, "aic").get<double>();
  fit.bic = require(j, "bic").get<double>();
  fit.n_obs = require(j, "n_obs").get<std::size_t>();
  fit.k_params = require(j, "k_params").get<int>();
  fit.converged = require(j, "converged").get<bool>();
  fit.gradient_norm = j.value("gradient_norm", 0.0);
  fit.hessian_asymmetry = j.value("hessian_asymmetry", 0.0);
  fit.sigma2_init = require(j, "sigma2_init").get<double>();
  fit.mean_offset = j.value("mean_offset", 0.0);
  fit.seed = j.value("seed", std::uint64_t{0});
  fit.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("trace")) {
    for (const auto& t : j.at("trace")) {
      fit.trace.push_back({t.at("start").get<int>(), t.at("stage").get<std::string>(), t.at("evaluations").get<int>(),
                           t.at("log_likelihood").get<double>(),
                           t.at("gradient_norm").is_null() ? NAN : t.at("gradient_norm").get<double>()});
    }
  }
  return fit;
}

json to_json(const SelectionReport& report) {
  json grid = json::array();
  for (const auto& cell : report.grid) {
    if (cell.fit) {
      grid.push_back(to_json(*cell.fit));
    } else {
      grid.push_back({{"model", std::string(to_string(cell.model))},
                      {"distribution", std::string(to_string(cell.family))},
                      {"error", cell.error}});
    }
  }
  return {{"grid", grid},
          {"best_by_aic", report.best_by_aic},
          {"best_by_bic", report.best_by_bic},
          {"best_by_loglik", report.best_by_loglik}};
}

SelectionReport selection_from_json(const json& j) {
  SelectionReport report;
  for (const auto& cell_json : require(j, "grid")) {
    GridCell cell;
    const auto model = parse_model(require(cell_json, "model").get<std::string>());
    const auto family = parse_family(require(cell_json, "distribution").get<std::string>());
    if (!model || !family) throw Error(ErrorCode::kMissingArtifact, "selection grid names an unknown cell");
    cell.model = *model;
    cell.family = *family;
    if (cell_json.contains("error")) {
      cell.error = cell_json.at("error").get<std::string>();
    } else {
      cell.fit = fit_from_json(cell_json);
    }
    report.grid.push_back(std::move(cell));
  }
  report.best_by_aic = require(j, "best_by_aic").get<std::size_t>();
  report.best_by_bic = require(j, "best_by_bic").get<std::size_t>();
  report.best_by_loglik = require(j, "best_by_loglik").get<std::size_t>();
  return report;
}

VariancePath fitted_variance(const FitResult& fit, std::span<const double> returns) {
  std::vector<double> x(returns.begin(), returns.end());
  for (double& v : x) v -= fit.mean_offset;
  return filter_variance(fit.params, x, fit.sigma2_init);
}

std::vector<double> standardized_residuals(const FitResult& fit, std::span<const double> returns) {
  const auto path = fitted_variance(fit, returns);
  std::vector<double> z(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) z[t] = (returns[t] - fit.mean_offset) / std::sqrt(path.sigma2[t]);
  return z;
}

void write_volatility_csv(std::ostream& out, std::span<const Date> dates, const VariancePath& path) {
  if (dates.size() != path.sigma2.size()) throw Error(ErrorCode::kInvalidArgument, "dates and variance path differ in length");
  out << "date,sigma2,sigma\n";
  for (std::size_t t = 0; t < dates.size(); ++t) {
    out << format_date(dates[t]) << ',' << g10(path.sigma2[t]) << ',' << g10(std::sqrt(path.sigma2[t])) << '\n';
  }
}

std::vector<VolatilityRow> read_volatility_csv(std::istream& in) {
  std::vector<VolatilityRow> rows;
  for (const auto& f : read_numeric_csv(in, 3, "volatility")) {
    const auto date = parse_iso_date(f[0]);
    if (!date) throw Error(ErrorCode::kMalformedRow, "bad date '" + f[0] + "'");
    rows.push_back({*date, to_double(f[1]), to_double(f[2])});
  }
  return rows;
}

std::vector<QqPoint> qq_points(const InnovationSpec& spec, std::span<const double> residuals) {
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out[i] = {quantile(spec, p), sorted[i]};
  }
  return out;
}

void write_qq_csv(std::ostream& out, std::span<const QqPoint> points) {
  out << "theoretical,empirical\n";
  for (const auto& p : points) out << g10(p.theoretical) << ',' << g10(p.empirical) << '\n';
}

std::vector<QqPoint> read_qq_csv(std::istream& in) {
  std::vector<QqPoint> out;
  for (const auto& f : read_numeric_csv(in, 2, "QQ")) out.push_back({to_double(f[0]), to_double(f[1])});
  return out;
}

double silverman_bandwidth(std::span<const double> sample) {
  if (sample.size() < 2) throw Error(ErrorCode::kSeriesTooShort, "bandwidth needs at least 2 points");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile_of = [&](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double sd = std::sqrt(sample_variance(sample));
  const double iqr = quantile_of(0.75) - quantile_of(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

double gaussian_kde(std::span<const double> sorted, double bandwidth, double z) {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  const double reach = 9.0 * bandwidth;
  auto first = std::lower_bound(sorted.begin(), sorted.end(), z - reach);
  auto last = std::upper_bound(first, sorted.end(), z + reach);
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    const double u = (z - *it) / bandwidth;
    sum += std::exp(-0.5 * u * u);
  }
  return sum / (static_cast<double>(sorted.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

std::vector<DensityPoint> density_points(const InnovationSpec& spec, std::span<const double> residuals,
                                         std::optional<double> bandwidth, const DensityGrid& grid) {
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = bandwidth.value_or(silverman_bandwidth(sorted));
  const StandardizedDensity density(spec);
  const auto steps = static_cast<std::size_t>(std::llround((grid.upper - grid.lower) / grid.step));
  std::vector<DensityPoint> out;
  out.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double z = grid.lower + static_cast<double>(i) * grid.step;
    out.push_back({z, std::exp(density.log_pdf(z)), gaussian_kde(sorted, h, z)});
  }
  return out;
}

void write_density_csv(std::ostream& out, std::span<const DensityPoint> points) {
  out << "z,pdf,kde\n";
  for (const auto& p : points) out << g10(p.z) << ',' << g17(p.pdf) << ',' << g17(p.kde) << '\n';
}

std::vector<DensityPoint> read_density_csv(std::istream& in) {
  std::vector<DensityPoint> out;
  for (const auto& f : read_numeric_csv(in, 3, "density")) out.push_back({to_double(f[0]), to_double(f[1]), to_double(f[2])});
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kInvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace volkit
