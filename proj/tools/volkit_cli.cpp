// volkit: returns diagnostics and GARCH(1,1) fitting from the command line.
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "volkit/diagnostics.hpp"
#include "volkit/error.hpp"
#include "volkit/estimation.hpp"
#include "volkit/garch.hpp"
#include "volkit/report.hpp"
#include "volkit/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace volkit;

namespace {

constexpr int kUsageExit = 2;
constexpr int kNumericalExit = 3;

struct RunConfig {
  std::string input;
  std::string returns;
  CsvConfig csv;
  std::string from;
  std::string to;
  std::string model = "sgarch";
  std::string dist = "std";
  int lags_lb = 10;
  int lags_lm = 12;
  std::optional<int> adf_max_lag;
  double alpha = 0.05;
  bool demean = false;
  std::uint64_t seed = 1;
  int starts = 5;
  std::optional<double> sigma2_init;
  bool sandwich = false;
  unsigned threads = 0;
  std::string out = ".";
  std::string fit;
  std::optional<double> bandwidth;
};

struct SimulateConfig {
  double omega = 0.05;
  double arch = 0.1;
  double garch = 0.85;
  double leverage = 0.0;
  std::optional<double> shape;
  double skew = 0.0;
  std::size_t n = 2000;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateSample:
    case ErrorCode::kSingularRegression:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kNonpositiveVariance:
    case ErrorCode::kNonFiniteLikelihood:
    case ErrorCode::kAllStartsFailed:
    case ErrorCode::kAllFitsFailed:
      return kNumericalExit;
    default:
      return kUsageExit;
  }
}

std::optional<Date> date_option(const std::string& text, const char* flag) {
  if (text.empty()) return std::nullopt;
  auto date = parse_iso_date(text);
  if (!date) throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " expects YYYY-MM-DD, got '" + text + "'");
  return date;
}

ReturnSeries load_returns(const RunConfig& cfg) {
  const auto from = date_option(cfg.from, "--from");
  const auto to = date_option(cfg.to, "--to");
  if (from && to && !(*from < *to)) throw Error(ErrorCode::kInvalidArgument, "--from must precede --to");

  if (!cfg.returns.empty()) {
    std::ifstream in(cfg.returns);
    if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + cfg.returns);
    auto all = read_returns_csv(in);
    std::vector<Date> dates;
    std::vector<double> values;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const Date d = all.dates()[i];
      if ((from && d < *from) || (to && *to < d)) continue;
      dates.push_back(d);
      values.push_back(all.values()[i]);
    }
    if (values.empty()) throw Error(ErrorCode::kSeriesTooShort, "no returns inside the date range");
    return ReturnSeries(std::move(dates), std::move(values));
  }
  if (cfg.input.empty()) throw Error(ErrorCode::kInvalidArgument, "one of --input or --returns is required");
  std::ifstream in(cfg.input);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + cfg.input);
  std::vector<IngestWarning> warnings;
  auto prices = parse_price_csv(in, cfg.csv, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: line " << w.line << ": " << w.message << '\n';
  return log_returns(prices.between(from, to));
}

fs::path out_path(const RunConfig& cfg, const char* name) {
  fs::create_directories(cfg.out);
  return fs::path(cfg.out) / name;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

FitConfig fit_config(const RunConfig& cfg) {
  FitConfig fc;
  fc.starts = cfg.starts;
  fc.seed = cfg.seed;
  fc.demean = cfg.demean;
  fc.sigma2_init = cfg.sigma2_init;
  fc.sandwich = cfg.sandwich;
  return fc;
}

json stats_json(const DescriptiveStats& s) {
  return {{"n", s.n},           {"min", s.min},           {"max", s.max},
          {"mean", s.mean},     {"std_dev", s.std_dev},   {"skewness", s.skewness},
          {"excess_kurtosis", s.excess_kurtosis}};
}

int cmd_ingest(const RunConfig& cfg) {
  const auto returns = load_returns(cfg);
  std::ostringstream csv;
  write_returns_csv(csv, returns);
  write_file_atomic(out_path(cfg, "returns.csv"), csv.str());
  json summary = {{"n_returns", returns.size()},
                  {"first", format_date(returns.dates().front())},
                  {"last", format_date(returns.dates().back())}};
  if (returns.stats()) summary["stats"] = stats_json(*returns.stats());
  write_json(out_path(cfg, "stats.json"), summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_diagnose(const RunConfig& cfg) {
  const auto returns = load_returns(cfg);
  const auto x = returns.values();
  std::vector<double> squared(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) squared[i] = x[i] * x[i];

  json reports = json::array();
  reports.push_back(to_json(jarque_bera(x, cfg.alpha)));
  reports.push_back(to_json(anderson_darling(x, cfg.alpha)));
  reports.push_back(to_json(ljung_box(squared, cfg.lags_lb, cfg.alpha)));
  reports.push_back(to_json(arch_lm(x, cfg.lags_lm, cfg.alpha)));
  reports.push_back(to_json(adf_test(x, cfg.adf_max_lag, cfg.alpha)));
  write_json(out_path(cfg, "diagnostics.json"), reports);
  for (const auto& r : reports) {
    std::cout << r["name"].get<std::string>() << ": statistic " << r["statistic"].get<double>() << ", p "
              << r["p_display"].get<std::string>() << (r["reject_null"].get<bool>() ? ", reject" : "") << '\n';
  }
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  const auto returns = load_returns(cfg);
  const Model model = *parse_model(cfg.model);
  const Family family = *parse_family(cfg.dist);
  FitResult result;
  try {
    result = fit(model, family, returns.values(), fit_config(cfg));
  } catch (const FitError& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    for (const auto& t : e.trace()) {
      std::cerr << "  start " << t.start << " " << t.stage << ": evaluations " << t.evaluations << ", logL "
                << t.log_likelihood << '\n';
    }
    return kNumericalExit;
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  write_json(out_path(cfg, "fit.json"), to_json(result));
  std::ostringstream csv;
  write_volatility_csv(csv, returns.dates(), fitted_variance(result, returns.values()));
  write_file_atomic(out_path(cfg, "volatility.csv"), csv.str());
  std::cout << to_string(model) << "-" << to_string(family) << ": logL " << result.log_likelihood << ", AIC "
            << result.aic << ", BIC " << result.bic << (result.converged ? "" : " (not converged)") << '\n';
  return 0;
}

int cmd_select(const RunConfig& cfg) {
  const auto returns = load_returns(cfg);
  const auto report = select_model(returns.values(), fit_config(cfg), cfg.threads);
  write_json(out_path(cfg, "selection.json"), to_json(report));
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const auto& cell = report.grid[i];
    std::cout << to_string(cell.model) << "-" << to_string(cell.family) << ": ";
    if (cell.fit) {
      std::cout << "logL " << cell.fit->log_likelihood << ", AIC " << cell.fit->aic << ", BIC " << cell.fit->bic;
    } else {
      std::cout << "failed: " << cell.error;
    }
    if (i == report.best_by_aic) std::cout << "  [best AIC]";
    if (i == report.best_by_bic) std::cout << "  [best BIC]";
    if (i == report.best_by_loglik) std::cout << "  [best logL]";
    std::cout << '\n';
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const SimulateConfig& sim) {
  GarchParams params;
  params.model = *parse_model(cfg.model);
  const Family family = *parse_family(cfg.dist);
  const double default_shape = family == Family::kStudentT ? 6.0 : 1.5;
  params.innovation = {family, sim.shape.value_or(default_shape), family == Family::kNig ? sim.skew : 0.0};
  params.omega = sim.omega;
  params.beta = sim.garch;
  params.alpha = params.model == Model::kIGarch ? 1.0 - sim.garch : sim.arch;
  params.lambda = params.model == Model::kTGarch ? sim.leverage : 0.0;
  validate(params);
  if (sim.n < 1) throw Error(ErrorCode::kInvalidArgument, "--n must be positive");

  double sigma2_init = cfg.sigma2_init.value_or(0.0);
  if (!cfg.sigma2_init) {
    const double p = persistence(params);
    sigma2_init = p < 1.0 ? params.omega / (1.0 - p) : std::max(params.omega, 1.0);
  }
  const auto path = simulate_path(params, sim.n, sigma2_init, cfg.seed);
  auto series = ReturnSeries::from_values(path.returns);
  std::ostringstream csv;
  write_returns_csv(csv, series);
  write_file_atomic(out_path(cfg, "returns.csv"), csv.str());
  std::ostringstream vol;
  write_volatility_csv(vol, series.dates(), VariancePath{path.sigma2, sigma2_init});
  write_file_atomic(out_path(cfg, "volatility.csv"), vol.str());
  std::cout << "simulated " << sim.n << " returns\n";
  return 0;
}

FitResult load_fit(const RunConfig& cfg, std::size_t n_returns) {
  std::ifstream in(cfg.fit);
  if (!in) throw Error(ErrorCode::kMissingArtifact, "cannot open fit artifact '" + cfg.fit + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMissingArtifact, std::string("unreadable fit artifact: ") + e.what());
  }
  auto result = fit_from_json(j);
  if (result.n_obs != n_returns) {
    throw Error(ErrorCode::kInvalidArgument, "fit artifact covers " + std::to_string(result.n_obs) +
                                                 " returns but the input has " + std::to_string(n_returns));
  }
  return result;
}

int cmd_qq(const RunConfig& cfg) {
  const auto returns = load_returns(cfg);
  const auto result = load_fit(cfg, returns.size());
  const auto z = standardized_residuals(result, returns.values());
  const auto points = qq_points(result.params.innovation, z);
  std::ostringstream csv;
  write_qq_csv(csv, points);
  write_file_atomic(out_path(cfg, "qq.csv"), csv.str());
  std::cout << "wrote " << points.size() << " QQ pairs\n";
  return 0;
}

int cmd_density(const RunConfig& cfg) {
  const auto returns = load_returns(cfg);
  const auto result = load_fit(cfg, returns.size());
  const auto z = standardized_residuals(result, returns.values());
  const auto points = density_points(result.params.innovation, z, cfg.bandwidth);
  std::ostringstream csv;
  write_density_csv(csv, points);
  write_file_atomic(out_path(cfg, "density.csv"), csv.str());
  std::cout << "wrote " << points.size() << " density points\n";
  return 0;
}

void add_input_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "Daily close-price CSV");
  cmd->add_option("--returns", cfg.returns, "Returns CSV (date,log_return) instead of prices");
  cmd->add_option("--date-col", cfg.csv.date_column, "Date column name")->capture_default_str();
  cmd->add_option("--price-col", cfg.csv.price_column, "Close-price column name")->capture_default_str();
  cmd->add_option("--date-format", cfg.csv.date_format, "Date format (strftime style)")->capture_default_str();
  cmd->add_option("--from", cfg.from, "First date kept (YYYY-MM-DD)");
  cmd->add_option("--to", cfg.to, "Last date kept (YYYY-MM-DD)");
  cmd->add_option("--out", cfg.out, "Output directory")->capture_default_str();
}

void add_fit_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_flag("--demean", cfg.demean, "Subtract the sample mean before fitting");
  cmd->add_option("--seed", cfg.seed, "Seed for start jitter")->capture_default_str();
  cmd->add_option("--starts", cfg.starts, "Optimizer starts")->capture_default_str()->check(CLI::Range(1, 1000));
  cmd->add_option("--sigma2-init", cfg.sigma2_init, "Initial conditional variance")->check(CLI::PositiveNumber);
  cmd->add_flag("--sandwich", cfg.sandwich, "Robust (sandwich) standard errors");
}

void add_model_options(CLI::App* cmd, RunConfig& cfg, bool required) {
  auto* model = cmd->add_option("--model", cfg.model, "Variance model")->check(CLI::IsMember({"sgarch", "igarch", "tgarch"}));
  auto* dist = cmd->add_option("--dist", cfg.dist, "Innovation law")->check(CLI::IsMember({"std", "ged", "nig"}));
  if (required) {
    model->required();
    dist->required();
  } else {
    model->capture_default_str();
    dist->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volatility modelling toolkit for daily crypto returns"};
  app.require_subcommand(1);
  RunConfig cfg;
  SimulateConfig sim;

  auto* ingest = app.add_subcommand("ingest", "Parse prices and write log returns and summary statistics");
  add_input_options(ingest, cfg);

  auto* diagnose = app.add_subcommand("diagnose", "Normality, autocorrelation, ARCH and unit-root tests");
  add_input_options(diagnose, cfg);
  diagnose->add_option("--lags-lb", cfg.lags_lb, "Ljung-Box lags")->capture_default_str();
  diagnose->add_option("--lags-lm", cfg.lags_lm, "ARCH-LM lags")->capture_default_str();
  diagnose->add_option("--adf-max-lag", cfg.adf_max_lag, "Largest ADF lag considered");
  diagnose->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str()->check(CLI::Bound(1e-12, 1.0 - 1e-12));

  auto* fit_cmd = app.add_subcommand("fit", "Fit one model by maximum likelihood");
  add_input_options(fit_cmd, cfg);
  add_model_options(fit_cmd, cfg, true);
  add_fit_options(fit_cmd, cfg);

  auto* select = app.add_subcommand("select", "Fit all nine model/distribution cells and rank them");
  add_input_options(select, cfg);
  add_fit_options(select, cfg);
  select->add_option("--threads", cfg.threads, "Worker threads (0: VOLKIT_THREADS or hardware)");

  auto* simulate = app.add_subcommand("simulate", "Simulate a GARCH(1,1) return path");
  simulate->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  add_model_options(simulate, cfg, false);
  simulate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  simulate->add_option("--n", sim.n, "Number of returns")->capture_default_str();
  simulate->add_option("--omega", sim.omega, "Variance intercept")->capture_default_str();
  simulate->add_option("--arch", sim.arch, "ARCH coefficient alpha (ignored for igarch)")->capture_default_str();
  simulate->add_option("--garch", sim.garch, "GARCH coefficient beta")->capture_default_str();
  simulate->add_option("--leverage", sim.leverage, "Leverage lambda (tgarch)")->capture_default_str();
  simulate->add_option("--shape", sim.shape, "Innovation shape (t dof, GED tail, NIG alpha)");
  simulate->add_option("--skew", sim.skew, "NIG skew")->capture_default_str();
  simulate->add_option("--sigma2-init", cfg.sigma2_init, "Initial variance (default: stationary level)")
      ->check(CLI::PositiveNumber);

  auto* qq = app.add_subcommand("qq", "QQ pairs of standardized residuals against the fitted law");
  add_input_options(qq, cfg);
  qq->add_option("--fit", cfg.fit, "Fit artifact (fit.json)")->required();

  auto* density = app.add_subcommand("density", "Fitted density and kernel estimate of standardized residuals");
  add_input_options(density, cfg);
  density->add_option("--fit", cfg.fit, "Fit artifact (fit.json)")->required();
  density->add_option("--bandwidth", cfg.bandwidth, "Kernel bandwidth (default: Silverman)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (*ingest) return cmd_ingest(cfg);
    if (*diagnose) return cmd_diagnose(cfg);
    if (*fit_cmd) return cmd_fit(cfg);
    if (*select) return cmd_select(cfg);
    if (*simulate) return cmd_simulate(cfg, sim);
    if (*qq) return cmd_qq(cfg);
    if (*density) return cmd_density(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageExit;
  }
  return kUsageExit;
}
