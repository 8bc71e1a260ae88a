#pragma once

// Daily close-price ingestion, log returns and descriptive statistics.

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volkit {

using Date = std::chrono::year_month_day;

/// Formats as YYYY-MM-DD.
std::string format_date(Date date);
/// Parses YYYY-MM-DD; returns nullopt on anything else.
std::optional<Date> parse_iso_date(std::string_view text);

struct PriceObservation {
  Date date;
  double close = 0.0;
};

/// Ordered close prices. Dates strictly increase, closes are positive, length >= 2.
class PriceSeries {
 public:
  explicit PriceSeries(std::vector<PriceObservation> observations);

  std::span<const PriceObservation> observations() const noexcept { return observations_; }
  std::size_t size() const noexcept { return observations_.size(); }

  /// Observations with from <= date <= to. Throws SERIES_TOO_SHORT if fewer than two remain.
  PriceSeries between(std::optional<Date> from, std::optional<Date> to) const;

 private:
  std::vector<PriceObservation> observations_;
};

struct DescriptiveStats {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;          // n - 1 denominator
  double skewness = 0.0;         // m3 / m2^(3/2), biased moments
  double excess_kurtosis = 0.0;  // m4 / m2^2 - 3, biased moments
};

/// Requires n >= 4.
DescriptiveStats descriptive_stats(std::span<const double> values);

/// Unbiased sample variance (n - 1 denominator). Requires n >= 2.
double sample_variance(std::span<const double> values);
double sample_mean(std::span<const double> values);

class ReturnSeries {
 public:
  ReturnSeries(std::vector<Date> dates, std::vector<double> values);

  /// Assigns consecutive calendar days starting at `first`.
  static ReturnSeries from_values(std::vector<double> values,
                                  Date first = Date{std::chrono::year{2000}, std::chrono::January,
                                                    std::chrono::day{2}});

  std::span<const Date> dates() const noexcept { return dates_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Cached statistics; empty when fewer than four returns.
  const std::optional<DescriptiveStats>& stats() const noexcept { return stats_; }

 private:
  std::vector<Date> dates_;
  std::vector<double> values_;
  std::optional<DescriptiveStats> stats_;
};

/// r_t = ln(P_t) - ln(P_{t-1}), dated at P_t.
ReturnSeries log_returns(const PriceSeries& prices);

struct CsvConfig {
  std::string date_column = "date";
  std::string price_column = "close";
  /// std::get_time format string.
  std::string date_format = "%Y-%m-%d";
};

struct IngestWarning {
  std::size_t line = 0;
  std::string message;
};

/// Reads a headered CSV. Rows are sorted by date; a repeated date keeps the last row and
/// records a warning. Quoted fields are supported and thousands separators in the price
/// column are ignored.
PriceSeries parse_price_csv(std::istream& in, const CsvConfig& config = {},
                            std::vector<IngestWarning>* warnings = nullptr);

/// `date,log_return` with 10 significant digits.
void write_returns_csv(std::ostream& out, const ReturnSeries& returns);
ReturnSeries read_returns_csv(std::istream& in);

/// Splits one CSV record, honouring double quotes.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace volkit
