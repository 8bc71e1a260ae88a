#include "volkit/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "volkit/error.hpp"

namespace volkit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : trim(text)) {
    if (c != ',' && c != '$') cleaned.push_back(c);
  }
  if (!cleaned.empty() && cleaned.front() == '+') cleaned.erase(0, 1);
  if (cleaned.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = cleaned.data();
  const char* last = first + cleaned.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<Date> parse_date(std::string_view text, const std::string& format) {
  text = trim(text);
  if (format == "%Y-%m-%d") return parse_iso_date(text);
  std::tm tm{};
  std::istringstream in{std::string(text)};
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  Date date{std::chrono::year{tm.tm_year + 1900}, std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
            std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  throw Error(ErrorCode::kMalformedRow, "line 1: header has no column '" + name + "'");
}

DescriptiveStats compute_stats(std::span<const double> values) {
  const auto n = values.size();
  DescriptiveStats s;
  s.n = n;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = sample_mean(values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double dn = static_cast<double>(n);
  s.std_dev = std::sqrt(m2 / (dn - 1.0));
  m2 /= dn;
  m3 /= dn;
  m4 /= dn;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  // Guard the ordering invariant against rounding in the mean.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

}  // namespace

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::optional<Date> parse_iso_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto ok = [](std::from_chars_result r, const char* end) { return r.ec == std::errc{} && r.ptr == end; };
  if (!ok(std::from_chars(text.data(), text.data() + 4, y), text.data() + 4)) return std::nullopt;
  if (!ok(std::from_chars(text.data() + 5, text.data() + 7, m), text.data() + 7)) return std::nullopt;
  if (!ok(std::from_chars(text.data() + 8, text.data() + 10, d), text.data() + 10)) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

PriceSeries::PriceSeries(std::vector<PriceObservation> observations)
    : observations_(std::move(observations)) {
  if (observations_.size() < 2) {
    throw Error(ErrorCode::kSeriesTooShort, "price series needs at least 2 observations");
  }
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    if (!(observations_[i].close > 0.0) || !std::isfinite(observations_[i].close)) {
      throw Error(ErrorCode::kNonPositivePrice, "close on " + format_date(observations_[i].date) + " is not positive");
    }
    if (i > 0 && !(observations_[i - 1].date < observations_[i].date)) {
      throw Error(ErrorCode::kInvalidArgument, "dates must be strictly increasing");
    }
  }
}

PriceSeries PriceSeries::between(std::optional<Date> from, std::optional<Date> to) const {
  std::vector<PriceObservation> kept;
  for (const auto& obs : observations_) {
    if (from && obs.date < *from) continue;
    if (to && *to < obs.date) continue;
    kept.push_back(obs);
  }
  return PriceSeries(std::move(kept));
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kSeriesTooShort, "mean of empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::kSeriesTooShort, "variance needs at least 2 values");
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

DescriptiveStats descriptive_stats(std::span<const double> values) {
  if (values.size() < 4) {
    throw Error(ErrorCode::kSeriesTooShort, "descriptive statistics need at least 4 values");
  }
  return compute_stats(values);
}

ReturnSeries::ReturnSeries(std::vector<Date> dates, std::vector<double> values)
    : dates_(std::move(dates)), values_(std::move(values)) {
  if (dates_.size() != values_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "return dates and values differ in length");
  }
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) throw Error(ErrorCode::kInvalidArgument, "return dates must be strictly increasing");
  }
  if (values_.size() >= 4) stats_ = compute_stats(values_);
}

ReturnSeries ReturnSeries::from_values(std::vector<double> values, Date first) {
  std::vector<Date> dates;
  dates.reserve(values.size());
  std::chrono::sys_days day{first};
  for (std::size_t i = 0; i < values.size(); ++i) {
    dates.emplace_back(day);
    day += std::chrono::days{1};
  }
  return ReturnSeries(std::move(dates), std::move(values));
}

ReturnSeries log_returns(const PriceSeries& prices) {
  const auto obs = prices.observations();
  if (obs.size() < 2) throw Error(ErrorCode::kSeriesTooShort, "log returns need at least 2 prices");
  std::vector<Date> dates;
  std::vector<double> values;
  dates.reserve(obs.size() - 1);
  values.reserve(obs.size() - 1);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    dates.push_back(obs[t].date);
    values.push_back(std::log(obs[t].close) - std::log(obs[t - 1].close));
  }
  return ReturnSeries(std::move(dates), std::move(values));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

PriceSeries parse_price_csv(std::istream& in, const CsvConfig& config, std::vector<IngestWarning>* warnings) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw Error(ErrorCode::kEmptyInput, "input has no header row");

  const auto header = split_csv_line(line);
  const std::size_t date_col = column_index(header, config.date_column);
  const std::size_t price_col = column_index(header, config.price_column);
  const std::size_t needed = std::max(date_col, price_col) + 1;

  // Later rows with the same date overwrite earlier ones.
  std::map<std::chrono::sys_days, std::pair<double, std::size_t>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() < needed) throw Error(ErrorCode::kMalformedRow, where + ": expected at least " + std::to_string(needed) + " fields");
    const auto date = parse_date(fields[date_col], config.date_format);
    if (!date) throw Error(ErrorCode::kMalformedRow, where + ": unparseable date '" + fields[date_col] + "'");
    const auto price = parse_number(fields[price_col]);
    if (!price) throw Error(ErrorCode::kMalformedRow, where + ": unparseable price '" + fields[price_col] + "'");
    if (!(*price > 0.0)) throw Error(ErrorCode::kNonPositivePrice, where + ": close " + fields[price_col] + " is not positive");
    const std::chrono::sys_days key{*date};
    auto [it, inserted] = rows.try_emplace(key, *price, line_no);
    if (!inserted) {
      if (warnings) {
        warnings->push_back({line_no, "duplicate date " + format_date(*date) + " replaces line " + std::to_string(it->second.second)});
      }
      it->second = {*price, line_no};
    }
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "input has no data rows");

  std::vector<PriceObservation> observations;
  observations.reserve(rows.size());
  for (const auto& [day, value] : rows) observations.push_back({Date{day}, value.first});
  return PriceSeries(std::move(observations));
}

void write_returns_csv(std::ostream& out, const ReturnSeries& returns) {
  out << "date,log_return\n";
  char buf[64];
  for (std::size_t i = 0; i < returns.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g", returns.values()[i]);
    out << format_date(returns.dates()[i]) << ',' << buf << '\n';
  }
}

ReturnSeries read_returns_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, "returns file is empty");
  std::vector<Date> dates;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const auto date = fields.size() == 2 ? parse_iso_date(fields[0]) : std::nullopt;
    const auto value = fields.size() == 2 ? parse_number(fields[1]) : std::nullopt;
    if (!date || !value) throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": expected date,log_return");
    dates.push_back(*date);
    values.push_back(*value);
  }
  return ReturnSeries(std::move(dates), std::move(values));
}

}  // namespace volkit
