#include "locpar/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>

#include "locpar/error.hpp"

namespace locpar {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

bool timestamps_increase(const std::string& prev, const std::string& next) {
    const auto a = parse_number(prev);
    const auto b = parse_number(next);
    if (a && b) return *a < *b;
    return prev < next;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

PriceSeries parse_prices(std::istream& in) {
    PriceSeries series;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto content = trim(line);
        if (content.empty()) continue;
        const auto fields = split(content);
        if (fields.size() != 2) {
            throw ParseError(row, "row " + std::to_string(row) + ": expected 2 columns, got " +
                                      std::to_string(fields.size()));
        }
        const auto price = parse_number(fields[1]);
        if (!price) {
            if (row == 1) continue;  // header
            throw ParseError(row, "row " + std::to_string(row) + ": price is not a number");
        }
        if (!(*price > 0.0) || !std::isfinite(*price)) {
            throw Error(Errc::NonpositivePrice, "row " + std::to_string(row) + ": price " +
                                                    std::string(fields[1]) + " is not positive");
        }
        std::string stamp(fields[0]);
        if (!series.timestamps.empty() && !timestamps_increase(series.timestamps.back(), stamp)) {
            throw ParseError(row, "row " + std::to_string(row) + ": timestamp '" + stamp +
                                      "' does not increase");
        }
        series.timestamps.push_back(std::move(stamp));
        series.prices.push_back(*price);
    }
    return series;
}

PriceSeries load_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open price file '" + path.string() + "'");
    return parse_prices(in);
}

std::vector<double> parse_observations(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto content = trim(line);
        if (content.empty()) continue;
        const auto value = parse_number(split(content).front());
        if (!value) {
            if (row == 1) continue;
            throw ParseError(row, "row " + std::to_string(row) + ": value is not a number");
        }
        values.push_back(*value);
    }
    return values;
}

std::vector<double> load_observations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open data file '" + path.string() + "'");
    return parse_observations(in);
}

ReturnSeries to_returns(const PriceSeries& prices, std::size_t horizon) {
    if (prices.size() < 2) throw Error(Errc::TooShort, "need at least two prices for a return");
    if (horizon < 1) throw Error(Errc::InvalidArgument, "forecast horizon must be at least 1");
    ReturnSeries out;
    out.horizon = horizon;
    out.sq_log_returns.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        const double r = std::log(prices.prices[i] / prices.prices[i - 1]);
        out.sq_log_returns.push_back(r * r);
    }
    return out;
}

BacktestResult backtest(const ReturnSeries& returns, Method method, const GridSpec& grid,
                        const CriticalValues& cv, const AggregationKernel& kernel, std::size_t stride,
                        std::size_t threads) {
    if (stride < 1) throw Error(Errc::InvalidArgument, "stride must be at least 1");
    const std::size_t expected = cv_length(method, grid.k_max);
    if (cv.z.size() != expected) {
        throw Error(Errc::LengthMismatch, "expected " + std::to_string(expected) +
                                              " critical values, got " + std::to_string(cv.z.size()));
    }
    const Family family = Family::volatility();
    const auto& y = returns.sq_log_returns;
    require_support(family, y);

    BacktestResult result;
    const std::size_t first = grid.largest();
    const std::size_t h = returns.horizon;
    if (stride > y.size() || y.size() < h || first > y.size() - h) return result;
    const std::size_t last = y.size() - h;
    const std::size_t count = (last - first) / stride + 1;

    result.rows.resize(count);
    parallel_for(count, threads, [&](std::size_t i) {
        const std::size_t t = first + i * stride;
        const AdaptiveResult res = run_method(method, family, y, grid.at(t), cv, kernel);
        result.rows[i] = {t, res.k_hat, res.theta_hat, y[t + h - 1]};
    });
    double loss = 0.0;
    for (const auto& r : result.rows) loss += kl(family, clamp_to_domain(family, r.realized), r.theta_hat);
    result.mean_kl_loss = loss / static_cast<double>(count);
    return result;
}

void write_backtest_csv(std::ostream& out, const BacktestResult& result) {
    out << "t,k_hat,theta_hat,realized\n";
    for (const auto& r : result.rows) {
        out << r.t << ',' << r.k_hat << ',' << format_double(r.theta_hat) << ','
            << format_double(r.realized) << '\n';
    }
}

}  // namespace locpar
