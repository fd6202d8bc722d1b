#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "locpar/family.hpp"
#include "locpar/interval_grid.hpp"
#include "locpar/procedures.hpp"

namespace locpar {

struct PriceSeries {
    std::vector<std::string> timestamps;
    std::vector<double> prices;

    [[nodiscard]] std::size_t size() const noexcept { return prices.size(); }
};

/// Squared log returns Y_t = (ln S_t - ln S_{t-1})^2, modelled as Y = theta * eps^2.
struct ReturnSeries {
    std::vector<double> sq_log_returns;
    std::size_t horizon = 1;

    [[nodiscard]] std::size_t size() const noexcept { return sq_log_returns.size(); }
};

/**
 * Two-column (timestamp, price) CSV; an optional header row is detected by a
 * non-numeric price field. Timestamps must increase strictly: numerically when
 * both parse as numbers, lexicographically otherwise.
 * @throws ParseError (with 1-based row) or Error(NonpositivePrice).
 */
[[nodiscard]] PriceSeries parse_prices(std::istream& in);
[[nodiscard]] PriceSeries load_prices(const std::filesystem::path& path);

/// One value per row (first column), optional header. Used for raw observation files.
[[nodiscard]] std::vector<double> parse_observations(std::istream& in);
[[nodiscard]] std::vector<double> load_observations(const std::filesystem::path& path);

[[nodiscard]] ReturnSeries to_returns(const PriceSeries& prices, std::size_t horizon = 1);

struct BacktestRow {
    std::size_t t = 0;  ///< 1-based index into the return series
    std::size_t k_hat = 0;
    double theta_hat = 0.0;
    double realized = 0.0;  ///< Y_{t + horizon}
};

struct BacktestResult {
    std::vector<BacktestRow> rows;
    double mean_kl_loss = 0.0;  ///< mean K(max(realized, eps), theta_hat)
};

/**
 * Rolling volatility estimation: right edge t runs from the largest interval
 * length to size - horizon in steps of `stride`, and theta_hat_t is the flat
 * forecast of E[Y_{t+horizon}]. Empty when stride exceeds the series length.
 */
[[nodiscard]] BacktestResult backtest(const ReturnSeries& returns, Method method,
                                      const GridSpec& grid, const CriticalValues& cv,
                                      const AggregationKernel& kernel, std::size_t stride,
                                      std::size_t threads = 1);

/// Writes "t,k_hat,theta_hat,realized" with 17 significant digits.
void write_backtest_csv(std::ostream& out, const BacktestResult& result);

/// printf("%.17g") formatting used by every tabular output.
[[nodiscard]] std::string format_double(double x);

}  // namespace locpar
