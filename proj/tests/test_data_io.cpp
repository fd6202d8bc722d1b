#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "locpar/calibration.hpp"
#include "locpar/data_io.hpp"
#include "locpar/error.hpp"

using namespace locpar;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PriceSeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_prices(in);
}

PriceSeries prices_of(std::vector<double> p) {
    PriceSeries s;
    for (std::size_t i = 0; i < p.size(); ++i) s.timestamps.push_back(std::to_string(i + 1));
    s.prices = std::move(p);
    return s;
}

// geometric random walk with constant volatility sigma
PriceSeries random_walk(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<double> p{100.0};
    for (std::size_t i = 1; i < n; ++i) p.push_back(p.back() * std::exp(sigma * eps(rng)));
    return prices_of(std::move(p));
}

}  // namespace

TEST(LoadPrices, HeaderAndRows) {
    const PriceSeries s = parse("t,p\n1,100\n2,101\n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.timestamps[1], "2");
    EXPECT_EQ(s.prices[1], 101.0);

    const PriceSeries bare = parse("2024-01-01,3.5\r\n2024-01-02, 3.75\n\n");
    ASSERT_EQ(bare.size(), 2u);
    EXPECT_EQ(bare.prices[1], 3.75);
}

TEST(LoadPrices, RejectsBadRows) {
    try {
        (void)parse("t,p\n1,100\n2,0\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonpositivePrice);
    }
    EXPECT_THROW((void)parse("1,-3\n"), Error);
    try {
        (void)parse("t,p\n1,100\n2,abc\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
    }
    EXPECT_THROW((void)parse("1,100,7\n"), ParseError);
    EXPECT_THROW((void)parse("2,100\n1,101\n"), ParseError);       // timestamps must increase
    EXPECT_THROW((void)parse("10,100\n9,101\n"), ParseError);      // numerically, not as text
    EXPECT_NO_THROW((void)parse("9,100\n10,101\n"));
}

TEST(LoadPrices, MissingFileIsParseError) {
    try {
        (void)load_prices("/nonexistent/prices.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 0u);
    }
}

TEST(LoadPrices, RoundTripThroughFile) {
    const auto path = std::filesystem::temp_directory_path() / "locpar_prices_test.csv";
    {
        std::ofstream f(path);
        f << "date,close\n1,100\n2,110\n3,99\n";
    }
    const PriceSeries s = load_prices(path);
    const ReturnSeries a = to_returns(s);
    const ReturnSeries b = to_returns(load_prices(path));
    EXPECT_EQ(a.sq_log_returns, b.sq_log_returns);
    EXPECT_EQ(a.size(), 2u);
    std::filesystem::remove(path);
}

TEST(Observations, OneColumnWithHeader) {
    std::istringstream in("y\n1.5\n2\n-3e-1\n");
    EXPECT_EQ(parse_observations(in), (std::vector<double>{1.5, 2.0, -0.3}));
    std::istringstream bad("1\nx\n");
    EXPECT_THROW((void)parse_observations(bad), ParseError);
}

TEST(ToReturns, Examples) {
    const ReturnSeries r = to_returns(prices_of({100.0, 101.0}));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r.sq_log_returns[0], 9.9007e-5, 1e-8);
    EXPECT_DOUBLE_EQ(r.sq_log_returns[0], std::pow(std::log(1.01), 2));

    for (double y : to_returns(prices_of({7.0, 7.0, 7.0, 7.0})).sq_log_returns) EXPECT_EQ(y, 0.0);

    EXPECT_NEAR(to_returns(prices_of({100.0, 100.0 * std::numbers::e})).sq_log_returns[0], 1.0, 1e-15);
}

TEST(ToReturns, Errors) {
    try {
        (void)to_returns(prices_of({100.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooShort);
    }
    EXPECT_THROW((void)to_returns(prices_of({1.0, 2.0}), 0), Error);
}

TEST(Backtest, RowCountMatchesStrideFormula) {
    const GridSpec grid{5, 1.5, 3};  // largest 11
    const ReturnSeries y = to_returns(random_walk(101, 0.01, 4));  // 100 returns
    const CriticalValues cv{{kInf, kInf, kInf}};
    for (std::size_t stride : {1u, 2u, 7u, 89u, 90u, 100u}) {
        const auto res = backtest(y, Method::LMS, grid, cv, {}, stride);
        const std::size_t usable = (100 - 1) - 11;  // last right edge minus first
        EXPECT_EQ(res.rows.size(), usable / stride + 1) << stride;
        EXPECT_EQ(res.rows.front().t, 11u);
        for (std::size_t i = 1; i < res.rows.size(); ++i) EXPECT_EQ(res.rows[i].t - res.rows[i - 1].t, stride);
        EXPECT_EQ(res.rows.back().realized, y.sq_log_returns[res.rows.back().t]);
    }
    EXPECT_TRUE(backtest(y, Method::LMS, grid, cv, {}, 101).rows.empty());

    ReturnSeries h3 = y;
    h3.horizon = 3;
    const auto res = backtest(h3, Method::LMS, grid, cv, {}, 1);
    EXPECT_EQ(res.rows.back().t, 97u);
    EXPECT_EQ(res.rows.back().realized, y.sq_log_returns[99]);
}

TEST(Backtest, FullWindowForecastAndLoss) {
    const GridSpec grid{5, 1.5, 3};
    const ReturnSeries y = to_returns(random_walk(60, 0.02, 8));
    const auto res = backtest(y, Method::SA, grid, CriticalValues{{kInf, kInf, kInf}}, {}, 5);
    double loss = 0.0;
    for (const auto& row : res.rows) {
        double mean = 0.0;
        for (std::size_t s = row.t - 11; s < row.t; ++s) mean += y.sq_log_returns[s];
        mean /= 11.0;
        EXPECT_NEAR(row.theta_hat, mean, 1e-15 * mean);
        EXPECT_EQ(row.k_hat, 3u);
        const double r = std::max(row.realized, 1e-12);
        loss += 0.5 * (r / row.theta_hat - 1.0 - std::log(r / row.theta_hat));
    }
    EXPECT_NEAR(res.mean_kl_loss, loss / static_cast<double>(res.rows.size()), 1e-9 * res.mean_kl_loss);
}

TEST(Backtest, HomogeneousDataSelectsLargeWindows) {
    const GridSpec grid{10, 1.25, 5};
    CalibrationConfig config;
    config.family = Family::volatility();
    config.theta_star = 1.0;
    config.grid = grid;
    config.m_reps = 1000;
    config.seed = 21;
    const CriticalValues cv = calibrate(Method::LMS, config).cv;
    const ReturnSeries y = to_returns(random_walk(2001, 0.01, 5));
    const auto res = backtest(y, Method::LMS, grid, cv, {}, 1);
    double k_sum = 0.0;
    for (const auto& row : res.rows) k_sum += static_cast<double>(row.k_hat);
    EXPECT_GT(k_sum / static_cast<double>(res.rows.size()), 4.0);
}

TEST(Backtest, BitIdenticalReruns) {
    const GridSpec grid{5, 1.5, 4};
    const ReturnSeries y = to_returns(random_walk(300, 0.01, 6));
    const CriticalValues cv{{1.0, 2.0, 1.0}};
    std::ostringstream a, b;
    write_backtest_csv(a, backtest(y, Method::LCP, grid, cv, {}, 3, 1));
    write_backtest_csv(b, backtest(y, Method::LCP, grid, cv, {}, 3, 4));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind("t,k_hat,theta_hat,realized\n", 0), 0u);
}

TEST(Backtest, Errors) {
    const GridSpec grid{5, 1.5, 3};
    const ReturnSeries y = to_returns(random_walk(50, 0.01, 1));
    EXPECT_THROW((void)backtest(y, Method::LMS, grid, CriticalValues{{1.0, 1.0}}, {}, 1), Error);
    EXPECT_THROW((void)backtest(y, Method::LMS, grid, CriticalValues{{1.0, 1.0, 1.0}}, {}, 0), Error);
}

TEST(FormatDouble, SeventeenDigitsRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, 9.9007e-5, -2.5e300}) {
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}
