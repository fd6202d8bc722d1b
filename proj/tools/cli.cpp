#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "locpar/calibration.hpp"
#include "locpar/data_io.hpp"
#include "locpar/error.hpp"
#include "locpar/report_io.hpp"
#include "locpar/simulation.hpp"

namespace locpar::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

struct SeedOption {
    std::optional<std::uint64_t> flag;

    [[nodiscard]] std::uint64_t resolve() const {
        if (flag) return *flag;
        if (const char* env = std::getenv("LOCPAR_SEED"); env != nullptr && *env != '\0') {
            char* end = nullptr;
            const auto v = std::strtoull(env, &end, 10);
            if (end == nullptr || *end != '\0') {
                throw Error(Errc::InvalidArgument, "LOCPAR_SEED must be an unsigned integer");
            }
            return v;
        }
        return kDefaultSeed;
    }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::InvalidArgument, "cannot write '" + path + "'");
    f << content;
    if (!f) throw Error(Errc::InvalidArgument, "failed writing '" + path + "'");
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<unsigned>(1, std::thread::hardware_concurrency());
}

// --- calibrate -------------------------------------------------------------

struct CalibrateArgs {
    std::string family = "gaussian";
    std::string method = "lms";
    double sigma = 1.0;
    std::optional<double> theta;
    GridSpec grid;
    double r = 0.5;
    double alpha = 0.25;
    std::size_t reps = 5000;
    double z_max = 50.0;
    double tol = 1e-3;
    double kernel_b = 0.3;
    SeedOption seed;
    std::size_t threads = 1;
    std::string out;
};

double default_theta(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Gaussian: return 0.0;
        case FamilyKind::Bernoulli: return 0.5;
        default: return 1.0;
    }
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    CalibrationConfig config;
    config.family = Family{parse_family_kind(a.family), a.sigma};
    config.theta_star = a.theta.value_or(default_theta(config.family.kind));
    config.grid = a.grid;
    config.r = a.r;
    config.alpha = a.alpha;
    config.m_reps = a.reps;
    config.search = {a.z_max, a.tol};
    config.kernel.b = a.kernel_b;
    config.seed = a.seed.resolve();
    config.threads = resolve_threads(a.threads);
    const Method method = parse_method(a.method);

    const CalibrationReport report = calibrate(method, config);
    write_file(a.out, dump(to_json(report)));
    out << "wrote " << a.out << "\ncv:";
    for (double z : report.cv.z) out << ' ' << format_double(z);
    out << '\n';
    return kExitOk;
}

// --- estimate --------------------------------------------------------------

struct EstimateArgs {
    std::string data;
    std::string cv;
    std::optional<std::string> family;
    std::optional<std::string> method;
    std::optional<std::size_t> t;
    double kernel_b = 0.3;
    bool verbose = false;
};

std::string_view decision_name(StepDecision d) {
    switch (d) {
        case StepDecision::Accepted: return "accept";
        case StepDecision::Rejected: return "reject";
        case StepDecision::NotTested: return "untested";
    }
    return "";
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    const CalibrationReport cvr = load_calibration_report(a.cv);
    Family family = cvr.config.family;
    if (a.family && parse_family_kind(*a.family) != family.kind) {
        throw Error(Errc::LengthMismatch, "critical values were calibrated for family '" +
                                              std::string(to_string(family.kind)) + "'");
    }
    const Method method = a.method ? parse_method(*a.method) : cvr.method;
    if (method != cvr.method) {
        throw Error(Errc::LengthMismatch, "critical values were calibrated for method '" +
                                              std::string(to_string(cvr.method)) + "'");
    }
    const auto data = load_observations(a.data);
    const std::size_t t = a.t.value_or(data.size());
    const IntervalGrid grid = cvr.config.grid.at(t);
    const AdaptiveResult res = run_method(method, family, data, grid, cvr.cv, AggregationKernel{a.kernel_b});
    const StepEstimates steps = step_estimates(family, data, grid);

    const Json config{{"data", a.data}, {"cv", a.cv}, {"family", to_json(family)},
                      {"method", std::string(to_string(method))}, {"grid", to_json(cvr.config.grid)},
                      {"t", t}, {"kernel_b", a.kernel_b}};
    out << "config: " << config.dump() << '\n';
    out << "k_hat: " << res.k_hat << '\n';
    out << "theta_hat: " << format_double(res.theta_hat) << '\n';
    if (res.change_point) out << "change_point: " << *res.change_point << '\n';
    if (a.verbose) {
        out << "k,length,estimate,statistic,decision,trajectory";
        if (method == Method::SA) out << ",gamma";
        out << '\n';
        for (std::size_t k = 1; k <= steps.size(); ++k) {
            out << k << ',' << steps.lengths[k - 1] << ',' << format_double(steps.estimates[k - 1]) << ',';
            // LCP statistics belong to the step they would admit
            const std::size_t idx = method == Method::LCP ? k - 1 : k;
            const bool has = method == Method::LCP ? k >= 2 : true;
            if (has) out << format_double(res.statistics[idx - 1]);
            out << ',';
            if (method != Method::SA) {
                if (method == Method::LMS) out << decision_name(res.decisions[k - 1]);
                else out << (k == 1 ? "accept" : decision_name(res.decisions[k - 2]));
            }
            out << ',' << format_double(res.trajectory[k - 1]);
            if (method == Method::SA) out << ',' << format_double(res.gammas[k - 1]);
            out << '\n';
        }
    }
    return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::optional<std::string> scenario;
    std::optional<std::string> config;
    std::optional<std::size_t> reps;
    SeedOption seed;
    std::optional<std::size_t> n0;
    std::optional<double> ratio;
    std::optional<std::size_t> k;
    std::optional<std::string> cv_lms, cv_lcp, cv_sa;
    std::size_t cal_reps = 5000;
    double kernel_b = 0.3;
    std::size_t threads = 1;
    std::string out;
};

CriticalValues resolve_cv(Method method, const std::optional<std::string>& path, const Scenario& scenario,
                          const GridSpec& grid, const AggregationKernel& kernel, std::size_t cal_reps,
                          std::size_t threads, Json& echo) {
    if (path) {
        const CalibrationReport r = load_calibration_report(*path);
        if (r.method != method || !(r.config.family == scenario.family) || !(r.config.grid == grid)) {
            throw Error(Errc::LengthMismatch, "critical values in '" + *path +
                                                  "' do not match the method, family or grid");
        }
        echo[std::string(to_string(method))] = Json{{"source", *path}, {"cv", r.cv.z}};
        return r.cv;
    }
    const CalibrationConfig config = scenario_calibration(scenario, method, grid, cal_reps, kernel, threads);
    const CalibrationReport r = calibrate(method, config);
    echo[std::string(to_string(method))] = Json{{"source", "calibrated"}, {"config", to_json(config)}, {"cv", r.cv.z}};
    return r.cv;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.scenario.has_value() == a.config.has_value()) {
        throw Error(Errc::InvalidArgument, "give exactly one of --scenario or --config");
    }
    Scenario scenario;
    if (a.scenario) {
        scenario = bundled_scenario(*a.scenario);
    } else {
        std::ifstream in(*a.config);
        if (!in) throw ParseError(0, "cannot open scenario file '" + *a.config + "'");
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::exception& e) {
            throw ParseError(0, std::string("invalid scenario JSON: ") + e.what());
        }
        scenario = scenario_from_json(j);
    }
    if (a.reps) scenario.m_reps = *a.reps;
    if (scenario.m_reps < 1) throw Error(Errc::InvalidArgument, "--reps must be at least 1");
    if (a.seed.flag || std::getenv("LOCPAR_SEED") != nullptr) scenario.seed = a.seed.resolve();

    GridSpec grid = bundled_grid();
    if (a.n0) grid.n0 = *a.n0;
    if (a.ratio) grid.ratio = *a.ratio;
    if (a.k) grid.k_max = *a.k;
    validate(scenario, grid);
    const AggregationKernel kernel{a.kernel_b};
    validate(kernel);
    const std::size_t threads = resolve_threads(a.threads);

    Json cv_echo = Json::object();
    MethodCvs cvs;
    cvs.lms = resolve_cv(Method::LMS, a.cv_lms, scenario, grid, kernel, a.cal_reps, threads, cv_echo);
    cvs.lcp = resolve_cv(Method::LCP, a.cv_lcp, scenario, grid, kernel, a.cal_reps, threads, cv_echo);
    cvs.sa = resolve_cv(Method::SA, a.cv_sa, scenario, grid, kernel, a.cal_reps, threads, cv_echo);

    const ScenarioReport report = run_scenario(scenario, grid, cvs, kernel, threads);
    Json summary = to_json(report);
    summary["critical_values"] = cv_echo;
    write_file(a.out + ".json", dump(summary));
    std::ostringstream csv;
    write_scenario_csv(csv, report);
    write_file(a.out + ".csv", csv.str());

    out << "scenario " << scenario.id << ": wrote " << a.out << ".json and " << a.out << ".csv\n";
    for (const auto& m : report.methods) {
        double kl_sum = 0.0;
        for (const auto& p : m.points) kl_sum += p.mean_kl;
        out << "  " << m.name << " mean KL risk " << format_double(kl_sum / static_cast<double>(m.points.size()))
            << '\n';
    }
    return kExitOk;
}

// --- backtest --------------------------------------------------------------

struct BacktestArgs {
    std::string prices;
    std::string cv;
    std::optional<std::string> method;
    std::size_t stride = 1;
    std::size_t horizon = 1;
    double kernel_b = 0.3;
    std::size_t threads = 1;
    std::string out;
};

int cmd_backtest(const BacktestArgs& a, std::ostream& out) {
    const CalibrationReport cvr = load_calibration_report(a.cv);
    if (cvr.config.family.kind != FamilyKind::Volatility) {
        throw Error(Errc::LengthMismatch, "backtests need critical values calibrated for the volatility family");
    }
    const Method method = a.method ? parse_method(*a.method) : cvr.method;
    if (method != cvr.method) throw Error(Errc::LengthMismatch, "method does not match the critical values");
    const ReturnSeries returns = to_returns(load_prices(a.prices), a.horizon);
    const AggregationKernel kernel{a.kernel_b};
    const BacktestResult result =
        backtest(returns, method, cvr.config.grid, cvr.cv, kernel, a.stride, resolve_threads(a.threads));

    std::ostringstream csv;
    write_backtest_csv(csv, result);
    write_file(a.out, csv.str());
    const Json summary{{"config",
                        Json{{"prices", a.prices}, {"cv", a.cv}, {"method", std::string(to_string(method))},
                             {"grid", to_json(cvr.config.grid)}, {"cv_values", cvr.cv.z},
                             {"stride", a.stride}, {"horizon", a.horizon}, {"kernel_b", a.kernel_b}}},
                       {"rows", result.rows.size()},
                       {"mean_kl_loss", result.mean_kl_loss}};
    write_file(a.out + ".json", dump(summary));
    out << "wrote " << result.rows.size() << " rows to " << a.out << "\nmean_kl_loss: "
        << format_double(result.mean_kl_loss) << '\n';
    return kExitOk;
}

void add_grid_options(CLI::App* cmd, GridSpec& grid) {
    cmd->add_option("--n0", grid.n0, "smallest interval length");
    cmd->add_option("--ratio", grid.ratio, "interval length ratio u in (1, 3]");
    cmd->add_option("--k", grid.k_max, "number of intervals K");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local parametric adaptive estimation for exponential-family time series", "locpar"};
    app.require_subcommand(1);

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Monte Carlo calibration of critical values");
    c->add_option("--family", cal.family, "gaussian|volatility|poisson|exponential|bernoulli");
    c->add_option("--method", cal.method, "lms|lcp|sa");
    c->add_option("--sigma", cal.sigma, "known Gaussian standard deviation");
    c->add_option("--theta", cal.theta, "reference parameter theta*");
    add_grid_options(c, cal.grid);
    c->add_option("--r", cal.r, "risk power r");
    c->add_option("--alpha", cal.alpha, "test level alpha");
    c->add_option("--reps", cal.reps, "Monte Carlo replications M");
    c->add_option("--zmax", cal.z_max, "upper end of the bisection");
    c->add_option("--tol", cal.tol, "bisection tolerance");
    c->add_option("--kernel-b", cal.kernel_b, "SA kernel knee b");
    c->add_option("--seed", cal.seed.flag, "master seed (fallback: LOCPAR_SEED)");
    c->add_option("--threads", cal.threads, "worker threads (0 = all cores)");
    c->add_option("--out", cal.out, "output JSON")->required();

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Adaptive estimate at one time point");
    e->add_option("--data", est.data, "one-column CSV of observations")->required();
    e->add_option("--cv", est.cv, "critical values JSON from calibrate")->required();
    e->add_option("--family", est.family, "family (must match the critical values)");
    e->add_option("--method", est.method, "method (must match the critical values)");
    e->add_option("--t", est.t, "right edge, 1-based (default: last observation)");
    e->add_option("--kernel-b", est.kernel_b, "SA kernel knee b");
    e->add_flag("--verbose", est.verbose, "print per-step statistics as CSV");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Monte Carlo scenario study of all three methods");
    s->add_option("--scenario", sim.scenario, "bundled scenario id, e.g. gaussian-large");
    s->add_option("--config", sim.config, "scenario JSON file");
    s->add_option("--reps", sim.reps, "replications M");
    s->add_option("--seed", sim.seed.flag, "master seed (fallback: LOCPAR_SEED)");
    s->add_option("--n0", sim.n0, "smallest interval length");
    s->add_option("--ratio", sim.ratio, "interval length ratio");
    s->add_option("--k", sim.k, "number of intervals K");
    s->add_option("--cv-lms", sim.cv_lms, "LMS critical values JSON");
    s->add_option("--cv-lcp", sim.cv_lcp, "LCP critical values JSON");
    s->add_option("--cv-sa", sim.cv_sa, "SA critical values JSON");
    s->add_option("--cal-reps", sim.cal_reps, "replications for in-process calibration");
    s->add_option("--kernel-b", sim.kernel_b, "SA kernel knee b");
    s->add_option("--threads", sim.threads, "worker threads (0 = all cores)");
    s->add_option("--out", sim.out, "output prefix (.json and .csv)")->required();

    BacktestArgs bt;
    auto* b = app.add_subcommand("backtest", "Rolling volatility backtest on a price CSV");
    b->add_option("--prices", bt.prices, "timestamp,price CSV")->required();
    b->add_option("--cv", bt.cv, "volatility critical values JSON")->required();
    b->add_option("--method", bt.method, "method (must match the critical values)");
    b->add_option("--stride", bt.stride, "step between right edges");
    b->add_option("--horizon", bt.horizon, "forecast horizon h");
    b->add_option("--kernel-b", bt.kernel_b, "SA kernel knee b");
    b->add_option("--threads", bt.threads, "worker threads (0 = all cores)");
    b->add_option("--out", bt.out, "output CSV")->required();

    std::vector<std::string> argv_storage;
    argv_storage.emplace_back("locpar");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    }

    try {
        if (c->parsed()) return cmd_calibrate(cal, out);
        if (e->parsed()) return cmd_estimate(est, out);
        if (s->parsed()) return cmd_simulate(sim, out);
        if (b->parsed()) return cmd_backtest(bt, out);
    } catch (const InfeasibleError& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace locpar::cli
