#include "locpar/report_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "locpar/error.hpp"

namespace locpar {

namespace {

Json number_or_inf(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double read_number(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
        throw Error(Errc::ParseError, "expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

template <typename Fn>
auto guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Json::exception& e) {
        throw ParseError(0, std::string("malformed report: ") + e.what());
    }
}

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const Family& family) {
    Json j;
    j["kind"] = std::string(to_string(family.kind));
    if (family.kind == FamilyKind::Gaussian) j["sigma"] = family.gaussian_sigma;
    return j;
}

Family family_from_json(const Json& j) {
    Family f;
    f.kind = parse_family_kind(j.at("kind").get<std::string>());
    f.gaussian_sigma = j.value("sigma", 1.0);
    return f;
}

Json to_json(const GridSpec& grid) {
    return Json{{"n0", grid.n0}, {"ratio", grid.ratio}, {"k", grid.k_max}, {"lengths", grid.lengths()}};
}

GridSpec grid_from_json(const Json& j) {
    return GridSpec{j.at("n0").get<std::size_t>(), j.at("ratio").get<double>(), j.at("k").get<std::size_t>()};
}

Json to_json(const CalibrationConfig& c) {
    return Json{{"family", to_json(c.family)},
                {"theta_star", c.theta_star},
                {"grid", to_json(c.grid)},
                {"r", c.r},
                {"alpha", c.alpha},
                {"m_reps", c.m_reps},
                {"z_max", c.search.z_max},
                {"tol", c.search.tol},
                {"kernel_b", c.kernel.b},
                {"seed", c.seed}};
}

CalibrationConfig calibration_config_from_json(const Json& j) {
    CalibrationConfig c;
    c.family = family_from_json(j.at("family"));
    c.theta_star = j.at("theta_star").get<double>();
    c.grid = grid_from_json(j.at("grid"));
    c.r = j.at("r").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.m_reps = j.at("m_reps").get<std::size_t>();
    c.search.z_max = j.at("z_max").get<double>();
    c.search.tol = j.at("tol").get<double>();
    c.kernel.b = j.value("kernel_b", 0.3);
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

Json to_json(const CalibrationReport& report) {
    Json cv = Json::array();
    for (double z : report.cv.z) cv.push_back(number_or_inf(z));
    return Json{{"method", std::string(to_string(report.method))},
                {"config", to_json(report.config)},
                {"seed", report.config.seed},
                {"cv", cv},
                {"budget", report.budget},
                {"achieved_risk", report.achieved_risk},
                {"achieved_se", report.achieved_se},
                {"r_r", report.r_r},
                {"r_r_se", report.r_r_se}};
}

CalibrationReport calibration_report_from_json(const Json& j) {
    return guarded([&] {
        CalibrationReport r;
        r.method = parse_method(j.at("method").get<std::string>());
        r.config = calibration_config_from_json(j.at("config"));
        for (const auto& z : j.at("cv")) r.cv.z.push_back(read_number(z));
        r.cv.r = r.config.r;
        r.cv.alpha = r.config.alpha;
        r.budget = j.value("budget", std::vector<double>{});
        r.achieved_risk = j.value("achieved_risk", std::vector<double>{});
        r.achieved_se = j.value("achieved_se", std::vector<double>{});
        r.r_r = j.value("r_r", 0.0);
        r.r_r_se = j.value("r_r_se", 0.0);
        return r;
    });
}

CalibrationReport load_calibration_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open critical-value file '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(0, std::string("invalid JSON in '") + path.string() + "': " + e.what());
    }
    return calibration_report_from_json(j);
}

Json to_json(const Scenario& s) {
    Json segments = Json::array();
    for (const auto& seg : s.segments) segments.push_back(Json{{"length", seg.length}, {"theta", seg.theta}});
    return Json{{"id", s.id},
                {"family", to_json(s.family)},
                {"segments", segments},
                {"m_reps", s.m_reps},
                {"eval_points", s.eval_points},
                {"seed", s.seed}};
}

Scenario scenario_from_json(const Json& j) {
    return guarded([&] {
        Scenario s;
        s.id = j.value("id", std::string("custom"));
        s.family = family_from_json(j.at("family"));
        for (const auto& seg : j.at("segments")) {
            s.segments.push_back({seg.at("length").get<std::size_t>(), seg.at("theta").get<double>()});
        }
        s.m_reps = j.value("m_reps", std::size_t{200});
        s.eval_points = j.at("eval_points").get<std::vector<std::size_t>>();
        s.seed = j.value("seed", std::uint64_t{1});
        return s;
    });
}

namespace {

Json points_json(const MethodReport& m) {
    Json pts = Json::array();
    for (const auto& p : m.points) {
        pts.push_back(Json{{"eval_point", p.eval_point},
                           {"theta_true", p.theta_true},
                           {"mean_abs_error", p.mean_abs_error},
                           {"mean_kl", p.mean_kl},
                           {"kl_se", p.kl_standard_error},
                           {"mean_k_hat", p.mean_k_hat},
                           {"mean_k_effective", p.mean_k_effective}});
    }
    return pts;
}

}  // namespace

Json to_json(const ScenarioReport& report) {
    Json methods = Json::object();
    for (const auto& m : report.methods) {
        Json delays = Json::array();
        for (const auto& d : m.delays) {
            delays.push_back(Json{{"jump_time", d.jump_time},
                                  {"horizon", d.horizon},
                                  {"mean_delay", d.mean()},
                                  {"detect_fraction", d.detect_fraction()},
                                  {"undefined", d.undefined},
                                  {"delays", d.delays}});
        }
        methods[m.name] = Json{{"points", points_json(m)}, {"detection_delay", delays}};
    }
    methods["oracle"] = Json{{"points", points_json(report.oracle)}, {"oracle_index", report.oracle_index}};
    return Json{{"scenario", to_json(report.scenario)},
                {"grid", to_json(report.grid)},
                {"kernel_b", report.kernel.b},
                {"seed", report.scenario.seed},
                {"methods", methods}};
}

void write_scenario_csv(std::ostream& out, const ScenarioReport& report) {
    out << "method,eval_point,metric,value\n";
    auto row = [&](const std::string& method, std::size_t t, const char* metric, double v) {
        out << method << ',' << t << ',' << metric << ',' << format_double(v) << '\n';
    };
    auto points = [&](const MethodReport& m) {
        for (const auto& p : m.points) {
            row(m.name, p.eval_point, "mean_abs_error", p.mean_abs_error);
            row(m.name, p.eval_point, "mean_kl", p.mean_kl);
            row(m.name, p.eval_point, "kl_se", p.kl_standard_error);
            row(m.name, p.eval_point, "mean_k_hat", p.mean_k_hat);
            row(m.name, p.eval_point, "mean_k_effective", p.mean_k_effective);
        }
    };
    for (const auto& m : report.methods) {
        points(m);
        for (const auto& d : m.delays) {
            row(m.name, d.jump_time, "delay_mean", d.mean());
            row(m.name, d.jump_time, "delay_detect_fraction", d.detect_fraction());
            row(m.name, d.jump_time, "delay_undefined", static_cast<double>(d.undefined));
        }
    }
    points(report.oracle);
}

}  // namespace locpar
