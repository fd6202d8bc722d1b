#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "locpar/calibration.hpp"
#include "locpar/data_io.hpp"
#include "locpar/simulation.hpp"

namespace locpar {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json to_json(const Family& family);
[[nodiscard]] Family family_from_json(const Json& j);
[[nodiscard]] Json to_json(const GridSpec& grid);
[[nodiscard]] GridSpec grid_from_json(const Json& j);
[[nodiscard]] Json to_json(const CalibrationConfig& config);
[[nodiscard]] CalibrationConfig calibration_config_from_json(const Json& j);

/// Critical values are written as numbers; "inf" strings are accepted on input.
[[nodiscard]] Json to_json(const CalibrationReport& report);
[[nodiscard]] CalibrationReport calibration_report_from_json(const Json& j);
[[nodiscard]] CalibrationReport load_calibration_report(const std::filesystem::path& path);

[[nodiscard]] Json to_json(const Scenario& scenario);
[[nodiscard]] Scenario scenario_from_json(const Json& j);
/// Summary document: config echo, per-method metrics and delay summaries.
[[nodiscard]] Json to_json(const ScenarioReport& report);
/// Long format: method,eval_point,metric,value.
void write_scenario_csv(std::ostream& out, const ScenarioReport& report);

/// Serializes with two-space indentation and a trailing newline.
[[nodiscard]] std::string dump(const Json& j);

}  // namespace locpar
