#pragma once

#include <iosfwd>
#include <span>

#include "qhd/scenario.hpp"

namespace qhd {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputRootEnv = "QHD_OUT_ROOT";

struct RunOptions {
    std::string out_root;  // empty: $QHD_OUT_ROOT or "runs"
    int threads = 1;
    bool json_output = false;
};

struct CheckOutcome {
    std::string name;
    std::string status;  // "pass" | "fail" | "info"
    nlohmann::json details;
};

struct RunBundle {
    nlohmann::json scenario_echo;
    nlohmann::json provenance;
    std::vector<CheckOutcome> checks;
    bool all_passed = true;
    std::string dir;
};

// Executes every requested check, writes bundle.json / residuals.csv /
// deviation.csv / metrics.csv under the output root. Throws SchemaError or
// NumericalAbort; tolerance verdicts land in the returned bundle.
RunBundle run_scenario(const Scenario& s, const RunOptions& opts);

struct BundledScenario {
    const char* id;
    const char* description;
    const char* text;  // JSON
};
std::span<const BundledScenario> bundled_scenarios();

// CLI entry points (exit codes: 0 pass, 1 tolerance failure, 2 schema
// error, 3 numerical abort).
int cmd_run(const std::string& scenario_ref, const std::vector<std::string>& overrides,
            const RunOptions& opts, std::ostream& out);
int cmd_list(const std::string& filter, bool as_json, std::ostream& out);
int cmd_report(const std::string& dir, bool as_json, std::ostream& out);

}  // namespace qhd
