#pragma once

#include "stochlab/config.hpp"
#include "stochlab/model.hpp"
#include "stochlab/qsolver.hpp"
#include "stochlab/sde.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stochlab {

// Field preset by name. `params` maps parameter names to one value or one
// value per axis:
//   harmonic                 omega
//   uniform_electric         field
//   uniform_magnetic         field
//   uniform_vector_potential potential
//   plane_wave_a             amplitude, wavenumber, frequency, polarization_axis, propagation_axis
// Unknown names throw ValidationError listing the valid presets.
FieldSpec make_field_preset(const std::string& name, int dim, const std::map<std::string, std::vector<double>>& params);

struct InitialSpec {
    std::string kind = "gaussian";  // gaussian | eigenstate
    Vec3 x0{};
    Vec3 p0{};
    Vec3 sigma_x{1.0, 1.0, 1.0};
    Vec3 sigma_p{0.5, 0.5, 0.5};    // defaults to hbar / (2 sigma_x), the matched value
    std::vector<int> quanta;        // eigenstate only
};

struct SdeSettings {
    std::size_t trajectories = 1000;
    double dt = 0.01;
    double horizon = 1.0;
    std::size_t record_every = 10;
    SdeScheme scheme = SdeScheme::EulerMaruyama;
    bool allow_unstable_dt = false;
};

struct FpeSettings {
    std::size_t nx = 256;
    std::size_t np = 256;
    double x_min = -8.0, x_max = 8.0;
    double p_min = -8.0, p_max = 8.0;
    double dt = 0.002;
    double horizon = 1.0;
    std::size_t record_every = 50;
};

struct QsolverSettings {
    std::size_t points = 256;
    double half_width = 10.0;
    double dt = 0.005;
    double horizon = 1.0;
    std::size_t record_every = 20;
    PsiScheme scheme = PsiScheme::Spectral;
};

struct Scenario {
    std::string name;
    std::string task = "evolve";
    std::string description;
    std::set<std::string> engines;  // subset of {sde, fpe, qsolver}
    PhysicalConstants consts;
    int dim = 1;
    std::string field_preset = "free";
    std::map<std::string, std::vector<double>> field_params;
    FieldSpec fields;
    InitialSpec initial;
    SdeSettings sde;
    FpeSettings fpe;
    QsolverSettings qsolver;
    std::map<std::string, std::string> task_params;  // the [task] section, checked per task
    std::uint64_t seed = 1;
    std::string output_dir = "runs";
    std::map<std::string, double> tolerances;        // check name -> tolerance

    // Canonical text with every default filled in; parses back to the same scenario.
    std::string echo() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Registered tasks, the acceptance criterion each one serves and the checks it
// evaluates. Every check needs a tolerance in the scenario file.
struct TaskInfo {
    std::string name;
    int criterion = 0;  // 0: no acceptance check
    std::vector<std::string> checks;
    std::set<std::string> params;
};
const std::vector<TaskInfo>& task_catalog();
const TaskInfo& find_task(const std::string& name);

struct BuiltinScenario {
    std::string file;
    std::string text;
};
const std::vector<BuiltinScenario>& builtin_scenarios();
// Parsed builtin by scenario name; throws UsageError listing the names.
Scenario builtin_scenario(const std::string& name);

enum class Comparison {
    Absolute,  // |measured - expected| <= tolerance
    Relative,  // |measured - expected| <= tolerance * |expected|
    Sigma,     // |measured - expected| <= tolerance * standard_error
    AtMost,    // measured <= tolerance
    AtLeast    // measured >= tolerance
};
std::string comparison_name(Comparison c);
Comparison comparison_from_name(const std::string& name);

struct CheckResult {
    std::string name;
    int criterion = 0;
    Comparison comparison = Comparison::Absolute;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    double standard_error = 0.0;
    bool pass = false;
    std::string detail;
};

bool judge(const CheckResult& check);

inline constexpr int kReportSchemaVersion = 1;

struct RunReport {
    int schema_version = kReportSchemaVersion;
    std::string scenario;
    std::string task;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    double runtime_seconds = 0.0;
    std::map<std::string, std::string> artifacts;  // role -> file name inside the run directory
    std::string status;                             // passed | failed | error
    std::string error;
    std::string run_dir;

    bool passed() const { return status == "passed"; }
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
RunReport read_report(const std::string& run_dir);

// Runs the scenario into <output_dir>/<name>. On failure a FAILED marker and
// an error report are written next to the partial artifacts and the error is
// rethrown with the scenario name attached.
RunReport run(const Scenario& scenario);

// Recomputes pass/fail of a stored report with the scenario's tolerances.
RunReport rejudge(RunReport report, const Scenario& scenario);

const std::vector<std::string>& plotdata_kinds();
// Writes <run_dir>/plot/<kind>.csv and <kind>.schema.json; returns the CSV path.
std::string emit_plotdata(const std::string& run_dir, const std::string& kind);

}  // namespace stochlab
