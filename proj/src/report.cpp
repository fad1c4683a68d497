#include "stochlab/errors.hpp"
#include "stochlab/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stochlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// JSON has no NaN or infinity; those are stored as strings.
json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double number_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::nan("");
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
    }
    throw ParseError("report: expected a number", 0, 0);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing artifact '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name, const std::string& path) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error("artifact '" + path + "' has no column '" + name + "'");
    }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error("artifact '" + path + "' is empty");
    t.header = split_csv_line(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split_csv_line(line));
    return t;
}

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

struct ColumnPick {
    std::string source;  // column in the artifact
    std::string output;  // column in the plot file
};

struct PlotSource {
    std::string role;
    std::vector<ColumnPick> columns;  // empty: copy every column
};

const std::map<std::string, std::vector<PlotSource>>& plot_sources() {
    static const std::map<std::string, std::vector<PlotSource>> sources = {
        {"energy",
         {{"sde_moments", {{"t", "t"}, {"mean_H", "mean_H"}}},
          {"sde_P_moments", {{"t", "t"}, {"mean_H", "mean_H"}}},
          {"fp_diagnostics", {{"t", "t"}, {"mean_H", "mean_H"}}},
          {"psi_records", {{"t", "t"}, {"energy", "mean_H"}}}}},
        {"marginals", {{"marginals", {}}}},
        {"residuals", {{"residuals", {}}}},
        {"cross-engine-l1", {{"l1_distance", {}}}},
        {"norm",
         {{"norm_drift", {}},
          {"fp_diagnostics", {{"t", "t"}, {"norm", "norm"}}},
          {"psi_records", {{"t", "t"}, {"norm", "norm"}}}}},
    };
    return sources;
}

}  // namespace

std::string comparison_name(Comparison c) {
    switch (c) {
        case Comparison::Absolute: return "abs";
        case Comparison::Relative: return "rel";
        case Comparison::Sigma: return "sigma";
        case Comparison::AtMost: return "at_most";
        case Comparison::AtLeast: return "at_least";
    }
    return "abs";
}

Comparison comparison_from_name(const std::string& name) {
    for (auto c : {Comparison::Absolute, Comparison::Relative, Comparison::Sigma, Comparison::AtMost, Comparison::AtLeast})
        if (comparison_name(c) == name) return c;
    throw ParseError("unknown comparison '" + name + "'", 0, 0);
}

bool judge(const CheckResult& c) {
    if (!std::isfinite(c.measured)) return false;
    const double diff = std::abs(c.measured - c.expected);
    switch (c.comparison) {
        case Comparison::Absolute: return diff <= c.tolerance;
        case Comparison::Relative: return diff <= c.tolerance * std::abs(c.expected);
        case Comparison::Sigma: return diff <= c.tolerance * c.standard_error;
        case Comparison::AtMost: return c.measured <= c.tolerance;
        case Comparison::AtLeast: return c.measured >= c.tolerance;
    }
    return false;
}

std::string report_to_json(const RunReport& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["scenario"] = r.scenario;
    j["task"] = r.task;
    j["seed"] = r.seed;
    j["status"] = r.status;
    if (!r.error.empty()) j["error"] = r.error;
    j["runtime_seconds"] = number(r.runtime_seconds);
    j["artifacts"] = r.artifacts;
    j["checks"] = json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back({{"name", c.name},
                               {"criterion", c.criterion},
                               {"comparison", comparison_name(c.comparison)},
                               {"measured", number(c.measured)},
                               {"expected", number(c.expected)},
                               {"tolerance", number(c.tolerance)},
                               {"standard_error", number(c.standard_error)},
                               {"pass", c.pass},
                               {"detail", c.detail}});
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report: ") + e.what(), 0, e.byte);
    }
    RunReport r;
    try {
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion)
            throw ParseError("report schema version " + std::to_string(r.schema_version) + " is not supported", 0, 0);
        r.scenario = j.at("scenario").get<std::string>();
        r.task = j.at("task").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.status = j.at("status").get<std::string>();
        r.error = j.value("error", "");
        r.runtime_seconds = number_from(j.at("runtime_seconds"));
        r.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
        for (const auto& c : j.at("checks")) {
            CheckResult ch;
            ch.name = c.at("name").get<std::string>();
            ch.criterion = c.at("criterion").get<int>();
            ch.comparison = comparison_from_name(c.at("comparison").get<std::string>());
            ch.measured = number_from(c.at("measured"));
            ch.expected = number_from(c.at("expected"));
            ch.tolerance = number_from(c.at("tolerance"));
            ch.standard_error = number_from(c.at("standard_error"));
            ch.pass = c.at("pass").get<bool>();
            ch.detail = c.value("detail", "");
            r.checks.push_back(ch);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what(), 0, 0);
    }
    return r;
}

RunReport read_report(const std::string& run_dir) {
    RunReport r = report_from_json(read_text((fs::path(run_dir) / "report.json").string()));
    r.run_dir = run_dir;
    return r;
}

RunReport rejudge(RunReport report, const Scenario& scenario) {
    if (report.scenario != scenario.name)
        throw UsageError("report belongs to scenario '" + report.scenario + "', not '" + scenario.name + "'");
    const TaskInfo& task = find_task(scenario.task);
    std::set<std::string> seen;
    for (auto& c : report.checks) {
        const auto it = scenario.tolerances.find(c.name);
        if (it == scenario.tolerances.end()) throw UsageError("report check '" + c.name + "' is not part of the task");
        c.tolerance = it->second;
        c.pass = judge(c);
        seen.insert(c.name);
    }
    if (report.status != "error") {
        const bool complete = seen.size() == task.checks.size();
        bool all = complete;
        for (const auto& c : report.checks) all = all && c.pass;
        report.status = all ? "passed" : "failed";
    }
    return report;
}

const std::vector<std::string>& plotdata_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, src] : plot_sources()) k.push_back(name);
        return k;
    }();
    return kinds;
}

std::string emit_plotdata(const std::string& run_dir, const std::string& kind) {
    const auto it = plot_sources().find(kind);
    if (it == plot_sources().end()) {
        std::string list;
        for (const auto& k : plotdata_kinds()) list += (list.empty() ? "" : ", ") + k;
        throw UsageError("unknown plot kind '" + kind + "'; supported kinds: " + list);
    }
    const RunReport report = read_report(run_dir);
    const PlotSource* chosen = nullptr;
    for (const auto& src : it->second)
        if (report.artifacts.count(src.role)) {
            chosen = &src;
            break;
        }
    if (!chosen) {
        std::string roles;
        for (const auto& src : it->second) roles += (roles.empty() ? "" : ", ") + src.role;
        throw Error("missing artifact: plot kind '" + kind + "' needs one of [" + roles + "] in " + run_dir);
    }
    const std::string source_file = report.artifacts.at(chosen->role);
    const std::string source_path = (fs::path(run_dir) / source_file).string();
    const CsvTable table = read_csv(source_path);

    std::vector<std::size_t> idx;
    std::vector<std::string> names;
    if (chosen->columns.empty()) {
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            idx.push_back(i);
            names.push_back(table.header[i]);
        }
    } else {
        for (const auto& c : chosen->columns) {
            idx.push_back(table.column(c.source, source_path));
            names.push_back(c.output);
        }
    }

    const fs::path plot_dir = fs::path(run_dir) / "plot";
    fs::create_directories(plot_dir);
    const std::string csv_path = (plot_dir / (kind + ".csv")).string();
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw Error("cannot open '" + csv_path + "' for writing");
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << '\n';
    std::vector<bool> numeric(idx.size(), true);
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const std::string& cell = idx[i] < row.size() ? row[idx[i]] : std::string();
            numeric[i] = numeric[i] && looks_numeric(cell);
            out << (i ? "," : "") << cell;
        }
        out << '\n';
    }
    out.close();
    if (!out) throw Error("failed writing '" + csv_path + "'");

    json schema;
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema";
    schema["title"] = kind;
    schema["description"] = "rows of " + kind + ".csv, taken from " + source_file;
    schema["type"] = "array";
    json props = json::object();
    for (std::size_t i = 0; i < names.size(); ++i)
        props[names[i]] = {{"type", numeric[i] ? "number" : "string"}};
    schema["items"] = {{"type", "object"}, {"properties", props}, {"required", names}};
    schema["x-columns"] = names;
    schema["x-source"] = source_file;
    schema["x-scenario"] = report.scenario;
    std::ofstream sidecar(plot_dir / (kind + ".schema.json"), std::ios::trunc);
    sidecar << schema.dump(2) << '\n';
    if (!sidecar) throw Error("failed writing the schema sidecar for '" + kind + "'");
    return csv_path;
}

}  // namespace stochlab
