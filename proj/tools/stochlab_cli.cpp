// stochlab command line: run scenarios, list the builtins, run the acceptance
// suite, and turn run artifacts into plot-ready tables.

#include "stochlab/errors.hpp"
#include "stochlab/harness.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

using namespace stochlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    std::optional<RunReport> report;
    std::string error;
};

Scenario resolve(const std::string& ref) {
    if (fs::exists(ref)) return load_scenario(ref);
    return builtin_scenario(ref);
}

std::string value_text(double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

void print_report(const RunReport& r) {
    for (const auto& c : r.checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << r.scenario << '/' << c.name << "  measured " << value_text(c.measured);
        switch (c.comparison) {
            case Comparison::AtMost: std::cout << " <= " << value_text(c.tolerance); break;
            case Comparison::AtLeast: std::cout << " >= " << value_text(c.tolerance); break;
            case Comparison::Sigma:
                std::cout << " vs " << value_text(c.expected) << " within " << value_text(c.tolerance) << " x se "
                          << value_text(c.standard_error);
                break;
            default:
                std::cout << " vs " << value_text(c.expected) << " (" << comparison_name(c.comparison) << " tol "
                          << value_text(c.tolerance) << ")";
        }
        if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
        std::cout << '\n';
    }
    std::cout << r.scenario << ": " << r.status << " in " << value_text(r.runtime_seconds) << " s -> " << r.run_dir << "\n";
}

// Runs (or re-judges) every scenario on a small worker pool. Reports are
// printed by the calling thread once all workers are done.
int execute(std::vector<Scenario> scenarios, std::size_t jobs, bool check_only) {
    std::vector<Outcome> outcomes(scenarios.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            const auto& sc = scenarios[i];
            try {
                if (check_only) {
                    outcomes[i].report = rejudge(read_report((fs::path(sc.output_dir) / sc.name).string()), sc);
                } else {
                    {
                        std::lock_guard<std::mutex> lock(log_mutex);
                        std::cerr << "running " << sc.name << " (" << sc.task << ")\n";
                    }
                    outcomes[i].report = run(sc);
                }
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, scenarios.size()));
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int failed = 0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (outcomes[i].report) {
            print_report(*outcomes[i].report);
            if (!outcomes[i].report->passed()) ++failed;
        } else {
            std::cout << "[ERROR] " << scenarios[i].name << ": " << outcomes[i].error << '\n';
            ++failed;
        }
    }
    std::cout << (scenarios.size() - static_cast<std::size_t>(failed)) << '/' << scenarios.size() << " scenarios passed\n";
    return failed == 0 ? 0 : 1;
}

void apply_overrides(std::vector<Scenario>& scenarios, const std::optional<std::uint64_t>& seed, const std::string& out) {
    for (auto& sc : scenarios) {
        if (seed) sc.seed = *seed;
        if (!out.empty()) sc.output_dir = out;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochlab: stochastic phase-space experiments"};
    app.require_subcommand(1);

    std::vector<std::string> scenario_refs;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t jobs = 1;
    bool check_only = false;

    auto* run_cmd = app.add_subcommand("run", "run scenario files or builtin scenarios by name");
    run_cmd->add_option("--scenario", scenario_refs, "scenario file or builtin name (repeatable)")->required();
    run_cmd->add_option("--seed", seed, "override the scenario seed");
    run_cmd->add_option("--out", out, "override the output directory");
    run_cmd->add_option("--jobs", jobs, "scenarios run concurrently")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--check-only", check_only, "re-judge existing reports instead of running");

    auto* list_cmd = app.add_subcommand("list-scenarios", "list the builtin scenarios");

    auto* check_cmd = app.add_subcommand("check", "run the acceptance suite (every builtin scenario)");
    check_cmd->add_option("--seed", seed, "override every scenario seed");
    check_cmd->add_option("--out", out, "output directory");
    check_cmd->add_option("--jobs", jobs, "scenarios run concurrently")->check(CLI::PositiveNumber);
    check_cmd->add_flag("--check-only", check_only, "re-judge existing reports instead of running");

    std::string run_dir;
    std::vector<std::string> kinds;
    auto* plot_cmd = app.add_subcommand("plotdata", "write plot-ready CSV files from a run directory");
    plot_cmd->add_option("--run", run_dir, "run directory containing report.json")->required();
    plot_cmd->add_option("--kind", kinds, "plot kind (repeatable)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every argument error maps to the usage status
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& b : builtin_scenarios()) {
                const Scenario sc = parse_scenario(b.text);
                const int crit = find_task(sc.task).criterion;
                std::cout << sc.name << "  task=" << sc.task << "  criterion=" << crit << "  " << sc.description << '\n';
            }
            return 0;
        }
        if (plot_cmd->parsed()) {
            for (const auto& k : kinds) std::cout << emit_plotdata(run_dir, k) << '\n';
            return 0;
        }
        std::vector<Scenario> scenarios;
        if (run_cmd->parsed()) {
            for (const auto& ref : scenario_refs) scenarios.push_back(resolve(ref));
        } else {
            for (const auto& b : builtin_scenarios()) scenarios.push_back(parse_scenario(b.text));
        }
        apply_overrides(scenarios, seed, out);
        return execute(std::move(scenarios), jobs, check_only);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
