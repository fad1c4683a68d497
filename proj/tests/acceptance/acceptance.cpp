// Acceptance suite: runs the builtin scenario behind each criterion with the
// tolerances pinned below and prints one PASS/FAIL line per criterion.

#include "stochlab/harness.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace stochlab;

namespace {

struct Criterion {
    int id;
    std::string title;
    std::string scenario;
    std::map<std::string, double> tolerances;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "zero-point <L^2> offset", "oscillator-zero-point",
         {{"ground_grid", 1e-3}, {"symbolic_constant", 0.0}, {"extra_states", 1e-6}}},
        {2, "chi4 closed form equals permutation average", "chi4-oracle", {{"mismatches", 0.0}}},
        {3, "many-body zero-point constant", "manybody-constant", {{"symbolic_constant", 0.0}, {"grid_N2_D2", 1e-3}}},
        {4, "energy grows at rate P", "energy-rate", {{"sde_rate", 3.0}, {"fpe_rate", 0.02}}},
        {5, "norm preservation", "norm-preservation",
         {{"fpe_free", 1e-6}, {"fpe_harmonic", 1e-6}, {"psi_spectral", 1e-10}, {"psi_crank_nicolson", 1e-8}}},
        {6, "stochastic Ehrenfest", "ehrenfest",
         {{"position_P0", 3.0}, {"momentum_P0", 3.0}, {"position_P", 3.0}, {"momentum_P", 3.0}}},
        {7, "P-independent equations converge", "p-independent", {{"density_order", 1.5}, {"current_order", 1.5}}},
        {8, "cross-engine marginals agree", "cross-engine", {{"fp_sde", 0.03}, {"fp_psi", 0.03}, {"sde_psi", 0.03}}},
        {9, "oscillator ground energy", "oscillator-ground-energy", {{"energy", 1e-6}}},
        {10, "byte-identical reruns", "determinism", {{"differing_files", 0.0}}},
    };
    return list;
}

std::string num(double v) {
    std::ostringstream o;
    o << std::setprecision(4) << v;
    return o.str();
}

std::string summary(const CheckResult& c) {
    std::string s = c.name + "=" + num(c.measured);
    switch (c.comparison) {
        case Comparison::AtMost: return s + "<=" + num(c.tolerance);
        case Comparison::AtLeast: return s + ">=" + num(c.tolerance);
        case Comparison::Sigma: return s + "(exp " + num(c.expected) + ", " + num(c.tolerance) + "se=" + num(c.tolerance * c.standard_error) + ")";
        case Comparison::Relative: return s + "(exp " + num(c.expected) + ", rel " + num(c.tolerance) + ")";
        case Comparison::Absolute: return s + "(exp " + num(c.expected) + ", abs " + num(c.tolerance) + ")";
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    std::string out = "acceptance_runs";
    std::set<int> only;
    app.add_option("--out", out, "directory for run artifacts");
    app.add_option("--only", only, "criterion numbers to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    int failures = 0;
    for (const auto& crit : criteria()) {
        if (!only.empty() && !only.count(crit.id)) continue;
        std::string line;
        bool pass = false;
        try {
            Scenario sc = builtin_scenario(crit.scenario);
            std::string note;
            for (const auto& [name, tol] : crit.tolerances) {
                const auto it = sc.tolerances.find(name);
                if (it == sc.tolerances.end() || it->second != tol) note += " (scenario file tolerance for " + name + " differs; pinned value used)";
            }
            if (sc.tolerances.size() != crit.tolerances.size()) note += " (scenario lists other checks)";
            sc.tolerances = crit.tolerances;
            sc.output_dir = out;
            const RunReport r = run(sc);
            pass = r.passed();
            for (const auto& c : r.checks) line += (line.empty() ? "" : "; ") + summary(c) + (c.pass ? "" : " FAIL");
            line += " [" + num(r.runtime_seconds) + " s]" + note;
        } catch (const std::exception& e) {
            line = std::string("error: ") + e.what();
        }
        if (!pass) ++failures;
        std::cout << "criterion " << std::setw(2) << crit.id << " " << (pass ? "PASS" : "FAIL") << "  " << crit.title << ": "
                  << line << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
