#include "stochlab/binary_io.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/harness.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace stochlab {

namespace {

std::string joined(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out;
}

Vec3 per_axis(const std::vector<double>& v, int dim, const std::string& field) {
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(dim))
        throw ValidationError(field, "expected 1 or " + std::to_string(dim) + " values, got " + std::to_string(v.size()));
    Vec3 out{};
    for (int a = 0; a < 3; ++a) out[a] = v.size() == 1 ? v[0] : (a < dim ? v[a] : 0.0);
    return out;
}

Vec3 three(const std::vector<double>& v, const std::string& field) {
    if (v.empty() || v.size() > 3) throw ValidationError(field, "expected 1 to 3 values");
    Vec3 out{};
    for (std::size_t a = 0; a < v.size(); ++a) out[a] = v[a];
    return out;
}

double scalar(const std::map<std::string, std::vector<double>>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (it->second.size() != 1) throw ValidationError("field." + key, "expected a single value");
    return it->second[0];
}

void require_finite(double v, const std::string& field) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

void require_positive(double v, const std::string& field) {
    if (!std::isfinite(v) || v <= 0.0) throw ValidationError(field, "must be finite and > 0");
}

void require_count(std::size_t v, const std::string& field, std::size_t least = 1) {
    if (v < least) throw ValidationError(field, "must be >= " + std::to_string(least));
}

// Horizon must be a whole number of steps.
void require_whole_steps(double horizon, double dt, const std::string& section) {
    const double ratio = horizon / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError(section + ".horizon", "must be a whole number of time steps (horizon/dt = " +
                                                        io::format_double(ratio) + ")");
}

std::string fmt(double v) { return io::format_double(v); }

std::string fmt_axes(const Vec3& v, int dim) {
    std::string out;
    for (int a = 0; a < dim; ++a) out += (a ? ", " : "") + fmt(v[a]);
    return out;
}

std::string sde_scheme_name(SdeScheme s) { return s == SdeScheme::EulerMaruyama ? "euler_maruyama" : "symplectic"; }
std::string psi_scheme_name(PsiScheme s) { return s == PsiScheme::Spectral ? "spectral" : "crank_nicolson"; }

}  // namespace

FieldSpec make_field_preset(const std::string& name, int dim, const std::map<std::string, std::vector<double>>& params) {
    const auto& names = field_preset_names();
    auto allow = [&](std::set<std::string> allowed) {
        for (const auto& [k, v] : params)
            if (!allowed.count(k)) throw ValidationError("field." + k, "not a parameter of preset '" + name + "'");
    };
    auto vec = [&](const std::string& key, Vec3 fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : three(it->second, "field." + key);
    };
    if (name == "free") {
        allow({});
        return FieldSpec(dim, preset::Free{});
    }
    if (name == "harmonic") {
        allow({"omega"});
        const auto it = params.find("omega");
        preset::Harmonic h;
        if (it != params.end()) h.omega = per_axis(it->second, dim, "field.omega");
        for (int a = 0; a < dim; ++a) require_positive(h.omega[a], "field.omega");
        return FieldSpec(dim, h);
    }
    if (name == "uniform_electric") {
        allow({"field"});
        return FieldSpec(dim, preset::UniformElectric{vec("field", {})});
    }
    if (name == "uniform_magnetic") {
        allow({"field"});
        return FieldSpec(dim, preset::UniformMagnetic{vec("field", {0.0, 0.0, 1.0})});
    }
    if (name == "uniform_vector_potential") {
        allow({"potential"});
        return FieldSpec(dim, preset::UniformVectorPotential{vec("potential", {})});
    }
    if (name == "plane_wave_a") {
        allow({"amplitude", "wavenumber", "frequency", "polarization_axis", "propagation_axis"});
        preset::PlaneWaveA w;
        w.amplitude = scalar(params, "amplitude", w.amplitude);
        w.wavenumber = scalar(params, "wavenumber", w.wavenumber);
        w.frequency = scalar(params, "frequency", w.frequency);
        w.polarization_axis = static_cast<int>(scalar(params, "polarization_axis", w.polarization_axis));
        w.propagation_axis = static_cast<int>(scalar(params, "propagation_axis", w.propagation_axis));
        return FieldSpec(dim, w);
    }
    if (name == "grid_table")
        throw ValidationError("field.preset", "grid_table fields are built in code, not from scenario files");
    throw ValidationError("field.preset", "unknown preset '" + name + "'; valid presets: " + joined(names));
}

const std::vector<TaskInfo>& task_catalog() {
    static const std::vector<TaskInfo> catalog = {
        {"evolve", 0, {}, {}},
        {"zero-point", 1, {"ground_grid", "symbolic_constant", "extra_states"},
         {"points", "half_width_sigmas", "extra_states", "extra_points", "extra_half_width"}},
        {"chi4-oracle", 2, {"mismatches"}, {}},
        {"manybody-constant", 3, {"symbolic_constant", "grid_N2_D2"}, {"points", "half_width_sigmas"}},
        {"energy-rate", 4, {"sde_rate", "fpe_rate"}, {}},
        {"norm-preservation", 5, {"fpe_free", "fpe_harmonic", "psi_spectral", "psi_crank_nicolson"}, {"steps"}},
        {"ehrenfest", 6, {"position_P0", "momentum_P0", "position_P", "momentum_P"}, {"periods"}},
        {"p-independent", 7, {"density_order", "current_order"}, {"levels"}},
        {"cross-engine", 8, {"fp_sde", "fp_psi", "sde_psi"}, {"bins", "compare_every"}},
        {"ground-energy", 9, {"energy"}, {"points", "half_width_sigmas"}},
        {"determinism", 10, {"differing_files"}, {"rerun"}},
    };
    return catalog;
}

const TaskInfo& find_task(const std::string& name) {
    for (const auto& t : task_catalog())
        if (t.name == name) return t;
    std::vector<std::string> names;
    for (const auto& t : task_catalog()) names.push_back(t.name);
    throw ValidationError("scenario.task", "unknown task '" + name + "'; valid tasks: " + joined(names));
}

Scenario parse_scenario(const std::string& text) {
    const auto doc = IniDocument::parse(text);
    const std::set<std::string> sections = {"",        "scenario", "constants", "field",      "initial",
                                            "sde",     "fpe",      "qsolver",   "task",       "tolerances"};
    for (const auto& s : doc.section_names())
        if (!sections.count(s)) throw ValidationError(s, "unknown section");
    if (!doc.keys("").empty()) throw ValidationError(doc.keys("").front(), "key outside any section");

    Scenario sc;
    doc.require_known("scenario", {"name", "task", "description", "engines", "dim", "seed", "output_dir"});
    sc.name = doc.get_string("scenario", "name", "");
    if (sc.name.empty()) throw ValidationError("scenario.name", "is required");
    for (char ch : sc.name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.'))
            throw ValidationError("scenario.name", "may only contain letters, digits, '-', '_' and '.'");
    sc.task = doc.get_string("scenario", "task", sc.task);
    const TaskInfo& task = find_task(sc.task);
    sc.description = doc.get_string("scenario", "description", "");
    for (const auto& e : doc.get_list("scenario", "engines", {})) {
        if (e != "sde" && e != "fpe" && e != "qsolver")
            throw ValidationError("scenario.engines", "unknown engine '" + e + "'; valid engines: sde, fpe, qsolver");
        sc.engines.insert(e);
    }
    const auto dim = doc.get_int("scenario", "dim", 1);
    if (dim < 1 || dim > 3) throw ValidationError("scenario.dim", "must be 1, 2 or 3");
    sc.dim = static_cast<int>(dim);
    sc.seed = doc.get_uint("scenario", "seed", sc.seed);
    sc.output_dir = doc.get_string("scenario", "output_dir", sc.output_dir);

    doc.require_known("constants", {"hbar", "mass", "charge", "light_speed", "vacuum_power"});
    sc.consts.hbar = doc.get_double("constants", "hbar", sc.consts.hbar);
    sc.consts.mass = doc.get_double("constants", "mass", sc.consts.mass);
    sc.consts.charge = doc.get_double("constants", "charge", sc.consts.charge);
    sc.consts.light_speed = doc.get_double("constants", "light_speed", sc.consts.light_speed);
    sc.consts.vacuum_power = doc.get_double("constants", "vacuum_power", sc.consts.vacuum_power);
    sc.consts.validate();

    sc.field_preset = doc.get_string("field", "preset", sc.field_preset);
    for (const auto& key : doc.keys("field"))
        if (key != "preset") sc.field_params[key] = doc.get_doubles("field", key, {});
    for (const auto& [k, v] : sc.field_params)
        for (double x : v) require_finite(x, "field." + k);
    sc.fields = make_field_preset(sc.field_preset, sc.dim, sc.field_params);

    doc.require_known("initial", {"kind", "x0", "p0", "sigma_x", "sigma_p", "quanta"});
    auto& in = sc.initial;
    in.kind = doc.get_string("initial", "kind", in.kind);
    if (in.kind != "gaussian" && in.kind != "eigenstate")
        throw ValidationError("initial.kind", "must be gaussian or eigenstate");
    in.x0 = per_axis(doc.get_doubles("initial", "x0", {0.0}), sc.dim, "initial.x0");
    in.p0 = per_axis(doc.get_doubles("initial", "p0", {0.0}), sc.dim, "initial.p0");
    in.sigma_x = per_axis(doc.get_doubles("initial", "sigma_x", {1.0}), sc.dim, "initial.sigma_x");
    for (int a = 0; a < sc.dim; ++a) {
        require_finite(in.x0[a], "initial.x0");
        require_finite(in.p0[a], "initial.p0");
        require_positive(in.sigma_x[a], "initial.sigma_x");
        in.sigma_p[a] = sc.consts.hbar / (2.0 * in.sigma_x[a]);
    }
    if (doc.has("initial", "sigma_p")) {
        in.sigma_p = per_axis(doc.get_doubles("initial", "sigma_p", {}), sc.dim, "initial.sigma_p");
        for (int a = 0; a < sc.dim; ++a) require_positive(in.sigma_p[a], "initial.sigma_p");
    }
    for (double q : doc.get_doubles("initial", "quanta", {})) {
        if (q < 0 || q > 2 || q != std::floor(q)) throw ValidationError("initial.quanta", "must be integers 0, 1 or 2");
        in.quanta.push_back(static_cast<int>(q));
    }
    if (in.kind == "eigenstate") {
        if (sc.field_preset != "harmonic") throw ValidationError("initial.kind", "eigenstates need the harmonic preset");
        if (in.quanta.empty()) in.quanta.assign(static_cast<std::size_t>(sc.dim), 0);
        if (in.quanta.size() != static_cast<std::size_t>(sc.dim))
            throw ValidationError("initial.quanta", "needs one entry per axis");
    }

    doc.require_known("sde", {"trajectories", "dt", "horizon", "record_every", "scheme", "allow_unstable_dt"});
    auto& sd = sc.sde;
    sd.trajectories = doc.get_uint("sde", "trajectories", sd.trajectories);
    sd.dt = doc.get_double("sde", "dt", sd.dt);
    sd.horizon = doc.get_double("sde", "horizon", sd.horizon);
    sd.record_every = doc.get_uint("sde", "record_every", sd.record_every);
    const auto scheme = doc.get_string("sde", "scheme", sde_scheme_name(sd.scheme));
    if (scheme == "euler_maruyama") sd.scheme = SdeScheme::EulerMaruyama;
    else if (scheme == "symplectic") sd.scheme = SdeScheme::SymplecticSplit;
    else throw ValidationError("sde.scheme", "must be euler_maruyama or symplectic");
    sd.allow_unstable_dt = doc.get_bool("sde", "allow_unstable_dt", sd.allow_unstable_dt);
    require_count(sd.trajectories, "sde.trajectories");
    require_positive(sd.dt, "sde.dt");
    require_positive(sd.horizon, "sde.horizon");
    require_count(sd.record_every, "sde.record_every");
    require_whole_steps(sd.horizon, sd.dt, "sde");

    doc.require_known("fpe", {"nx", "np", "x_min", "x_max", "p_min", "p_max", "dt", "horizon", "record_every"});
    auto& fp = sc.fpe;
    fp.nx = doc.get_uint("fpe", "nx", fp.nx);
    fp.np = doc.get_uint("fpe", "np", fp.np);
    fp.x_min = doc.get_double("fpe", "x_min", fp.x_min);
    fp.x_max = doc.get_double("fpe", "x_max", fp.x_max);
    fp.p_min = doc.get_double("fpe", "p_min", fp.p_min);
    fp.p_max = doc.get_double("fpe", "p_max", fp.p_max);
    fp.dt = doc.get_double("fpe", "dt", fp.dt);
    fp.horizon = doc.get_double("fpe", "horizon", fp.horizon);
    fp.record_every = doc.get_uint("fpe", "record_every", fp.record_every);
    require_count(fp.nx, "fpe.nx", 2);
    require_count(fp.np, "fpe.np", 2);
    for (const auto& [v, f] : {std::pair{fp.x_min, "fpe.x_min"}, {fp.x_max, "fpe.x_max"}, {fp.p_min, "fpe.p_min"},
                               {fp.p_max, "fpe.p_max"}})
        require_finite(v, f);
    if (fp.x_max <= fp.x_min) throw ValidationError("fpe.x_max", "must exceed x_min");
    if (fp.p_max <= fp.p_min) throw ValidationError("fpe.p_max", "must exceed p_min");
    require_positive(fp.dt, "fpe.dt");
    require_positive(fp.horizon, "fpe.horizon");
    require_count(fp.record_every, "fpe.record_every");
    require_whole_steps(fp.horizon, fp.dt, "fpe");
    if (sc.engines.count("fpe") && sc.dim != 1) throw ValidationError("scenario.dim", "the fpe engine is one-dimensional");

    doc.require_known("qsolver", {"points", "half_width", "dt", "horizon", "record_every", "scheme"});
    auto& qs = sc.qsolver;
    qs.points = doc.get_uint("qsolver", "points", qs.points);
    qs.half_width = doc.get_double("qsolver", "half_width", qs.half_width);
    qs.dt = doc.get_double("qsolver", "dt", qs.dt);
    qs.horizon = doc.get_double("qsolver", "horizon", qs.horizon);
    qs.record_every = doc.get_uint("qsolver", "record_every", qs.record_every);
    const auto psi_scheme = doc.get_string("qsolver", "scheme", psi_scheme_name(qs.scheme));
    if (psi_scheme == "spectral") qs.scheme = PsiScheme::Spectral;
    else if (psi_scheme == "crank_nicolson") qs.scheme = PsiScheme::CrankNicolson;
    else throw ValidationError("qsolver.scheme", "must be spectral or crank_nicolson");
    require_count(qs.points, "qsolver.points", 4);
    require_positive(qs.half_width, "qsolver.half_width");
    require_positive(qs.dt, "qsolver.dt");
    require_positive(qs.horizon, "qsolver.horizon");
    require_count(qs.record_every, "qsolver.record_every");
    require_whole_steps(qs.horizon, qs.dt, "qsolver");

    doc.require_known("task", task.params);
    for (const auto& key : doc.keys("task")) sc.task_params[key] = doc.get_string("task", key, "");

    const std::set<std::string> checks(task.checks.begin(), task.checks.end());
    doc.require_known("tolerances", checks);
    for (const auto& c : task.checks) {
        if (!doc.has("tolerances", c)) throw ValidationError("tolerances." + c, "is required by task '" + task.name + "'");
        const double tol = doc.get_double("tolerances", c, 0.0);
        require_finite(tol, "tolerances." + c);
        if (tol < 0.0) throw ValidationError("tolerances." + c, "must be >= 0");
        sc.tolerances[c] = tol;
    }

    if (sc.task == "cross-engine")
        for (int a = 0; a < sc.dim; ++a)
            if (std::abs(in.sigma_p[a] * in.sigma_x[a] - 0.5 * sc.consts.hbar) > 1e-12 * sc.consts.hbar)
                throw ValidationError("initial.sigma_p", "cross-engine runs need the matched value hbar / (2 sigma_x)");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string Scenario::echo() const {
    std::ostringstream o;
    std::string eng;
    for (const auto& e : engines) eng += (eng.empty() ? "" : ", ") + e;
    o << "[scenario]\nname = " << name << "\ntask = " << task << '\n';
    if (!description.empty()) o << "description = " << description << '\n';
    if (!eng.empty()) o << "engines = " << eng << '\n';
    o << "dim = " << dim << "\nseed = " << seed << "\noutput_dir = " << output_dir << "\n\n";
    o << "[constants]\nhbar = " << fmt(consts.hbar) << "\nmass = " << fmt(consts.mass) << "\ncharge = "
      << fmt(consts.charge) << "\nlight_speed = " << fmt(consts.light_speed) << "\nvacuum_power = "
      << fmt(consts.vacuum_power) << "\n\n";
    o << "[field]\npreset = " << field_preset << '\n';
    for (const auto& [k, v] : field_params) {
        o << k << " =";
        for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : " ") << fmt(v[i]);
        o << '\n';
    }
    o << "\n[initial]\nkind = " << initial.kind << "\nx0 = " << fmt_axes(initial.x0, dim)
      << "\np0 = " << fmt_axes(initial.p0, dim) << "\nsigma_x = " << fmt_axes(initial.sigma_x, dim)
      << "\nsigma_p = " << fmt_axes(initial.sigma_p, dim) << '\n';
    if (!initial.quanta.empty()) {
        o << "quanta =";
        for (std::size_t i = 0; i < initial.quanta.size(); ++i) o << (i ? ", " : " ") << initial.quanta[i];
        o << '\n';
    }
    o << "\n[sde]\ntrajectories = " << sde.trajectories << "\ndt = " << fmt(sde.dt) << "\nhorizon = " << fmt(sde.horizon)
      << "\nrecord_every = " << sde.record_every << "\nscheme = " << sde_scheme_name(sde.scheme)
      << "\nallow_unstable_dt = " << (sde.allow_unstable_dt ? "true" : "false") << "\n\n";
    o << "[fpe]\nnx = " << fpe.nx << "\nnp = " << fpe.np << "\nx_min = " << fmt(fpe.x_min) << "\nx_max = " << fmt(fpe.x_max)
      << "\np_min = " << fmt(fpe.p_min) << "\np_max = " << fmt(fpe.p_max) << "\ndt = " << fmt(fpe.dt)
      << "\nhorizon = " << fmt(fpe.horizon) << "\nrecord_every = " << fpe.record_every << "\n\n";
    o << "[qsolver]\npoints = " << qsolver.points << "\nhalf_width = " << fmt(qsolver.half_width) << "\ndt = "
      << fmt(qsolver.dt) << "\nhorizon = " << fmt(qsolver.horizon) << "\nrecord_every = " << qsolver.record_every
      << "\nscheme = " << psi_scheme_name(qsolver.scheme) << '\n';
    if (!task_params.empty()) {
        o << "\n[task]\n";
        for (const auto& [k, v] : task_params) o << k << " = " << v << '\n';
    }
    if (!tolerances.empty()) {
        o << "\n[tolerances]\n";
        for (const auto& [k, v] : tolerances) o << k << " = " << fmt(v) << '\n';
    }
    return o.str();
}

Scenario builtin_scenario(const std::string& name) {
    std::vector<std::string> names;
    for (const auto& b : builtin_scenarios()) {
        Scenario sc = parse_scenario(b.text);
        if (sc.name == name) return sc;
        names.push_back(sc.name);
    }
    throw UsageError("no builtin scenario '" + name + "'; available: " + joined(names));
}

}  // namespace stochlab
