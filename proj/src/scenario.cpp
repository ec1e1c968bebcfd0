#include "sddpde/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sddpde/errors.hpp"
#include "sddpde/io.hpp"

namespace sddpde {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& section) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + section);
}

double require_number(const json& obj, const std::string& key, const std::string& section) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError("missing or non-numeric '" + key + "' in " + section);
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return obj[key].get<double>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& section) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw ConfigError("missing or non-string '" + key + "' in " + section);
    return obj[key].get<std::string>();
}

KernelSpec parse_kernel(const json& obj, int n_grid) {
    reject_unknown_keys(obj, {"f", "ell", "quad_points", "verify_resolution"}, "kernel");
    KernelSpec spec;
    if (!obj.contains("f") || !obj["f"].is_object())
        throw ConfigError("kernel needs an 'f' profile object");
    const json& f = obj["f"];
    const std::string fkind = require_string(f, "kind", "kernel.f");
    if (fkind == "gaussian") {
        reject_unknown_keys(f, {"kind", "sigma"}, "kernel.f");
        spec.f.kind = KernelProfile::Kind::Gaussian;
        spec.f.sigma = require_number(f, "sigma", "kernel.f");
    } else if (fkind == "constant") {
        reject_unknown_keys(f, {"kind", "value"}, "kernel.f");
        spec.f.kind = KernelProfile::Kind::Constant;
        spec.f.value = require_number(f, "value", "kernel.f");
    } else {
        throw ConfigError("kernel.f.kind must be 'gaussian' or 'constant', got '" + fkind + "'");
    }
    if (!obj.contains("ell") || !obj["ell"].is_object())
        throw ConfigError("kernel needs an 'ell' bump object");
    const json& ell = obj["ell"];
    reject_unknown_keys(ell, {"kind", "center", "width", "power"}, "kernel.ell");
    if (require_string(ell, "kind", "kernel.ell") != "bump")
        throw ConfigError("kernel.ell.kind must be 'bump'");
    spec.ell.center = require_number(ell, "center", "kernel.ell");
    spec.ell.width = require_number(ell, "width", "kernel.ell");
    spec.ell.power = static_cast<int>(number_or(ell, "power", 2));
    spec.quad_points = static_cast<int>(number_or(obj, "quad_points", 4.0 * n_grid));
    if (obj.contains("verify_resolution")) {
        if (!obj["verify_resolution"].is_boolean())
            throw ConfigError("kernel.verify_resolution must be a boolean");
        spec.verify_resolution = obj["verify_resolution"].get<bool>();
    }
    return spec;
}

PointwiseNonlinearity parse_nonlinearity(const json& obj) {
    const std::string kind = require_string(obj, "kind", "nonlinearity");
    if (kind == "nicholson") {
        reject_unknown_keys(obj, {"kind", "p"}, "nonlinearity");
        return PointwiseNonlinearity::nicholson(require_number(obj, "p", "nonlinearity"));
    }
    if (kind == "saturating_linear") {
        reject_unknown_keys(obj, {"kind", "slope", "cap"}, "nonlinearity");
        return PointwiseNonlinearity::saturating_linear(
            require_number(obj, "slope", "nonlinearity"),
            require_number(obj, "cap", "nonlinearity"));
    }
    if (kind == "constant") {
        reject_unknown_keys(obj, {"kind", "value"}, "nonlinearity");
        return PointwiseNonlinearity::constant(require_number(obj, "value", "nonlinearity"));
    }
    throw ConfigError("nonlinearity.kind must be nicholson|saturating_linear|constant, got '" +
                      kind + "'");
}

DelayFunctional parse_delay(const json& obj) {
    const std::string kind = require_string(obj, "kind", "delay");
    const double r = require_number(obj, "r", "delay");
    if (kind == "constant") {
        reject_unknown_keys(obj, {"kind", "r", "tau0"}, "delay");
        return DelayFunctional::constant(require_number(obj, "tau0", "delay"), r);
    }
    if (kind == "history_energy") {
        reject_unknown_keys(obj, {"kind", "r", "kappa"}, "delay");
        return DelayFunctional::history_energy(require_number(obj, "kappa", "delay"), r);
    }
    throw ConfigError("delay.kind must be constant|history_energy, got '" + kind + "'");
}

InitialFunction parse_initial(const json& obj, int m, double r) {
    InitialFunction shape;
    shape.m = m;
    shape.r = r;
    const std::string kind = require_string(obj, "kind", "initial");
    if (kind == "polynomial") {
        reject_unknown_keys(obj, {"kind", "coefficients"}, "initial");
        shape.kind = InitialFunction::Kind::Polynomial;
        if (!obj.contains("coefficients") || !obj["coefficients"].is_array())
            throw ConfigError("polynomial initial needs a 'coefficients' array of arrays");
        for (const auto& row : obj["coefficients"]) {
            if (!row.is_array()) throw ConfigError("polynomial coefficients rows must be arrays");
            CoeffVec c;
            for (const auto& v : row) c.push_back(v.get<double>());
            if (static_cast<int>(c.size()) != m)
                throw ConfigError("polynomial coefficient row length must equal m");
            shape.poly_coeffs.push_back(std::move(c));
        }
    } else if (kind == "trig") {
        reject_unknown_keys(obj, {"kind", "modes"}, "initial");
        shape.kind = InitialFunction::Kind::Trig;
        if (!obj.contains("modes") || !obj["modes"].is_array())
            throw ConfigError("trig initial needs a 'modes' array");
        for (const auto& entry : obj["modes"]) {
            reject_unknown_keys(entry, {"k", "amplitude", "omega", "phase"}, "initial.modes");
            InitialFunction::TrigMode mode;
            mode.k = static_cast<int>(require_number(entry, "k", "initial.modes"));
            mode.amplitude = require_number(entry, "amplitude", "initial.modes");
            mode.omega = number_or(entry, "omega", 0.0);
            mode.phase = number_or(entry, "phase", 0.0);
            shape.trig_modes.push_back(mode);
        }
    } else if (kind == "tabulated") {
        reject_unknown_keys(obj, {"kind", "path"}, "initial");
        shape.kind = InitialFunction::Kind::Tabulated;
        const std::string path = require_string(obj, "path", "initial");
        HistoryBuffer buf = load_history_csv(path);
        if (std::abs(buf.anchor_time()) > 1e-9 ||
            std::abs(buf.max_delay() - r) > 1e-9 * std::max(1.0, r))
            throw ConfigError("tabulated initial data must cover exactly [-r, 0]");
        const auto& segs = buf.segments();
        shape.tab_times.push_back(segs.front().t0);
        shape.tab_values.push_back(segs.front().y0);
        shape.tab_derivs.push_back(segs.front().d0);
        for (size_t i = 0; i < segs.size(); ++i) {
            if (i > 0) {
                for (size_t k = 0; k < segs[i].d0.size(); ++k)
                    if (segs[i].d0[k] != segs[i - 1].d1[k])
                        throw ConfigError("tabulated initial data must be C^1 (derivative jump)");
            }
            shape.tab_times.push_back(segs[i].t1);
            shape.tab_values.push_back(segs[i].y1);
            shape.tab_derivs.push_back(segs[i].d1);
        }
    } else {
        throw ConfigError("initial.kind must be polynomial|trig|tabulated, got '" + kind + "'");
    }
    shape.validate();
    return shape;
}

}  // namespace

std::string canonical_config_hash(const std::string& json_text) {
    json parsed = json::parse(json_text);
    const std::string canonical = parsed.dump();  // object keys are sorted
    std::uint64_t h = 1469598103934665603ull;     // FNV-1a 64
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown_keys(root,
                        {"domain", "m", "kernel", "nonlinearity", "delay", "damping", "initial",
                         "manifold_compatible", "solver", "seed", "output"},
                        "scenario");

    Scenario sc;
    if (!root.contains("domain") || !root["domain"].is_object())
        throw ConfigError("scenario needs a 'domain' object");
    reject_unknown_keys(root["domain"], {"length", "n_grid"}, "domain");
    sc.model.domain.length = number_or(root["domain"], "length", kPi);
    sc.model.domain.n_grid = static_cast<int>(require_number(root["domain"], "n_grid", "domain"));

    if (!root.contains("m")) throw ConfigError("scenario needs the Galerkin order 'm'");
    sc.model.m = root["m"].get<int>();
    if (sc.model.m < 1) throw ConfigError("Galerkin order m must be >= 1");
    if (sc.model.domain.n_grid < 2 * sc.model.m)
        throw ConfigError("anti-aliasing rule violated: n_grid must be >= 2*m (n_grid=" +
                          std::to_string(sc.model.domain.n_grid) +
                          ", m=" + std::to_string(sc.model.m) + ")");

    if (!root.contains("kernel")) throw ConfigError("scenario needs a 'kernel' object");
    sc.model.kernel = parse_kernel(root["kernel"], sc.model.domain.n_grid);
    if (!root.contains("nonlinearity")) throw ConfigError("scenario needs a 'nonlinearity'");
    sc.model.b = parse_nonlinearity(root["nonlinearity"]);
    if (!root.contains("delay")) throw ConfigError("scenario needs a 'delay'");
    sc.model.eta = parse_delay(root["delay"]);
    sc.model.d = number_or(root, "damping", 0.0);
    if (sc.model.d < 0.0) throw ConfigError("damping must be nonnegative");

    if (!root.contains("initial")) throw ConfigError("scenario needs an 'initial' shape");
    sc.initial = parse_initial(root["initial"], sc.model.m, sc.model.eta.r);
    if (root.contains("manifold_compatible")) {
        if (!root["manifold_compatible"].is_boolean())
            throw ConfigError("manifold_compatible must be a boolean");
        sc.manifold_compatible = root["manifold_compatible"].get<bool>();
    }

    if (!root.contains("solver") || !root["solver"].is_object())
        throw ConfigError("scenario needs a 'solver' object");
    const json& sv = root["solver"];
    reject_unknown_keys(sv, {"dt", "T", "fp_tol", "fp_max_iter"}, "solver");
    sc.solver.dt = require_number(sv, "dt", "solver");
    sc.solver.T = require_number(sv, "T", "solver");
    sc.solver.fp_tol = number_or(sv, "fp_tol", 1e-10);
    sc.solver.fp_max_iter = static_cast<int>(number_or(sv, "fp_max_iter", 50));
    sc.solver.m = sc.model.m;
    if (sc.solver.dt > sc.model.eta.r &&
        !(sc.model.eta.kind == DelayFunctional::Kind::Constant &&
          sc.model.eta.tau0 >= sc.solver.dt))
        throw ConfigError("dt > r is only admissible for a constant delay with tau0 >= dt");

    if (root.contains("seed")) sc.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("output")) {
        reject_unknown_keys(root["output"], {"dir"}, "output");
        sc.output_dir = require_string(root["output"], "dir", "output");
    }
    sc.hash = canonical_config_hash(json_text);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open scenario config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

namespace {

json report_to_json(const EstimateReport& rep) {
    json j;
    j["bound"] = rep.bound;
    j["observed"] = rep.observed;
    j["margin"] = rep.margin;
    j["tol"] = rep.tol;
    j["pass"] = rep.pass;
    if (!rep.note.empty()) j["note"] = rep.note;
    if (!rep.details.empty()) {
        json d;
        for (const auto& [k, v] : rep.details) d[k] = v;
        j["details"] = d;
    }
    return j;
}

}  // namespace

void write_report_json(const std::string& path, const Scenario& scenario,
                       const std::vector<EstimateReport>& reports) {
    json j;
    j["scenario_hash"] = scenario.hash;
    j["seed"] = scenario.seed;
    json est;
    for (const auto& rep : reports) est[rep.id] = report_to_json(rep);
    j["estimates"] = est;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << j.dump(2) << "\n";
}

void write_manifest_json(const std::string& path, const Scenario& scenario,
                         const ManifestInfo& info) {
    json j;
    j["scenario_hash"] = scenario.hash;
    j["seed"] = scenario.seed;
    j["wall_time_s"] = info.wall_time_s;
    j["worst_energy_margin"] = info.worst_energy_margin;
    j["initial_manifold_residual"] = info.initial_manifold_residual;
    j["steps"] = info.stats.steps;
    j["fp_iterations_max"] = info.stats.max_fp_iters;
    j["fp_iterations_total"] = info.stats.total_fp_iters;
    j["solver"] = {{"dt", scenario.solver.dt},
                   {"T", scenario.solver.T},
                   {"fp_tol", scenario.solver.fp_tol},
                   {"fp_max_iter", scenario.solver.fp_max_iter}};
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << j.dump(2) << "\n";
}

}  // namespace sddpde
