#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sddpde/analysis.hpp"
#include "sddpde/errors.hpp"
#include "sddpde/integrator.hpp"
#include "sddpde/io.hpp"
#include "sddpde/scenario.hpp"

namespace {

using namespace sddpde;
namespace fs = std::filesystem;

const std::vector<std::string> kEstimateIds = {
    "energy",   "contdep",  "lemma1",  "hb",      "h1eta",       "f1bound",
    "manifold", "semigroup", "dissipativity", "remark4", "remark5", "shift-smooth"};

HistoryBuffer build_initial(const Scenario& sc, const SddRightHandSide& rhs) {
    if (sc.manifold_compatible) return make_manifold_initial(sc.initial, rhs);
    return render_history(sc.initial);
}

EstimateReport two_sided_report(const std::string& id, double bound, double observed,
                                double tol) {
    EstimateReport rep;
    rep.id = id;
    rep.bound = bound;
    rep.observed = observed;
    rep.tol = tol;
    rep.margin = -std::abs(bound - observed);
    rep.pass = rep.margin >= -tol;
    return rep;
}

int run_solve(const Scenario& sc) {
    const auto t_start = std::chrono::steady_clock::now();
    SddRightHandSide rhs = assemble_model(sc.model);
    HistoryBuffer initial = build_initial(sc, rhs);
    Trajectory traj = solve(initial, rhs, sc.solver);
    EstimateReport energy = verify_energy(traj, rhs);

    fs::create_directories(sc.output_dir);
    write_trajectory_csv(traj, (fs::path(sc.output_dir) / "trajectory.csv").string());

    std::vector<double> ts, half_sq, bound;
    const double forcing = rhs.b.M_b * rhs.b.M_b * rhs.basis->length();
    const double lhs0 = std::pow(traj.basis().norm_alpha(traj.state(0), 0.5), 2);
    for (int i = 0; i < traj.n_nodes(); ++i) {
        const double t = traj.node_time(i) - traj.node_time(0);
        ts.push_back(t);
        half_sq.push_back(std::pow(traj.basis().norm_alpha(traj.state(i), 0.5), 2));
        bound.push_back(lhs0 + forcing * t);
    }
    write_columns_csv((fs::path(sc.output_dir) / "plot_energy.csv").string(),
                      {"t", "a_half_norm_sq", "energy_bound"}, {ts, half_sq, bound});

    double worst_node_margin = energy.margin;
    for (const auto& [k, v] : energy.details)
        if (k == "worst_node_margin") worst_node_margin = v;

    ManifestInfo info;
    info.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    info.worst_energy_margin = worst_node_margin;
    info.initial_manifold_residual = traj.initial_manifold_residual();
    info.stats = traj.stats();
    write_manifest_json((fs::path(sc.output_dir) / "manifest.json").string(), sc, info);

    std::cout << "solved to T=" << sc.solver.T << " in " << info.wall_time_s << " s; "
              << "worst energy margin: " << worst_node_margin << "\n";
    return 0;
}

std::vector<EstimateReport> run_estimate(const std::string& id, const Scenario& sc,
                                         const SddRightHandSide& rhs) {
    const SpectralBasis& basis = *rhs.basis;
    if (id == "energy") {
        Trajectory traj = solve(build_initial(sc, rhs), rhs, sc.solver);
        return {verify_energy(traj, rhs)};
    }
    if (id == "contdep") {
        HistoryBuffer phi = build_initial(sc, rhs);
        HistoryBuffer psi =
            add_mode_bump_perturbation(basis, phi, 1, 1e-4, std::min(0.1, rhs.eta.r / 2));
        return verify_continuous_dependence(phi, psi, rhs, sc.solver);
    }
    if (id == "lemma1") return {audit_lemma1(rhs, 1000, sc.seed)};
    if (id == "hb") return {audit_hb(rhs, 1000, sc.seed)};
    if (id == "h1eta") return {audit_h1eta(rhs, 1000, sc.seed)};
    if (id == "f1bound") return {audit_f1_bound(rhs, 200, sc.seed)};
    if (id == "manifold")
        return {verify_manifold_invariance(sc.initial, rhs, sc.solver,
                                           std::min(3.0, sc.solver.T))};
    if (id == "semigroup")
        return {verify_semigroup(build_initial(sc, rhs), rhs, sc.solver, 10, sc.seed)};
    if (id == "dissipativity") {
        const double target = 10.0 * absorbing_threshold(rhs);
        const double t_pred = comparison_entry_time(rhs, target, 0.05);
        const double t_max = 2.0 * t_pred + 2.0 * rhs.eta.r + 1.0;
        auto initials = dissipativity_initials(rhs, 8, target, sc.seed);
        return {verify_dissipativity(rhs, sc.solver, initials, 0.05, t_max)};
    }
    if (id == "remark4") return {two_sided_report("remark4", 1.0, timeshift_counterexample(), 1e-2)};
    if (id == "remark5")
        return {two_sided_report("remark5", 1.0, timeshift_derivative_counterexample(), 1e-6)};
    if (id == "shift-smooth")
        return {two_sided_report("shift-smooth", 0.0, timeshift_smooth_control(), 1e-6)};
    throw ConfigError("unreachable estimate id");
}

int run_verify(const Scenario& sc, std::vector<std::string> ids) {
    for (const auto& id : ids) {
        if (std::find(kEstimateIds.begin(), kEstimateIds.end(), id) == kEstimateIds.end()) {
            std::cerr << "unknown estimate id '" << id << "'; valid ids:";
            for (const auto& v : kEstimateIds) std::cerr << " " << v;
            std::cerr << "\n";
            return 2;
        }
    }
    if (ids.empty()) ids = kEstimateIds;

    SddRightHandSide rhs = assemble_model(sc.model);
    std::vector<EstimateReport> reports;
    bool all_pass = true;
    for (const auto& id : ids) {
        for (EstimateReport& rep : run_estimate(id, sc, rhs)) {
            std::cout << (rep.pass ? "PASS" : "FAIL") << " " << rep.id
                      << ": observed=" << rep.observed << " bound=" << rep.bound
                      << " margin=" << rep.margin;
            if (!rep.note.empty()) std::cout << " (" << rep.note << ")";
            std::cout << "\n";
            all_pass = all_pass && rep.pass;
            reports.push_back(std::move(rep));
        }
    }
    fs::create_directories(sc.output_dir);
    write_report_json((fs::path(sc.output_dir) / "report.json").string(), sc, reports);
    return all_pass ? 0 : 1;
}

int run_study(const Scenario& sc, const std::string& kind) {
    fs::create_directories(sc.output_dir);
    if (kind == "galerkin") {
        const std::vector<int> m_list = {4, 8, 16, 32};
        auto rows = galerkin_convergence_study(sc.initial, sc.model, m_list, sc.solver);
        std::vector<double> mc, mf, dist, dist_proj, ratio;
        bool decreasing = true;
        for (size_t i = 0; i < rows.size(); ++i) {
            mc.push_back(rows[i].m_coarse);
            mf.push_back(rows[i].m_fine);
            dist.push_back(rows[i].dist);
            dist_proj.push_back(rows[i].dist_projected);
            ratio.push_back(i > 0 ? rows[i - 1].dist / rows[i].dist : 0.0);
            if (i > 0 && !(rows[i].dist < rows[i - 1].dist)) decreasing = false;
            std::cout << "m=" << rows[i].m_coarse << " vs " << rows[i].m_fine
                      << ": H-distance " << rows[i].dist << "\n";
        }
        write_columns_csv((fs::path(sc.output_dir) / "galerkin.csv").string(),
                          {"m_coarse", "m_fine", "dist_h", "dist_h_projected", "ratio_prev"},
                          {mc, mf, dist, dist_proj, ratio});
        write_columns_csv((fs::path(sc.output_dir) / "plot_galerkin.csv").string(),
                          {"m_coarse", "dist_h"}, {mc, dist});
        if (!decreasing) {
            std::cerr << "galerkin study table is not decreasing\n";
            return 1;
        }
        return 0;
    }
    if (kind == "dissipativity") {
        SddRightHandSide rhs = assemble_model(sc.model);
        const double target = 10.0 * absorbing_threshold(rhs);
        const double t_pred = comparison_entry_time(rhs, target, 0.05);
        const double t_max = 2.0 * t_pred + 2.0 * rhs.eta.r + 1.0;
        auto initials = dissipativity_initials(rhs, 8, target, sc.seed);
        std::vector<DissipativityEntry> entries;
        EstimateReport rep = verify_dissipativity(rhs, sc.solver, initials, 0.05, t_max, &entries);
        std::vector<double> idx, entry, pred;
        for (size_t i = 0; i < entries.size(); ++i) {
            idx.push_back(static_cast<double>(i));
            entry.push_back(entries[i].entry_time);
            pred.push_back(entries[i].predicted);
            std::cout << "initial " << i << ": " << entries[i].status
                      << " entry=" << entries[i].entry_time
                      << " predicted=" << entries[i].predicted << "\n";
        }
        write_columns_csv((fs::path(sc.output_dir) / "dissipativity.csv").string(),
                          {"initial", "entry_time", "predicted_entry"}, {idx, entry, pred});
        return rep.pass ? 0 : 1;
    }
    if (kind == "sweep") {
        // damping sweep: entry times are monotone non-increasing in d
        const std::vector<double> ds = {0.0, 0.1, 1.0};
        std::vector<double> entries;
        for (double d : ds) {
            ModelSpec ms = sc.model;
            ms.d = d;
            SddRightHandSide rhs = assemble_model(ms);
            const double target = 10.0 * absorbing_threshold(rhs);
            const double t_pred = comparison_entry_time(rhs, target, 0.05);
            const double t_max = 2.0 * t_pred + 2.0 * rhs.eta.r + 1.0;
            auto initials = dissipativity_initials(rhs, 1, target, sc.seed);
            std::vector<DissipativityEntry> result;
            verify_dissipativity(rhs, sc.solver, initials, 0.05, t_max, &result);
            entries.push_back(result[0].entry_time);
            std::cout << "d=" << d << ": entry=" << result[0].entry_time << "\n";
        }
        write_columns_csv((fs::path(sc.output_dir) / "sweep.csv").string(),
                          {"damping", "entry_time"}, {ds, entries});
        for (size_t i = 0; i + 1 < entries.size(); ++i)
            if (entries[i] < 0 || entries[i + 1] > entries[i] + sc.solver.dt) {
                std::cerr << "entry times are not monotone non-increasing in damping\n";
                return 1;
            }
        return 0;
    }
    std::cerr << "unknown study kind '" << kind << "'; valid: galerkin dissipativity sweep\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin solver and estimate verifier for a non-local "
                 "reaction-diffusion equation with a state-dependent delay"};
    app.require_subcommand(1);

    std::string config_path, out_dir, study_kind;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    std::vector<std::string> estimate_ids;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "scenario config JSON")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", seed_override, "seed override for randomized operations")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* cmd_solve = app.add_subcommand("solve", "integrate the scenario and write outputs");
    add_common(cmd_solve);
    CLI::App* cmd_verify = app.add_subcommand("verify", "run estimate verifiers");
    add_common(cmd_verify);
    cmd_verify->add_option("ids", estimate_ids, "estimate ids (default: all)");
    CLI::App* cmd_study = app.add_subcommand("study", "run a study and write tables");
    add_common(cmd_study);
    cmd_study->add_option("--kind", study_kind, "galerkin | dissipativity | sweep")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        Scenario sc = load_scenario(config_path);
        if (!out_dir.empty()) sc.output_dir = out_dir;
        if (seed_given) sc.seed = seed_override;
        if (cmd_solve->parsed()) return run_solve(sc);
        if (cmd_verify->parsed()) return run_verify(sc, estimate_ids);
        return run_study(sc, study_kind);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
