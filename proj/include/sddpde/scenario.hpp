#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sddpde/analysis.hpp"
#include "sddpde/integrator.hpp"
#include "sddpde/sdd_rhs.hpp"

namespace sddpde {

/// Recorded default seed for every randomized operation.
inline constexpr std::uint64_t kDefaultSeed = 20260809;

/// Parsed scenario: physics, initial data, solver settings, provenance.
struct Scenario {
    ModelSpec model;
    InitialFunction initial;
    bool manifold_compatible = false;  // project the initial shape onto the
                                       // compatible set before solving
    SolverConfig solver;
    std::uint64_t seed = kDefaultSeed;
    std::string output_dir = "out";
    std::string hash;  // canonical config hash, stable under key reordering
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// FNV-1a 64 over the canonical (key-sorted) JSON dump, as 16 hex digits.
std::string canonical_config_hash(const std::string& json_text);

void write_report_json(const std::string& path, const Scenario& scenario,
                       const std::vector<EstimateReport>& reports);

struct ManifestInfo {
    double wall_time_s = 0.0;
    double worst_energy_margin = 0.0;
    double initial_manifold_residual = 0.0;
    StepStats stats;
};

void write_manifest_json(const std::string& path, const Scenario& scenario,
                         const ManifestInfo& info);

}  // namespace sddpde
