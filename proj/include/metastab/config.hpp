#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "metastab/model.hpp"
#include "metastab/profile.hpp"
#include "metastab/solver.hpp"

namespace metastab {

struct AnalysisToggles {
    bool track = true;         // follow layer positions through the snapshots
    bool energy_audit = true;  // dissipation residual + energy series
    bool certify = true;       // N-layer certificate of the initial datum
    double displacement_threshold = 0.0;  // 0 = the layer separation radius

    bool operator==(const AnalysisToggles&) const = default;
};

/// Everything needed to reproduce one experiment (or one epsilon sweep):
/// the material model, the initial layer geometry, the integrator setup and
/// the analysis toggles.  Serializes to a single JSON document.
struct ExperimentConfig {
    std::string name = "experiment";
    ModelSpec model;
    LayerConfiguration layers;  // carries the domain [a, b]
    double epsilon = 0.1;
    std::vector<double> sweep_epsilons;  // nonempty: run one record per entry
    Scheme scheme = Scheme::imex;
    double dt = 0.0;  // 0 = automatic
    double t_max = 1.0;
    int cells_per_eps = 10;
    SnapshotSchedule snapshots;
    AdaptivePolicy adaptive;
    bool stop_after_collapse = false;
    AnalysisToggles analysis;
    std::string output_dir = "out";
    unsigned long long seed = 0;  // reserved; runs are deterministic

    bool operator==(const ExperimentConfig&) const = default;

    /// Fills the solver-facing part; the grid is derived from the domain,
    /// epsilon and cells_per_eps.
    SolverConfig solver_config(double eps) const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);  // throws IOFailure

/// The eight bundled experiments (one per published figure panel).  With
/// full_horizon the Mullins persistence run extends to its published length
/// (2e6) instead of the desk-scale truncation at 1e5.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name, bool full_horizon = false);

} // namespace metastab
