#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "metastab/config.hpp"
#include "metastab/energy.hpp"
#include "metastab/interfaces.hpp"
#include "metastab/record.hpp"

namespace metastab {

struct ExperimentResult {
    ExperimentConfig config;
    double epsilon = 0.1;  // the epsilon actually run (sweeps override config)
    RunRecord record;
    DatumEnergy datum;  // construction-space energy of the initial datum
    bool has_track = false;
    TrackReport track;
    bool has_cert = false;  // certification skipped for degenerate models
    Certification cert;
    bool has_dissipation = false;
    double dissipation = 0.0;  // relative residual of the energy identity
};

/// Builds the model, pastes the layer datum, integrates, and runs the
/// toggled analyses.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, double epsilon);

/// Writes the artifact set under dir: run.json (config echo + run summary),
/// snapshots.csv, diagnostics.csv, trajectories.csv, events.json,
/// energy.json, checkpoint.bin and the plot scripts.  An empty record
/// produces a warning on stderr and no files.
void write_outputs(const ExperimentResult& result, const std::string& dir);

struct SweepResult {
    std::vector<ExperimentResult> runs;  // one per sweep epsilon, input order
    ScalingFit fit;
};

/// One record per sweep epsilon, executed by a pool of `jobs` workers with
/// per-run isolated state and a deterministic indexed merge.  Tracking is
/// always on (the sweep exists to measure collapse times).  Throws
/// InsufficientData with fewer than two epsilons.
SweepResult run_sweep(const ExperimentConfig& config, int jobs);

/// Per-epsilon subdirectories plus sweep.json and its plot script.
void write_sweep_outputs(const SweepResult& sweep, const std::string& dir);

/// Reads a run directory back (run.json + the CSVs), recomputes energies,
/// layer counts and the dissipation audit from the stored series, writes
/// analysis.json and returns it.
nlohmann::json analyze_directory(const std::string& dir);

/// Rewrites just the plot scripts of an existing run directory.
void emit_plots(const std::string& dir);

} // namespace metastab
