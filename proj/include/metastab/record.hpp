#pragma once

#include <string>
#include <vector>

#include "metastab/profile.hpp"

namespace metastab {

struct Snapshot {
    double t = 0.0;
    std::vector<double> u;
};

/// One diagnostics row per snapshot time.  ut_max and dissipation come from
/// the stepping loop (difference quotients), everything else is evaluated on
/// the snapshot itself.
struct DiagnosticsRow {
    double t = 0.0;
    double energy = 0.0;
    double grad_part = 0.0;
    double pot_part = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double ut_max = 0.0;
    double dt = 0.0;
    double dissipation = 0.0;  // eps^{-1} * cumulative int int D(u) u_t^2
    int n_layers = 0;
    std::vector<double> positions;
};

struct RunRecord {
    Grid grid;
    double epsilon = 0.0;
    std::string scheme;
    std::vector<Snapshot> snapshots;
    std::vector<DiagnosticsRow> diagnostics;
    double final_t = 0.0;
    long long steps = 0;
    double min_u_global = 0.0;
    double max_u_global = 0.0;
    double wall_seconds = 0.0;
};

/// Shortest decimal that round-trips the double exactly.
std::string format_full(double v);

// CSV layout: snapshots carry a header row "t" followed by the node
// coordinates, then one row per snapshot; diagnostics rows append the layer
// positions after the fixed columns, so rows may differ in length.
void write_snapshots_csv(const RunRecord& record, const std::string& path);
void write_diagnostics_csv(const RunRecord& record, const std::string& path);

/// Re-reads grid and snapshots (the fields analysis needs) from the CSV.
RunRecord read_snapshots_csv(const std::string& path);
std::vector<DiagnosticsRow> read_diagnostics_csv(const std::string& path);

// Binary checkpoint: version byte 1, then a, b as doubles, cell count as
// 64-bit unsigned, time, and the nodal values, all little-endian.
struct Checkpoint {
    Grid grid;
    double t = 0.0;
    std::vector<double> u;
};

void write_checkpoint(const std::string& path, const Grid& grid, double t,
                      const std::vector<double>& u);
Checkpoint read_checkpoint(const std::string& path);

} // namespace metastab
