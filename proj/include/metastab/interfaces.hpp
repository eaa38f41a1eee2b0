#pragma once

#include <utility>
#include <vector>

#include "metastab/model.hpp"
#include "metastab/record.hpp"

namespace metastab {

/// Closed value band K inside (alpha, beta), bounded away from the wells.
struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

/// The middle fifth of (alpha, beta): robust to tail wobble, symmetric
/// about the midlevel.
Band default_band(const MaterialModel& model);

/// Interface of a field: the preimage of the band under the piecewise-linear
/// interpolant (a union of closed intervals, exact to sub-cell resolution)
/// plus the isolated crossings of the midlevel (alpha+beta)/2, which serve
/// as the layer positions.
struct InterfaceSet {
    std::vector<double> positions;                    // midlevel crossings
    std::vector<std::pair<double, double>> extents;   // preimage of the band
    Band band;

    bool empty() const { return positions.empty() && extents.empty(); }
};

InterfaceSet interface_of(const PhaseField& u, const Band& band,
                          double midlevel);
InterfaceSet interface_of(const PhaseField& u, const MaterialModel& model);

/// Hausdorff distance between two nonempty unions of closed intervals;
/// exact (candidate extrema are interval endpoints and gap midpoints).
/// Throws EmptyInput when either union is empty.
double hausdorff(const std::vector<std::pair<double, double>>& X,
                 const std::vector<std::pair<double, double>>& Y);
/// Uses the extents when present, otherwise the positions as points.
double hausdorff(const InterfaceSet& X, const InterfaceSet& Y);

struct CollapseEvent {
    double t = 0.0;          // first snapshot with the reduced count
    int first_index = -1;    // initial-layer indices of the vanished pair
    int second_index = -1;
    double pre_gap = 0.0;    // their separation at the previous snapshot
};

struct TrackReport {
    std::vector<double> times;
    // one row per snapshot, one column per initial layer; NaN marks a
    // vanished layer
    std::vector<std::vector<double>> trajectories;
    std::vector<int> counts;
    std::vector<CollapseEvent> events;
    double displacement_threshold = 0.0;  // the delta_1 used
    double t_exceed = 0.0;  // first t with d(I[u(t)], I[u0]) > delta_1; inf if never
    bool ambiguous = false; // two live layers closer than one grid cell
};

/// Follows the midlevel crossings through the snapshots by order-preserving
/// matching (layers cannot cross in one dimension).  A drop in count yields
/// a CollapseEvent per vanished adjacent pair, assigned to minimize the
/// total displacement of the surviving layers.
TrackReport track_layers(const RunRecord& record, const MaterialModel& model,
                         double delta1);

struct ScalingFit {
    double a_fit = 0.0;       // slope of log t_collapse against 1/epsilon
    double intercept = 0.0;
    double ceiling = 0.0;     // r * sqrt(2 lambda); 0 when lambda degenerates
    double check_exponent = 0.0;  // 0.5 * ceiling used in the sample test
    bool pass = false;
    std::vector<double> epsilons;
    std::vector<double> collapse_times;
};

/// Least-squares fit of log t_collapse = a_fit / epsilon + b over the
/// samples.  PASS requires a positive ceiling (the bound exists at all),
/// a_fit > 0, and every sample to clear exp(0.5 * ceiling / epsilon).
/// Throws InsufficientData with fewer than two distinct epsilons.
ScalingFit lifetime_scaling_fit(
    const std::vector<std::pair<double, double>>& samples, double radius,
    double lambda);

} // namespace metastab
