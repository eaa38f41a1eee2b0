#pragma once

#include <vector>

#include "metastab/model.hpp"
#include "metastab/profile.hpp"
#include "metastab/record.hpp"

namespace metastab {

/// Grid energy of a field: trapezoid quadrature of
///   (eps/2) [D(u) u_x]^2 + G(u)/eps
/// with centered differences inside and second-order one-sided stencils at
/// the boundaries (the same stencil family as the solver).
struct EnergyReport {
    double value = 0.0;
    double grad_part = 0.0;
    double pot_part = 0.0;
    int n_layers = 0;      // midlevel sign changes of the field
    double gamma0 = 0.0;
    double gap = 0.0;      // n_layers * gamma0 - value
};

EnergyReport energy(const PhaseField& u, const MaterialModel& model,
                    double epsilon);

/// Mass of one profile tail: the energy carried by the stretch of profile
/// within distance delta (in phase space) of the given well,
///   integral of sqrt(2 G) D over that stretch.
/// Below 1e-4 widths the quadrature is replaced by the local power law of G.
double tail_mass(const MaterialModel& model, bool at_alpha, double delta);

/// Construction-space energy of a pasted multi-layer profile: exactly
/// N gamma0 minus the tail masses cut off at the segment edges.  The gap to
/// N gamma0 is a sum of positive masses, so it stays meaningful at
/// magnitudes far below what grid quadrature error would mask.
struct DatumEnergy {
    double value = 0.0;
    double gap = 0.0;                 // N gamma0 - value, always > 0
    std::vector<double> edge_masses;  // two entries per layer, left then right
};

DatumEnergy datum_energy(const MaterialModel& model,
                         const StandingProfile& profile,
                         const LayerConfiguration& layers);

/// Exact L1 distance between the piecewise-linear interpolant of u and the
/// step function of the layer configuration (cells are split at the jumps
/// and at sign changes, so the discontinuities cost no accuracy).
double l1_distance_to_step(const PhaseField& u,
                           const LayerConfiguration& layers, double alpha,
                           double beta);

/// N-transition-layer certificate: L1 closeness to the step function and
/// the energy bound E <= N gamma0 + C exp(-A/eps).  Defaults: delta =
/// 2 N (beta-alpha) eps, A = 0.9 r sqrt(2 lambda), C = 1.  Throws
/// DegenerateModel when lambda does not exist and InvalidA when A falls
/// outside (0, r sqrt(2 lambda)).
struct Certification {
    bool certified = false;
    bool l1_ok = false;
    bool energy_ok = false;
    double l1_distance = 0.0;
    double delta = 0.0;
    double energy_value = 0.0;
    double n_gamma0 = 0.0;
    double energy_bound = 0.0;
    double exponent_a = 0.0;
    double constant_c = 1.0;
};

Certification certify_layer_structure(const PhaseField& u,
                                      const MaterialModel& model,
                                      double epsilon,
                                      const LayerConfiguration& layers,
                                      double delta = 0.0, double A = 0.0,
                                      double C = 1.0);

/// E - (N gamma0 - C exp(-A/eps)); non-negative when the lower bound holds.
/// The grid overload reports the discrete energy's margin (which inherits
/// the O(h^2) quadrature bias); the construction-space overload is exact.
double lower_bound_margin(const PhaseField& u, const MaterialModel& model,
                          double epsilon, const LayerConfiguration& layers,
                          double A = 0.0, double C = 1.0);
double lower_bound_margin(const DatumEnergy& exact, const MaterialModel& model,
                          double epsilon, const LayerConfiguration& layers,
                          double A = 0.0, double C = 1.0);

/// Relative residual of E(0) - E(T) = dissipation(T) over a run's
/// diagnostics.  Throws MissingDiagnostics without at least two rows.
double dissipation_residual(const RunRecord& record);

/// Fit gap = C exp(-A/eps) through (epsilon, gap) samples with gap > 0.
struct GapFit {
    double a_fit = 0.0;
    double c_fit = 0.0;
    LineFit line;  // log gap against 1/eps
};

GapFit fit_energy_gap(const std::vector<double>& epsilons,
                      const std::vector<double>& gaps);

} // namespace metastab
