#pragma once

#include <functional>
#include <string>

#include "metastab/model.hpp"
#include "metastab/record.hpp"

namespace metastab {

enum class Scheme { explicit_euler, imex };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Geometric snapshot times t0, t0*ratio, t0*ratio^2, ... plus t = 0 and the
/// final time; uniform resolution in log t because collapse events span
/// many decades.
struct SnapshotSchedule {
    double t0 = 1.0;
    double ratio = 1.1;

    bool operator==(const SnapshotSchedule&) const = default;
};

/// dt control by per-step displacement dt * sup |u_t|: grow slowly while the
/// state barely moves (metastable plateaus), halve when a collapse wakes the
/// dynamics up; the gap between the thresholds provides hysteresis.  Growth
/// is capped at the base step (validate_config's choice or the explicit dt),
/// never at the raw stability bound: IMEX splitting error at dt near
/// 0.25/max|f'| inflates metastable lifetimes by several percent, so the cap
/// is an accuracy statement, not a stability one.
struct AdaptivePolicy {
    bool enabled = true;
    double plateau_threshold = 1e-6;  // displacement per step, in u units
    double active_threshold = 1e-3;
    double grow = 1.05;
    double shrink = 0.5;

    bool operator==(const AdaptivePolicy&) const = default;
};

struct SimulationState;

struct SolverConfig {
    Grid grid;
    double epsilon = 0.1;
    Scheme scheme = Scheme::imex;
    double dt = 0.0;  // 0 = automatic base step for the scheme
    double t_max = 1.0;
    AdaptivePolicy adaptive;
    SnapshotSchedule snapshots;
    bool stop_after_collapse = false;  // stop once the layer count drops
    // manufactured source s(x, t), for convergence studies
    std::function<double(double, double)> source;
    // called at every snapshot; returning true ends the run early
    std::function<bool(const SimulationState&)> stop_hook;
};

struct SimulationState {
    PhaseField u;
    double t = 0.0;
    long long step_count = 0;
    double dt = 0.0;
    double ut_max = 0.0;       // sup |u_t| of the last step
    double dissipation = 0.0;  // eps^{-1} cumulative int int D(u) u_t^2
    double min_u = 0.0, max_u = 0.0;  // over the whole history
};

/// Checks the grid resolution rule h <= epsilon/8, the explicit stability
/// bound dt <= h^2/(2 eps^2 max D), and that diffusivity-degenerate models
/// use the explicit scheme; fills in the automatic dt (for the explicit
/// scheme the combined diffusion+reaction monotonicity bound, which also
/// preserves the [alpha, beta] range).  Returns the validated base dt.
double validate_config(const SolverConfig& config, const MaterialModel& model);

/// One forward step of u_t = eps^2 (D(u) u_x)_x - f(u) [+ source] in
/// conservative flux form with arithmetic-mean face diffusivities and
/// Neumann ghost nodes.  Explicit: forward Euler.  IMEX: implicit diffusion
/// with the diffusivity lagged at the current level (one tridiagonal
/// solve), explicit reaction.
void step(SimulationState& state, const MaterialModel& model,
          const SolverConfig& config);

/// Integrates to t_max (or an early stop), recording snapshots and
/// per-snapshot diagnostics.  Deterministic for a fixed config.
RunRecord run(const PhaseField& u0, const MaterialModel& model,
              const SolverConfig& config);

/// Sup norm of eps^2 (D(u)u_x)_x - f(u) under the step stencil.
double discrete_pde_residual(const PhaseField& u, const MaterialModel& model,
                             double epsilon);

} // namespace metastab
