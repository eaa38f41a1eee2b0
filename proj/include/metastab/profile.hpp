#pragma once

#include <vector>

#include "metastab/model.hpp"
#include "metastab/numerics.hpp"

namespace metastab {

struct Grid {
    double a = -1.0;
    double b = 1.0;
    int cells = 2;

    double h() const { return (b - a) / cells; }
    int nodes() const { return cells + 1; }
    double x(int i) const { return a + i * h(); }
};

/// Uniform grid chosen so that h <= epsilon / cells_per_eps.
Grid grid_for(double a, double b, double epsilon, int cells_per_eps = 10);

struct PhaseField {
    Grid grid;
    std::vector<double> values;

    double min() const;
    double max() const;
};

enum class Phase { alpha, beta };

/// N ordered jump locations inside (a,b) plus the phase the datum starts in
/// at x = a.  The separation radius r defaults to the tightest value the
/// geometry allows: min(half of the minimal gap, h_1 - a, b - h_N).
struct LayerConfiguration {
    double a = -1.0;
    double b = 1.0;
    std::vector<double> jumps;
    Phase start = Phase::alpha;
    double radius = 0.0;  // 0 = auto

    bool operator==(const LayerConfiguration&) const = default;

    int count() const { return static_cast<int>(jumps.size()); }
    double auto_radius() const;
    double effective_radius() const { return radius > 0.0 ? radius : auto_radius(); }
    void validate() const;  // throws ConfigViolation

    /// Segment midpoints m_1 = a, m_j = (h_{j-1}+h_j)/2, m_{N+1} = b.
    std::vector<double> segment_bounds() const;
    /// The sharp-interface step function v at x.
    double step_value(double x, double alpha, double beta) const;
    /// +1 when the profile ascends through jump j (0-based), -1 otherwise.
    int orientation(int j) const;
};

enum class TailKind {
    exponential,     // well approached like c1 * exp(-c2 |x|)
    finite_support,  // profile meets the well at finite |x| = xbar
    truncated        // algebraic approach; table end value is clamped
};

struct TailModel {
    TailKind kind = TailKind::exponential;
    double rate = 0.0;        // c2 for the exponential kind
    double amplitude = 0.0;   // c1 (may overflow to inf for huge tables)
    double xbar = 0.0;        // finite_support only
    double edge_slope = 0.0;  // |phi'| where the profile meets the well
};

/// Monotone standing-wave connection between the wells for a given epsilon,
/// built by tabulating x(phi) = eps * integral of D/sqrt(2G) from the
/// midpoint and inverting.  phi(0) = (alpha+beta)/2.
class StandingProfile {
public:
    double value(double x) const;
    double derivative(double x) const;      // sqrt(2 G(phi)) / (eps D(phi))
    double x_of(double phi) const;
    /// Distance to the approached well at coordinate x, computed without
    /// cancellation in the tails (x > 0 means the beta side).
    double well_distance(double x) const;

    double epsilon() const { return epsilon_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double midpoint() const { return 0.5 * (alpha_ + beta_); }
    double truncation_eta() const { return eta_; }
    const TailModel& alpha_tail() const { return tail_alpha_; }
    const TailModel& beta_tail() const { return tail_beta_; }
    const std::vector<double>& node_x() const { return x_; }
    const std::vector<double>& node_phi() const { return phi_; }
    const std::vector<double>& node_slope() const { return slope_; }

private:
    friend StandingProfile build_standing_profile(const MaterialModel&, double,
                                                  double);
    double epsilon_ = 0.1;
    double alpha_ = -1.0, beta_ = 1.0;
    double eta_ = 0.0;
    std::vector<double> x_, phi_, slope_;  // ascending in x and phi
    HermiteTable phi_of_x_, x_of_phi_;
    TailModel tail_alpha_, tail_beta_;
};

/// eta = 0 picks the default truncation 1e-6 * (beta - alpha).
StandingProfile build_standing_profile(const MaterialModel& model,
                                       double epsilon, double eta = 0.0);

struct OdeCheck {
    double max_residual = 0.0;   // sup |eps D(phi) phi' - sqrt(2 G(phi))|
    double scale = 0.0;          // sup sqrt(2 G) along the profile
};

/// Finite-difference check of the first-order profile equation on the
/// tabulation nodes (slopes recomputed from the node values, not the stored
/// exact ones).
OdeCheck verify_first_order_ode(const StandingProfile& profile,
                                const MaterialModel& model);

/// Paste N copies of the profile with alternating orientation at the
/// configured jumps, sampled on the grid.
PhaseField build_layer_datum(const StandingProfile& profile,
                             const LayerConfiguration& layers,
                             const Grid& grid);

} // namespace metastab
