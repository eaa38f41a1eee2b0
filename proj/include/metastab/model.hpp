#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metastab/errors.hpp"
#include "metastab/numerics.hpp"

namespace metastab {

// A material model is the pair (D, f): phase-dependent diffusivity D(u) > 0
// (possibly vanishing at a declared well) and a bistable reaction f(u) with
// zeros at the wells alpha < beta and positive slope there.  The effective
// potential G(u) = integral of f*D from alpha must vanish at both wells and
// stay positive in between; that balance is what the validator enforces.

enum class DiffusivityFamily { constant, mullins, exponential, porous };

struct DiffusivityFn {
    DiffusivityFamily family = DiffusivityFamily::constant;
    double d0 = 1.0;
    double c0 = 1.0;   // exponential rate
    double mid = 0.0;  // exponential reference point

    double value(double u) const;
    double prime(double u) const;
    double second(double u) const;
};

/// Reaction of product form  f(u) = prod_k (u - root_k)^power_k  with odd
/// positive powers.  Covers the cubic built-ins and the degenerate variants.
struct ReactionFn {
    std::vector<double> roots;
    std::vector<int> powers;

    double value(double u) const;
    double prime(double u) const;
    double second(double u) const;
};

struct DegeneracyFlags {
    bool diffusivity_at_alpha = false;
    bool diffusivity_at_beta = false;
    bool reaction_at_alpha = false;
    bool reaction_at_beta = false;

    bool any() const {
        return diffusivity_at_alpha || diffusivity_at_beta ||
               reaction_at_alpha || reaction_at_beta;
    }
    bool operator==(const DegeneracyFlags&) const = default;
};

struct ModelSpec {
    // constant | mullins | exponential | porous | custom-polynomial-reaction
    std::string family = "constant";
    double d0 = 1.0;
    double c0 = 1.0;                 // exponential family only
    std::optional<double> u_star;    // interior reaction zero; family default if unset
    double alpha = -1.0;
    double beta = 1.0;
    DegeneracyFlags degeneracy;

    // custom-polynomial-reaction only:
    std::string custom_diffusivity = "constant";
    std::vector<double> roots;
    std::vector<int> powers;

    bool operator==(const ModelSpec&) const = default;
};

/// Tabulated cumulative potential G with exact nodal derivatives f*D and a
/// near-well fallback (Taylor series at non-degenerate wells, direct
/// quadrature at degenerate ones) so that sqrt(G) stays accurate where the
/// table cannot resolve it.
class EffectivePotential {
public:
    EffectivePotential() = default;
    EffectivePotential(DiffusivityFn D, ReactionFn f, double alpha, double beta,
                       DegeneracyFlags flags, double per_interval_tol);

    double value(double u) const;
    double derivative(double u) const;  // f(u) * D(u), exact

    double second_at_alpha() const { return g2_alpha_; }
    double second_at_beta() const { return g2_beta_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double quadrature_tolerance() const { return tol_; }
    double table_spacing() const { return spacing_; }
    /// Distance from the well inside which value() switches from the table to
    /// the near-well rule (Taylor / direct quadrature).  A full table
    /// interval at degenerate wells, where the cubic cannot resolve G.
    double near_well_radius(bool at_alpha) const {
        return at_alpha ? switch_alpha_ : switch_beta_;
    }
    double value_at_beta_raw() const { return raw_beta_value_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }

    // Evaluation clamps to [lo, hi]; fields may transiently poke past the
    // wells by rounding, never further than this under a maximum principle.
    double clamp_lo() const { return clamp_lo_; }
    double clamp_hi() const { return clamp_hi_; }

private:
    DiffusivityFn D_;
    ReactionFn f_;
    double alpha_ = -1.0, beta_ = 1.0;
    double clamp_lo_ = 0.0, clamp_hi_ = 0.0;
    DegeneracyFlags flags_;
    double tol_ = 1e-10;
    double spacing_ = 0.0;
    double switch_alpha_ = 0.0, switch_beta_ = 0.0;
    double g2_alpha_ = 0.0, g2_beta_ = 0.0;
    double g3_alpha_ = 0.0, g3_beta_ = 0.0;
    double raw_beta_value_ = 0.0;
    std::vector<double> nodes_, values_;
    // log G against log distance beside a degenerate well, one table per
    // side, so evaluations there are O(1) and smooth instead of a fresh
    // quadrature per call.
    HermiteTable near_alpha_in_, near_alpha_out_, near_beta_in_, near_beta_out_;

    HermiteTable build_near_table(bool at_alpha, double sign) const;
    double near_well(double u, bool at_alpha) const;
};

class MaterialModel {
public:
    explicit MaterialModel(const ModelSpec& spec);

    double diffusivity(double u) const { return D_.value(u); }
    double diffusivity_prime(double u) const { return D_.prime(u); }
    double reaction(double u) const { return f_.value(u); }
    double reaction_prime(double u) const { return f_.prime(u); }
    double reaction_second(double u) const { return f_.second(u); }

    double alpha() const { return spec_.alpha; }
    double beta() const { return spec_.beta; }
    double midpoint() const { return 0.5 * (spec_.alpha + spec_.beta); }
    double width() const { return spec_.beta - spec_.alpha; }
    double d_min() const { return d_min_; }
    double max_abs_reaction_prime() const { return max_abs_fp_; }
    const DegeneracyFlags& degeneracy() const { return spec_.degeneracy; }
    bool degenerate() const { return spec_.degeneracy.any(); }
    const ModelSpec& spec() const { return spec_; }
    const DiffusivityFn& diffusivity_fn() const { return D_; }
    const ReactionFn& reaction_fn() const { return f_; }

    const EffectivePotential& potential() const { return potential_; }
    double gamma0() const { return gamma0_; }
    /// min of f'(w)/D(w) over the two wells; unset when degenerate.
    std::optional<double> lambda() const { return lambda_; }

private:
    ModelSpec spec_;
    DiffusivityFn D_;
    ReactionFn f_;
    EffectivePotential potential_;
    double d_min_ = 0.0;
    double max_abs_fp_ = 0.0;
    double gamma0_ = 0.0;
    std::optional<double> lambda_;

    void validate_wells() const;
    void validate_balance() const;
    void validate_potential_sign() const;
};

/// Validates the spec and builds the model with its potential and constants.
/// Throws NotBistable / BalanceViolation / SignViolation / ConfigViolation.
MaterialModel build_model(const ModelSpec& spec);

const EffectivePotential& effective_potential(const MaterialModel& m);

/// min{f'(alpha)/D(alpha), f'(beta)/D(beta)}; throws DegenerateModel when a
/// well has vanishing slope or diffusivity.
double compute_lambda(const MaterialModel& m);

/// Interface energy integral of sqrt(2 G) * D over [alpha, beta].
double compute_gamma0(const MaterialModel& m);

// Ready-made specs for the built-in laboratory models.
ModelSpec classical_spec();
ModelSpec mullins_spec();
ModelSpec exponential_spec();
ModelSpec porous_spec();
ModelSpec degenerate_reaction_spec(int well_power);  // mullins D, f = u(u^2-1)^p

} // namespace metastab
