#include "metastab/energy.hpp"

#include <algorithm>
#include <cmath>

#include "metastab/errors.hpp"
#include "metastab/numerics.hpp"

namespace metastab {

namespace {

std::vector<double> discrete_gradient(const PhaseField& u) {
    const int n = static_cast<int>(u.values.size());
    const double h = u.grid.h();
    const std::vector<double>& v = u.values;
    std::vector<double> g(n);
    g[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for (int i = 1; i + 1 < n; ++i) g[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    g[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return g;
}

int midlevel_sign_changes(const std::vector<double>& v, double mid) {
    int changes = 0, prev = 0;
    for (double x : v) {
        const int s = x > mid ? 1 : (x < mid ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

} // namespace

EnergyReport energy(const PhaseField& u, const MaterialModel& model,
                    double epsilon) {
    const int n = static_cast<int>(u.values.size());
    if (n != u.grid.nodes() || n < 3)
        throw ConfigViolation("field and grid sizes disagree");
    if (!(epsilon > 0.0)) throw ConfigViolation("epsilon must be positive");

    const double h = u.grid.h();
    const std::vector<double> g = discrete_gradient(u);
    const EffectivePotential& G = model.potential();

    EnergyReport rep;
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        const double dg = model.diffusivity(u.values[i]) * g[i];
        rep.grad_part += w * 0.5 * epsilon * dg * dg;
        rep.pot_part += w * G.value(u.values[i]) / epsilon;
    }
    rep.value = rep.grad_part + rep.pot_part;
    rep.n_layers = midlevel_sign_changes(u.values, model.midpoint());
    rep.gamma0 = model.gamma0();
    rep.gap = rep.n_layers * rep.gamma0 - rep.value;
    return rep;
}

double tail_mass(const MaterialModel& model, bool at_alpha, double delta) {
    if (!(delta > 0.0)) return 0.0;
    const EffectivePotential& G = model.potential();
    const double well = at_alpha ? model.alpha() : model.beta();
    const double dir = at_alpha ? 1.0 : -1.0;  // toward the interior
    const double w = model.width();
    delta = std::min(delta, 0.5 * w);

    if (delta >= 1e-4 * w) {
        auto density = [&](double phi) {
            return std::sqrt(2.0 * std::max(G.value(phi), 0.0)) *
                   model.diffusivity(phi);
        };
        const double a = well, b = well + dir * delta;
        const double rough = (b - a) / 6.0 *
            (density(a) + 4.0 * density(0.5 * (a + b)) + density(b));
        const double tol = std::max(1e-12 * std::abs(rough), 1e-18);
        return std::abs(adaptive_simpson(density, a, b, tol).value);
    }
    // G follows a local power law d^p beside the well, so the mass is
    // sqrt(2 G(delta)) D(well) delta / (p/2 + 1); p = 2 away from degeneracy.
    const double gd = G.value(well + dir * delta);
    const double gh = G.value(well + dir * 0.5 * delta);
    if (!(gd > 0.0) || !(gh > 0.0)) return 0.0;
    const double p = std::log2(gd / gh);
    return std::sqrt(2.0 * gd) * model.diffusivity(well) * delta /
           (0.5 * p + 1.0);
}

DatumEnergy datum_energy(const MaterialModel& model,
                         const StandingProfile& profile,
                         const LayerConfiguration& layers) {
    layers.validate();
    const std::vector<double> bounds = layers.segment_bounds();
    const int N = layers.count();

    DatumEnergy out;
    for (int j = 0; j < N; ++j) {
        const int o = layers.orientation(j);
        const double hj = layers.jumps[j];
        for (int side = 0; side < 2; ++side) {
            const double edge = side == 0 ? bounds[j] : bounds[j + 1];
            const double xi = o * (edge - hj);
            const double delta = profile.well_distance(xi);
            const double mass = tail_mass(model, xi < 0.0, delta);
            out.edge_masses.push_back(mass);
            out.gap += mass;
        }
    }
    out.value = N * model.gamma0() - out.gap;
    return out;
}

double l1_distance_to_step(const PhaseField& u,
                           const LayerConfiguration& layers, double alpha,
                           double beta) {
    layers.validate();
    const int n = static_cast<int>(u.values.size());
    const double h = u.grid.h();

    // |linear(x) - c| integrated exactly over [x0, x1]
    auto piece = [](double d0, double d1, double len) {
        if (d0 * d1 >= 0.0) return 0.5 * std::abs(d0 + d1) * len;
        return 0.5 * len * (d0 * d0 + d1 * d1) / std::abs(d0 - d1);
    };

    double total = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double x0 = u.grid.x(i), x1 = u.grid.x(i + 1);
        const double u0 = u.values[i], u1 = u.values[i + 1];
        // split the cell at any jumps it contains
        std::vector<double> cuts = {x0};
        for (double hj : layers.jumps)
            if (hj > x0 && hj < x1) cuts.push_back(hj);
        cuts.push_back(x1);
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double a = cuts[c], b = cuts[c + 1];
            const double mid = 0.5 * (a + b);
            const double v = layers.step_value(mid, alpha, beta);
            const double ua = u0 + (u1 - u0) * (a - x0) / h;
            const double ub = u0 + (u1 - u0) * (b - x0) / h;
            total += piece(ua - v, ub - v, b - a);
        }
    }
    return total;
}

namespace {

struct BoundSetup {
    double A = 0.0;
    double ceiling = 0.0;
    double n_gamma0 = 0.0;
};

BoundSetup bound_setup(const MaterialModel& model,
                       const LayerConfiguration& layers, double A) {
    layers.validate();
    if (!model.lambda())
        throw DegenerateModel(
            "exponential bounds need nondegenerate wells (lambda undefined)");
    BoundSetup s;
    s.ceiling = layers.effective_radius() * std::sqrt(2.0 * *model.lambda());
    s.A = A == 0.0 ? 0.9 * s.ceiling : A;
    if (!(s.A > 0.0) || !(s.A < s.ceiling))
        throw InvalidA("exponent must lie in (0, r sqrt(2 lambda))");
    s.n_gamma0 = layers.count() * model.gamma0();
    return s;
}

} // namespace

Certification certify_layer_structure(const PhaseField& u,
                                      const MaterialModel& model,
                                      double epsilon,
                                      const LayerConfiguration& layers,
                                      double delta, double A, double C) {
    const BoundSetup s = bound_setup(model, layers, A);
    Certification cert;
    cert.exponent_a = s.A;
    cert.constant_c = C;
    cert.delta = delta > 0.0
        ? delta
        : 2.0 * layers.count() * model.width() * epsilon;
    cert.l1_distance =
        l1_distance_to_step(u, layers, model.alpha(), model.beta());
    cert.energy_value = energy(u, model, epsilon).value;
    cert.n_gamma0 = s.n_gamma0;
    cert.energy_bound = s.n_gamma0 + C * std::exp(-s.A / epsilon);
    cert.l1_ok = cert.l1_distance <= cert.delta;
    cert.energy_ok = cert.energy_value <= cert.energy_bound;
    cert.certified = cert.l1_ok && cert.energy_ok;
    return cert;
}

double lower_bound_margin(const PhaseField& u, const MaterialModel& model,
                          double epsilon, const LayerConfiguration& layers,
                          double A, double C) {
    const BoundSetup s = bound_setup(model, layers, A);
    const double E = energy(u, model, epsilon).value;
    return E - (s.n_gamma0 - C * std::exp(-s.A / epsilon));
}

double lower_bound_margin(const DatumEnergy& exact, const MaterialModel& model,
                          double epsilon, const LayerConfiguration& layers,
                          double A, double C) {
    const BoundSetup s = bound_setup(model, layers, A);
    return exact.value - (s.n_gamma0 - C * std::exp(-s.A / epsilon));
}

double dissipation_residual(const RunRecord& record) {
    if (record.diagnostics.size() < 2)
        throw MissingDiagnostics(
            "dissipation audit needs at least two diagnostics rows");
    const DiagnosticsRow& first = record.diagnostics.front();
    const DiagnosticsRow& last = record.diagnostics.back();
    const double drop = first.energy - last.energy;
    const double produced = last.dissipation - first.dissipation;
    const double scale = std::max(std::abs(first.energy), 1e-300);
    return std::abs(drop - produced) / scale;
}

GapFit fit_energy_gap(const std::vector<double>& epsilons,
                      const std::vector<double>& gaps) {
    if (epsilons.size() != gaps.size())
        throw ConfigViolation("gap fit needs matching sample vectors");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (!(epsilons[i] > 0.0) || !(gaps[i] > 0.0)) continue;
        x.push_back(1.0 / epsilons[i]);
        y.push_back(std::log(gaps[i]));
    }
    if (x.size() < 2)
        throw InsufficientData("gap fit needs two positive samples");
    GapFit fit;
    fit.line = fit_line(x, y);
    fit.a_fit = -fit.line.slope;
    fit.c_fit = std::exp(fit.line.intercept);
    return fit;
}

} // namespace metastab
