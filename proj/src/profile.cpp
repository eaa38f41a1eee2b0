#include "metastab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metastab {

Grid grid_for(double a, double b, double epsilon, int cells_per_eps) {
    if (!(b > a) || !(epsilon > 0.0) || cells_per_eps < 8)
        throw ConfigViolation("grid_for: need b > a, epsilon > 0, >= 8 cells per eps");
    Grid g;
    g.a = a;
    g.b = b;
    g.cells = std::max(2, static_cast<int>(std::ceil((b - a) * cells_per_eps / epsilon)));
    return g;
}

double PhaseField::min() const {
    return *std::min_element(values.begin(), values.end());
}

double PhaseField::max() const {
    return *std::max_element(values.begin(), values.end());
}

// --- layer configuration -------------------------------------------------------

double LayerConfiguration::auto_radius() const {
    if (jumps.empty()) return 0.0;
    double r = std::min(jumps.front() - a, b - jumps.back());
    for (std::size_t i = 0; i + 1 < jumps.size(); ++i)
        r = std::min(r, 0.5 * (jumps[i + 1] - jumps[i]));
    return r;
}

void LayerConfiguration::validate() const {
    if (jumps.empty()) throw ConfigViolation("layer configuration has no jumps");
    if (!(a < b)) throw ConfigViolation("layer configuration needs a < b");
    const double w = b - a;
    const double tol = 1e-12 * w;
    for (std::size_t i = 0; i + 1 < jumps.size(); ++i)
        if (!(jumps[i] < jumps[i + 1]))
            throw ConfigViolation("jumps must be strictly increasing");
    if (!(jumps.front() > a) || !(jumps.back() < b))
        throw ConfigViolation("jumps must lie strictly inside (a,b)");
    const double r = effective_radius();
    if (!(r > 0.0)) throw ConfigViolation("separation radius must be positive");
    if (jumps.front() - r < a - tol || jumps.back() + r > b + tol)
        throw ConfigViolation("separation radius reaches past the domain ends");
    for (std::size_t i = 0; i + 1 < jumps.size(); ++i)
        if (jumps[i] + r > jumps[i + 1] - r + tol)
            throw ConfigViolation("separation radius exceeds half of a layer gap");
}

std::vector<double> LayerConfiguration::segment_bounds() const {
    std::vector<double> m;
    m.reserve(jumps.size() + 1);
    m.push_back(a);
    for (std::size_t i = 0; i + 1 < jumps.size(); ++i)
        m.push_back(0.5 * (jumps[i] + jumps[i + 1]));
    m.push_back(b);
    return m;
}

double LayerConfiguration::step_value(double x, double alpha, double beta) const {
    std::size_t n = 0;
    while (n < jumps.size() && jumps[n] <= x) ++n;
    const bool at_start_phase = (n % 2 == 0);
    const bool start_is_alpha = (start == Phase::alpha);
    return (at_start_phase == start_is_alpha) ? alpha : beta;
}

int LayerConfiguration::orientation(int j) const {
    const int sign = (j % 2 == 0) ? 1 : -1;
    return (start == Phase::alpha) ? sign : -sign;
}

// --- standing profile ------------------------------------------------------------

namespace {

// distance ladder from a well: geometric growth, capped increment so the
// mid-range stays densely sampled
std::vector<double> distance_ladder(double eta, double side_len, double width) {
    const double cap = width / 256.0;
    std::vector<double> d;
    double v = eta;
    while (v < side_len - 0.25 * cap) {
        d.push_back(v);
        v = std::min(v * 1.15, v + cap);
    }
    return d;
}

double segment_integral(const std::function<double(double)>& f, double a, double b) {
    const double rough = (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    const double tol = std::max(1e-13 * std::abs(rough), 1e-16);
    QuadResult q = adaptive_simpson(f, a, b, tol);
    if (!q.converged)
        throw QuadratureFailure("profile tabulation segment did not converge");
    return q.value;
}

} // namespace

StandingProfile build_standing_profile(const MaterialModel& model,
                                       double epsilon, double eta) {
    if (!(epsilon > 0.0)) throw ConfigViolation("epsilon must be positive");
    const double alpha = model.alpha(), beta = model.beta();
    const double w = beta - alpha;
    if (eta <= 0.0) eta = 1e-6 * w;
    if (eta >= 0.1 * w) throw ConfigViolation("truncation eta too large");
    const double mid = 0.5 * (alpha + beta);
    const auto& G = model.potential();

    auto integrand = [&](double s) {
        const double g = G.value(s);
        if (!(g > 0.0))
            throw NonMonotone("effective potential not positive along the connection");
        return model.diffusivity(s) / std::sqrt(2.0 * g);
    };

    // phi nodes: dense near both wells, capped spacing in the middle.  A node
    // is pinned at the potential's near-well switch radius so that no
    // quadrature segment straddles the change of evaluation rule there.
    std::vector<double> phis;
    {
        auto la = distance_ladder(eta, mid - alpha, w);
        auto lb = distance_ladder(eta, beta - mid, w);
        auto pin = [&](std::vector<double>& lad, double side_len, double sw) {
            if (sw <= eta || sw >= side_len - 0.5 * w / 256.0) return;
            auto it = std::lower_bound(lad.begin(), lad.end(), sw);
            if (it != lad.end() && std::abs(*it - sw) < 0.05 * sw) {
                *it = sw;
                return;
            }
            if (it != lad.begin() && std::abs(*(it - 1) - sw) < 0.05 * sw) {
                *(it - 1) = sw;
                return;
            }
            lad.insert(it, sw);
        };
        pin(la, mid - alpha, G.near_well_radius(true));
        pin(lb, beta - mid, G.near_well_radius(false));
        for (auto it = la.begin(); it != la.end(); ++it) phis.push_back(alpha + *it);
        phis.push_back(mid);
        for (auto it = lb.rbegin(); it != lb.rend(); ++it) phis.push_back(beta - *it);
    }
    const std::size_t i_mid =
        static_cast<std::size_t>(std::lower_bound(phis.begin(), phis.end(), mid) -
                                 phis.begin());

    std::vector<double> T(phis.size(), 0.0);
    for (std::size_t j = i_mid; j + 1 < phis.size(); ++j)
        T[j + 1] = T[j] + segment_integral(integrand, phis[j], phis[j + 1]);
    for (std::size_t j = i_mid; j > 0; --j)
        T[j - 1] = T[j] - segment_integral(integrand, phis[j - 1], phis[j]);

    StandingProfile p;
    p.epsilon_ = epsilon;
    p.alpha_ = alpha;
    p.beta_ = beta;
    p.eta_ = eta;
    p.phi_ = phis;
    p.x_.resize(T.size());
    for (std::size_t j = 0; j < T.size(); ++j) p.x_[j] = epsilon * T[j];
    for (std::size_t j = 0; j + 1 < p.x_.size(); ++j)
        if (!(p.x_[j] < p.x_[j + 1]))
            throw NonMonotone("profile tabulation is not strictly increasing");

    auto ode_slope = [&](double phi) {
        return std::sqrt(2.0 * std::max(G.value(phi), 0.0)) /
               (epsilon * model.diffusivity(phi));
    };
    p.slope_.resize(p.phi_.size());
    for (std::size_t j = 0; j < p.phi_.size(); ++j) p.slope_[j] = ode_slope(p.phi_[j]);

    // Tail models.  A side is exponential when both f' and D are healthy at
    // its well; a vanishing diffusivity can give a sharp (finite support)
    // profile; a flat reaction gives an algebraic approach we simply clamp.
    auto make_tail = [&](bool at_alpha) {
        TailModel tail;
        const auto& flags = model.degeneracy();
        const bool rd = at_alpha ? flags.reaction_at_alpha : flags.reaction_at_beta;
        const bool dd = at_alpha ? flags.diffusivity_at_alpha : flags.diffusivity_at_beta;
        const double well = at_alpha ? alpha : beta;
        const double x_end = at_alpha ? p.x_.front() : p.x_.back();
        if (!rd && !dd) {
            tail.kind = TailKind::exponential;
            const double g2 = at_alpha ? G.second_at_alpha() : G.second_at_beta();
            tail.rate = std::sqrt(g2) / (model.diffusivity(well) * epsilon);
            const double ex = tail.rate * std::abs(x_end);
            tail.amplitude = (ex > 700.0) ? std::numeric_limits<double>::infinity()
                                          : eta * std::exp(ex);
            return tail;
        }
        if (dd) {
            // probe convergence of the remaining integral by halving
            double extra = 0.0, prev = -1.0, d = eta;
            bool converged = false;
            double seg = 0.0;
            for (int k = 0; k < 60; ++k) {
                const double lo = well + (at_alpha ? d / 2 : -d);
                const double hi = well + (at_alpha ? d : -d / 2);
                seg = std::abs(segment_integral(integrand, lo, hi));
                extra += seg;
                if (prev >= 0.0 && seg >= prev) break;  // not shrinking: diverges
                if (seg < 1e-14 * (std::abs(T.back() - T.front()) + extra + 1.0)) {
                    converged = true;
                    break;
                }
                prev = seg;
                d /= 2;
            }
            if (converged) {
                tail.kind = TailKind::finite_support;
                const double probe = well + (at_alpha ? d / 4 : -d / 4);
                tail.edge_slope = ode_slope(probe);
                tail.xbar = std::abs(x_end) + epsilon * extra;
                return tail;
            }
        }
        tail.kind = TailKind::truncated;
        return tail;
    };
    p.tail_alpha_ = make_tail(true);
    p.tail_beta_ = make_tail(false);

    if (p.tail_alpha_.kind == TailKind::finite_support) {
        p.x_.insert(p.x_.begin(), -p.tail_alpha_.xbar);
        p.phi_.insert(p.phi_.begin(), alpha);
        p.slope_.insert(p.slope_.begin(), p.tail_alpha_.edge_slope);
    }
    if (p.tail_beta_.kind == TailKind::finite_support) {
        p.x_.push_back(p.tail_beta_.xbar);
        p.phi_.push_back(beta);
        p.slope_.push_back(p.tail_beta_.edge_slope);
    }

    p.phi_of_x_ = HermiteTable(p.x_, p.phi_, p.slope_);
    p.phi_of_x_.limit_slopes_monotone();
    std::vector<double> inv_slope(p.slope_.size());
    for (std::size_t j = 0; j < p.slope_.size(); ++j)
        inv_slope[j] = 1.0 / p.slope_[j];
    p.x_of_phi_ = HermiteTable(p.phi_, p.x_, inv_slope);
    p.x_of_phi_.limit_slopes_monotone();
    return p;
}

double StandingProfile::value(double x) const {
    if (x < x_.front()) {
        const auto& t = tail_alpha_;
        if (t.kind == TailKind::exponential) {
            const double d0 = phi_.front() - alpha_;
            return alpha_ + d0 * std::exp(t.rate * (x - x_.front()));
        }
        return phi_.front();  // alpha for finite support, alpha + eta truncated
    }
    if (x > x_.back()) {
        const auto& t = tail_beta_;
        if (t.kind == TailKind::exponential) {
            const double d0 = beta_ - phi_.back();
            return beta_ - d0 * std::exp(-t.rate * (x - x_.back()));
        }
        return phi_.back();
    }
    return phi_of_x_(x);
}

double StandingProfile::well_distance(double x) const {
    if (x >= 0.0) {
        if (x > x_.back()) {
            const auto& t = tail_beta_;
            if (t.kind == TailKind::exponential)
                return (beta_ - phi_.back()) * std::exp(-t.rate * (x - x_.back()));
            if (t.kind == TailKind::finite_support) return 0.0;
            return beta_ - phi_.back();
        }
        return beta_ - value(x);
    }
    if (x < x_.front()) {
        const auto& t = tail_alpha_;
        if (t.kind == TailKind::exponential)
            return (phi_.front() - alpha_) * std::exp(t.rate * (x - x_.front()));
        if (t.kind == TailKind::finite_support) return 0.0;
        return phi_.front() - alpha_;
    }
    return value(x) - alpha_;
}

double StandingProfile::derivative(double x) const {
    if (x < x_.front() || x > x_.back()) {
        const auto& t = (x < 0.0) ? tail_alpha_ : tail_beta_;
        if (t.kind == TailKind::exponential) return t.rate * well_distance(x);
        return 0.0;
    }
    if (x == x_.front()) return slope_.front();
    if (x == x_.back()) return slope_.back();
    return phi_of_x_.derivative(x);
}

double StandingProfile::x_of(double phi) const {
    if (phi <= phi_.front()) {
        const auto& t = tail_alpha_;
        if (t.kind == TailKind::exponential && phi > alpha_)
            return x_.front() + std::log((phi - alpha_) / (phi_.front() - alpha_)) / t.rate;
        return x_.front();
    }
    if (phi >= phi_.back()) {
        const auto& t = tail_beta_;
        if (t.kind == TailKind::exponential && phi < beta_)
            return x_.back() - std::log((beta_ - phi) / (beta_ - phi_.back())) / t.rate;
        return x_.back();
    }
    return x_of_phi_(phi);
}

OdeCheck verify_first_order_ode(const StandingProfile& profile,
                                const MaterialModel& model) {
    const auto& x = profile.node_x();
    const auto& phi = profile.node_phi();
    const auto& G = model.potential();
    OdeCheck check;
    for (std::size_t k = 1; k + 1 < x.size(); ++k) {
        const double h0 = x[k] - x[k - 1];
        const double h1 = x[k + 1] - x[k];
        const double dphi = (-h1 / (h0 * (h0 + h1))) * phi[k - 1] +
                            ((h1 - h0) / (h0 * h1)) * phi[k] +
                            (h0 / (h1 * (h0 + h1))) * phi[k + 1];
        const double lhs = profile.epsilon() * model.diffusivity(phi[k]) * dphi;
        const double rhs = std::sqrt(2.0 * std::max(G.value(phi[k]), 0.0));
        check.max_residual = std::max(check.max_residual, std::abs(lhs - rhs));
        check.scale = std::max(check.scale, rhs);
    }
    return check;
}

PhaseField build_layer_datum(const StandingProfile& profile,
                             const LayerConfiguration& layers,
                             const Grid& grid) {
    layers.validate();
    if (!(layers.a == grid.a && layers.b == grid.b))
        throw ConfigViolation("layer configuration and grid cover different domains");
    const auto bounds = layers.segment_bounds();
    PhaseField field;
    field.grid = grid;
    field.values.resize(grid.nodes());
    int seg = 0;
    const int n = layers.count();
    for (int i = 0; i < grid.nodes(); ++i) {
        const double x = grid.x(i);
        while (seg + 1 < n && x >= bounds[seg + 1]) ++seg;
        const double arg = layers.orientation(seg) * (x - layers.jumps[seg]);
        field.values[i] = profile.value(arg);
    }
    return field;
}

} // namespace metastab
