#include "metastab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metastab/numerics.hpp"

namespace metastab {

namespace {

// integer power, 0^0 == 1 (the usual convention for product-rule sums)
double ipow(double x, int n) {
    if (n <= 0) return 1.0;
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

constexpr int kTableHalf = 1024;   // nodes on each side of [alpha,beta] extension
constexpr int kTablePerWidth = 2048;

} // namespace

// --- diffusivity families ---------------------------------------------------

double DiffusivityFn::value(double u) const {
    switch (family) {
        case DiffusivityFamily::constant: return d0;
        case DiffusivityFamily::mullins: return d0 / (1.0 + u * u);
        case DiffusivityFamily::exponential: return d0 * std::exp(c0 * (u - mid));
        case DiffusivityFamily::porous: return d0 * u * u;
    }
    return d0;
}

double DiffusivityFn::prime(double u) const {
    switch (family) {
        case DiffusivityFamily::constant: return 0.0;
        case DiffusivityFamily::mullins: {
            const double q = 1.0 + u * u;
            return -2.0 * d0 * u / (q * q);
        }
        case DiffusivityFamily::exponential: return c0 * value(u);
        case DiffusivityFamily::porous: return 2.0 * d0 * u;
    }
    return 0.0;
}

double DiffusivityFn::second(double u) const {
    switch (family) {
        case DiffusivityFamily::constant: return 0.0;
        case DiffusivityFamily::mullins: {
            const double q = 1.0 + u * u;
            return d0 * (6.0 * u * u - 2.0) / (q * q * q);
        }
        case DiffusivityFamily::exponential: return c0 * c0 * value(u);
        case DiffusivityFamily::porous: return 2.0 * d0;
    }
    return 0.0;
}

// --- reaction ----------------------------------------------------------------

double ReactionFn::value(double u) const {
    double r = 1.0;
    for (std::size_t k = 0; k < roots.size(); ++k) r *= ipow(u - roots[k], powers[k]);
    return r;
}

double ReactionFn::prime(double u) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < roots.size(); ++k) {
        double term = powers[k] * ipow(u - roots[k], powers[k] - 1);
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (j != k) term *= ipow(u - roots[j], powers[j]);
        sum += term;
    }
    return sum;
}

double ReactionFn::second(double u) const {
    double sum = 0.0;
    const std::size_t n = roots.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (powers[k] >= 2) {
            double term = static_cast<double>(powers[k]) * (powers[k] - 1) *
                          ipow(u - roots[k], powers[k] - 2);
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) term *= ipow(u - roots[j], powers[j]);
            sum += term;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            double term = powers[k] * ipow(u - roots[k], powers[k] - 1) *
                          powers[j] * ipow(u - roots[j], powers[j] - 1);
            for (std::size_t l = 0; l < n; ++l)
                if (l != k && l != j) term *= ipow(u - roots[l], powers[l]);
            sum += term;
        }
    }
    return sum;
}

// --- effective potential ------------------------------------------------------

EffectivePotential::EffectivePotential(DiffusivityFn D, ReactionFn f,
                                       double alpha, double beta,
                                       DegeneracyFlags flags,
                                       double per_interval_tol)
    : D_(D), f_(f), alpha_(alpha), beta_(beta), flags_(flags), tol_(per_interval_tol) {
    const double w = beta - alpha;
    clamp_lo_ = alpha - 0.5 * w;
    clamp_hi_ = beta + 0.5 * w;
    spacing_ = w / kTablePerWidth;
    switch_alpha_ = (flags.diffusivity_at_alpha || flags.reaction_at_alpha)
        ? spacing_ : 0.5 * spacing_;
    switch_beta_ = (flags.diffusivity_at_beta || flags.reaction_at_beta)
        ? spacing_ : 0.5 * spacing_;

    const int n_nodes = 2 * kTableHalf + kTablePerWidth + 1;
    nodes_.resize(n_nodes);
    values_.assign(n_nodes, 0.0);
    for (int i = 0; i < n_nodes; ++i)
        nodes_[i] = alpha + (i - kTableHalf) * spacing_;
    nodes_[kTableHalf] = alpha;                    // keep the anchors exact
    nodes_[kTableHalf + kTablePerWidth] = beta;

    auto fd = [this](double s) { return f_.value(s) * D_.value(s); };

    // Cumulative quadrature outward from the anchor at alpha.  The tolerance
    // tightens relative to each interval's own size so that the tiny values
    // next to a degenerate well keep relative accuracy.
    auto interval = [&](double a, double b) {
        const double rough = (b - a) / 6.0 *
            (fd(a) + 4.0 * fd(0.5 * (a + b)) + fd(b));
        const double tol = std::clamp(1e-13 * std::abs(rough), 1e-18, tol_);
        return adaptive_simpson(fd, a, b, tol).value;
    };
    const int ia = kTableHalf;
    for (int i = ia; i + 1 < n_nodes; ++i)
        values_[i + 1] = values_[i] + interval(nodes_[i], nodes_[i + 1]);
    for (int i = ia; i > 0; --i)
        values_[i - 1] = values_[i] - interval(nodes_[i - 1], nodes_[i]);
    raw_beta_value_ = values_[kTableHalf + kTablePerWidth];

    g2_alpha_ = f_.prime(alpha) * D_.value(alpha) + f_.value(alpha) * D_.prime(alpha);
    g2_beta_ = f_.prime(beta) * D_.value(beta) + f_.value(beta) * D_.prime(beta);
    g3_alpha_ = f_.second(alpha) * D_.value(alpha) + 2.0 * f_.prime(alpha) * D_.prime(alpha) +
                f_.value(alpha) * D_.second(alpha);
    g3_beta_ = f_.second(beta) * D_.value(beta) + 2.0 * f_.prime(beta) * D_.prime(beta) +
               f_.value(beta) * D_.second(beta);

    if (flags.diffusivity_at_alpha || flags.reaction_at_alpha) {
        near_alpha_in_ = build_near_table(true, 1.0);
        near_alpha_out_ = build_near_table(true, -1.0);
    }
    if (flags.diffusivity_at_beta || flags.reaction_at_beta) {
        near_beta_in_ = build_near_table(false, -1.0);
        near_beta_out_ = build_near_table(false, 1.0);
    }
}

// Nodes of the log-log table carry cumulative quadratures of f*D moving away
// from the well; the slopes d(log G)/d(log d) = d G'/G are analytic.  Below
// the innermost node G follows its leading power, so near_well extrapolates
// with the front slope.  sign = +1 tabulates the side above the well.
HermiteTable EffectivePotential::build_near_table(bool at_alpha, double sign) const {
    const double well = at_alpha ? alpha_ : beta_;
    const double top = at_alpha ? switch_alpha_ : switch_beta_;
    const double bottom = 1e-10 * (beta_ - alpha_);
    auto fd = [this](double x) { return f_.value(x) * D_.value(x); };
    auto grow = [&](double a, double b) {
        const double rough = (b - a) / 6.0 *
            (fd(a) + 4.0 * fd(0.5 * (a + b)) + fd(b));
        double tol = 1e-14 * std::abs(rough);
        if (!(tol > 0.0)) tol = 1e-300;
        return adaptive_simpson(fd, a, b, tol).value;
    };
    const int per_decade = 16;
    const int n = 1 + std::max(1, static_cast<int>(std::ceil(
                          per_decade * std::log10(top / bottom))));
    std::vector<double> s(n), y(n), m(n);
    const double s_lo = std::log(bottom), s_hi = std::log(top);
    double g = grow(well, well + sign * bottom);
    for (int k = 0; k < n; ++k) {
        s[k] = s_lo + (s_hi - s_lo) * k / (n - 1);
        const double d = std::exp(s[k]);
        if (k > 0)
            g += grow(well + sign * std::exp(s[k - 1]), well + sign * d);
        if (!(g > 0.0))
            throw SignViolation("potential is not positive beside a well");
        y[k] = std::log(g);
        m[k] = d * fd(well + sign * d) * sign / g;
    }
    return HermiteTable(std::move(s), std::move(y), std::move(m));
}

double EffectivePotential::near_well(double u, bool at_alpha) const {
    const double w = at_alpha ? alpha_ : beta_;
    const double s = u - w;
    const bool degenerate = at_alpha
        ? (flags_.diffusivity_at_alpha || flags_.reaction_at_alpha)
        : (flags_.diffusivity_at_beta || flags_.reaction_at_beta);
    if (!degenerate) {
        const double g2 = at_alpha ? g2_alpha_ : g2_beta_;
        const double g3 = at_alpha ? g3_alpha_ : g3_beta_;
        return 0.5 * g2 * s * s + (1.0 / 6.0) * g3 * s * s * s;
    }
    if (s == 0.0) return 0.0;
    const bool inward = at_alpha ? (s > 0.0) : (s < 0.0);
    const HermiteTable& tab = at_alpha ? (inward ? near_alpha_in_ : near_alpha_out_)
                                       : (inward ? near_beta_in_ : near_beta_out_);
    const double ls = std::log(std::abs(s));
    if (ls <= tab.front_x())
        return std::exp(tab.front_y() +
                        tab.slopes().front() * (ls - tab.front_x()));
    return std::exp(tab(ls));
}

double EffectivePotential::value(double u) const {
    u = std::clamp(u, clamp_lo_, clamp_hi_);
    if (std::abs(u - alpha_) < switch_alpha_) return near_well(u, true);
    if (std::abs(u - beta_) < switch_beta_) return near_well(u, false);

    // cubic Hermite on the bracketing table interval, slopes are exact f*D
    const int n = static_cast<int>(nodes_.size());
    int k = static_cast<int>(std::floor((u - nodes_.front()) / spacing_));
    k = std::clamp(k, 0, n - 2);
    if (u < nodes_[k]) --k;
    if (u > nodes_[k + 1]) ++k;
    k = std::clamp(k, 0, n - 2);
    const double h = nodes_[k + 1] - nodes_[k];
    const double t = (u - nodes_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double m0 = derivative(nodes_[k]);
    const double m1 = derivative(nodes_[k + 1]);
    return (2 * t3 - 3 * t2 + 1) * values_[k] + (t3 - 2 * t2 + t) * h * m0 +
           (-2 * t3 + 3 * t2) * values_[k + 1] + (t3 - t2) * h * m1;
}

double EffectivePotential::derivative(double u) const {
    u = std::clamp(u, clamp_lo_, clamp_hi_);
    return f_.value(u) * D_.value(u);
}

// --- model --------------------------------------------------------------------

namespace {

DiffusivityFn make_diffusivity(const std::string& name, const ModelSpec& spec) {
    DiffusivityFn D;
    D.d0 = spec.d0;
    D.c0 = spec.c0;
    D.mid = 0.5 * (spec.alpha + spec.beta);
    if (name == "constant") D.family = DiffusivityFamily::constant;
    else if (name == "mullins") D.family = DiffusivityFamily::mullins;
    else if (name == "exponential") D.family = DiffusivityFamily::exponential;
    else if (name == "porous") D.family = DiffusivityFamily::porous;
    else throw ConfigViolation("unknown diffusivity family: " + name);
    return D;
}

double default_u_star(const ModelSpec& spec) {
    if (spec.family == "exponential") {
        // closed-form balance point for D = e^u on [-1, 1]
        if (spec.c0 == 1.0 && spec.alpha == -1.0 && spec.beta == 1.0)
            return 0.5 * (std::exp(2.0) - 7.0);
        throw ConfigViolation(
            "exponential family needs an explicit u_star away from the "
            "reference setup (c0=1 on [-1,1])");
    }
    if (spec.family == "porous") {
        // closed-form balance point for D = u^2 on [0, 1]
        if (spec.alpha == 0.0 && spec.beta == 1.0) return 2.0 / 3.0;
        throw ConfigViolation(
            "porous family needs an explicit u_star away from [0,1]");
    }
    return 0.5 * (spec.alpha + spec.beta);
}

ReactionFn make_reaction(const ModelSpec& spec) {
    ReactionFn f;
    if (spec.family == "custom-polynomial-reaction") {
        if (spec.roots.empty() || spec.roots.size() != spec.powers.size())
            throw ConfigViolation("custom reaction needs matching roots/powers");
        for (int p : spec.powers)
            if (p < 1) throw ConfigViolation("reaction powers must be >= 1");
        f.roots = spec.roots;
        f.powers = spec.powers;
        return f;
    }
    const double us = spec.u_star ? *spec.u_star : default_u_star(spec);
    if (!(spec.alpha < us && us < spec.beta))
        throw ConfigViolation("u_star must lie strictly between the wells");
    f.roots = {spec.alpha, us, spec.beta};
    f.powers = {1, 1, 1};
    return f;
}

} // namespace

MaterialModel::MaterialModel(const ModelSpec& spec) : spec_(spec) {
    if (!(spec.alpha < spec.beta))
        throw ConfigViolation("wells must satisfy alpha < beta");
    if (!(spec.d0 > 0.0))
        throw ConfigViolation("d0 must be positive");

    const std::string dname = spec.family == "custom-polynomial-reaction"
        ? spec.custom_diffusivity
        : (spec.family == "constant" ? "constant" : spec.family);
    if (spec.family != "constant" && spec.family != "mullins" &&
        spec.family != "exponential" && spec.family != "porous" &&
        spec.family != "custom-polynomial-reaction")
        throw ConfigViolation("unknown model family: " + spec.family);
    D_ = make_diffusivity(dname, spec);
    f_ = make_reaction(spec);
    if (spec.family != "custom-polynomial-reaction")
        spec_.u_star = f_.roots[1];  // record the resolved interior zero

    validate_wells();

    // scan [alpha,beta] for min D and max |f'|
    const int samples = 4096;
    double dmin = std::numeric_limits<double>::infinity();
    double fpmax = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double u = spec.alpha + (spec.beta - spec.alpha) * i / samples;
        const double d = D_.value(u);
        if (d < 0.0) throw SignViolation("diffusivity negative inside [alpha,beta]");
        dmin = std::min(dmin, d);
        fpmax = std::max(fpmax, std::abs(f_.prime(u)));
    }
    d_min_ = dmin;
    max_abs_fp_ = fpmax;

    validate_balance();

    potential_ = EffectivePotential(D_, f_, spec.alpha, spec.beta,
                                    spec.degeneracy, 1e-10);
    validate_potential_sign();

    // gamma0 = integral of sqrt(2 G) D; two passes to hit relative 1e-8
    auto integrand = [this](double s) {
        return std::sqrt(2.0 * std::max(potential_.value(s), 0.0)) * D_.value(s);
    };
    QuadResult rough = adaptive_simpson(integrand, spec.alpha, spec.beta, 1e-6);
    const double scale = std::max(std::abs(rough.value), 1e-12);
    gamma0_ = integrate_or_throw(integrand, spec.alpha, spec.beta, 1e-9 * scale,
                                 "gamma0");

    if (!spec.degeneracy.any()) {
        const double la = f_.prime(spec.alpha) / D_.value(spec.alpha);
        const double lb = f_.prime(spec.beta) / D_.value(spec.beta);
        lambda_ = std::min(la, lb);
    }
}

void MaterialModel::validate_wells() const {
    const double w = spec_.beta - spec_.alpha;
    // reaction magnitude scale for the zero tests
    double fscale = 0.0;
    for (int i = 0; i <= 64; ++i)
        fscale = std::max(fscale, std::abs(f_.value(spec_.alpha + w * i / 64.0)));
    const double ztol = 1e-10 * std::max(fscale, 1e-30);

    struct WellCheck {
        double u;
        bool reaction_flag, diffusivity_flag;
        const char* name;
    };
    const WellCheck wells[2] = {
        {spec_.alpha, spec_.degeneracy.reaction_at_alpha,
         spec_.degeneracy.diffusivity_at_alpha, "alpha"},
        {spec_.beta, spec_.degeneracy.reaction_at_beta,
         spec_.degeneracy.diffusivity_at_beta, "beta"},
    };
    for (const auto& wc : wells) {
        if (std::abs(f_.value(wc.u)) > ztol)
            throw NotBistable(std::string("f does not vanish at ") + wc.name);
        const double fp = f_.prime(wc.u);
        const double fptol = 1e-10 * std::max(max_abs_reaction_prime(), 1.0);
        const bool flat = std::abs(fp) <= std::max(fptol, 1e-12);
        if (!flat && fp < 0.0)
            throw NotBistable(std::string("f has negative slope at ") + wc.name);
        if (flat && !wc.reaction_flag)
            throw NotBistable(std::string("f' vanishes at ") + wc.name +
                              "; declare reaction degeneracy");
        if (!flat && wc.reaction_flag)
            throw NotBistable(std::string("reaction degeneracy declared at ") +
                              wc.name + " but f' is nonzero there");
        const double d = D_.value(wc.u);
        const bool dzero = d <= 1e-14 * spec_.d0;
        if (dzero && !wc.diffusivity_flag)
            throw SignViolation(std::string("D vanishes at ") + wc.name +
                                "; declare diffusivity degeneracy");
        if (!dzero && wc.diffusivity_flag)
            throw SignViolation(std::string("diffusivity degeneracy declared at ") +
                                wc.name + " but D is nonzero there");
    }
}

void MaterialModel::validate_balance() const {
    // split at interior reaction zeros so each piece is sign-definite
    std::vector<double> cuts{spec_.alpha};
    for (double r : f_.roots)
        if (r > spec_.alpha && r < spec_.beta) cuts.push_back(r);
    cuts.push_back(spec_.beta);
    std::sort(cuts.begin(), cuts.end());

    auto fd = [this](double s) { return f_.value(s) * D_.value(s); };
    double total = 0.0, absnorm = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        QuadResult q = adaptive_simpson(fd, cuts[i], cuts[i + 1], 1e-12);
        total += q.value;
        absnorm += std::abs(q.value);
    }
    if (absnorm <= 0.0)
        throw NotBistable("reaction vanishes identically between the wells");
    if (std::abs(total) > 1e-8 * absnorm)
        throw BalanceViolation("integral of f*D over [alpha,beta] is not zero "
                               "(relative residual " +
                               std::to_string(std::abs(total) / absnorm) + ")");
}

void MaterialModel::validate_potential_sign() const {
    const auto& nodes = potential_.nodes();
    const auto& vals = potential_.values();
    const double w = spec_.beta - spec_.alpha;
    double gmax = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] >= spec_.alpha && nodes[i] <= spec_.beta)
            gmax = std::max(gmax, vals[i]);
    if (gmax <= 0.0) throw SignViolation("effective potential vanishes on [alpha,beta]");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double u = nodes[i];
        if (u <= spec_.alpha || u >= spec_.beta) continue;
        const double edge = std::min(u - spec_.alpha, spec_.beta - u);
        if (vals[i] < -1e-12 * gmax)
            throw SignViolation("effective potential negative inside (alpha,beta)");
        if (edge > 1e-3 * w && vals[i] <= 0.0)
            throw SignViolation("effective potential not positive away from wells");
    }
    if (std::abs(potential_.value_at_beta_raw()) > 1e-8 * gmax)
        throw BalanceViolation("cumulative potential does not return to zero at beta");
}

MaterialModel build_model(const ModelSpec& spec) { return MaterialModel(spec); }

const EffectivePotential& effective_potential(const MaterialModel& m) {
    return m.potential();
}

double compute_lambda(const MaterialModel& m) {
    if (!m.lambda())
        throw DegenerateModel("lambda undefined: degenerate well present");
    return *m.lambda();
}

double compute_gamma0(const MaterialModel& m) { return m.gamma0(); }

// --- built-ins -----------------------------------------------------------------

ModelSpec classical_spec() {
    ModelSpec s;
    s.family = "constant";
    return s;
}

ModelSpec mullins_spec() {
    ModelSpec s;
    s.family = "mullins";
    return s;
}

ModelSpec exponential_spec() {
    ModelSpec s;
    s.family = "exponential";
    s.c0 = 1.0;
    return s;
}

ModelSpec porous_spec() {
    ModelSpec s;
    s.family = "porous";
    s.alpha = 0.0;
    s.beta = 1.0;
    s.degeneracy.diffusivity_at_alpha = true;
    return s;
}

ModelSpec degenerate_reaction_spec(int well_power) {
    ModelSpec s;
    s.family = "custom-polynomial-reaction";
    s.custom_diffusivity = "mullins";
    s.roots = {-1.0, 0.0, 1.0};
    s.powers = {well_power, 1, well_power};
    s.degeneracy.reaction_at_alpha = true;
    s.degeneracy.reaction_at_beta = true;
    return s;
}

} // namespace metastab
