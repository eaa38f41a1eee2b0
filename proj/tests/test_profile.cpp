#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "metastab/model.hpp"
#include "metastab/profile.hpp"

using namespace metastab;

TEST_CASE("grid_for resolves epsilon") {
    Grid g = grid_for(-2.0, 2.0, 0.1, 10);
    CHECK(g.cells == 400);
    CHECK(g.h() == doctest::Approx(0.01));
    CHECK(g.nodes() == 401);
    CHECK(g.x(0) == doctest::Approx(-2.0));
    CHECK(g.x(400) == doctest::Approx(2.0));
    CHECK_THROWS_AS(grid_for(1.0, 0.0, 0.1), ConfigViolation);
}

TEST_CASE("classical profile matches the tanh solution") {
    MaterialModel m = build_model(classical_spec());
    const double eps = 0.1;
    StandingProfile p = build_standing_profile(m, eps);

    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = -10.0 * eps + 20.0 * eps * i / 2000.0;
        const double exact = std::tanh(x / (std::sqrt(2.0) * eps));
        worst = std::max(worst, std::abs(p.value(x) - exact));
    }
    CHECK(worst <= 1e-6);
    CHECK(p.value(0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("classical tails decay at the linearized rate") {
    MaterialModel m = build_model(classical_spec());
    const double eps = 0.1;
    StandingProfile p = build_standing_profile(m, eps);

    CHECK(p.beta_tail().kind == TailKind::exponential);
    const double c2 = std::sqrt(2.0) / eps;
    CHECK(p.beta_tail().rate == doctest::Approx(c2).epsilon(1e-9));

    // measure the decay rate from values inside the table
    const double x1 = p.x_of(1.0 - 1e-4);
    const double x2 = p.x_of(1.0 - 1e-5);
    const double measured =
        -(std::log(p.well_distance(x2)) - std::log(p.well_distance(x1))) / (x2 - x1);
    CHECK(measured == doctest::Approx(c2).epsilon(0.05));

    // beyond the table the model continues the same exponential, continuously
    const double xe = p.node_x().back();
    CHECK(p.value(xe + 1e-9) == doctest::Approx(p.value(xe - 1e-9)).epsilon(1e-6));
    CHECK(p.well_distance(xe + 3.0) < p.well_distance(xe) * std::exp(-c2 * 2.9));
}

TEST_CASE("profile is monotone and inverts consistently") {
    MaterialModel m = build_model(mullins_spec());
    StandingProfile p = build_standing_profile(m, 0.05);

    double prev = -2.0;
    for (int i = 0; i <= 4000; ++i) {
        const double x = p.node_x().front() +
                         (p.node_x().back() - p.node_x().front()) * i / 4000.0;
        const double v = p.value(x);
        CHECK(v >= prev - 1e-13);
        prev = v;
    }
    for (double phi : {-0.99, -0.7, -0.1, 0.0, 0.33, 0.9, 0.999}) {
        CHECK(p.value(p.x_of(phi)) == doctest::Approx(phi).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("profile satisfies the first-order connection equation") {
    MaterialModel mc = build_model(classical_spec());
    StandingProfile pc = build_standing_profile(mc, 0.1, 1e-3 * 2.0);
    OdeCheck c = verify_first_order_ode(pc, mc);
    CHECK(c.scale > 0.5);
    CHECK(c.max_residual <= 5e-4 * c.scale);

    MaterialModel mm = build_model(mullins_spec());
    StandingProfile pm = build_standing_profile(mm, 0.05);
    c = verify_first_order_ode(pm, mm);
    CHECK(c.max_residual <= 5e-4 * c.scale);
}

TEST_CASE("gradient and potential energy densities split evenly") {
    // eps D(phi) phi' = sqrt(2 G(phi)) implies (eps^2/2) D^2 phi'^2 = G(phi)
    MaterialModel m = build_model(exponential_spec());
    const double eps = 0.1;
    StandingProfile p = build_standing_profile(m, eps);
    const auto& G = m.potential();
    for (int i = -40; i <= 40; ++i) {
        const double x = 0.1 * eps * i;
        const double phi = p.value(x);
        const double g = G.value(phi);
        if (g < 1e-4) continue;
        const double d = m.diffusivity(phi);
        const double lhs = 0.5 * eps * eps * d * d * p.derivative(x) * p.derivative(x);
        CHECK(lhs == doctest::Approx(g).epsilon(0.01));
    }
}

TEST_CASE("porous profile has finite support on the degenerate side") {
    MaterialModel m = build_model(porous_spec());
    const double eps = 0.1;
    StandingProfile p = build_standing_profile(m, eps);

    REQUIRE(p.alpha_tail().kind == TailKind::finite_support);
    // x(0.5) - x(0) = eps * integral of sqrt(3)/(1-s) over [0, 1/2]
    const double xbar_exact = eps * std::sqrt(3.0) * std::log(2.0);
    CHECK(p.alpha_tail().xbar == doctest::Approx(xbar_exact).epsilon(1e-6));
    CHECK(p.alpha_tail().edge_slope ==
          doctest::Approx(1.0 / (eps * std::sqrt(3.0))).epsilon(1e-2));

    const double xb = p.alpha_tail().xbar;
    CHECK(p.value(-xb) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(p.value(-xb - 0.5) == 0.0);
    CHECK(p.derivative(-xb - 0.5) == 0.0);
    CHECK(p.well_distance(-xb - 0.1) == 0.0);

    // healthy side still exponential with rate sqrt(f'(1) D(1)) / (D(1) eps)
    REQUIRE(p.beta_tail().kind == TailKind::exponential);
    CHECK(p.beta_tail().rate ==
          doctest::Approx(std::sqrt(1.0 / 3.0) / eps).epsilon(1e-9));
}

TEST_CASE("flat-well reaction gives a clamped algebraic tail") {
    MaterialModel m = build_model(degenerate_reaction_spec(3));
    StandingProfile p = build_standing_profile(m, 0.1);
    CHECK(p.alpha_tail().kind == TailKind::truncated);
    CHECK(p.beta_tail().kind == TailKind::truncated);
    // the table reaches far out: algebraic tails are wide
    CHECK(p.node_x().back() > 1e2);
    const double xe = p.node_x().back();
    CHECK(p.value(xe + 1.0) == doctest::Approx(p.value(xe)));
    CHECK(p.value(xe + 1.0) < 1.0);
    CHECK(p.value(xe + 1.0) > 1.0 - 2.1e-6);
}

TEST_CASE("layer configuration geometry") {
    LayerConfiguration lc;
    lc.a = -1.0;
    lc.b = 1.0;
    lc.jumps = {-0.7, -0.4, -0.1, 0.2, 0.5, 0.8};
    CHECK(lc.count() == 6);
    CHECK(lc.auto_radius() == doctest::Approx(0.15));
    lc.validate();

    auto bounds = lc.segment_bounds();
    REQUIRE(bounds.size() == 7);
    CHECK(bounds.front() == doctest::Approx(-1.0));
    CHECK(bounds[1] == doctest::Approx(-0.55));
    CHECK(bounds.back() == doctest::Approx(1.0));

    // step function alternates starting from alpha
    CHECK(lc.step_value(-0.9, -1.0, 1.0) == -1.0);
    CHECK(lc.step_value(-0.5, -1.0, 1.0) == 1.0);
    CHECK(lc.step_value(-0.2, -1.0, 1.0) == -1.0);
    CHECK(lc.step_value(0.6, -1.0, 1.0) == 1.0);
    CHECK(lc.step_value(0.9, -1.0, 1.0) == -1.0);  // even count returns to start
    CHECK(lc.orientation(0) == 1);
    CHECK(lc.orientation(1) == -1);

    LayerConfiguration beta_start = lc;
    beta_start.start = Phase::beta;
    CHECK(beta_start.step_value(-0.9, -1.0, 1.0) == 1.0);
    CHECK(beta_start.orientation(0) == -1);

    LayerConfiguration bad = lc;
    bad.radius = 0.2;  // exceeds half the smallest gap
    CHECK_THROWS_AS(bad.validate(), ConfigViolation);
    bad = lc;
    bad.jumps = {0.5, 0.4};
    CHECK_THROWS_AS(bad.validate(), ConfigViolation);
    bad = lc;
    bad.jumps = {-1.5};
    CHECK_THROWS_AS(bad.validate(), ConfigViolation);
    bad = lc;
    bad.jumps.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigViolation);
}

TEST_CASE("pasted datum alternates through all configured layers") {
    MaterialModel m = build_model(classical_spec());
    const double eps = 0.05;
    StandingProfile p = build_standing_profile(m, eps);
    LayerConfiguration lc;
    lc.a = -1.0;
    lc.b = 1.0;
    lc.jumps = {-0.7, -0.4, -0.1, 0.2, 0.5, 0.8};
    Grid g = grid_for(lc.a, lc.b, eps);
    PhaseField u = build_layer_datum(p, lc, g);

    REQUIRE(static_cast<int>(u.values.size()) == g.nodes());
    CHECK(u.min() >= -1.0 - 1e-12);
    CHECK(u.max() <= 1.0 + 1e-12);
    // boundary remainders are ~2 exp(-2 dist/(sqrt2 eps)): 4e-4 at dist 0.3,
    // 7e-3 at dist 0.2
    CHECK(u.values.front() == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(u.values.back() == doctest::Approx(-1.0).epsilon(1e-2));

    int crossings = 0;
    for (std::size_t i = 1; i < u.values.size(); ++i)
        if ((u.values[i - 1] < 0.0) != (u.values[i] < 0.0)) ++crossings;
    CHECK(crossings == 6);

    // each jump location is a zero of the pasted field up to grid resolution
    for (double hj : lc.jumps) {
        const int i = static_cast<int>(std::lround((hj - g.a) / g.h()));
        CHECK(std::abs(u.values[i]) < 0.8);  // inside the transition
    }

    Grid wrong = grid_for(-2.0, 2.0, eps);
    CHECK_THROWS_AS(build_layer_datum(p, lc, wrong), ConfigViolation);
}

TEST_CASE("datum converges to the sharp step as epsilon shrinks") {
    MaterialModel m = build_model(classical_spec());
    LayerConfiguration lc;
    lc.a = -1.0;
    lc.b = 1.0;
    lc.jumps = {0.0};

    double prev = 1e9;
    for (double eps : {0.2, 0.1, 0.05}) {
        StandingProfile p = build_standing_profile(m, eps);
        Grid g = grid_for(lc.a, lc.b, eps);
        PhaseField u = build_layer_datum(p, lc, g);
        double l1 = 0.0;
        for (int i = 0; i < g.nodes(); ++i) {
            const double w = (i == 0 || i == g.cells) ? 0.5 : 1.0;
            l1 += w * std::abs(u.values[i] - lc.step_value(g.x(i), -1.0, 1.0)) * g.h();
        }
        CHECK(l1 < prev);
        // L1 distance of tanh to sign is 2 sqrt(2) ln 2 * eps
        CHECK(l1 == doctest::Approx(2.0 * std::sqrt(2.0) * std::log(2.0) * eps)
                        .epsilon(0.02));
        prev = l1;
    }
}
