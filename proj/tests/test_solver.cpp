#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "metastab/energy.hpp"
#include "metastab/errors.hpp"
#include "metastab/interfaces.hpp"
#include "metastab/profile.hpp"
#include "metastab/solver.hpp"

using namespace metastab;

namespace {

PhaseField constant_field(const Grid& grid, double v) {
    return {grid, std::vector<double>(grid.nodes(), v)};
}

// the discrete right-hand side, assembled independently of the solver
std::vector<double> dense_rhs(const std::vector<double>& u,
                              const MaterialModel& model, double eps,
                              double h) {
    const int m = static_cast<int>(u.size()) - 1;
    std::vector<double> out(u.size());
    for (int i = 0; i <= m; ++i) {
        const double um = (i == 0) ? u[1] : u[i - 1];
        const double up = (i == m) ? u[m - 1] : u[i + 1];
        const double dm = 0.5 * (model.diffusivity(um) + model.diffusivity(u[i]));
        const double dp = 0.5 * (model.diffusivity(up) + model.diffusivity(u[i]));
        const double flux = dp * (up - u[i]) - dm * (u[i] - um);
        out[i] = eps * eps / (h * h) * flux - model.reaction(u[i]);
    }
    return out;
}

struct SchemeRuns {
    MaterialModel model = build_model(classical_spec());
    Grid grid;
    RunRecord explicit_rec, imex_rec;
    double e0 = 0.0;
};

// one six-layer relaxation integrated both ways, shared by several checks
const SchemeRuns& six_layer_runs() {
    static const SchemeRuns runs = [] {
        SchemeRuns r;
        const double eps = 0.1;
        r.grid = grid_for(-4.0, 4.0, eps);
        LayerConfiguration layers;
        layers.a = -4.0;
        layers.b = 4.0;
        layers.jumps = {-3.4, -2.0, -0.5, 0.8, 2.2, 3.2};
        const StandingProfile prof = build_standing_profile(r.model, eps);
        const PhaseField u0 = build_layer_datum(prof, layers, r.grid);
        r.e0 = energy(u0, r.model, eps).value;

        SolverConfig cfg;
        cfg.grid = r.grid;
        cfg.epsilon = eps;
        cfg.t_max = 200.0;
        cfg.scheme = Scheme::explicit_euler;
        r.explicit_rec = run(u0, r.model, cfg);
        cfg.scheme = Scheme::imex;
        r.imex_rec = run(u0, r.model, cfg);
        return r;
    }();
    return runs;
}

} // namespace

TEST_CASE("a well is a fixed point of both schemes") {
    const MaterialModel model = build_model(classical_spec());
    Grid grid{-1.0, 1.0, 20};  // h = 0.1 = eps/8
    SolverConfig cfg;
    cfg.grid = grid;
    cfg.epsilon = 0.8;
    cfg.t_max = 10.0;

    cfg.scheme = Scheme::explicit_euler;
    const RunRecord ex = run(constant_field(grid, model.alpha()), model, cfg);
    for (double v : ex.snapshots.back().u) CHECK(v == model.alpha());

    cfg.scheme = Scheme::imex;
    const RunRecord im = run(constant_field(grid, model.beta()), model, cfg);
    for (double v : im.snapshots.back().u)
        CHECK(v == doctest::Approx(model.beta()).epsilon(1e-13));
}

TEST_CASE("one explicit step reproduces a hand-assembled update") {
    const MaterialModel model = build_model(mullins_spec());
    Grid grid{0.0, 0.4, 4};  // h = 0.1
    SolverConfig cfg;
    cfg.grid = grid;
    cfg.epsilon = 0.8;
    cfg.scheme = Scheme::explicit_euler;

    const std::vector<double> u0 = {-0.9, -0.4, 0.1, 0.6, 0.95};
    const double dt = 0.004;
    SimulationState state;
    state.u = {grid, u0};
    state.dt = dt;
    step(state, model, cfg);

    const std::vector<double> rhs = dense_rhs(u0, model, cfg.epsilon, grid.h());
    for (std::size_t i = 0; i < u0.size(); ++i)
        CHECK(state.u.values[i] ==
              doctest::Approx(u0[i] + dt * rhs[i]).epsilon(1e-14));
    CHECK(state.t == doctest::Approx(dt));
    CHECK(state.step_count == 1);
}

TEST_CASE("discrete residual of a standing layer shrinks at second order") {
    const MaterialModel model = build_model(classical_spec());
    const double eps = 0.1;
    double res[2];
    int cpe = 10;
    for (int k = 0; k < 2; ++k, cpe *= 2) {
        const Grid grid = grid_for(-2.0, 2.0, eps, cpe);
        PhaseField u{grid, {}};
        for (int i = 0; i < grid.nodes(); ++i)
            u.values.push_back(std::tanh(grid.x(i) / (std::sqrt(2.0) * eps)));
        res[k] = discrete_pde_residual(u, model, eps);
    }
    CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.15));

    const Grid grid = grid_for(-2.0, 2.0, eps);
    CHECK(discrete_pde_residual(constant_field(grid, model.beta()), model,
                                eps) == 0.0);
}

TEST_CASE("manufactured solution converges at second order") {
    const MaterialModel model = build_model(classical_spec());
    const double eps = 0.8;
    const double pi = std::acos(-1.0);
    auto exact = [&](double x, double t) {
        return 0.5 * std::exp(-t) * std::cos(pi * x);
    };
    // s = u*_t - eps^2 u*_xx + f(u*) for D = 1, f = u^3 - u
    auto source = [&](double x, double t) {
        const double u = exact(x, t);
        return -u + eps * eps * pi * pi * u + (u * u * u - u);
    };
    const double T = 0.25;

    for (Scheme scheme : {Scheme::explicit_euler, Scheme::imex}) {
        double err[3];
        int cells = 10;
        for (int k = 0; k < 3; ++k, cells *= 2) {
            Grid grid{0.0, 1.0, cells};
            SolverConfig cfg;
            cfg.grid = grid;
            cfg.epsilon = eps;
            cfg.scheme = scheme;
            cfg.t_max = T;
            cfg.dt = 0.25 * grid.h() * grid.h() / (eps * eps);
            cfg.adaptive.enabled = false;
            cfg.source = source;
            PhaseField u0{grid, {}};
            for (int i = 0; i < grid.nodes(); ++i)
                u0.values.push_back(exact(grid.x(i), 0.0));

            const RunRecord rec = run(u0, model, cfg);
            double e = 0.0;
            for (int i = 0; i < grid.nodes(); ++i)
                e = std::max(e, std::abs(rec.snapshots.back().u[i] -
                                         exact(grid.x(i), T)));
            err[k] = e;
        }
        CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.3));
        CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.3));
    }
}

TEST_CASE("both schemes keep six layers put and agree to one cell") {
    const SchemeRuns& r = six_layer_runs();
    const PhaseField ue{r.grid, r.explicit_rec.snapshots.back().u};
    const PhaseField ui{r.grid, r.imex_rec.snapshots.back().u};
    const InterfaceSet se = interface_of(ue, r.model);
    const InterfaceSet si = interface_of(ui, r.model);
    REQUIRE(se.positions.size() == 6);
    REQUIRE(si.positions.size() == 6);
    for (int j = 0; j < 6; ++j)
        CHECK(std::abs(se.positions[j] - si.positions[j]) <= r.grid.h());
    CHECK(r.explicit_rec.final_t == doctest::Approx(200.0));
    CHECK(r.imex_rec.final_t == doctest::Approx(200.0));
    CHECK(r.explicit_rec.scheme == "explicit_euler");
    CHECK(r.imex_rec.scheme == "imex");
}

TEST_CASE("the discrete dynamics respects the maximum principle") {
    const SchemeRuns& r = six_layer_runs();
    for (const RunRecord* rec : {&r.explicit_rec, &r.imex_rec}) {
        CHECK(rec->min_u_global >= -1.0 - 1e-8);
        CHECK(rec->max_u_global <= 1.0 + 1e-8);
    }
}

TEST_CASE("energy decreases along both discrete flows") {
    const SchemeRuns& r = six_layer_runs();
    for (const RunRecord* rec : {&r.explicit_rec, &r.imex_rec}) {
        REQUIRE(rec->diagnostics.size() > 2);
        for (std::size_t k = 1; k < rec->diagnostics.size(); ++k)
            CHECK(rec->diagnostics[k].energy <=
                  rec->diagnostics[k - 1].energy + 1e-8 * r.e0);
    }
}

TEST_CASE("released energy is accounted for by the dissipation integral") {
    const SchemeRuns& r = six_layer_runs();
    CHECK(dissipation_residual(r.explicit_rec) <= 1e-3);
    CHECK(dissipation_residual(r.imex_rec) <= 1e-3);
}

TEST_CASE("snapshot times follow the geometric schedule") {
    const SchemeRuns& r = six_layer_runs();
    const auto& snaps = r.imex_rec.snapshots;
    REQUIRE(snaps.size() > 10);
    CHECK(snaps[0].t == 0.0);
    CHECK(snaps[1].t == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t k = 2; k + 1 < snaps.size(); ++k)
        CHECK(snaps[k].t / snaps[k - 1].t == doctest::Approx(1.1).epsilon(1e-9));
    for (std::size_t k = 1; k < snaps.size(); ++k)
        CHECK(snaps[k].t > snaps[k - 1].t);
}

TEST_CASE("configuration and stability guards") {
    const MaterialModel classical = build_model(classical_spec());
    SolverConfig cfg;
    cfg.grid = grid_for(-1.0, 1.0, 0.1);
    cfg.epsilon = 0.1;

    SUBCASE("explicit step above the diffusion bound is refused") {
        cfg.scheme = Scheme::explicit_euler;
        const double bound = cfg.grid.h() * cfg.grid.h() / (2.0 * 0.01);
        cfg.dt = 2.0 * bound;
        CHECK_THROWS_AS(validate_config(cfg, classical), StabilityViolation);
    }
    SUBCASE("a grid that cannot resolve the layer is refused") {
        cfg.grid = {-1.0, 1.0, 10};  // h = 0.2 >> eps/8
        CHECK_THROWS_AS(validate_config(cfg, classical), ConfigViolation);
    }
    SUBCASE("degenerate diffusivity forces the explicit scheme") {
        const MaterialModel porous = build_model(porous_spec());
        cfg.grid = grid_for(0.0, 1.0, 0.1);
        cfg.scheme = Scheme::imex;
        CHECK_THROWS_AS(validate_config(cfg, porous), ConfigViolation);
        cfg.scheme = Scheme::explicit_euler;
        CHECK(validate_config(cfg, porous) > 0.0);
    }
    SUBCASE("a mismatched initial datum is refused") {
        cfg.scheme = Scheme::imex;
        const Grid other{-2.0, 2.0, cfg.grid.cells};
        CHECK_THROWS_AS(
            run(constant_field(other, -1.0), classical, cfg), ConfigViolation);
    }
}

TEST_CASE("divergence is reported as a blow-up, not as silent NaNs") {
    const MaterialModel model = build_model(classical_spec());
    Grid grid{-1.0, 1.0, 20};
    SolverConfig cfg;
    cfg.grid = grid;
    cfg.epsilon = 0.8;
    cfg.scheme = Scheme::explicit_euler;
    cfg.dt = 0.005;  // fine for diffusion, fatal for u^3 at |u| = 30
    cfg.adaptive.enabled = false;
    cfg.t_max = 1.0;
    CHECK_THROWS_AS(run(constant_field(grid, 30.0), model, cfg), BlowUp);
}

TEST_CASE("a stop hook ends the run at the requested moment") {
    const MaterialModel model = build_model(classical_spec());
    Grid grid{-1.0, 1.0, 20};
    SolverConfig cfg;
    cfg.grid = grid;
    cfg.epsilon = 0.8;
    cfg.scheme = Scheme::imex;
    cfg.t_max = 100.0;
    cfg.stop_hook = [](const SimulationState& s) { return s.t >= 5.0; };
    const RunRecord rec = run(constant_field(grid, -1.0), model, cfg);
    CHECK(rec.final_t >= 5.0);
    CHECK(rec.final_t < 50.0);
}
