#include "metastab/config.hpp"

#include <fstream>
#include <sstream>

#include "metastab/errors.hpp"

namespace metastab {

using nlohmann::json;

SolverConfig ExperimentConfig::solver_config(double eps) const {
    SolverConfig c;
    c.grid = grid_for(layers.a, layers.b, eps, cells_per_eps);
    c.epsilon = eps;
    c.scheme = scheme;
    c.dt = dt;
    c.t_max = t_max;
    c.adaptive = adaptive;
    c.snapshots = snapshots;
    c.stop_after_collapse = stop_after_collapse;
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json m;
    m["family"] = c.model.family;
    m["d0"] = c.model.d0;
    m["c0"] = c.model.c0;
    if (c.model.u_star)
        m["u_star"] = *c.model.u_star;
    else
        m["u_star"] = nullptr;
    m["alpha"] = c.model.alpha;
    m["beta"] = c.model.beta;
    m["degeneracy"] = {
        {"diffusivity_at_alpha", c.model.degeneracy.diffusivity_at_alpha},
        {"diffusivity_at_beta", c.model.degeneracy.diffusivity_at_beta},
        {"reaction_at_alpha", c.model.degeneracy.reaction_at_alpha},
        {"reaction_at_beta", c.model.degeneracy.reaction_at_beta},
    };
    m["custom_diffusivity"] = c.model.custom_diffusivity;
    m["roots"] = c.model.roots;
    m["powers"] = c.model.powers;

    json j;
    j["name"] = c.name;
    j["model"] = m;
    j["domain"] = {{"a", c.layers.a}, {"b", c.layers.b}};
    j["layers"] = {
        {"jumps", c.layers.jumps},
        {"start", c.layers.start == Phase::alpha ? "alpha" : "beta"},
        {"radius", c.layers.radius},
    };
    j["epsilon"] = c.epsilon;
    j["sweep_epsilons"] = c.sweep_epsilons;
    j["solver"] = {
        {"scheme", scheme_name(c.scheme)},
        {"dt", c.dt},
        {"t_max", c.t_max},
        {"cells_per_eps", c.cells_per_eps},
        {"snapshots", {{"t0", c.snapshots.t0}, {"ratio", c.snapshots.ratio}}},
        {"adaptive",
         {{"enabled", c.adaptive.enabled},
          {"plateau_threshold", c.adaptive.plateau_threshold},
          {"active_threshold", c.adaptive.active_threshold},
          {"grow", c.adaptive.grow},
          {"shrink", c.adaptive.shrink}}},
        {"stop_after_collapse", c.stop_after_collapse},
    };
    j["analysis"] = {
        {"track", c.analysis.track},
        {"energy_audit", c.analysis.energy_audit},
        {"certify", c.analysis.certify},
        {"displacement_threshold", c.analysis.displacement_threshold},
    };
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    try {
        ExperimentConfig c;
        c.name = j.value("name", c.name);
        if (j.contains("model")) {
            const json& m = j["model"];
            c.model.family = m.value("family", c.model.family);
            c.model.d0 = m.value("d0", c.model.d0);
            c.model.c0 = m.value("c0", c.model.c0);
            if (m.contains("u_star") && !m["u_star"].is_null())
                c.model.u_star = m["u_star"].get<double>();
            c.model.alpha = m.value("alpha", c.model.alpha);
            c.model.beta = m.value("beta", c.model.beta);
            if (m.contains("degeneracy")) {
                const json& d = m["degeneracy"];
                c.model.degeneracy.diffusivity_at_alpha =
                    d.value("diffusivity_at_alpha", false);
                c.model.degeneracy.diffusivity_at_beta =
                    d.value("diffusivity_at_beta", false);
                c.model.degeneracy.reaction_at_alpha =
                    d.value("reaction_at_alpha", false);
                c.model.degeneracy.reaction_at_beta =
                    d.value("reaction_at_beta", false);
            }
            c.model.custom_diffusivity =
                m.value("custom_diffusivity", c.model.custom_diffusivity);
            c.model.roots = m.value("roots", c.model.roots);
            c.model.powers = m.value("powers", c.model.powers);
        }
        if (j.contains("domain")) {
            c.layers.a = j["domain"].value("a", c.layers.a);
            c.layers.b = j["domain"].value("b", c.layers.b);
        }
        if (j.contains("layers")) {
            const json& l = j["layers"];
            c.layers.jumps = l.value("jumps", c.layers.jumps);
            const std::string start = l.value("start", "alpha");
            if (start != "alpha" && start != "beta")
                throw ConfigViolation("layer start phase must be alpha or beta");
            c.layers.start = start == "alpha" ? Phase::alpha : Phase::beta;
            c.layers.radius = l.value("radius", c.layers.radius);
        }
        c.epsilon = j.value("epsilon", c.epsilon);
        c.sweep_epsilons = j.value("sweep_epsilons", c.sweep_epsilons);
        if (j.contains("solver")) {
            const json& s = j["solver"];
            c.scheme = scheme_from_name(s.value("scheme", "imex"));
            c.dt = s.value("dt", c.dt);
            c.t_max = s.value("t_max", c.t_max);
            c.cells_per_eps = s.value("cells_per_eps", c.cells_per_eps);
            if (s.contains("snapshots")) {
                c.snapshots.t0 = s["snapshots"].value("t0", c.snapshots.t0);
                c.snapshots.ratio =
                    s["snapshots"].value("ratio", c.snapshots.ratio);
            }
            if (s.contains("adaptive")) {
                const json& a = s["adaptive"];
                c.adaptive.enabled = a.value("enabled", c.adaptive.enabled);
                c.adaptive.plateau_threshold =
                    a.value("plateau_threshold", c.adaptive.plateau_threshold);
                c.adaptive.active_threshold =
                    a.value("active_threshold", c.adaptive.active_threshold);
                c.adaptive.grow = a.value("grow", c.adaptive.grow);
                c.adaptive.shrink = a.value("shrink", c.adaptive.shrink);
            }
            c.stop_after_collapse =
                s.value("stop_after_collapse", c.stop_after_collapse);
        }
        if (j.contains("analysis")) {
            const json& a = j["analysis"];
            c.analysis.track = a.value("track", c.analysis.track);
            c.analysis.energy_audit =
                a.value("energy_audit", c.analysis.energy_audit);
            c.analysis.certify = a.value("certify", c.analysis.certify);
            c.analysis.displacement_threshold = a.value(
                "displacement_threshold", c.analysis.displacement_threshold);
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.seed = j.value("seed", c.seed);

        if (!(c.epsilon > 0.0))
            throw ConfigViolation("epsilon must be positive");
        for (double e : c.sweep_epsilons)
            if (!(e > 0.0))
                throw ConfigViolation("sweep epsilons must be positive");
        if (c.cells_per_eps < 8)
            throw ConfigViolation(
                "cells_per_eps below 8 cannot resolve the layer width");
        return c;
    } catch (const json::exception& e) {
        throw ConfigViolation(std::string("malformed experiment config: ") +
                              e.what());
    }
}

std::string serialize_config(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigViolation(std::string("config is not valid JSON: ") +
                              e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailure("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

const std::vector<double> kSixJumps = {-3.4, -2.0, -0.5, 0.8, 2.2, 3.2};

ExperimentConfig base_preset(const std::string& name, ModelSpec model,
                             double epsilon, double t_max, Scheme scheme) {
    ExperimentConfig c;
    c.name = name;
    c.model = std::move(model);
    c.layers.a = -4.0;
    c.layers.b = 4.0;
    c.layers.jumps = kSixJumps;
    c.layers.start = Phase::alpha;
    c.epsilon = epsilon;
    c.scheme = scheme;
    c.t_max = t_max;
    c.output_dir = "out/" + name;
    return c;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"fig1-classical",   "fig2-mullins",      "fig3a-exp-eps01",
            "fig3b-exp-eps005", "fig4a-fdeg3",       "fig4b-fdeg5",
            "fig5a-porous-eps01", "fig5b-porous-eps006"};
}

ExperimentConfig preset(const std::string& name, bool full_horizon) {
    if (name == "fig1-classical") {
        // the published claim is a collapse time, so this preset pins dt
        // (splitting bias stays under 1%) and samples densely enough that
        // the recorded event time is within 1% of the true crossing
        ExperimentConfig c =
            base_preset(name, classical_spec(), 0.1, 3e4, Scheme::imex);
        c.dt = 0.0125;
        c.snapshots.ratio = 1.01;
        return c;
    }
    if (name == "fig2-mullins")
        // published horizon 2e6 (the collapse); desk default checks
        // persistence at 1e5 instead
        return base_preset(name, mullins_spec(), 0.1,
                           full_horizon ? 2e6 : 1e5, Scheme::imex);
    if (name == "fig3a-exp-eps01")
        return base_preset(name, exponential_spec(), 0.1, 5e3, Scheme::imex);
    if (name == "fig3b-exp-eps005") {
        // the exponential reaction is asymmetric about the unstable zero, so
        // the O(h^2) truncation error gives each discrete front a spurious
        // drift; at eps = 0.05 the physical tail interaction is ~e^{-15} and
        // h = eps/10 drift shoves the closest pair together around t ~ 3e4
        // (h = eps/20: ~8e4).  eps/28 keeps all six layers past the horizon.
        ExperimentConfig c =
            base_preset(name, exponential_spec(), 0.05, 1e5, Scheme::imex);
        c.cells_per_eps = 28;
        return c;
    }
    if (name == "fig4a-fdeg3")
        return base_preset(name, degenerate_reaction_spec(3), 0.1, 5e3,
                           Scheme::imex);
    if (name == "fig4b-fdeg5")
        return base_preset(name, degenerate_reaction_spec(5), 0.1, 5e3,
                           Scheme::imex);
    if (name == "fig5a-porous-eps01")
        return base_preset(name, porous_spec(), 0.1, 2e3,
                           Scheme::explicit_euler);
    if (name == "fig5b-porous-eps006")
        return base_preset(name, porous_spec(), 0.06, 2e3,
                           Scheme::explicit_euler);
    throw UnknownPreset("no preset named '" + name +
                        "'; available: fig1-classical, fig2-mullins, "
                        "fig3a-exp-eps01, fig3b-exp-eps005, fig4a-fdeg3, "
                        "fig4b-fdeg5, fig5a-porous-eps01, fig5b-porous-eps006");
}

} // namespace metastab
