#include "metastab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "metastab/errors.hpp"
#include "metastab/profile.hpp"
#include "metastab/solver.hpp"

namespace metastab {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return run_experiment(config, config.epsilon);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                double epsilon) {
    ExperimentResult result;
    result.config = config;
    result.epsilon = epsilon;

    const MaterialModel model = build_model(config.model);
    config.layers.validate();
    const SolverConfig solver = config.solver_config(epsilon);

    const StandingProfile profile = build_standing_profile(model, epsilon);
    const PhaseField u0 = build_layer_datum(profile, config.layers, solver.grid);
    result.datum = datum_energy(model, profile, config.layers);

    if (config.analysis.certify && !model.degenerate() &&
        model.lambda().has_value()) {
        result.cert =
            certify_layer_structure(u0, model, epsilon, config.layers);
        result.has_cert = true;
    }

    result.record = run(u0, model, solver);

    if (config.analysis.track) {
        const double delta1 = config.analysis.displacement_threshold > 0.0
                                  ? config.analysis.displacement_threshold
                                  : config.layers.effective_radius();
        result.track = track_layers(result.record, model, delta1);
        result.has_track = true;
    }
    if (config.analysis.energy_audit && result.record.diagnostics.size() >= 2) {
        result.dissipation = dissipation_residual(result.record);
        result.has_dissipation = true;
    }
    return result;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOFailure("cannot open for writing: " + path);
    out << text;
    if (!out) throw IOFailure("write failed: " + path);
}

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string py_list(const std::vector<double>& vals) {
    std::string out = "[";
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out += ", ";
        out += format_full(vals[i]);
    }
    return out + "]";
}

// Representative times for the snapshot plot: the initial state, the last
// snapshot strictly before the first collapse (or the middle of the schedule
// when nothing collapses), and the final state.
std::vector<double> plot_times(const std::vector<double>& snap_times,
                               const std::vector<double>& event_times) {
    std::vector<double> out;
    out.push_back(snap_times.front());
    if (!event_times.empty()) {
        double pre = snap_times.front();
        for (double t : snap_times)
            if (t < event_times.front()) pre = t;
        out.push_back(pre);
    } else {
        out.push_back(snap_times[snap_times.size() / 2]);
    }
    out.push_back(snap_times.back());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string snapshot_plot_script(const std::vector<double>& times) {
    std::ostringstream py;
    py << "#!/usr/bin/env python3\n"
          "\"\"\"Plot the field at a few representative times from "
          "snapshots.csv.\"\"\"\n"
          "import csv\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n"
          "\n"
          "TIMES = "
       << py_list(times)
       << "\n"
          "\n"
          "with open(\"snapshots.csv\", newline=\"\") as f:\n"
          "    rows = list(csv.reader(f))\n"
          "x = [float(c) for c in rows[0][1:]]\n"
          "series = [(float(r[0]), [float(c) for c in r[1:]]) for r in "
          "rows[1:]]\n"
          "\n"
          "fig, ax = plt.subplots(figsize=(7.0, 4.0))\n"
          "for target in TIMES:\n"
          "    t, u = min(series, key=lambda s: abs(s[0] - target))\n"
          "    ax.plot(x, u, label=\"t = %g\" % t)\n"
          "ax.set_xlabel(\"x\")\n"
          "ax.set_ylabel(\"u\")\n"
          "ax.legend(loc=\"best\")\n"
          "fig.tight_layout()\n"
          "fig.savefig(\"snapshots.png\", dpi=160)\n"
          "print(\"wrote snapshots.png\")\n";
    return py.str();
}

std::string trajectory_plot_script(const std::vector<double>& event_times) {
    std::ostringstream py;
    py << "#!/usr/bin/env python3\n"
          "\"\"\"Plot the layer trajectories from trajectories.csv; dashed\n"
          "vertical lines mark collapse events.\"\"\"\n"
          "import csv\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n"
          "\n"
          "EVENTS = "
       << py_list(event_times)
       << "\n"
          "\n"
          "with open(\"trajectories.csv\", newline=\"\") as f:\n"
          "    rows = list(csv.reader(f))\n"
          "header = rows[0]\n"
          "data = [[float(c) for c in r] for r in rows[1:]]\n"
          "t = [r[0] for r in data]\n"
          "\n"
          "fig, ax = plt.subplots(figsize=(7.0, 4.0))\n"
          "for j in range(1, len(header)):\n"
          "    ax.plot(t, [r[j] for r in data], label=header[j])\n"
          "for ev in EVENTS:\n"
          "    ax.axvline(ev, color=\"k\", lw=0.7, ls=\"--\")\n"
          "if t and t[-1] > 0:\n"
          "    ax.set_xscale(\"symlog\", linthresh=max(t[-1] * 1e-6, "
          "1e-12))\n"
          "ax.set_xlabel(\"t\")\n"
          "ax.set_ylabel(\"layer position\")\n"
          "ax.legend(loc=\"best\", ncol=2, fontsize=8)\n"
          "fig.tight_layout()\n"
          "fig.savefig(\"trajectories.png\", dpi=160)\n"
          "print(\"wrote trajectories.png\")\n";
    return py.str();
}

std::string energy_plot_script() {
    return "#!/usr/bin/env python3\n"
           "\"\"\"Plot the energy decay and the dissipation audit from\n"
           "diagnostics.csv.\"\"\"\n"
           "import csv\n"
           "import matplotlib\n"
           "matplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n"
           "\n"
           "with open(\"diagnostics.csv\", newline=\"\") as f:\n"
           "    rows = list(csv.reader(f))\n"
           "data = [[float(c) for c in r[:10]] for r in rows[1:]]\n"
           "t = [r[0] for r in data]\n"
           "e = [r[1] for r in data]\n"
           "diss = [r[8] for r in data]\n"
           "drop = [e[0] - v for v in e]\n"
           "\n"
           "fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.0))\n"
           "ax1.plot(t, e)\n"
           "ax1.set_xlabel(\"t\")\n"
           "ax1.set_ylabel(\"energy\")\n"
           "ax2.plot(t, drop, label=\"E(0) - E(t)\")\n"
           "ax2.plot(t, diss, ls=\"--\", label=\"cumulative dissipation\")\n"
           "ax2.set_xlabel(\"t\")\n"
           "ax2.legend(loc=\"best\")\n"
           "for ax in (ax1, ax2):\n"
           "    if t and t[-1] > 0:\n"
           "        ax.set_xscale(\"symlog\", linthresh=max(t[-1] * 1e-6, "
           "1e-12))\n"
           "fig.tight_layout()\n"
           "fig.savefig(\"energy.png\", dpi=160)\n"
           "print(\"wrote energy.png\")\n";
}

std::string sweep_plot_script() {
    return "#!/usr/bin/env python3\n"
           "\"\"\"Scatter of log collapse time against 1/epsilon with the\n"
           "fitted line and the guaranteed floor exponent.\"\"\"\n"
           "import json\n"
           "import math\n"
           "import matplotlib\n"
           "matplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n"
           "\n"
           "with open(\"sweep.json\") as f:\n"
           "    s = json.load(f)\n"
           "pairs = [(1.0 / e, math.log(t))\n"
           "         for e, t in zip(s[\"epsilons\"], s[\"collapse_times\"])\n"
           "         if t is not None and math.isfinite(t)]\n"
           "inv = [p[0] for p in pairs]\n"
           "logt = [p[1] for p in pairs]\n"
           "\n"
           "fig, ax = plt.subplots(figsize=(6.0, 4.0))\n"
           "ax.scatter(inv, logt, label=\"measured\")\n"
           "if inv:\n"
           "    lo, hi = min(inv), max(inv)\n"
           "    xs = [lo + (hi - lo) * k / 63.0 for k in range(64)]\n"
           "    ax.plot(xs, [s[\"a_fit\"] * x + s[\"intercept\"] for x in "
           "xs],\n"
           "            label=\"fit: %.3g/eps + %.3g\" % (s[\"a_fit\"], "
           "s[\"intercept\"]))\n"
           "    ax.plot(xs, [s[\"check_exponent\"] * x for x in xs], "
           "ls=\":\",\n"
           "            label=\"guaranteed floor exponent\")\n"
           "ax.set_xlabel(\"1 / epsilon\")\n"
           "ax.set_ylabel(\"log t_collapse\")\n"
           "ax.legend(loc=\"best\")\n"
           "fig.tight_layout()\n"
           "fig.savefig(\"sweep.png\", dpi=160)\n"
           "print(\"wrote sweep.png\")\n";
}

void write_trajectories_csv(const TrackReport& track, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOFailure("cannot open for writing: " + path);
    const std::size_t cols =
        track.trajectories.empty() ? 0 : track.trajectories.front().size();
    out << "t";
    for (std::size_t j = 0; j < cols; ++j) out << ",layer_" << (j + 1);
    out << '\n';
    for (std::size_t i = 0; i < track.times.size(); ++i) {
        out << format_full(track.times[i]);
        for (double p : track.trajectories[i]) out << ',' << format_full(p);
        out << '\n';
    }
    if (!out) throw IOFailure("write failed: " + path);
}

json events_json(const TrackReport& track) {
    json j;
    j["displacement_threshold"] = track.displacement_threshold;
    j["t_exceed"] = finite_or_null(track.t_exceed);
    j["ambiguous"] = track.ambiguous;
    json evs = json::array();
    for (const CollapseEvent& e : track.events)
        evs.push_back({{"t", e.t},
                       {"first_index", e.first_index},
                       {"second_index", e.second_index},
                       {"pre_gap", e.pre_gap}});
    j["events"] = evs;
    return j;
}

json certification_json(const Certification& c) {
    return {{"certified", c.certified},
            {"l1_ok", c.l1_ok},
            {"energy_ok", c.energy_ok},
            {"l1_distance", c.l1_distance},
            {"delta", c.delta},
            {"energy_value", c.energy_value},
            {"n_gamma0", c.n_gamma0},
            {"energy_bound", c.energy_bound},
            {"exponent_a", c.exponent_a},
            {"constant_c", c.constant_c}};
}

json energy_json(const ExperimentResult& r, const MaterialModel& model) {
    json j;
    j["gamma0"] = model.gamma0();
    j["n_layers"] = r.config.layers.count();
    j["n_gamma0"] = r.config.layers.count() * model.gamma0();
    j["datum"] = {{"value", r.datum.value},
                  {"gap", r.datum.gap},
                  {"edge_masses", r.datum.edge_masses}};
    if (!r.record.diagnostics.empty()) {
        j["grid_energy"] = {
            {"initial", r.record.diagnostics.front().energy},
            {"final", r.record.diagnostics.back().energy}};
    }
    j["dissipation_residual"] =
        r.has_dissipation ? json(r.dissipation) : json(nullptr);
    j["certification"] =
        r.has_cert ? certification_json(r.cert) : json(nullptr);
    return j;
}

json run_json(const ExperimentResult& r) {
    // echo a config that reproduces exactly this record when run alone
    ExperimentConfig echo = r.config;
    echo.epsilon = r.epsilon;
    echo.sweep_epsilons.clear();
    json j;
    j["config"] = config_to_json(echo);
    j["epsilon"] = r.epsilon;
    json s;
    s["final_t"] = r.record.final_t;
    s["steps"] = r.record.steps;
    s["wall_seconds"] = r.record.wall_seconds;
    s["min_u"] = r.record.min_u_global;
    s["max_u"] = r.record.max_u_global;
    s["scheme"] = r.record.scheme;
    s["grid"] = {{"a", r.record.grid.a},
                 {"b", r.record.grid.b},
                 {"cells", r.record.grid.cells}};
    s["snapshots"] = r.record.snapshots.size();
    if (!r.record.diagnostics.empty()) {
        s["initial_layers"] = r.record.diagnostics.front().n_layers;
        s["final_layers"] = r.record.diagnostics.back().n_layers;
    }
    j["summary"] = s;
    return j;
}

} // namespace

void write_outputs(const ExperimentResult& result, const std::string& dir) {
    if (result.record.snapshots.empty()) {
        std::cerr << "warning: run produced no snapshots; nothing written to "
                  << dir << "\n";
        return;
    }
    fs::create_directories(dir);

    write_snapshots_csv(result.record, dir + "/snapshots.csv");
    write_diagnostics_csv(result.record, dir + "/diagnostics.csv");
    write_text(dir + "/run.json", run_json(result).dump(2) + "\n");

    const MaterialModel model = build_model(result.config.model);
    write_text(dir + "/energy.json",
               energy_json(result, model).dump(2) + "\n");

    const Snapshot& last = result.record.snapshots.back();
    write_checkpoint(dir + "/checkpoint.bin", result.record.grid, last.t,
                     last.u);

    std::vector<double> event_times;
    if (result.has_track) {
        write_trajectories_csv(result.track, dir + "/trajectories.csv");
        write_text(dir + "/events.json",
                   events_json(result.track).dump(2) + "\n");
        for (const CollapseEvent& e : result.track.events)
            event_times.push_back(e.t);
    }

    std::vector<double> snap_times;
    for (const Snapshot& s : result.record.snapshots)
        snap_times.push_back(s.t);
    write_text(dir + "/plot_snapshots.py",
               snapshot_plot_script(plot_times(snap_times, event_times)));
    write_text(dir + "/plot_energy.py", energy_plot_script());
    if (result.has_track)
        write_text(dir + "/plot_trajectories.py",
                   trajectory_plot_script(event_times));
}

SweepResult run_sweep(const ExperimentConfig& config, int jobs) {
    const std::vector<double>& eps = config.sweep_epsilons;
    if (eps.size() < 2)
        throw InsufficientData("a sweep needs at least two epsilon values");

    ExperimentConfig worker = config;
    worker.analysis.track = true;  // collapse times are the sweep's product

    SweepResult result;
    result.runs.resize(eps.size());
    const int n = static_cast<int>(eps.size());
    const int threads = std::clamp(jobs, 1, n);
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(eps.size());
    auto body = [&]() {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                result.runs[i] = run_experiment(worker, eps[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int w = 0; w < threads; ++w) pool.emplace_back(body);
        for (std::thread& th : pool) th.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    const MaterialModel model = build_model(config.model);
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < n; ++i) {
        const TrackReport& track = result.runs[i].track;
        const double t_c = track.events.empty()
                               ? std::numeric_limits<double>::infinity()
                               : track.events.front().t;
        samples.emplace_back(eps[i], t_c);
    }
    try {
        result.fit = lifetime_scaling_fit(samples,
                                          config.layers.effective_radius(),
                                          model.lambda().value_or(0.0));
    } catch (const InsufficientData&) {
        // fewer than two runs collapsed: no fit exists, keep the samples
        for (const auto& [e, t] : samples) {
            result.fit.epsilons.push_back(e);
            result.fit.collapse_times.push_back(t);
        }
    }
    return result;
}

void write_sweep_outputs(const SweepResult& sweep, const std::string& dir) {
    fs::create_directories(dir);
    for (const ExperimentResult& r : sweep.runs)
        write_outputs(r, dir + "/eps-" + format_full(r.epsilon));

    json j;
    j["epsilons"] = sweep.fit.epsilons;
    json times = json::array();
    for (double t : sweep.fit.collapse_times)
        times.push_back(finite_or_null(t));
    j["collapse_times"] = times;
    j["a_fit"] = sweep.fit.a_fit;
    j["intercept"] = sweep.fit.intercept;
    j["ceiling"] = sweep.fit.ceiling;
    j["check_exponent"] = sweep.fit.check_exponent;
    j["pass"] = sweep.fit.pass;
    write_text(dir + "/sweep.json", j.dump(2) + "\n");
    write_text(dir + "/plot_sweep.py", sweep_plot_script());
}

json analyze_directory(const std::string& dir) {
    std::ifstream meta_in(dir + "/run.json");
    if (!meta_in)
        throw IOFailure("cannot open for reading: " + dir + "/run.json");
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::exception& e) {
        throw IOFailure("malformed run.json in " + dir + ": " + e.what());
    }

    ExperimentConfig config;
    double epsilon = 0.0;
    try {
        config = config_from_json(meta.at("config"));
        epsilon = meta.at("epsilon").get<double>();
    } catch (const json::exception& e) {
        throw IOFailure("incomplete run.json in " + dir + ": " + e.what());
    }

    const MaterialModel model = build_model(config.model);
    RunRecord record = read_snapshots_csv(dir + "/snapshots.csv");
    record.epsilon = epsilon;
    record.diagnostics = read_diagnostics_csv(dir + "/diagnostics.csv");

    // recompute what the solver recorded, from the stored fields alone
    json rows = json::array();
    double max_energy_dev = 0.0;
    int count_mismatches = 0;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    double min_u = std::numeric_limits<double>::infinity();
    double max_u = -min_u;
    const double slack =
        record.diagnostics.empty()
            ? 0.0
            : 1e-8 * std::abs(record.diagnostics.front().energy);
    for (std::size_t i = 0; i < record.snapshots.size(); ++i) {
        const Snapshot& s = record.snapshots[i];
        PhaseField u{record.grid, s.u};
        const EnergyReport e = energy(u, model, epsilon);
        const InterfaceSet iface = interface_of(u, model);
        const int layers = static_cast<int>(iface.positions.size());
        json row = {{"t", s.t},
                    {"energy", e.value},
                    {"n_layers", layers}};
        if (i < record.diagnostics.size()) {
            const DiagnosticsRow& d = record.diagnostics[i];
            max_energy_dev =
                std::max(max_energy_dev, std::abs(e.value - d.energy));
            if (layers != d.n_layers) ++count_mismatches;
            row["recorded_energy"] = d.energy;
            row["recorded_n_layers"] = d.n_layers;
        }
        rows.push_back(row);
        if (e.value > prev + slack) monotone = false;
        prev = e.value;
        min_u = std::min(min_u, u.min());
        max_u = std::max(max_u, u.max());
    }

    json out;
    out["name"] = config.name;
    out["epsilon"] = epsilon;
    out["rows"] = rows;
    out["max_energy_deviation"] = max_energy_dev;
    out["layer_count_mismatches"] = count_mismatches;
    out["energy_monotone"] = monotone;
    out["min_u"] = min_u;
    out["max_u"] = max_u;
    out["within_phase_range"] = min_u >= model.alpha() - 1e-8 &&
                                max_u <= model.beta() + 1e-8;
    out["dissipation_residual"] = record.diagnostics.size() >= 2
                                      ? json(dissipation_residual(record))
                                      : json(nullptr);
    write_text(dir + "/analysis.json", out.dump(2) + "\n");
    return out;
}

void emit_plots(const std::string& dir) {
    if (fs::exists(dir + "/sweep.json")) {
        write_text(dir + "/plot_sweep.py", sweep_plot_script());
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_directory() &&
                entry.path().filename().string().rfind("eps-", 0) == 0)
                emit_plots(entry.path().string());
        return;
    }

    const RunRecord record = read_snapshots_csv(dir + "/snapshots.csv");
    if (record.snapshots.empty()) {
        std::cerr << "warning: no snapshots in " << dir
                  << "; no plots emitted\n";
        return;
    }

    std::vector<double> event_times;
    bool has_track = false;
    {
        std::ifstream ev(dir + "/events.json");
        if (ev) {
            try {
                json j = json::parse(ev);
                for (const json& e : j.at("events"))
                    event_times.push_back(e.at("t").get<double>());
                has_track = true;
            } catch (const json::exception& e) {
                throw IOFailure("malformed events.json in " + dir + ": " +
                                e.what());
            }
        }
    }

    std::vector<double> snap_times;
    for (const Snapshot& s : record.snapshots) snap_times.push_back(s.t);
    write_text(dir + "/plot_snapshots.py",
               snapshot_plot_script(plot_times(snap_times, event_times)));
    if (fs::exists(dir + "/diagnostics.csv"))
        write_text(dir + "/plot_energy.py", energy_plot_script());
    if (has_track && fs::exists(dir + "/trajectories.csv"))
        write_text(dir + "/plot_trajectories.py",
                   trajectory_plot_script(event_times));
}

} // namespace metastab
