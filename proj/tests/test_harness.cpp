#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "metastab/errors.hpp"
#include "metastab/harness.hpp"

using namespace metastab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("metastab-harness-" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const {
        return (path / name).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Two layers 0.5 apart on [-1, 1]: attracts and annihilates near t = 28 at
// epsilon = 0.1, so a 50-unit horizon sees the whole lifetime in well under
// a second.
ExperimentConfig tight_pair() {
    ExperimentConfig c;
    c.name = "tight-pair";
    c.model = classical_spec();
    c.layers.a = -1.0;
    c.layers.b = 1.0;
    c.layers.jumps = {-0.25, 0.25};
    c.epsilon = 0.1;
    c.t_max = 50.0;
    c.stop_after_collapse = true;
    return c;
}

bool same_record(const RunRecord& x, const RunRecord& y) {
    if (x.final_t != y.final_t || x.steps != y.steps) return false;
    if (x.snapshots.size() != y.snapshots.size()) return false;
    for (std::size_t k = 0; k < x.snapshots.size(); ++k) {
        if (x.snapshots[k].t != y.snapshots[k].t) return false;
        if (x.snapshots[k].u != y.snapshots[k].u) return false;
    }
    return true;
}

} // namespace

TEST_CASE("preset catalog round-trips through JSON") {
    const std::vector<std::string> names = preset_names();
    CHECK(names.size() == 8);
    for (const std::string& name : names) {
        CAPTURE(name);
        const ExperimentConfig c = preset(name);
        CHECK(parse_config(serialize_config(c)) == c);
        CHECK(c.layers.count() == 6);
        CHECK(c.name == name);
    }
    CHECK_THROWS_AS(preset("fig9-unheard-of"), UnknownPreset);

    CHECK(preset("fig1-classical").epsilon == 0.1);
    CHECK(preset("fig1-classical").t_max == 30000.0);
    CHECK(preset("fig3b-exp-eps005").epsilon == 0.05);
    CHECK(preset("fig5a-porous-eps01").scheme == Scheme::explicit_euler);
    // the long published horizon sits behind the full flag
    CHECK(preset("fig2-mullins").t_max == 100000.0);
    CHECK(preset("fig2-mullins", true).t_max == 2000000.0);
}

TEST_CASE("config serialization is total: every field survives") {
    ExperimentConfig c;
    c.name = "bespoke";
    c.model = degenerate_reaction_spec(3);
    c.layers.a = -2.5;
    c.layers.b = 3.0;
    c.layers.jumps = {-1.0, 0.25, 2.0};
    c.layers.start = Phase::beta;
    c.layers.radius = 0.3;
    c.epsilon = 0.07;
    c.sweep_epsilons = {0.07, 0.09, 0.11};
    c.scheme = Scheme::explicit_euler;
    c.dt = 1e-4;
    c.t_max = 123.5;
    c.cells_per_eps = 14;
    c.snapshots.t0 = 0.5;
    c.snapshots.ratio = 1.25;
    c.adaptive.enabled = false;
    c.adaptive.plateau_threshold = 2e-7;
    c.adaptive.active_threshold = 3e-3;
    c.adaptive.grow = 1.5;
    c.adaptive.shrink = 0.25;
    c.stop_after_collapse = true;
    c.analysis.track = false;
    c.analysis.energy_audit = false;
    c.analysis.certify = false;
    c.analysis.displacement_threshold = 0.125;
    c.output_dir = "elsewhere/deep";
    c.seed = 987654321ULL;
    CHECK(parse_config(serialize_config(c)) == c);

    ExperimentConfig custom;
    custom.model.family = "custom-polynomial-reaction";
    custom.model.roots = {-1.0, 0.2, 1.0};
    custom.model.powers = {1, 1, 3};
    CHECK(parse_config(serialize_config(custom)) == custom);
}

TEST_CASE("config parsing rejects what it cannot run") {
    CHECK_THROWS_AS(parse_config("not json at all"), ConfigViolation);
    CHECK_THROWS_AS(parse_config("{\"epsilon\": -0.5}"), ConfigViolation);
    CHECK_THROWS_AS(parse_config("{\"solver\": {\"cells_per_eps\": 4}}"),
                    ConfigViolation);
    CHECK_THROWS_AS(parse_config("{\"sweep_epsilons\": [0.1, 0.0]}"),
                    ConfigViolation);
    CHECK_THROWS_AS(load_config("/nonexistent/metastab.json"), IOFailure);
}

TEST_CASE("a run is deterministic down to the output bytes") {
    TempDir tmp("determinism");
    const ExperimentConfig config = tight_pair();

    const ExperimentResult r1 = run_experiment(config);
    const ExperimentResult r2 = run_experiment(config);
    CHECK(same_record(r1.record, r2.record));

    CHECK(r1.has_track);
    CHECK(r1.has_cert);
    CHECK(r1.has_dissipation);
    CHECK(r1.cert.certified);
    CHECK(r1.dissipation < 1e-3);
    REQUIRE(r1.track.events.size() == 1);
    CHECK(r1.track.events[0].t > 10.0);
    CHECK(r1.track.events[0].t < 50.0);
    CHECK(r1.record.final_t < 50.0);  // the collapse stop kicked in

    write_outputs(r1, tmp.sub("a"));
    write_outputs(r2, tmp.sub("b"));
    for (const char* name : {"snapshots.csv", "diagnostics.csv",
                             "trajectories.csv", "events.json",
                             "energy.json", "checkpoint.bin"}) {
        CAPTURE(name);
        CHECK(slurp(tmp.sub("a") + "/" + name) ==
              slurp(tmp.sub("b") + "/" + name));
    }
    for (const char* name :
         {"run.json", "plot_snapshots.py", "plot_energy.py",
          "plot_trajectories.py"}) {
        CAPTURE(name);
        CHECK(fs::exists(tmp.sub("a") + "/" + name));
    }
}

TEST_CASE("an empty record writes nothing") {
    TempDir tmp("empty");
    ExperimentResult blank;
    blank.config = tight_pair();
    write_outputs(blank, tmp.sub("void"));
    CHECK(!fs::exists(tmp.sub("void")));
}

TEST_CASE("the run.json echo reproduces the run it describes") {
    TempDir tmp("echo");
    const ExperimentResult first = run_experiment(tight_pair(), 0.12);
    write_outputs(first, tmp.sub("run"));

    std::ifstream in(tmp.sub("run") + "/run.json");
    REQUIRE(bool(in));
    const nlohmann::json meta = nlohmann::json::parse(in);
    const ExperimentConfig echo = config_from_json(meta.at("config"));
    CHECK(echo.epsilon == 0.12);
    CHECK(echo.sweep_epsilons.empty());

    const ExperimentResult again = run_experiment(echo);
    CHECK(same_record(first.record, again.record));
}

TEST_CASE("concurrent sweep equals the sequential one record by record") {
    ExperimentConfig config = tight_pair();
    config.sweep_epsilons = {0.1, 0.125};

    const SweepResult seq = run_sweep(config, 1);
    const SweepResult par = run_sweep(config, 2);
    REQUIRE(seq.runs.size() == 2);
    REQUIRE(par.runs.size() == 2);
    for (std::size_t i = 0; i < seq.runs.size(); ++i) {
        CAPTURE(i);
        CHECK(same_record(seq.runs[i].record, par.runs[i].record));
        REQUIRE(seq.runs[i].track.events.size() ==
                par.runs[i].track.events.size());
    }
    CHECK(seq.fit.a_fit == par.fit.a_fit);
    CHECK(seq.fit.intercept == par.fit.intercept);

    // both collapse within the horizon, sooner for the larger epsilon
    CHECK(seq.fit.a_fit > 0.0);
    REQUIRE(seq.fit.collapse_times.size() == 2);
    CHECK(seq.fit.collapse_times[0] > seq.fit.collapse_times[1]);
    CHECK(std::isfinite(seq.fit.collapse_times[0]));

    TempDir tmp("sweep");
    write_sweep_outputs(seq, tmp.sub("s"));
    CHECK(fs::exists(tmp.sub("s") + "/sweep.json"));
    CHECK(fs::exists(tmp.sub("s") + "/plot_sweep.py"));
    CHECK(fs::exists(tmp.sub("s") + "/eps-0.1/snapshots.csv"));
    CHECK(fs::exists(tmp.sub("s") + "/eps-0.125/snapshots.csv"));
    const nlohmann::json sj =
        nlohmann::json::parse(slurp(tmp.sub("s") + "/sweep.json"));
    CHECK(sj.at("epsilons").size() == 2);
    CHECK(sj.at("a_fit").get<double>() == seq.fit.a_fit);
    CHECK(sj.at("pass").is_boolean());
}

TEST_CASE("sweep guards") {
    ExperimentConfig config = tight_pair();

    SUBCASE("fewer than two epsilons") {
        config.sweep_epsilons = {0.1};
        CHECK_THROWS_AS(run_sweep(config, 1), InsufficientData);
    }
    SUBCASE("no collapse anywhere leaves the fit unfilled but keeps runs") {
        config.sweep_epsilons = {0.1, 0.125};
        config.t_max = 1.0;  // far too short for any collapse
        config.stop_after_collapse = false;
        const SweepResult sweep = run_sweep(config, 2);
        REQUIRE(sweep.runs.size() == 2);
        CHECK(sweep.fit.a_fit == 0.0);
        CHECK(!sweep.fit.pass);
        REQUIRE(sweep.fit.collapse_times.size() == 2);
        CHECK(std::isinf(sweep.fit.collapse_times[0]));
    }
}

TEST_CASE("analyze recomputes exactly what the run recorded") {
    TempDir tmp("analyze");
    const ExperimentResult result = run_experiment(tight_pair());
    write_outputs(result, tmp.sub("run"));

    const nlohmann::json report = analyze_directory(tmp.sub("run"));
    CHECK(report.at("max_energy_deviation").get<double>() == 0.0);
    CHECK(report.at("layer_count_mismatches").get<int>() == 0);
    CHECK(report.at("energy_monotone").get<bool>());
    CHECK(report.at("within_phase_range").get<bool>());
    CHECK(report.at("dissipation_residual").get<double>() < 1e-3);
    CHECK(report.at("rows").size() == result.record.snapshots.size());
    CHECK(fs::exists(tmp.sub("run") + "/analysis.json"));

    CHECK_THROWS_AS(analyze_directory(tmp.sub("missing")), IOFailure);
}

TEST_CASE("plot scripts can be regenerated from the artifacts alone") {
    TempDir tmp("plots");
    const ExperimentResult result = run_experiment(tight_pair());
    write_outputs(result, tmp.sub("run"));

    for (const char* name :
         {"plot_snapshots.py", "plot_energy.py", "plot_trajectories.py"})
        fs::remove(tmp.sub("run") + "/" + name);
    emit_plots(tmp.sub("run"));
    for (const char* name :
         {"plot_snapshots.py", "plot_energy.py", "plot_trajectories.py"}) {
        CAPTURE(name);
        CHECK(fs::exists(tmp.sub("run") + "/" + name));
    }
    const std::string snap = slurp(tmp.sub("run") + "/plot_snapshots.py");
    CHECK(snap.find("snapshots.png") != std::string::npos);
    CHECK(snap.find("TIMES = [0, ") != std::string::npos);
    const std::string traj = slurp(tmp.sub("run") + "/plot_trajectories.py");
    CHECK(traj.find("EVENTS = [") != std::string::npos);
    CHECK(traj.find("EVENTS = []") == std::string::npos);  // one collapse

    SUBCASE("sweep directories fan out to their runs") {
        ExperimentConfig config = tight_pair();
        config.sweep_epsilons = {0.1, 0.125};
        write_sweep_outputs(run_sweep(config, 2), tmp.sub("s"));
        fs::remove(tmp.sub("s") + "/plot_sweep.py");
        fs::remove(tmp.sub("s") + "/eps-0.1/plot_snapshots.py");
        emit_plots(tmp.sub("s"));
        CHECK(fs::exists(tmp.sub("s") + "/plot_sweep.py"));
        CHECK(fs::exists(tmp.sub("s") + "/eps-0.1/plot_snapshots.py"));
    }
}
