// Command-line front end: run experiments from JSON configs or built-in
// presets, sweep epsilon for lifetime scaling, re-audit finished runs, and
// regenerate plot scripts.  Errors leave a machine-readable JSON object on
// stderr and a nonzero exit code.

#include <cstdlib>
#include <cxxabi.h>
#include <iostream>
#include <memory>
#include <string>
#include <typeinfo>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metastab/errors.hpp"
#include "metastab/harness.hpp"

namespace {

using metastab::ExperimentConfig;

std::string error_kind(const std::exception& e) {
    int status = 0;
    std::unique_ptr<char, void (*)(void*)> demangled(
        abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status),
        std::free);
    std::string name = status == 0 && demangled ? demangled.get()
                                                : typeid(e).name();
    const std::size_t colon = name.rfind("::");
    if (colon != std::string::npos) name = name.substr(colon + 2);
    return name;
}

void print_error(const std::exception& e) {
    nlohmann::json j;
    j["error"] = error_kind(e);
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
}

// --eps overrides the sweep list; --tmax-override shortens or extends the
// horizon without touching the rest of the config
void apply_overrides(ExperimentConfig& config,
                     const std::vector<double>& eps_list,
                     double tmax_override) {
    if (!eps_list.empty()) {
        if (eps_list.size() == 1)
            config.epsilon = eps_list.front();
        config.sweep_epsilons = eps_list;
    }
    if (tmax_override > 0.0) config.t_max = tmax_override;
}

int run_single(const ExperimentConfig& config, const std::string& out_dir) {
    const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
    const metastab::ExperimentResult result =
        metastab::run_experiment(config);
    metastab::write_outputs(result, dir);
    nlohmann::json j;
    j["output_dir"] = dir;
    j["final_t"] = result.record.final_t;
    j["steps"] = result.record.steps;
    j["wall_seconds"] = result.record.wall_seconds;
    if (!result.record.diagnostics.empty())
        j["final_layers"] = result.record.diagnostics.back().n_layers;
    if (result.has_track) j["collapses"] = result.track.events.size();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_sweep_cmd(const ExperimentConfig& config, const std::string& out_dir,
                  int jobs) {
    const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
    const metastab::SweepResult sweep = metastab::run_sweep(config, jobs);
    metastab::write_sweep_outputs(sweep, dir);
    nlohmann::json j;
    j["output_dir"] = dir;
    j["epsilons"] = sweep.fit.epsilons;
    j["a_fit"] = sweep.fit.a_fit;
    j["ceiling"] = sweep.fit.ceiling;
    j["pass"] = sweep.fit.pass;
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for slowly-moving transition layers "
                 "in bistable reaction-diffusion models"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir, analyze_dir, plot_dir;
    std::vector<double> eps_list;
    double tmax_override = 0.0;
    int jobs = 1;
    bool full_horizon = false, list_presets = false;

    CLI::App* cmd_run = app.add_subcommand(
        "run", "integrate one experiment described by a JSON config");
    cmd_run->add_option("--config", config_path, "path to the JSON config")
        ->required();
    cmd_run->add_option("--out", out_dir,
                        "output directory (defaults to the config's)");
    cmd_run->add_option("--eps", eps_list,
                        "override epsilon (last value wins for a single run)");
    cmd_run->add_option("--tmax-override", tmax_override,
                        "replace the configured time horizon");

    CLI::App* cmd_preset = app.add_subcommand(
        "preset", "integrate one of the built-in experiments");
    cmd_preset->add_option("name", preset_name, "preset name");
    cmd_preset->add_flag("--list", list_presets, "list preset names and exit");
    cmd_preset->add_option("--out", out_dir,
                           "output directory (defaults to out/<name>)");
    cmd_preset->add_flag("--full", full_horizon,
                         "use the full published horizon instead of the "
                         "desk-scale one");
    cmd_preset->add_option("--eps", eps_list, "override epsilon");
    cmd_preset->add_option("--tmax-override", tmax_override,
                           "replace the preset's time horizon");

    CLI::App* cmd_sweep = app.add_subcommand(
        "sweep", "run one experiment across several epsilons and fit the "
                 "lifetime scaling");
    cmd_sweep->add_option("--config", config_path, "path to the JSON config");
    cmd_sweep->add_option("--preset", preset_name, "start from a preset");
    cmd_sweep->add_option("--eps", eps_list,
                          "epsilon values (overrides the config's sweep "
                          "list; repeatable)");
    cmd_sweep->add_option("--jobs", jobs, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--out", out_dir, "output directory");
    cmd_sweep->add_flag("--full", full_horizon, "full published horizon");
    cmd_sweep->add_option("--tmax-override", tmax_override,
                          "replace the configured time horizon");

    CLI::App* cmd_analyze = app.add_subcommand(
        "analyze", "recompute energies and layer counts from a finished "
                   "run's CSVs and compare with what was recorded");
    cmd_analyze->add_option("--dir", analyze_dir, "run output directory")
        ->required();

    CLI::App* cmd_plot = app.add_subcommand(
        "plot", "regenerate the matplotlib scripts for a finished run or "
                "sweep directory");
    cmd_plot->add_option("--dir", plot_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            ExperimentConfig config = metastab::load_config(config_path);
            apply_overrides(config, eps_list, tmax_override);
            return run_single(config, out_dir);
        }
        if (cmd_preset->parsed()) {
            if (list_presets) {
                for (const std::string& name : metastab::preset_names())
                    std::cout << name << "\n";
                return 0;
            }
            if (preset_name.empty())
                throw metastab::UnknownPreset(
                    "preset requires a name (or --list)");
            ExperimentConfig config =
                metastab::preset(preset_name, full_horizon);
            apply_overrides(config, eps_list, tmax_override);
            return run_single(config, out_dir);
        }
        if (cmd_sweep->parsed()) {
            if (config_path.empty() == preset_name.empty())
                throw metastab::ConfigViolation(
                    "sweep needs exactly one of --config or --preset");
            ExperimentConfig config =
                config_path.empty()
                    ? metastab::preset(preset_name, full_horizon)
                    : metastab::load_config(config_path);
            apply_overrides(config, eps_list, tmax_override);
            return run_sweep_cmd(config, out_dir, jobs);
        }
        if (cmd_analyze->parsed()) {
            const nlohmann::json report =
                metastab::analyze_directory(analyze_dir);
            std::cout << report.dump(2) << "\n";
            return 0;
        }
        if (cmd_plot->parsed()) {
            metastab::emit_plots(plot_dir);
            return 0;
        }
    } catch (const std::exception& e) {
        print_error(e);
        return 1;
    }
    return 0;
}
