// Copyright 2026 The qsltraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsltraj/cli.hpp"

#include "qsltraj/ensemble.hpp"
#include "qsltraj/errors.hpp"
#include "qsltraj/integrator.hpp"
#include "qsltraj/io.hpp"
#include "qsltraj/metrics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace qsltraj {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\"'");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\"'");
    return std::string(s.substr(b, e - b + 1));
}

// Progress lines on stderr, about every 10% of the work.
std::function<void(std::uint64_t, std::uint64_t)> progress_printer(std::ostream& err, std::string label) {
    auto last = std::make_shared<std::uint64_t>(0);
    return [&err, label = std::move(label), last](std::uint64_t done, std::uint64_t total) {
        const std::uint64_t step = std::max<std::uint64_t>(total / 10, 1);
        if (done == total || done >= *last + step) {
            *last = done;
            err << label << ": " << done << "/" << total << " trajectories\n" << std::flush;
        }
    };
}

EnsembleOptions ensemble_options(const RunConfig& cfg, std::ostream& err, const std::string& label) {
    EnsembleOptions o;
    o.workers = cfg.workers;
    o.n_bins = cfg.n_bins;
    o.target_angle = cfg.target_angle;
    o.progress = progress_printer(err, label);
    return o;
}

void prepare_output(const RunConfig& cfg, const std::vector<std::string>& names) {
    std::filesystem::create_directories(cfg.output_dir);
    check_writable(cfg.output_dir, names, cfg.overwrite);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_trajectory(const RunConfig& cfg, std::ostream& out) {
    const std::vector<std::string> names{"trajectory.csv", "trajectory.json"};
    prepare_output(cfg, names);
    const TrajectoryRecord rec = simulate_trajectory(cfg.params, cfg.traj_index);
    const VelocitySample s = conditioned_velocity(rec, cfg.params, cfg.target_angle);
    json j{{"traj_id", rec.traj_index},
           {"seed_used", rec.seed_used},
           {"v_c", s.v_conditioned},
           {"bures_final", s.bures_final},
           {"f_final", s.f_final},
           {"passage_time", s.passage_time ? json(*s.passage_time) : json(nullptr)},
           {"liouvillian_avg", s.terms.liouvillian_avg},
           {"ito_integral", s.terms.ito_integral},
           {"innovation_sq_avg", s.terms.innovation_sq_avg},
           {"projection_sum", s.terms.projection_sum},
           {"clamp_events", rec.clamp_events},
           {"config", config_json(cfg)}};
    write_file(cfg.output_dir / names[0], trajectory_csv(rec, cfg.stride));
    write_file(cfg.output_dir / names[1], dump(j));
    out << "wrote " << (cfg.output_dir / names[0]).string() << " (" << rec.states.size() << " grid points)\n";
    return exit_code::kOk;
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::vector<std::string> names{"ensemble.csv", "histogram.csv", "colormap.csv", "curves.csv", "stats.json"};
    prepare_output(cfg, names);
    const EnsembleStats stats = run_ensemble(cfg.params, ensemble_options(cfg, err, "ensemble"));
    json j = stats_json(stats);
    j["config"] = config_json(cfg);
    write_file(cfg.output_dir / names[0], ensemble_csv(stats.samples));
    write_file(cfg.output_dir / names[1], histogram_csv(stats.histogram));
    write_file(cfg.output_dir / names[2], colormap_csv(stats.colormap));
    write_file(cfg.output_dir / names[3], curves_csv(stats.colormap));
    write_file(cfg.output_dir / names[4], dump(j));
    out << "V = " << format_real(stats.qsl.v_ensemble) << ", V_QSL = " << format_real(stats.qsl.v_qsl)
        << ", violation fraction = " << format_real(stats.violation_fraction) << "\n";
    return exit_code::kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::vector<std::string> names{"sweep.csv", "sweep.json"};
    prepare_output(cfg, names);
    const SweepResult sweep = sweep_kappa(cfg.params, cfg.kappas, ensemble_options(cfg, err, "sweep"));
    json j = sweep_json(sweep);
    j["config"] = config_json(cfg);
    write_file(cfg.output_dir / names[0], sweep_csv(sweep));
    write_file(cfg.output_dir / names[1], dump(j));
    out << "std_vc monotone across kappas: " << (sweep.std_monotone ? "yes" : "no") << "\n";
    return exit_code::kOk;
}

int cmd_passage(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const std::vector<std::string> names{"passage.csv", "passage_histogram.csv", "passage.json"};
    prepare_output(cfg, names);
    const PassageStats p =
        passage_time_distribution(cfg.params, cfg.target_angle, ensemble_options(cfg, err, "passage"));
    json j = passage_json(p);
    j["config"] = config_json(cfg);
    write_file(cfg.output_dir / names[0], passage_csv(p));
    write_file(cfg.output_dir / names[1], p.reached > 0 ? histogram_csv(p.histogram) : std::string(kHistogramHeader) + "\n");
    write_file(cfg.output_dir / names[2], dump(j));
    out << "reached " << p.reached << "/" << p.reached + p.unreached << ", fraction below tau_QSL = "
        << format_real(p.fraction_below_tau_qsl) << "\n";
    return exit_code::kOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const std::vector<std::string> names{"validation.json"};
    prepare_output(cfg, names);
    ValidationOptions vo;
    vo.n_traj = cfg.params.n_traj;
    vo.workers = cfg.workers;
    vo.fault = cfg.fault;
    const ValidationReport rep = run_validation(cfg.params, vo);
    json j = rep.to_json();
    j["config"] = config_json(cfg);
    write_file(cfg.output_dir / names[0], dump(j));
    out << rep.table();
    return rep.all_passed() ? exit_code::kOk : exit_code::kValidation;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const std::string item = trim(rest.substr(0, comma));
        if (item.empty()) {
            if (comma == std::string_view::npos && out.empty() && trim(text).empty()) break;
            throw ConfigError("kappas", "malformed list '" + text + "'");
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size()) {
            throw ConfigError("kappas", "not a number: '" + item + "'");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ConfigError("kappas", "empty list");
    return out;
}

json config_json(const RunConfig& cfg) {
    json j = params_json(cfg.params);
    j["command"] = cfg.command;
    j["target_angle"] = cfg.target_angle;
    j["kappas"] = cfg.kappas;
    j["n_bins"] = cfg.n_bins;
    if (cfg.command == "trajectory") {
        j["traj_index"] = cfg.traj_index;
        j["stride"] = cfg.stride;
    }
    return j;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string initial = format_bloch(cfg.params.initial);
    std::string kappas = "0.05,0.1,0.25,0.5";
    std::string fault = "none";

    CLI::App app{"Conditioned qubit trajectories under continuous measurement and quantum speed limits", "qsltraj"};
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "Read 'key = value' settings from a file (flags take precedence)");
    app.add_option("--omega", cfg.params.omega, "Rotation frequency omega")->capture_default_str();
    app.add_option("--kappa", cfg.params.kappa, "Measurement strength kappa")->capture_default_str();
    app.add_option("--tau", cfg.params.tau, "Total duration")->capture_default_str();
    app.add_option("--dt", cfg.params.dt, "Time step")->capture_default_str();
    app.add_option("--n-traj", cfg.params.n_traj, "Number of trajectories")->capture_default_str();
    app.add_option("--seed", cfg.params.seed, "Root seed")->capture_default_str();
    app.add_option("--initial", initial, "Initial pure state as x,y,z")->capture_default_str();
    app.add_option("--target-angle", cfg.target_angle, "Target Bures angle for passage times")->capture_default_str();
    app.add_option("--kappas", kappas, "Comma-separated kappa values for sweep")->capture_default_str();
    app.add_option("--n-bins", cfg.n_bins, "Velocity histogram bins")->capture_default_str();
    app.add_option("--workers", cfg.workers, "Worker threads (0: hardware concurrency)")->capture_default_str();
    app.add_option("--out", cfg.output_dir, "Output directory")->capture_default_str();
    app.add_flag("--overwrite", cfg.overwrite, "Replace existing output files");
    app.add_option("--traj-index", cfg.traj_index, "Trajectory index for 'trajectory'")->capture_default_str();
    app.add_option("--stride", cfg.stride, "Keep every n-th grid point in trajectory.csv")->capture_default_str();
    app.add_option("--inject-fault", fault, "Test hook")->group("");

    for (const auto& [name, help] : std::initializer_list<std::pair<const char*, const char*>>{
             {"trajectory", "Simulate one trajectory"},
             {"ensemble", "Run an ensemble and write velocity statistics"},
             {"sweep", "Velocity spread across measurement strengths"},
             {"passage", "Passage-time distribution to the target angle"},
             {"validate", "Run the invariant checks"}}) {
        app.add_subcommand(name, help)->fallthrough();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::kConfig;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    try {
        cfg.params.initial = parse_bloch(initial);
        if (cfg.command == "sweep") cfg.kappas = parse_real_list(kappas);
        if (fault == "diffusion-sign") {
            cfg.fault = Fault::diffusion_sign;
        } else if (fault != "none") {
            throw ConfigError("inject-fault", "unknown fault '" + fault + "'");
        }
        cfg.params.validate();
        if (!(cfg.target_angle > 0.0 && cfg.target_angle <= std::numbers::pi / 2.0)) {
            throw ConfigError("target_angle", "must lie in (0, pi/2]");
        }
        if (cfg.n_bins < 2) throw ConfigError("n_bins", "must be >= 2");
        if (cfg.stride < 1) throw ConfigError("stride", "must be >= 1");
        if (cfg.command == "sweep") {
            for (double k : cfg.kappas) {
                if (!(k >= 0.0)) throw ConfigError("kappas", "each kappa must be >= 0");
            }
        }

        if (cfg.command == "trajectory") return cmd_trajectory(cfg, out);
        if (cfg.command == "ensemble") return cmd_ensemble(cfg, out, err);
        if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
        if (cfg.command == "passage") return cmd_passage(cfg, out, err);
        return cmd_validate(cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::kConfig;
    } catch (const InvalidStateError& e) {
        err << "config error: initial: " << e.what() << "\n";
        return exit_code::kConfig;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_code::kNumerical;
    } catch (const std::logic_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_code::kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::kIoError;
    }
}

}  // namespace qsltraj
