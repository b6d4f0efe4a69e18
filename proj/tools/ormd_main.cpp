// Copyright 2026 The ORMD Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ormd/artifacts.hpp"
#include "ormd/scenario.hpp"

namespace {

int run_cli(int argc, char** argv) {
    CLI::App app{"Pulse design and simulation for Rydberg-blockade CZ gates "
                 "driven by off-resonant modulated pulses"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    double rel_tol = ormd::kDefaultRelTol;
    app.add_option("--rel-tol", rel_tol, "integrator relative tolerance")
        ->capture_default_str();

    auto add_common = [&](CLI::App* sub, bool config_is_dir = false) {
        sub->add_option("--config", config_path,
                        config_is_dir ? "scenario directory (with manifest.json)"
                                      : "scenario file")
            ->required();
        sub->add_option("--out", out_dir, "output directory")->required();
    };

    auto* evaluate = app.add_subcommand("evaluate", "run a scenario and write its artifacts");
    add_common(evaluate);

    auto* optimize = app.add_subcommand("optimize", "search waveform parameters");
    add_common(optimize);
    ormd::OptimizeOverrides overrides;
    long budget = -1;
    unsigned long long seed = 0;
    int n_starts = 0;
    double target = -1.0;
    optimize->add_option("--budget", budget, "objective evaluation budget");
    optimize->add_option("--seed", seed, "RNG seed");
    optimize->add_option("--starts", n_starts, "number of multi-starts");
    optimize->add_option("--target", target, "early-stop objective target");

    auto* doppler = app.add_subcommand("doppler", "sweep the Doppler shift grid");
    add_common(doppler);

    auto* scan = app.add_subcommand("scan-tp", "scan pulse time over the scenario range");
    add_common(scan);
    int steps = 0;
    double scan_target = 1e-4;
    scan->add_option("--steps", steps, "coarse grid points");
    scan->add_option("--target", scan_target, "stop refining once this error is reached");

    auto* reproduce = app.add_subcommand("reproduce-all", "run every bundled scenario");
    add_common(reproduce, true);
    double threshold = 1e-4;
    reproduce->add_option("--threshold", threshold, "pass/fail gate-error threshold")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (evaluate->parsed()) {
        const auto config = ormd::read_scenario_file(config_path);
        const auto outcome = ormd::run_evaluate(config, out_dir, rel_tol);
        std::cout << config.name << ": T_p = " << ormd::format_sig(outcome.tp_us)
                  << " us, gate error = " << ormd::format_sig(outcome.result.gate_error)
                  << ", conditional phase = " << ormd::format_sig(outcome.result.cond_phase)
                  << " rad\n";
        return 0;
    }
    if (optimize->parsed()) {
        if (budget >= 0) overrides.budget = budget;
        if (seed != 0) overrides.seed = seed;
        if (n_starts > 0) overrides.n_starts = n_starts;
        if (target >= 0.0) overrides.target_objective = target;
        const auto config = ormd::read_scenario_file(config_path);
        const auto report = ormd::run_optimize(config, out_dir, overrides, rel_tol);
        std::cout << config.name << ": best objective = " << ormd::format_sig(report.best.total)
                  << " (gate error " << ormd::format_sig(report.best.gate_error) << ") after "
                  << report.evaluation_count << " evaluations\n";
        if (report.infeasible()) {
            std::cerr << "warning: no penalty-free point found within the budget\n";
            return 2;
        }
        return 0;
    }
    if (doppler->parsed()) {
        const auto config = ormd::read_scenario_file(config_path);
        const auto sweep = ormd::run_doppler(config, out_dir, rel_tol);
        std::cout << config.name
                  << ": phase slope = " << ormd::format_sig(sweep.phase_slope)
                  << " rad/MHz, leakage exponent = " << ormd::format_sig(sweep.leakage_exponent)
                  << ", phase exponent = " << ormd::format_sig(sweep.phase_exponent) << "\n";
        return 0;
    }
    if (scan->parsed()) {
        const auto config = ormd::read_scenario_file(config_path);
        const auto result = ormd::run_scan_tp(
            config, out_dir, steps > 0 ? std::optional<int>(steps) : std::nullopt, scan_target,
            rel_tol);
        std::cout << config.name << ": minimum gate error "
                  << ormd::format_sig(result.best_gate_error) << " at T_p = "
                  << ormd::format_sig(result.best_tp_us) << " us (" << result.evaluations
                  << " evaluations)\n";
        return 0;
    }
    if (reproduce->parsed()) {
        const auto report = ormd::run_reproduce_all(config_path, out_dir, threshold, rel_tol);
        return report.all_passed ? 0 : 3;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ormd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ormd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
