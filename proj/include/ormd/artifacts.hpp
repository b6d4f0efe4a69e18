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

// Runners behind the CLI verbs. Each writes its artifacts (CSV with a header
// row, '.' decimals, 9 significant digits; JSON with stable key order) under
// an output directory and returns the in-memory results.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ormd/common.hpp"
#include "ormd/gate_metrics.hpp"
#include "ormd/optimizer.hpp"
#include "ormd/scenario.hpp"
#include "ormd/waveform.hpp"

namespace ormd {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path.string());
    return out;
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace detail

inline void write_waveform_csv(const WaveformSpec& w, const std::filesystem::path& path,
                               int points = 1001) {
    auto out = detail::open_out(path);
    out << "x,Omega_MHz,Detuning_MHz\n";
    for (int i = 0; i < points; ++i) {
        const double x = static_cast<double>(i) / (points - 1);
        const auto s = eval_waveform(w, x);
        out << format_sig(x) << "," << format_sig(s.omega_mhz) << ","
            << format_sig(s.detuning_mhz) << "\n";
    }
}

inline void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    const int dim = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().state.size());
    out << "t_us";
    for (int i = 0; i < dim; ++i) out << ",re_" << i << ",im_" << i;
    for (int i = 0; i < dim; ++i) out << ",pop_" << i;
    out << "\n";
    for (const auto& s : traj.samples) {
        out << format_sig(s.t_us);
        for (int i = 0; i < dim; ++i)
            out << "," << format_sig(s.state[i].real()) << "," << format_sig(s.state[i].imag());
        for (int i = 0; i < dim; ++i) out << "," << format_sig(std::norm(s.state[i]));
        out << "\n";
    }
}

struct EvaluateOutcome {
    GateResult result;
    double tp_us = 0.0;
    double runtime_s = 0.0;
};

/// Full gate evaluation with artifacts: waveform.csv (1001 points),
/// trajectory_{single,double}.csv, summary.json. The waveform must be
/// physical (non-negative amplitude); the pulse time must be resolved.
inline EvaluateOutcome run_evaluate(const ScenarioConfig& config,
                                    const std::filesystem::path& out_dir,
                                    double rel_tol = kDefaultRelTol,
                                    int trajectory_samples_per_pulse = 500) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const WaveformSpec w = config.waveform();
    if (!w.is_physical())
        throw PhysicalityError("scenario '" + config.name +
                               "': Rabi amplitude dips to " + format_sig(w.min_amplitude()) +
                               " MHz; negative amplitudes are unphysical");
    const GateScenario scenario = config.gate_scenario();
    Trajectory traj_single, traj_double;
    EvaluateOutcome outcome;
    outcome.tp_us = scenario.schedule.tp_us;
    outcome.result = evaluate_gate(scenario, 0.0, rel_tol, true, &traj_single, &traj_double,
                                   trajectory_samples_per_pulse);
    outcome.runtime_s = detail::seconds_since(t0);

    write_waveform_csv(w, out_dir / "waveform.csv");
    write_trajectory_csv(traj_single, out_dir / "trajectory_single.csv");
    write_trajectory_csv(traj_double, out_dir / "trajectory_double.csv");

    nlohmann::json j;
    j["name"] = config.name;
    j["tp_us"] = outcome.tp_us;
    j["gate_error"] = outcome.result.gate_error;
    j["cond_phase_rad"] = outcome.result.cond_phase;
    j["phi01_rad"] = outcome.result.phi01;
    j["phi11_rad"] = outcome.result.phi11;
    j["leakage01"] = outcome.result.leakage01;
    j["leakage11"] = outcome.result.leakage11;
    j["a01_re"] = outcome.result.a01.real();
    j["a01_im"] = outcome.result.a01.imag();
    j["a11_re"] = outcome.result.a11.real();
    j["a11_im"] = outcome.result.a11.imag();
    j["runtime_s"] = outcome.runtime_s;
    detail::write_json(j, out_dir / "summary.json");
    return outcome;
}

/// Doppler sweep over the scenario's grid: doppler.csv plus a slope summary.
inline DopplerSweep run_doppler(const ScenarioConfig& config,
                                const std::filesystem::path& out_dir,
                                double rel_tol = kDefaultRelTol) {
    config.validate();
    if (config.doppler_grid_mhz.empty())
        throw ConfigError("doppler_grid_mhz", "scenario has no Doppler grid");
    const auto t0 = std::chrono::steady_clock::now();
    const DopplerSweep sweep = doppler_sweep(config.gate_scenario(), config.doppler_grid_mhz,
                                             rel_tol);

    auto out = detail::open_out(out_dir / "doppler.csv");
    out << "delta_D_MHz,gate_error,cond_phase_rad\n";
    for (const auto& p : sweep.points)
        out << format_sig(p.delta_d_mhz) << "," << format_sig(p.gate_error) << ","
            << format_sig(p.cond_phase) << "\n";

    nlohmann::json j;
    j["name"] = config.name;
    j["points"] = sweep.points.size();
    j["phase_slope_rad_per_mhz"] = sweep.phase_slope;
    j["phase_curvature_rad_per_mhz2"] = sweep.phase_curvature;
    j["leakage_exponent"] = sweep.leakage_exponent;
    j["phase_exponent"] = sweep.phase_exponent;
    j["runtime_s"] = detail::seconds_since(t0);
    detail::write_json(j, out_dir / "doppler_summary.json");
    return sweep;
}

/// Pulse-time scan: scan.csv (coarse grid) plus the refined minimum.
inline ScanResult run_scan_tp(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                              std::optional<int> steps = std::nullopt, double target = 1e-4,
                              double rel_tol = kDefaultRelTol) {
    config.validate();
    if (!config.tp_scan_us) throw ConfigError("tp_scan_us", "scenario has no scan range");
    const auto [lo, hi] = *config.tp_scan_us;
    // Default spacing 0.025 us.
    const int n = steps ? *steps : std::max(2, static_cast<int>(std::lround((hi - lo) / 0.025)) + 1);
    const auto t0 = std::chrono::steady_clock::now();
    const ScanResult result = scan_pulse_time(config, lo, hi, n, target, rel_tol);

    auto out = detail::open_out(out_dir / "scan.csv");
    out << "tp_us,gate_error\n";
    for (const auto& p : result.coarse)
        out << format_sig(p.tp_us) << "," << format_sig(p.gate_error) << "\n";

    nlohmann::json j;
    j["name"] = config.name;
    j["resolved_tp_us"] = result.best_tp_us;
    j["gate_error"] = result.best_gate_error;
    j["evaluations"] = result.evaluations;
    j["runtime_s"] = detail::seconds_since(t0);
    detail::write_json(j, out_dir / "scan_summary.json");
    return result;
}

struct OptimizeOverrides {
    std::optional<long> budget;
    std::optional<unsigned long long> seed;
    std::optional<int> n_starts;
    std::optional<double> target_objective;
};

/// Builds the optimization problem from the scenario's optimize block (plus
/// CLI overrides), runs it, and writes report, trace and the best-waveform
/// scenario file (round-trippable).
inline OptimizationReport run_optimize(const ScenarioConfig& config,
                                       const std::filesystem::path& out_dir,
                                       const OptimizeOverrides& overrides = {},
                                       double rel_tol = kDefaultRelTol) {
    config.validate();
    if (!config.optimize) throw ConfigError("optimize", "scenario has no optimize block");
    const OptimizeBlock& block = *config.optimize;

    OptimizationProblem problem;
    problem.base = config;
    for (const auto& pname : block.free_params) {
        for (const auto& [bname, range] : block.bounds)
            if (bname == pname)
                problem.free_params.push_back({pname, range.first, range.second});
    }
    problem.penalties.lambda_neg = block.lambda_neg;
    problem.penalties.lambda_cap = block.lambda_cap;
    if (config.amplitude_cap_mhz) problem.penalties.omega_max_mhz = *config.amplitude_cap_mhz;
    problem.budget = overrides.budget.value_or(block.budget);
    problem.seed = overrides.seed.value_or(block.rng_seed);
    problem.n_starts = overrides.n_starts.value_or(block.n_starts);
    problem.target_objective = overrides.target_objective.value_or(block.target_objective);
    problem.rel_tol = rel_tol;

    const auto t0 = std::chrono::steady_clock::now();
    const OptimizationReport report = optimize(problem);

    auto trace = detail::open_out(out_dir / "trace.csv");
    trace << "evaluation,best_objective\n";
    for (const auto& p : report.trace)
        trace << p.evaluation << "," << format_sig(p.best_objective) << "\n";

    nlohmann::json j;
    j["name"] = config.name;
    j["best_objective"] = report.best.total;
    j["best_gate_error"] = report.best.gate_error;
    j["penalty_neg"] = report.best.penalty_neg;
    j["penalty_cap"] = report.best.penalty_cap;
    j["evaluation_count"] = report.evaluation_count;
    j["restarts"] = report.restarts;
    j["infeasible"] = report.infeasible();
    nlohmann::json bp;
    for (const auto& [pname, value] : report.best_params) bp[pname] = value;
    j["best_params"] = bp;
    j["runtime_s"] = detail::seconds_since(t0);
    detail::write_json(j, out_dir / "optimize_report.json");

    ScenarioConfig best = config;
    for (const auto& [pname, value] : report.best_params) set_param(best, pname, value);
    write_scenario_file(best, (out_dir / "best_scenario.json").string());
    return report;
}

// ---------------------------------------------------------------------------
// Bundled-scenario manifest and the reproduce-all run.

struct ManifestAuditEntry {
    std::string file;
    std::string field;  // e.g. "amplitude_coeffs_mhz[2]" or "tp_us"
    std::string text;   // reference value; parsed and compared exactly
};

struct Manifest {
    std::vector<std::string> evaluate_scenarios;
    std::vector<std::string> optimize_templates;
    std::vector<ManifestAuditEntry> audit;
};

inline Manifest read_manifest(const std::filesystem::path& scenario_dir) {
    const auto path = scenario_dir / "manifest.json";
    std::ifstream in(path);
    if (!in) throw ConfigError("(manifest)", "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("(manifest)", std::string("JSON parse error: ") + e.what());
    }
    Manifest m;
    m.evaluate_scenarios = j.at("evaluate_scenarios").get<std::vector<std::string>>();
    if (j.contains("optimize_templates"))
        m.optimize_templates = j.at("optimize_templates").get<std::vector<std::string>>();
    for (const auto& e : j.at("audit")) {
        m.audit.push_back({e.at("file").get<std::string>(), e.at("field").get<std::string>(),
                           e.at("text").get<std::string>()});
    }
    return m;
}

namespace detail {

/// Resolves "field[3]" / "field" against a JSON object.
inline const nlohmann::json* resolve_field(const nlohmann::json& doc, const std::string& field) {
    const auto bracket = field.find('[');
    if (bracket == std::string::npos) {
        if (!doc.contains(field)) return nullptr;
        return &doc.at(field);
    }
    const std::string key = field.substr(0, bracket);
    const std::size_t index = std::stoul(field.substr(bracket + 1));
    if (!doc.contains(key) || !doc.at(key).is_array() || index >= doc.at(key).size())
        return nullptr;
    return &doc.at(key).at(index);
}

}  // namespace detail

/// Verifies that every audited reference numeric matches the scenario files
/// exactly (value-level: the audit text parses to the same double the file
/// carries). Returns human-readable problems; empty means the audit passed.
inline std::vector<std::string> audit_manifest(const std::filesystem::path& scenario_dir) {
    std::vector<std::string> problems;
    Manifest m;
    try {
        m = read_manifest(scenario_dir);
    } catch (const Error& e) {
        return {e.what()};
    }
    std::set<std::string> claimed;
    for (const auto& entry : m.audit) {
        const std::string where = entry.file + ":" + entry.field;
        if (!claimed.insert(where).second) {
            problems.push_back("duplicate audit entry for " + where);
            continue;
        }
        std::ifstream in(scenario_dir / entry.file);
        if (!in) {
            problems.push_back(where + ": scenario file missing");
            continue;
        }
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            problems.push_back(where + ": parse error: " + e.what());
            continue;
        }
        const nlohmann::json* value = detail::resolve_field(doc, entry.field);
        if (value == nullptr || !value->is_number()) {
            problems.push_back(where + ": field missing or non-numeric");
            continue;
        }
        char* end = nullptr;
        const double expected = std::strtod(entry.text.c_str(), &end);
        if (end == entry.text.c_str() || *end != '\0') {
            problems.push_back(where + ": audit text '" + entry.text + "' is not a number");
            continue;
        }
        if (value->get<double>() != expected)
            problems.push_back(where + ": file has " + format_sig(value->get<double>(), 17) +
                               ", reference prints " + entry.text);
    }
    return problems;
}

struct ReproductionRow {
    std::string name;
    std::string status;  // "ok", "missing", "error: ..."
    double tp_us = 0.0;
    bool tp_from_scan = false;
    double gate_error = 0.0;
    bool pass = false;
    double runtime_s = 0.0;
};

struct ReproductionReport {
    std::vector<ReproductionRow> rows;
    double threshold = 1e-4;
    bool all_passed = false;
};

/// Runs every bundled evaluate-scenario, resolving unresolved pulse times by
/// scan, and writes the pass/fail table, the basis-table CSVs and one
/// artifact directory per scenario. Failures are recorded and the run
/// continues.
inline ReproductionReport run_reproduce_all(const std::filesystem::path& scenario_dir,
                                            const std::filesystem::path& out_dir,
                                            double threshold = 1e-4,
                                            double rel_tol = kDefaultRelTol,
                                            std::ostream& log = std::cout) {
    const Manifest manifest = read_manifest(scenario_dir);
    ReproductionReport report;
    report.threshold = threshold;

    for (const std::string& file : manifest.evaluate_scenarios) {
        ReproductionRow row;
        row.name = file;
        const auto t0 = std::chrono::steady_clock::now();
        const auto path = scenario_dir / file;
        if (!std::filesystem::exists(path)) {
            row.status = "missing";
            report.rows.push_back(row);
            continue;
        }
        try {
            ScenarioConfig config = read_scenario_file(path.string());
            row.name = config.name;
            if (!config.resolved_tp_us()) {
                const ScanResult scan =
                    run_scan_tp(config, out_dir / config.name, std::nullopt, threshold, rel_tol);
                config.tp_resolved_us = scan.best_tp_us;
                config.tp_resolved_derived = true;
                row.tp_from_scan = true;
            }
            const EvaluateOutcome outcome =
                run_evaluate(config, out_dir / config.name, rel_tol);
            row.tp_us = outcome.tp_us;
            row.gate_error = outcome.result.gate_error;
            row.pass = outcome.result.gate_error < threshold;
            row.status = "ok";
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        row.runtime_s = detail::seconds_since(t0);
        report.rows.push_back(row);
    }
    report.all_passed = !report.rows.empty();
    for (const auto& row : report.rows)
        if (row.status != "ok" || !row.pass) report.all_passed = false;

    const auto [u, v] = builtin_tables();
    {
        auto out = detail::open_out(out_dir / "u.csv");
        write_basis_table_csv(u, out);
    }
    {
        auto out = detail::open_out(out_dir / "v.csv");
        write_basis_table_csv(v, out);
    }

    nlohmann::json j;
    j["threshold"] = threshold;
    j["all_passed"] = report.all_passed;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["name"] = row.name;
        r["status"] = row.status;
        r["tp_us"] = row.tp_us;
        r["tp_from_scan"] = row.tp_from_scan;
        r["gate_error"] = row.gate_error;
        r["pass"] = row.pass;
        r["runtime_s"] = row.runtime_s;
        rows.push_back(r);
    }
    j["scenarios"] = rows;
    detail::write_json(j, out_dir / "report.json");

    log << "scenario        status   T_p [us]    gate error   pass\n";
    for (const auto& row : report.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-15s %-8s %-11.6g %-12.4g %s\n", row.name.c_str(),
                      row.status.substr(0, 8).c_str(), row.tp_us, row.gate_error,
                      row.status != "ok" ? "-" : (row.pass ? "yes" : "NO"));
        log << line;
    }
    return report;
}

}  // namespace ormd
