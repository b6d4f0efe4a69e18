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

// Scenario files: one JSON document per gate configuration.
//
// Serialization is canonical (2-space indent, alphabetically ordered keys,
// trailing newline, shortest round-trip number forms), so write -> read ->
// write is byte-identical. Frequencies are /2pi values in MHz, times in us.
// Exactly one of `tp_us` and `tp_scan_us` must be present; a scan scenario
// may carry `tp_resolved_us` (with `tp_resolved_derived: true`) recording the
// pulse time found by a scan.

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ormd/common.hpp"
#include "ormd/gate_metrics.hpp"
#include "ormd/level_system.hpp"
#include "ormd/propagator.hpp"
#include "ormd/waveform.hpp"

namespace ormd {

inline constexpr int kScenarioSchemaVersion = 1;

/// Optimizer settings carried by optimize-template scenarios.
struct OptimizeBlock {
    std::vector<std::string> free_params;
    std::vector<std::pair<std::string, std::pair<double, double>>> bounds;
    long budget = 5000;
    unsigned long long rng_seed = 1;
    int n_starts = 1;
    double target_objective = 0.0;
    double lambda_neg = 1e6;
    double lambda_cap = 1e6;
};

struct ScenarioConfig {
    int schema_version = kScenarioSchemaVersion;
    std::string name;
    std::string drive_kind;     // "one_photon" | "two_photon"
    std::string basis;          // "u" | "v" | "sine"
    std::vector<double> amplitude_coeffs_mhz;
    double detuning_const_mhz = 0.0;
    std::vector<double> detuning_cos_coeffs_mhz;
    std::optional<double> omega_stokes_mhz;
    std::optional<double> delta_intermediate_mhz;
    std::string blockade_kind = "idealized";  // "idealized" | "forster_risa"
    std::optional<double> b_mhz;
    std::optional<double> delta_q_mhz;
    std::string schedule_kind = "single";  // "single" | "dual"
    std::optional<double> tp_us;
    std::optional<std::pair<double, double>> tp_scan_us;
    std::optional<double> tp_resolved_us;
    bool tp_resolved_derived = false;
    std::optional<double> amplitude_cap_mhz;
    std::vector<double> doppler_grid_mhz;
    std::optional<std::string> output_dir;
    std::optional<OptimizeBlock> optimize;

    void validate() const {
        if (schema_version != kScenarioSchemaVersion)
            throw ConfigError("schema_version",
                              "expected " + std::to_string(kScenarioSchemaVersion));
        if (name.empty()) throw ConfigError("name", "must be non-empty");
        if (drive_kind != "one_photon" && drive_kind != "two_photon")
            throw ConfigError("drive_kind", "must be 'one_photon' or 'two_photon'");
        if (basis != "u" && basis != "v" && basis != "sine")
            throw ConfigError("basis", "must be 'u', 'v' or 'sine'");
        const std::size_t expected =
            basis == "u" ? 5 : basis == "v" ? 6 : amplitude_coeffs_mhz.size();
        if (basis != "sine" && amplitude_coeffs_mhz.size() != expected)
            throw ConfigError("amplitude_coeffs_mhz",
                              "basis '" + basis + "' needs " + std::to_string(expected) +
                                  " coefficients");
        if (basis == "sine" && amplitude_coeffs_mhz.empty())
            throw ConfigError("amplitude_coeffs_mhz", "must be non-empty");
        if (detuning_cos_coeffs_mhz.size() > 2)
            throw ConfigError("detuning_cos_coeffs_mhz",
                              "detuning basis is {1, cos 2 pi x, cos 4 pi x}");
        if (drive_kind == "two_photon") {
            if (!omega_stokes_mhz || !(*omega_stokes_mhz > 0.0))
                throw ConfigError("omega_stokes_mhz", "two-photon drive requires Omega_S > 0");
            if (!delta_intermediate_mhz || *delta_intermediate_mhz == 0.0)
                throw ConfigError("delta_intermediate_mhz",
                                  "two-photon drive requires a nonzero value");
        } else {
            if (omega_stokes_mhz || delta_intermediate_mhz)
                throw ConfigError("omega_stokes_mhz",
                                  "only valid for drive_kind = 'two_photon'");
        }
        if (blockade_kind != "idealized" && blockade_kind != "forster_risa")
            throw ConfigError("blockade_kind", "must be 'idealized' or 'forster_risa'");
        if (blockade_kind == "forster_risa") {
            if (!b_mhz || !(*b_mhz > 0.0)) throw ConfigError("b_mhz", "Forster model needs B > 0");
        } else if (b_mhz || delta_q_mhz) {
            throw ConfigError("b_mhz", "only valid for blockade_kind = 'forster_risa'");
        }
        if (schedule_kind != "single" && schedule_kind != "dual")
            throw ConfigError("schedule_kind", "must be 'single' or 'dual'");
        if (tp_us.has_value() == tp_scan_us.has_value())
            throw ConfigError("tp_us", "exactly one of tp_us and tp_scan_us must be present");
        if (tp_us && !(*tp_us > 0.0)) throw ConfigError("tp_us", "must be positive");
        if (tp_scan_us && !(tp_scan_us->first > 0.0 && tp_scan_us->second > tp_scan_us->first))
            throw ConfigError("tp_scan_us", "must be a positive increasing range");
        if (tp_resolved_us) {
            if (!tp_scan_us)
                throw ConfigError("tp_resolved_us", "only valid together with tp_scan_us");
            if (*tp_resolved_us < tp_scan_us->first || *tp_resolved_us > tp_scan_us->second)
                throw ConfigError("tp_resolved_us", "outside the scan range");
        }
        if (amplitude_cap_mhz && !(*amplitude_cap_mhz > 0.0))
            throw ConfigError("amplitude_cap_mhz", "must be positive");
        if (optimize) {
            if (optimize->free_params.empty())
                throw ConfigError("optimize.free_params", "must be non-empty");
            for (const auto& p : optimize->free_params) {
                bool found = false;
                for (const auto& [bname, range] : optimize->bounds) {
                    if (bname != p) continue;
                    found = true;
                    if (!std::isfinite(range.first) || !std::isfinite(range.second) ||
                        !(range.first < range.second))
                        throw ConfigError("optimize.bounds", "'" + p +
                                                                 "' needs a finite increasing "
                                                                 "interval");
                }
                if (!found) throw ConfigError("optimize.bounds", "missing bounds for '" + p + "'");
            }
            if (optimize->budget < 0) throw ConfigError("optimize.budget", "must be >= 0");
            if (optimize->n_starts < 1) throw ConfigError("optimize.n_starts", "must be >= 1");
            if (optimize->lambda_neg < 0.0 || optimize->lambda_cap < 0.0)
                throw ConfigError("optimize.lambda_neg", "penalty weights must be >= 0");
        }
    }

    SineSeries amplitude() const {
        if (basis == "u") return combine(builtin_tables().first, amplitude_coeffs_mhz);
        if (basis == "v") return combine(builtin_tables().second, amplitude_coeffs_mhz);
        return SineSeries{amplitude_coeffs_mhz};
    }

    WaveformSpec waveform() const {
        return WaveformSpec{amplitude(), CosineSeries{detuning_const_mhz, detuning_cos_coeffs_mhz}};
    }

    DriveScheme drive_scheme() const {
        DriveScheme s;
        s.kind = drive_kind == "two_photon" ? DriveKind::TwoPhoton : DriveKind::OnePhoton;
        s.drive = waveform();
        s.omega_stokes_mhz = omega_stokes_mhz.value_or(0.0);
        s.delta_intermediate_mhz = delta_intermediate_mhz.value_or(0.0);
        return s;
    }

    BlockadeModel blockade_model() const {
        BlockadeModel b;
        b.kind = blockade_kind == "forster_risa" ? BlockadeKind::ForsterRISA
                                                 : BlockadeKind::Idealized;
        b.b_mhz = b_mhz.value_or(0.0);
        b.delta_q_mhz = delta_q_mhz.value_or(0.0);
        return b;
    }

    /// The pulse time an evaluation should use, when one is known.
    std::optional<double> resolved_tp_us() const {
        if (tp_us) return tp_us;
        if (tp_resolved_us) return tp_resolved_us;
        return std::nullopt;
    }

    GateScenario gate_scenario(std::optional<double> tp_override = std::nullopt) const {
        const std::optional<double> tp = tp_override ? tp_override : resolved_tp_us();
        if (!tp)
            throw ConfigError("tp_us", "pulse time unresolved; run a scan or set tp_us");
        PulseSchedule sched;
        sched.kind =
            schedule_kind == "dual" ? PulseSchedule::Kind::Dual : PulseSchedule::Kind::Single;
        sched.tp_us = *tp;
        return GateScenario{drive_scheme(), blockade_model(), sched};
    }
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

inline std::vector<double> require_number_array(const nlohmann::json& j,
                                                const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) throw ConfigError(field, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace detail

inline nlohmann::json to_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["schema_version"] = c.schema_version;
    j["name"] = c.name;
    j["drive_kind"] = c.drive_kind;
    j["basis"] = c.basis;
    j["amplitude_coeffs_mhz"] = c.amplitude_coeffs_mhz;
    j["detuning_const_mhz"] = c.detuning_const_mhz;
    j["detuning_cos_coeffs_mhz"] = c.detuning_cos_coeffs_mhz;
    if (c.omega_stokes_mhz) j["omega_stokes_mhz"] = *c.omega_stokes_mhz;
    if (c.delta_intermediate_mhz) j["delta_intermediate_mhz"] = *c.delta_intermediate_mhz;
    j["blockade_kind"] = c.blockade_kind;
    if (c.b_mhz) j["b_mhz"] = *c.b_mhz;
    if (c.delta_q_mhz) j["delta_q_mhz"] = *c.delta_q_mhz;
    j["schedule_kind"] = c.schedule_kind;
    if (c.tp_us) j["tp_us"] = *c.tp_us;
    if (c.tp_scan_us) j["tp_scan_us"] = {c.tp_scan_us->first, c.tp_scan_us->second};
    if (c.tp_resolved_us) {
        j["tp_resolved_us"] = *c.tp_resolved_us;
        j["tp_resolved_derived"] = c.tp_resolved_derived;
    }
    if (c.amplitude_cap_mhz) j["amplitude_cap_mhz"] = *c.amplitude_cap_mhz;
    if (!c.doppler_grid_mhz.empty()) j["doppler_grid_mhz"] = c.doppler_grid_mhz;
    if (c.output_dir) j["output_dir"] = *c.output_dir;
    if (c.optimize) {
        nlohmann::json o;
        o["free_params"] = c.optimize->free_params;
        nlohmann::json b;
        for (const auto& [bname, range] : c.optimize->bounds)
            b[bname] = {range.first, range.second};
        o["bounds"] = b;
        o["budget"] = c.optimize->budget;
        o["rng_seed"] = c.optimize->rng_seed;
        o["n_starts"] = c.optimize->n_starts;
        o["target_objective"] = c.optimize->target_objective;
        o["lambda_neg"] = c.optimize->lambda_neg;
        o["lambda_cap"] = c.optimize->lambda_cap;
        j["optimize"] = o;
    }
    return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("(root)", "scenario must be a JSON object");
    static const std::set<std::string> known = {
        "schema_version",    "name",
        "drive_kind",        "basis",
        "amplitude_coeffs_mhz", "detuning_const_mhz",
        "detuning_cos_coeffs_mhz", "omega_stokes_mhz",
        "delta_intermediate_mhz",  "blockade_kind",
        "b_mhz",             "delta_q_mhz",
        "schedule_kind",     "tp_us",
        "tp_scan_us",        "tp_resolved_us",
        "tp_resolved_derived", "amplitude_cap_mhz",
        "doppler_grid_mhz",  "output_dir",
        "optimize"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ConfigError(key, "unknown field");

    auto need = [&](const char* k) -> const nlohmann::json& {
        if (!j.contains(k)) throw ConfigError(k, "missing required field");
        return j.at(k);
    };

    ScenarioConfig c;
    if (!need("schema_version").is_number_integer())
        throw ConfigError("schema_version", "expected an integer");
    c.schema_version = need("schema_version").get<int>();
    if (!need("name").is_string()) throw ConfigError("name", "expected a string");
    c.name = need("name").get<std::string>();
    c.drive_kind = need("drive_kind").get<std::string>();
    c.basis = need("basis").get<std::string>();
    c.amplitude_coeffs_mhz =
        detail::require_number_array(need("amplitude_coeffs_mhz"), "amplitude_coeffs_mhz");
    c.detuning_const_mhz = detail::require_number(need("detuning_const_mhz"), "detuning_const_mhz");
    c.detuning_cos_coeffs_mhz =
        detail::require_number_array(need("detuning_cos_coeffs_mhz"), "detuning_cos_coeffs_mhz");
    if (j.contains("omega_stokes_mhz"))
        c.omega_stokes_mhz = detail::require_number(j.at("omega_stokes_mhz"), "omega_stokes_mhz");
    if (j.contains("delta_intermediate_mhz"))
        c.delta_intermediate_mhz =
            detail::require_number(j.at("delta_intermediate_mhz"), "delta_intermediate_mhz");
    c.blockade_kind = need("blockade_kind").get<std::string>();
    if (j.contains("b_mhz")) c.b_mhz = detail::require_number(j.at("b_mhz"), "b_mhz");
    if (j.contains("delta_q_mhz"))
        c.delta_q_mhz = detail::require_number(j.at("delta_q_mhz"), "delta_q_mhz");
    c.schedule_kind = need("schedule_kind").get<std::string>();
    if (j.contains("tp_us")) c.tp_us = detail::require_number(j.at("tp_us"), "tp_us");
    if (j.contains("tp_scan_us")) {
        const auto r = detail::require_number_array(j.at("tp_scan_us"), "tp_scan_us");
        if (r.size() != 2) throw ConfigError("tp_scan_us", "expected [lo, hi]");
        c.tp_scan_us = {r[0], r[1]};
    }
    if (j.contains("tp_resolved_us"))
        c.tp_resolved_us = detail::require_number(j.at("tp_resolved_us"), "tp_resolved_us");
    if (j.contains("tp_resolved_derived"))
        c.tp_resolved_derived = j.at("tp_resolved_derived").get<bool>();
    if (j.contains("amplitude_cap_mhz"))
        c.amplitude_cap_mhz =
            detail::require_number(j.at("amplitude_cap_mhz"), "amplitude_cap_mhz");
    if (j.contains("doppler_grid_mhz"))
        c.doppler_grid_mhz =
            detail::require_number_array(j.at("doppler_grid_mhz"), "doppler_grid_mhz");
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("optimize")) {
        const auto& o = j.at("optimize");
        OptimizeBlock ob;
        ob.free_params = o.at("free_params").get<std::vector<std::string>>();
        if (o.contains("bounds"))
            for (const auto& [bname, range] : o.at("bounds").items()) {
                const auto r = detail::require_number_array(range, "optimize.bounds");
                if (r.size() != 2) throw ConfigError("optimize.bounds", "expected [lo, hi]");
                ob.bounds.emplace_back(bname, std::make_pair(r[0], r[1]));
            }
        if (o.contains("budget")) ob.budget = o.at("budget").get<long>();
        if (o.contains("rng_seed")) ob.rng_seed = o.at("rng_seed").get<unsigned long long>();
        if (o.contains("n_starts")) ob.n_starts = o.at("n_starts").get<int>();
        if (o.contains("target_objective"))
            ob.target_objective = detail::require_number(o.at("target_objective"),
                                                         "optimize.target_objective");
        if (o.contains("lambda_neg"))
            ob.lambda_neg = detail::require_number(o.at("lambda_neg"), "optimize.lambda_neg");
        if (o.contains("lambda_cap"))
            ob.lambda_cap = detail::require_number(o.at("lambda_cap"), "optimize.lambda_cap");
        c.optimize = ob;
    }
    c.validate();
    return c;
}

/// Canonical serialization: alphabetical keys, 2-space indent, newline at EOF.
inline std::string serialize_scenario(const ScenarioConfig& c) {
    return to_json(c).dump(2) + "\n";
}

inline ScenarioConfig parse_scenario(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("(document)", std::string("JSON parse error: ") + e.what());
    }
    return scenario_from_json(j);
}

inline ScenarioConfig read_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

inline void write_scenario_file(const ScenarioConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write scenario file: " + path);
    out << serialize_scenario(c);
}

/// Named parameter access used by the optimizer: "amp[i]", "det.const",
/// "det.cos[m]", "tp".
inline double get_param(const ScenarioConfig& c, const std::string& name) {
    if (name == "det.const") return c.detuning_const_mhz;
    if (name == "tp") {
        const auto tp = c.resolved_tp_us();
        if (!tp) throw ConfigError("tp_us", "cannot read unresolved pulse time parameter");
        return *tp;
    }
    auto indexed = [&](const std::string& prefix) -> std::optional<std::size_t> {
        if (name.rfind(prefix + "[", 0) != 0 || name.back() != ']') return std::nullopt;
        return static_cast<std::size_t>(
            std::stoul(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2)));
    };
    if (auto i = indexed("amp")) {
        if (*i >= c.amplitude_coeffs_mhz.size())
            throw ConfigError("optimize.free_params", "amplitude index out of range: " + name);
        return c.amplitude_coeffs_mhz[*i];
    }
    if (auto m = indexed("det.cos")) {
        if (*m >= c.detuning_cos_coeffs_mhz.size())
            throw ConfigError("optimize.free_params", "detuning index out of range: " + name);
        return c.detuning_cos_coeffs_mhz[*m];
    }
    throw ConfigError("optimize.free_params", "unknown parameter name: " + name);
}

inline void set_param(ScenarioConfig& c, const std::string& name, double value) {
    if (name == "det.const") {
        c.detuning_const_mhz = value;
        return;
    }
    if (name == "tp") {
        if (c.tp_scan_us) {
            c.tp_resolved_us = value;
            c.tp_resolved_derived = true;
        } else {
            c.tp_us = value;
        }
        return;
    }
    auto indexed = [&](const std::string& prefix) -> std::optional<std::size_t> {
        if (name.rfind(prefix + "[", 0) != 0 || name.back() != ']') return std::nullopt;
        return static_cast<std::size_t>(
            std::stoul(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2)));
    };
    if (auto i = indexed("amp")) {
        if (*i >= c.amplitude_coeffs_mhz.size())
            throw ConfigError("optimize.free_params", "amplitude index out of range: " + name);
        c.amplitude_coeffs_mhz[*i] = value;
        return;
    }
    if (auto m = indexed("det.cos")) {
        if (*m >= c.detuning_cos_coeffs_mhz.size())
            throw ConfigError("optimize.free_params", "detuning index out of range: " + name);
        c.detuning_cos_coeffs_mhz[*m] = value;
        return;
    }
    throw ConfigError("optimize.free_params", "unknown parameter name: " + name);
}

}  // namespace ormd
