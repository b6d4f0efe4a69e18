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
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "ormd/artifacts.hpp"
#include "ormd/scenario.hpp"

using namespace ormd;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarioDir{ORMD_SCENARIO_DIR};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json base_json() {
    return nlohmann::json::parse(slurp(kScenarioDir / "fig1a.json"));
}

}  // namespace

TEST_CASE("bundled scenarios parse, validate and round-trip byte-identically") {
    const Manifest manifest = read_manifest(kScenarioDir);
    std::vector<std::string> files = manifest.evaluate_scenarios;
    files.insert(files.end(), manifest.optimize_templates.begin(),
                 manifest.optimize_templates.end());
    REQUIRE(manifest.evaluate_scenarios.size() == 11);
    for (const auto& f : files) {
        INFO(f);
        const std::string text = slurp(kScenarioDir / f);
        const ScenarioConfig c = parse_scenario(text);
        CHECK(serialize_scenario(c) == text);
        // write -> read -> write
        const ScenarioConfig again = parse_scenario(serialize_scenario(c));
        CHECK(serialize_scenario(again) == text);
    }
}

TEST_CASE("manifest lists every bundled scenario exactly once") {
    const Manifest manifest = read_manifest(kScenarioDir);
    std::set<std::string> seen;
    for (const auto& f : manifest.evaluate_scenarios) {
        CHECK(seen.insert(f).second);
        CHECK(fs::exists(kScenarioDir / f));
    }
    const std::vector<std::string> expected{"fig1a.json", "fig1b.json", "fig2a.json",
                                            "fig2b.json", "fig3a.json", "fig3b.json",
                                            "fig3c.json", "fig4a.json", "fig4b.json",
                                            "fig6-single.json", "fig6-dual.json"};
    CHECK(manifest.evaluate_scenarios == expected);
}

TEST_CASE("manifest audit passes on the bundled set") {
    const auto problems = audit_manifest(kScenarioDir);
    for (const auto& p : problems) UNSCOPED_INFO(p);
    CHECK(problems.empty());
    // every waveform numeric of every scenario is covered by at least one entry
    const Manifest manifest = read_manifest(kScenarioDir);
    CHECK(manifest.audit.size() >= 80);
}

TEST_CASE("manifest audit flags a corrupted value") {
    const fs::path tmp = fs::temp_directory_path() / "ormd_audit_test";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    for (const auto& e : fs::directory_iterator(kScenarioDir)) fs::copy(e.path(), tmp);
    auto doc = nlohmann::json::parse(slurp(tmp / "fig1a.json"));
    doc["amplitude_coeffs_mhz"][0] = 9.72;  // was 9.71
    std::ofstream(tmp / "fig1a.json") << doc.dump(2) << "\n";
    const auto problems = audit_manifest(tmp);
    REQUIRE_FALSE(problems.empty());
    CHECK(problems[0].find("fig1a.json:amplitude_coeffs_mhz[0]") != std::string::npos);
    fs::remove_all(tmp);
}

TEST_CASE("schema errors name the offending field") {
    auto check_field = [](nlohmann::json j, const std::string& field) {
        try {
            scenario_from_json(j);
            FAIL("expected ConfigError for field " + field);
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };

    {
        auto j = base_json();
        j.erase("name");
        check_field(j, "name");
    }
    {
        auto j = base_json();
        j["surprise"] = 1;
        check_field(j, "surprise");
    }
    {
        auto j = base_json();
        j["basis"] = "w";
        check_field(j, "basis");
    }
    {
        auto j = base_json();
        j["amplitude_coeffs_mhz"] = {1.0, 2.0};  // u basis needs 5
        check_field(j, "amplitude_coeffs_mhz");
    }
    {
        auto j = base_json();
        j["tp_scan_us"] = {0.05, 2.0};  // both tp_us and tp_scan_us
        check_field(j, "tp_us");
    }
    {
        auto j = base_json();
        j.erase("tp_us");  // neither
        check_field(j, "tp_us");
    }
    {
        auto j = base_json();
        j["omega_stokes_mhz"] = 350.0;  // one-photon must not carry it
        check_field(j, "omega_stokes_mhz");
    }
    {
        auto j = base_json();
        j["drive_kind"] = "two_photon";  // ... and two-photon requires it
        check_field(j, "omega_stokes_mhz");
    }
    {
        auto j = base_json();
        j["schema_version"] = 2;
        check_field(j, "schema_version");
    }
    {
        auto j = base_json();
        j["detuning_cos_coeffs_mhz"] = {1.0, 2.0, 3.0};
        check_field(j, "detuning_cos_coeffs_mhz");
    }
    {
        auto j = base_json();
        j["blockade_kind"] = "forster_risa";  // missing B
        check_field(j, "b_mhz");
    }
    CHECK_THROWS_AS(parse_scenario("{ not json"), ConfigError);
}

TEST_CASE("parameter access by name") {
    ScenarioConfig c = read_scenario_file((kScenarioDir / "fig1a.json").string());
    CHECK(get_param(c, "amp[1]") == 13.55);
    CHECK(get_param(c, "det.const") == 5.358);
    CHECK(get_param(c, "det.cos[0]") == 5.497);
    CHECK(get_param(c, "tp") == 0.25);
    set_param(c, "amp[1]", 14.0);
    CHECK(c.amplitude_coeffs_mhz[1] == 14.0);
    set_param(c, "tp", 0.3);
    CHECK(c.tp_us == 0.3);
    CHECK_THROWS_AS(get_param(c, "amp[9]"), ConfigError);
    CHECK_THROWS_AS(get_param(c, "bogus"), ConfigError);

    ScenarioConfig scan = read_scenario_file((kScenarioDir / "fig2a.json").string());
    set_param(scan, "tp", 0.26);  // scan scenarios record resolved values as derived
    CHECK(scan.tp_resolved_us == 0.26);
    CHECK(scan.tp_resolved_derived);
}

TEST_CASE("waveform CSV parses back to 9 significant digits") {
    const ScenarioConfig c = read_scenario_file((kScenarioDir / "fig1a.json").string());
    const WaveformSpec w = c.waveform();
    const fs::path tmp = fs::temp_directory_path() / "ormd_csv_test" / "waveform.csv";
    write_waveform_csv(w, tmp);

    std::ifstream in(tmp);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,Omega_MHz,Detuning_MHz");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        double x, om, det;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &om, &det) == 3);
        const auto s = eval_waveform(w, x);
        REQUIRE_THAT(om, Catch::Matchers::WithinRel(s.omega_mhz, 1e-8) ||
                             Catch::Matchers::WithinAbs(s.omega_mhz, 1e-12));
        REQUIRE_THAT(det, Catch::Matchers::WithinRel(s.detuning_mhz, 1e-8) ||
                              Catch::Matchers::WithinAbs(s.detuning_mhz, 1e-12));
        ++rows;
    }
    CHECK(rows == 1001);
    fs::remove_all(tmp.parent_path());
}

TEST_CASE("trajectory CSV matches the in-memory samples") {
    const ScenarioConfig c = read_scenario_file((kScenarioDir / "fig1a.json").string());
    const GateScenario gs = c.gate_scenario();
    const HamiltonianModel model(gs.scheme, Manifold::SingleExcitation, gs.blockade);
    Trajectory traj;
    propagate(model, gs.schedule, basis_state(model.dim()), 1e-10, &traj, 50);
    const fs::path tmp = fs::temp_directory_path() / "ormd_csv_test2" / "traj.csv";
    write_trajectory_csv(traj, tmp);

    std::ifstream in(tmp);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t_us,re_0,im_0,re_1,im_1,pop_0,pop_1");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        double t, re0, im0, re1, im1, p0, p1;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &t, &re0, &im0, &re1,
                            &im1, &p0, &p1) == 7);
        const auto& s = traj.samples.at(row);
        REQUIRE_THAT(re0, Catch::Matchers::WithinRel(s.state[0].real(), 1e-8) ||
                              Catch::Matchers::WithinAbs(s.state[0].real(), 1e-12));
        REQUIRE_THAT(p1, Catch::Matchers::WithinRel(std::norm(s.state[1]), 1e-8) ||
                             Catch::Matchers::WithinAbs(std::norm(s.state[1]), 1e-12));
        ++row;
    }
    CHECK(row == traj.samples.size());
    fs::remove_all(tmp.parent_path());
}

TEST_CASE("run_evaluate writes the full artifact set") {
    const ScenarioConfig c = read_scenario_file((kScenarioDir / "fig1a.json").string());
    const fs::path tmp = fs::temp_directory_path() / "ormd_eval_test";
    fs::remove_all(tmp);
    const EvaluateOutcome outcome = run_evaluate(c, tmp, 1e-10, 50);
    CHECK(outcome.result.gate_error < 1e-4);
    CHECK(fs::exists(tmp / "waveform.csv"));
    CHECK(fs::exists(tmp / "trajectory_single.csv"));
    CHECK(fs::exists(tmp / "trajectory_double.csv"));
    const auto j = nlohmann::json::parse(slurp(tmp / "summary.json"));
    CHECK(j.at("gate_error").get<double>() == outcome.result.gate_error);
    CHECK(j.at("name").get<std::string>() == "fig1a");
    fs::remove_all(tmp);
}

TEST_CASE("capped scenarios realize peaks below their caps") {
    for (const char* name : {"fig3a", "fig3b", "fig3c"}) {
        const ScenarioConfig c =
            read_scenario_file((kScenarioDir / (std::string(name) + ".json")).string());
        REQUIRE(c.amplitude_cap_mhz.has_value());
        CHECK(c.waveform().max_amplitude() < *c.amplitude_cap_mhz);
    }
}

TEST_CASE("run_evaluate rejects unphysical waveforms") {
    ScenarioConfig c = read_scenario_file((kScenarioDir / "fig1a.json").string());
    c.basis = "sine";
    c.amplitude_coeffs_mhz = {-3.0};
    const fs::path tmp = fs::temp_directory_path() / "ormd_eval_unphys";
    CHECK_THROWS_AS(run_evaluate(c, tmp), PhysicalityError);
    fs::remove_all(tmp);
}

TEST_CASE("optimize templates round-trip through run_optimize output") {
    ScenarioConfig c =
        read_scenario_file((kScenarioDir / "fig5-risa-template.json").string());
    REQUIRE(c.optimize.has_value());
    const fs::path tmp = fs::temp_directory_path() / "ormd_opt_test";
    fs::remove_all(tmp);
    OptimizeOverrides overrides;
    overrides.budget = 2;
    const OptimizationReport r = run_optimize(c, tmp, overrides);
    CHECK(r.evaluation_count <= 2);
    const ScenarioConfig best = read_scenario_file((tmp / "best_scenario.json").string());
    CHECK(best.name == c.name);
    CHECK(serialize_scenario(parse_scenario(serialize_scenario(best))) ==
          serialize_scenario(best));
    fs::remove_all(tmp);
}
