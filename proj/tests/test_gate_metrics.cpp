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

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "ormd/gate_metrics.hpp"
#include "ormd/scenario.hpp"

using namespace ormd;
using cplx = std::complex<double>;

namespace {

ScenarioConfig bundled(const std::string& name) {
    return read_scenario_file(std::string(ORMD_SCENARIO_DIR) + "/" + name + ".json");
}

}  // namespace

TEST_CASE("assemble_gate") {
    CHECK(assemble_gate(1.0, 1.0).isApprox(Eigen::Matrix4cd::Identity()));
    const Eigen::Matrix4cd u = assemble_gate(cplx(0.0, 1.0), cplx(-1.0, 0.0));
    CHECK(u(1, 1) == cplx(0.0, 1.0));
    CHECK(u(2, 2) == cplx(0.0, 1.0));
    CHECK(u(3, 3) == cplx(-1.0, 0.0));
    CHECK(u(0, 0) == cplx(1.0, 0.0));
    CHECK(u(0, 1) == cplx(0.0, 0.0));
    CHECK_THROWS_AS(assemble_gate(cplx(1.1, 0.0), cplx(1.0, 0.0)), ArgumentError);
}

TEST_CASE("exact CZ up to Z rotations has zero error") {
    for (double phi : {0.0, 0.3, -1.2, 2.9}) {
        const cplx a = std::polar(1.0, phi);
        const cplx b = -std::polar(1.0, 2.0 * phi);
        CHECK(std::abs(cz_gate_error(assemble_gate(a, b))) <= 1e-12);
    }
}

TEST_CASE("identity gate error is 0.6") {
    CHECK_THAT(cz_gate_error(Eigen::Matrix4cd::Identity()),
               Catch::Matchers::WithinAbs(0.6, 1e-15));
}

TEST_CASE("error is invariant under the single-qubit Z freedom") {
    std::mt19937 rng(999);
    std::uniform_real_distribution<double> mag(0.7, 1.0), ang(-kPi, kPi);
    for (int i = 0; i < 200; ++i) {
        const cplx a = std::polar(mag(rng), ang(rng));
        const cplx b = std::polar(mag(rng), ang(rng));
        const double base = cz_gate_error(assemble_gate(a, b));
        const double alpha = ang(rng);
        const double rotated = cz_gate_error(
            assemble_gate(a * std::polar(1.0, alpha), b * std::polar(1.0, 2.0 * alpha)));
        REQUIRE_THAT(rotated, Catch::Matchers::WithinAbs(base, 1e-12));
    }
}

TEST_CASE("fidelity stays within [0, 1] for contracting diagonals") {
    std::mt19937 rng(321);
    std::uniform_real_distribution<double> mag(0.0, 1.0), ang(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
        const cplx a = std::polar(mag(rng), ang(rng));
        const cplx b = std::polar(mag(rng), ang(rng));
        const double err = cz_gate_error(assemble_gate(a, b));
        REQUIRE(err >= -1e-12);
        REQUIRE(err <= 1.0);
    }
}

TEST_CASE("error decreases monotonically toward the perfect gate") {
    double prev = 1.0;
    for (double r = 0.9; r <= 1.0 + 1e-12; r += 0.01) {
        const double err = cz_gate_error(assemble_gate(cplx(r, 0.0), cplx(-r * r, 0.0)));
        REQUIRE(err < prev);
        prev = err;
    }
}

TEST_CASE("conditional phase") {
    CHECK_THAT(conditional_phase(cplx(1.0, 0.0), cplx(-1.0, 0.0)),
               Catch::Matchers::WithinAbs(kPi, 1e-15));
    CHECK_THAT(conditional_phase(std::polar(1.0, kPi / 3.0), std::polar(1.0, 2.0 * kPi / 3.0)),
               Catch::Matchers::WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(conditional_phase(cplx(0.0, 0.0), cplx(1.0, 0.0)), UndefinedPhaseError);
    // Branch-cut convention: ties at pi map to +pi.
    CHECK(conditional_phase(cplx(1.0, 0.0), cplx(-1.0, 0.0)) > 0.0);
}

TEST_CASE("fig1a gate evaluation") {
    const GateResult r = evaluate_gate(bundled("fig1a").gate_scenario());
    CHECK(r.gate_error < 1e-4);
    CHECK(std::abs(r.a01) >= 1.0 - 1e-4);
    CHECK(std::abs(r.a11) >= 1.0 - 1e-4);
    CHECK_THAT(std::abs(r.cond_phase), Catch::Matchers::WithinAbs(kPi, 0.02));
}

TEST_CASE("fig2a gate evaluation stays below 1e-4") {
    const GateResult r = evaluate_gate(bundled("fig2a").gate_scenario());
    CHECK(r.gate_error < 1e-4);
}

TEST_CASE("fig4a dual pulse hits the CZ phase") {
    const GateResult r = evaluate_gate(bundled("fig4a").gate_scenario());
    CHECK(r.gate_error < 1e-4);
    CHECK_THAT(std::abs(r.cond_phase), Catch::Matchers::WithinAbs(kPi, 0.02));
}

TEST_CASE("doppler sweep validation") {
    const GateScenario gs = bundled("fig1a").gate_scenario();
    CHECK_THROWS_AS(doppler_sweep(gs, {}), ArgumentError);
    CHECK_THROWS_AS(doppler_sweep(gs, {-0.1, 0.1}), ArgumentError);       // no zero
    CHECK_THROWS_AS(doppler_sweep(gs, {-0.1, 0.0, 0.2}), ArgumentError);  // asymmetric
}

TEST_CASE("doppler sweep at zero shift reproduces the plain evaluation") {
    const GateScenario gs = bundled("fig1a").gate_scenario();
    const GateResult direct = evaluate_gate(gs);
    const DopplerSweep sweep = doppler_sweep(gs, {0.0});
    REQUIRE(sweep.points.size() == 1);
    CHECK(sweep.points[0].gate_error == direct.gate_error);
    CHECK(sweep.points[0].cond_phase == direct.cond_phase);
}

TEST_CASE("single-pulse sweep has a nonzero first-order phase slope") {
    const GateScenario gs = bundled("fig1a").gate_scenario();
    const DopplerSweep sweep = doppler_sweep(gs, {-0.1, -0.05, 0.0, 0.05, 0.1});
    CHECK(std::abs(sweep.phase_slope) > 0.01);
    CHECK_THAT(sweep.leakage_exponent, Catch::Matchers::WithinAbs(2.0, 0.2));
    CHECK_THAT(sweep.phase_exponent, Catch::Matchers::WithinAbs(1.0, 0.2));
}
