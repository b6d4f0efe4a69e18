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

#include <catch2/catch_amalgamated.hpp>

#include "ormd/propagator.hpp"
#include "ormd/scenario.hpp"
#include "support/oracles.hpp"

using namespace ormd;

namespace {

/// Constant two-level drive: Omega/2pi = `omega_mhz`, Delta/2pi = `delta_mhz`.
HamiltonianFn constant_rabi(double omega_mhz, double delta_mhz) {
    return [omega_mhz, delta_mhz](double, int, Eigen::MatrixXcd& h) {
        h.resize(2, 2);
        h.setZero();
        h(0, 1) = h(1, 0) = 0.5 * kTwoPi * omega_mhz;
        h(1, 1) = kTwoPi * delta_mhz;
    };
}

ScenarioConfig bundled(const std::string& name) {
    return read_scenario_file(std::string(ORMD_SCENARIO_DIR) + "/" + name + ".json");
}

}  // namespace

TEST_CASE("analytic Rabi pi and 2pi pulses") {
    // Omega/2pi = 1 MHz on resonance: P_excited(t) = sin^2(pi t / 1 us).
    const Eigen::VectorXcd psi0 = basis_state(2);
    const Eigen::VectorXcd half =
        propagate(constant_rabi(1.0, 0.0), 2, {PulseSchedule::Kind::Single, 0.5}, psi0);
    CHECK_THAT(std::norm(half[1]), Catch::Matchers::WithinAbs(1.0, 1e-8));
    CHECK_THAT(std::norm(half[0]), Catch::Matchers::WithinAbs(0.0, 1e-8));

    const Eigen::VectorXcd full =
        propagate(constant_rabi(1.0, 0.0), 2, {PulseSchedule::Kind::Single, 1.0}, psi0);
    CHECK_THAT(std::abs(full[0] - std::complex<double>(-1.0, 0.0)),
               Catch::Matchers::WithinAbs(0.0, 1e-8));
}

TEST_CASE("zero drive leaves the coupled ground state untouched") {
    const Eigen::VectorXcd psi0 = basis_state(2);
    const Eigen::VectorXcd out =
        propagate(constant_rabi(0.0, 7.3), 2, {PulseSchedule::Kind::Single, 2.0}, psi0);
    CHECK(std::abs(out[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(out[1]) < 1e-12);
}

TEST_CASE("populations") {
    Eigen::VectorXcd v(2);
    v << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 0.0);
    CHECK(populations(v)[0] == 1.0);
    CHECK(populations(v)[1] == 0.0);
    v << std::complex<double>(1.0 / std::sqrt(2.0), 0.0),
        std::complex<double>(0.0, 1.0 / std::sqrt(2.0));
    CHECK_THAT(populations(v).sum(), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(populations(v)[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(populations(v)[1], Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("preconditions") {
    const Eigen::VectorXcd psi0 = basis_state(2);
    Eigen::VectorXcd non_unit = psi0 * 1.5;
    CHECK_THROWS_AS(
        propagate(constant_rabi(1.0, 0.0), 2, {PulseSchedule::Kind::Single, 1.0}, non_unit),
        ArgumentError);
    CHECK_THROWS_AS(
        propagate(constant_rabi(1.0, 0.0), 2, {PulseSchedule::Kind::Single, 1.0}, psi0, 1e-3),
        ArgumentError);
    CHECK_THROWS_AS(
        propagate(constant_rabi(1.0, 0.0), 2, {PulseSchedule::Kind::Single, 1.0}, psi0, 1e-14),
        ArgumentError);
    CHECK_THROWS_AS(
        propagate(constant_rabi(1.0, 0.0), 2, {PulseSchedule::Kind::Single, -1.0}, psi0),
        ArgumentError);
}

TEST_CASE("propagation is deterministic for fixed inputs") {
    const ScenarioConfig config = bundled("fig2a");
    const GateScenario gs = config.gate_scenario();
    const HamiltonianModel model(gs.scheme, Manifold::DoubleExcitation, gs.blockade);
    const Eigen::VectorXcd psi0 = basis_state(model.dim());
    const Eigen::VectorXcd a = propagate(model, gs.schedule, psi0);
    const Eigen::VectorXcd b = propagate(model, gs.schedule, psi0);
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("norm conservation along a trajectory") {
    const ScenarioConfig config = bundled("fig1a");
    const GateScenario gs = config.gate_scenario();
    const HamiltonianModel model(gs.scheme, Manifold::SingleExcitation, gs.blockade);
    Trajectory traj;
    propagate(model, gs.schedule, basis_state(model.dim()), 1e-10, &traj, 200);
    REQUIRE(traj.samples.size() == 201);
    double worst = 0.0;
    for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.state.norm() - 1.0));
    CHECK(worst <= 1e-8);
    CHECK(traj.samples.front().t_us == 0.0);
    CHECK_THAT(traj.samples.back().t_us, Catch::Matchers::WithinRel(0.25, 1e-12));
}

TEST_CASE("self-convergence under tolerance halving") {
    for (const char* name : {"fig1a", "fig2b"}) {
        const ScenarioConfig config = bundled(name);
        const GateScenario gs = config.gate_scenario();
        const HamiltonianModel model(gs.scheme, Manifold::DoubleExcitation, gs.blockade);
        const Eigen::VectorXcd psi0 = basis_state(model.dim());
        const Eigen::VectorXcd a = propagate(model, gs.schedule, psi0, 1e-10);
        const Eigen::VectorXcd b = propagate(model, gs.schedule, psi0, 5e-11);
        CHECK((a - b).norm() < 1e-10);
    }
}

TEST_CASE("adaptive integration matches the slice-exponential product") {
    for (const char* name : {"fig1a", "fig2b"}) {
        const ScenarioConfig config = bundled(name);
        const GateScenario gs = config.gate_scenario();
        const HamiltonianModel model(gs.scheme, Manifold::DoubleExcitation, gs.blockade);
        const int dim = model.dim();
        const int slices = 1000;
        const double tp = gs.schedule.tp_us;
        const Eigen::VectorXcd psi0 = basis_state(dim);

        const Eigen::VectorXcd exact = oracle::piecewise_exponential(
            [&](double x) { return model.build(x); }, tp, psi0, slices);

        Eigen::VectorXcd y = psi0;
        Dop853 integrator;
        Eigen::MatrixXcd h(dim, dim);
        DerivFn deriv = [&](double, const Eigen::VectorXcd& yy, Eigen::VectorXcd& dy) {
            dy.noalias() = h * yy;
            dy *= std::complex<double>(0.0, -1.0);
        };
        for (int s = 0; s < slices; ++s) {
            model.assemble((s + 0.5) / slices, h);
            integrator.integrate(deriv, 0.0, tp / slices, y, 1e-10);
        }
        CHECK((y - exact).norm() < 1e-6);
    }
}

TEST_CASE("stiff two-photon pulse completes") {
    const ScenarioConfig config = bundled("fig2a");
    const GateScenario gs = config.gate_scenario();
    const HamiltonianModel model(gs.scheme, Manifold::DoubleExcitation, gs.blockade);
    IntegratorStats stats;
    const Eigen::VectorXcd out =
        propagate(model, gs.schedule, basis_state(model.dim()), 1e-10, nullptr, 0, &stats);
    CHECK(std::abs(out.norm() - 1.0) < 1e-8);
    CHECK(stats.accepted > 1000);
    CHECK(stats.smallest_step_us > 0.0);
}

TEST_CASE("dual schedule equals two chained pulses at zero Doppler") {
    const ScenarioConfig config = bundled("fig6-dual");
    const GateScenario gs = config.gate_scenario();
    const HamiltonianModel model(gs.scheme, Manifold::DoubleExcitation, gs.blockade);
    const Eigen::VectorXcd psi0 = basis_state(model.dim());

    const Eigen::VectorXcd dual = propagate(model, gs.schedule, psi0, 1e-10);
    PulseSchedule single{PulseSchedule::Kind::Single, gs.schedule.tp_us};
    const Eigen::VectorXcd once = propagate(model, single, psi0, 1e-10);
    Eigen::VectorXcd renorm = once / once.norm();
    Eigen::VectorXcd twice = propagate(model, single, renorm, 1e-10) * once.norm();
    CHECK((dual - twice).norm() < 1e-9);

    CHECK_THAT(gs.schedule.total_duration_us(),
               Catch::Matchers::WithinRel(2.0 * gs.schedule.tp_us, 1e-15));
}

TEST_CASE("non-finite dynamics surface as an integration error with diagnostics") {
    HamiltonianFn nan_system = [](double, int, Eigen::MatrixXcd& h) {
        h.resize(2, 2);
        h.setConstant(std::numeric_limits<double>::quiet_NaN());
    };
    try {
        propagate(nan_system, 2, {PulseSchedule::Kind::Single, 1.0}, basis_state(2));
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.t_reached_us() >= 0.0);
        CHECK(std::string(e.what()).find("step-size underflow") != std::string::npos);
    }
}

TEST_CASE("final state of the fig1a single-excitation run returns home") {
    const ScenarioConfig config = bundled("fig1a");
    const GateScenario gs = config.gate_scenario();
    const HamiltonianModel model(gs.scheme, Manifold::SingleExcitation, gs.blockade);
    const Eigen::VectorXcd out = propagate(model, gs.schedule, basis_state(model.dim()));
    CHECK(populations(out)[0] >= 1.0 - 1e-4);
}
