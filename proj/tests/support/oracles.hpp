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

// Test-only oracles, kept independent of the library's implementation paths:
// composite Simpson quadrature, and a piecewise-constant matrix-exponential
// propagator built on Eigen's Hermitian eigendecomposition.

#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

/// Composite Simpson rule with 2*n panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double h = (b - a) / (2 * n);
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// exp(-i H dt) for Hermitian H.
inline Eigen::MatrixXcd expm_herm(const Eigen::MatrixXcd& h, double dt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd w = es.eigenvalues();
    const Eigen::MatrixXcd& v = es.eigenvectors();
    Eigen::VectorXcd phases(w.size());
    for (int i = 0; i < w.size(); ++i) phases[i] = std::polar(1.0, -w[i] * dt);
    return v * phases.asDiagonal() * v.adjoint();
}

/// Product of slice exponentials with H frozen at each slice midpoint.
/// `hamiltonian(x)` returns H at normalized time x over a horizon of
/// `duration_us`.
inline Eigen::VectorXcd piecewise_exponential(
    const std::function<Eigen::MatrixXcd(double)>& hamiltonian, double duration_us,
    const Eigen::VectorXcd& psi0, int slices = 1000) {
    Eigen::VectorXcd psi = psi0;
    const double dt = duration_us / slices;
    for (int s = 0; s < slices; ++s) {
        const double x = (s + 0.5) / slices;
        psi = expm_herm(hamiltonian(x), dt) * psi;
    }
    return psi;
}

}  // namespace oracle
