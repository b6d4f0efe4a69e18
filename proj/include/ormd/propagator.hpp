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

// Schrodinger propagation over one pulse or a dual-pulse schedule.
//
// The integrator is the explicit Dormand-Prince 8(5,3) pair with the
// standard step controller (safety 0.9, growth clamped to [1/3, 6]). Error is
// measured relative to the state scale, which for unit-norm wave functions
// makes rel_tol an honest relative tolerance. Everything runs in the lab
// frame; time is in us and Hamiltonian entries in rad/us.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ormd/common.hpp"
#include "ormd/level_system.hpp"

namespace ormd {

struct PulseSchedule {
    enum class Kind { Single, Dual };
    Kind kind = Kind::Single;
    double tp_us = 0.0;

    void validate() const {
        if (!(tp_us > 0.0)) throw ArgumentError("PulseSchedule: T_p must be positive");
    }
    int pulse_count() const { return kind == Kind::Dual ? 2 : 1; }
    double total_duration_us() const { return pulse_count() * tp_us; }
};

struct TrajectorySample {
    double t_us;
    Eigen::VectorXcd state;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
};

inline Eigen::VectorXd populations(const Eigen::VectorXcd& psi) {
    return psi.cwiseAbs2();
}

/// dy/dt callback: fills dydt given (t, y).
using DerivFn = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
    double smallest_step_us = std::numeric_limits<double>::infinity();
};

namespace dop853 {

// Dormand-Prince 8(5,3) tableau (Hairer, Norsett & Wanner).
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

// 3rd-order error weights.
inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

// 5th-order error weights.
inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

}  // namespace dop853

/// Adaptive DOP853 integrator for complex state vectors. The workspace is
/// reusable across calls; a single instance is not thread-safe.
class Dop853 {
  public:
    /// Integrates y over [t0, t1] (t1 > t0). `h_init` <= 0 selects the step
    /// size automatically; the accepted step size is kept across calls so
    /// chained segments restart cheaply.
    void integrate(const DerivFn& f, double t0, double t1, Eigen::VectorXcd& y, double rel_tol,
                   double abs_tol = 0.0, double h_init = 0.0) {
        using namespace dop853;
        const int dim = static_cast<int>(y.size());
        resize(dim);
        const double span = t1 - t0;
        if (!(span > 0.0)) {
            if (span == 0.0) return;
            throw ArgumentError("Dop853: t1 must be >= t0");
        }
        const double n_real = 2.0 * dim;
        const double hmin_floor = 16.0 * std::numeric_limits<double>::epsilon();

        double t = t0;
        f(t, y, k1);
        ++stats_.rhs_evaluations;
        double h = h_init > 0.0 ? h_init : initial_step(f, t, y, rel_tol, abs_tol, span);
        bool last_rejected = false;

        while (t < t1) {
            const double remaining = t1 - t;
            if (h > remaining) h = remaining;
            const double hmin = hmin_floor * std::max(std::abs(t), span);
            // Underflow means the controller collapsed, not that only a
            // roundoff-sized sliver of the interval is left.
            if (h < hmin && h < remaining)
                throw IntegrationError("step-size underflow", stats_.smallest_step_us, t);
            stats_.smallest_step_us = std::min(stats_.smallest_step_us, h);

            yw = y + h * (a21 * k1);
            f(t + c2 * h, yw, k2);
            yw = y + h * (a31 * k1 + a32 * k2);
            f(t + c3 * h, yw, k3);
            yw = y + h * (a41 * k1 + a43 * k3);
            f(t + c4 * h, yw, k4);
            yw = y + h * (a51 * k1 + a53 * k3 + a54 * k4);
            f(t + c5 * h, yw, k5);
            yw = y + h * (a61 * k1 + a64 * k4 + a65 * k5);
            f(t + c6 * h, yw, k6);
            yw = y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
            f(t + c7 * h, yw, k7);
            yw = y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
            f(t + c8 * h, yw, k8);
            yw = y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
            f(t + c9 * h, yw, k9);
            yw = y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 +
                          a109 * k9);
            f(t + c10 * h, yw, k10);
            yw = y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 +
                          a119 * k9 + a1110 * k10);
            f(t + c11 * h, yw, k11);
            yw = y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 +
                          a129 * k9 + a1210 * k10 + a1211 * k11);
            f(t + h, yw, k12);
            stats_.rhs_evaluations += 11;

            ksum = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 +
                   b12 * k12;
            ynew = y + h * ksum;

            // Scale relative to the state magnitude (unit-norm wave functions).
            const double sc =
                abs_tol + rel_tol * std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
            double err5 = 0.0, err3 = 0.0;
            for (int i = 0; i < dim; ++i) {
                const std::complex<double> e5 = er1 * k1[i] + er6 * k6[i] + er7 * k7[i] +
                                                er8 * k8[i] + er9 * k9[i] + er10 * k10[i] +
                                                er11 * k11[i] + er12 * k12[i];
                const std::complex<double> e3 =
                    ksum[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i];
                err5 += std::norm(e5 / sc);
                err3 += std::norm(e3 / sc);
            }
            // Per-step error target (no |h| stretching): keeps the global
            // error within rel_tol across every pulse length used here.
            double denom = err5 + 0.01 * err3;
            if (denom <= 0.0) denom = 1.0;
            const double err = err5 * std::sqrt(1.0 / (n_real * denom));

            if (!std::isfinite(err)) {
                // Non-finite dynamics: shrink until the underflow guard
                // reports a diagnosable integration failure.
                h *= kMinScale;
                last_rejected = true;
                ++stats_.rejected;
                continue;
            }
            if (err <= 1.0) {
                t += h;
                y.swap(ynew);
                double scale = err == 0.0 ? kMaxScale
                                          : std::clamp(kSafety * std::pow(err, -1.0 / 8.0),
                                                       kMinScale, kMaxScale);
                if (last_rejected) scale = std::min(scale, 1.0);
                h *= scale;
                last_rejected = false;
                ++stats_.accepted;
                if (t < t1) {
                    f(t, y, k1);
                    ++stats_.rhs_evaluations;
                }
            } else {
                h *= std::max(kSafety * std::pow(err, -1.0 / 8.0), kMinScale);
                last_rejected = true;
                ++stats_.rejected;
            }
        }
        last_h_ = h;
    }

    double last_step() const { return last_h_; }
    const IntegratorStats& stats() const { return stats_; }
    void reset_stats() { stats_ = {}; }

  private:
    static constexpr double kSafety = 0.9;
    static constexpr double kMinScale = 1.0 / 3.0;
    static constexpr double kMaxScale = 6.0;

    void resize(int dim) {
        if (yw.size() != dim) {
            for (auto* v : {&yw, &ynew, &ksum, &k1, &k2, &k3, &k4, &k5, &k6, &k7, &k8, &k9, &k10,
                            &k11, &k12, &ftmp})
                v->resize(dim);
        }
    }

    /// Order-scaled variant of the classic starting-step heuristic.
    double initial_step(const DerivFn& f, double t, const Eigen::VectorXcd& y, double rel_tol,
                        double abs_tol, double span) {
        const double sc = abs_tol + rel_tol * std::max(y.cwiseAbs().maxCoeff(), 1e-300);
        const double d0 = y.norm() / sc;
        const double d1 = k1.norm() / sc;
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        yw = y + h0 * k1;
        f(t + h0, yw, ftmp);
        ++stats_.rhs_evaluations;
        const double d2 = (ftmp - k1).norm() / sc / h0;
        const double dmax = std::max(d1, d2);
        double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dmax, 1.0 / 8.0);
        const double h = std::min({100.0 * h0, h1, span});
        return std::isfinite(h) && h > 0.0 ? h : 1e-6 * span;
    }

    Eigen::VectorXcd yw, ynew, ksum, k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, ftmp;
    IntegratorStats stats_;
    double last_h_ = 0.0;
};

/// Hamiltonian closure over normalized pulse time: fills H(x) in rad/us for
/// the pulse with the given direction sign.
using HamiltonianFn = std::function<void(double x, int pulse_sign, Eigen::MatrixXcd&)>;

inline constexpr double kDefaultRelTol = 1e-10;
inline constexpr double kMinRelTol = 1e-13;
inline constexpr double kMaxRelTol = 1e-6;

/// Integrates i dpsi/dt = H(t) psi across the schedule. A dual schedule runs
/// the identical waveform twice back-to-back with the Doppler sign flipped in
/// the second pulse; the state is carried through the boundary without
/// projection or renormalization. When `trajectory` is non-null the state is
/// recorded at `samples_per_pulse`+1 uniform times per pulse.
inline Eigen::VectorXcd propagate(const HamiltonianFn& system, int dim,
                                  const PulseSchedule& schedule, const Eigen::VectorXcd& psi0,
                                  double rel_tol = kDefaultRelTol,
                                  Trajectory* trajectory = nullptr, int samples_per_pulse = 500,
                                  IntegratorStats* stats = nullptr) {
    schedule.validate();
    if (psi0.size() != dim) throw ArgumentError("propagate: psi0 dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-12)
        throw ArgumentError("propagate: psi0 must be a unit vector");
    if (!(rel_tol >= kMinRelTol && rel_tol <= kMaxRelTol))
        throw ArgumentError("propagate: rel_tol outside [1e-13, 1e-6]");

    const double tp = schedule.tp_us;
    Eigen::MatrixXcd h(dim, dim);
    Eigen::VectorXcd y = psi0;
    Dop853 integrator;
    const std::complex<double> minus_i(0.0, -1.0);

    for (int pulse = 0; pulse < schedule.pulse_count(); ++pulse) {
        const int sign = pulse == 0 ? 1 : -1;
        const double t_offset = pulse * tp;
        DerivFn deriv = [&](double t, const Eigen::VectorXcd& yy, Eigen::VectorXcd& dy) {
            const double x = std::clamp(t / tp, 0.0, 1.0);
            system(x, sign, h);
            dy.noalias() = h * yy;
            dy *= minus_i;
        };
        if (trajectory == nullptr) {
            integrator.integrate(deriv, 0.0, tp, y, rel_tol);
        } else {
            if (samples_per_pulse < 1)
                throw ArgumentError("propagate: samples_per_pulse must be >= 1");
            if (pulse == 0) trajectory->samples.push_back({0.0, y});
            double h_carry = 0.0;
            for (int s = 1; s <= samples_per_pulse; ++s) {
                const double ta = tp * (s - 1) / samples_per_pulse;
                const double tb = s == samples_per_pulse ? tp : tp * s / samples_per_pulse;
                integrator.integrate(deriv, ta, tb, y, rel_tol, 0.0, h_carry);
                h_carry = integrator.last_step();
                trajectory->samples.push_back({t_offset + tb, y});
            }
        }
    }
    if (stats != nullptr) *stats = integrator.stats();
    return y;
}

/// Convenience overload binding a HamiltonianModel.
inline Eigen::VectorXcd propagate(const HamiltonianModel& model, const PulseSchedule& schedule,
                                  const Eigen::VectorXcd& psi0, double rel_tol = kDefaultRelTol,
                                  Trajectory* trajectory = nullptr, int samples_per_pulse = 500,
                                  IntegratorStats* stats = nullptr) {
    HamiltonianFn fn = [&model](double x, int pulse_sign, Eigen::MatrixXcd& h) {
        model.assemble(x, h, pulse_sign);
    };
    return propagate(fn, model.dim(), schedule, psi0, rel_tol, trajectory, samples_per_pulse,
                     stats);
}

/// Unit vector along basis state `index`.
inline Eigen::VectorXcd basis_state(int dim, int index = 0) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v[index] = 1.0;
    return v;
}

}  // namespace ormd
