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

// Time-dependent Hamiltonians for ground-Rydberg CZ gate drives.
//
// Two drive schemes (direct one-photon transition, and a two-photon ladder
// through an off-resonant intermediate state), each in a single-excitation
// manifold (one qubit driven) and a double-excitation manifold (both qubits
// driven, coupling through symmetric bright states). The blockade is either
// idealized (doubly-excited Rydberg pair dropped entirely) or a single-channel
// Forster pair |rr> <-> |qq'> with coupling B and penalty delta_q.
//
// State order per configuration (state 0 is always the computational
// start/return state):
//   OnePhoton /Single           : |01>, |0r>
//   OnePhoton /Double/Idealized : |11>, |rt>                  (|rt> = (|r1>+|1r>)/sqrt2)
//   OnePhoton /Double/Forster   : |11>, |rt>, |rr>, |qq'>
//   TwoPhoton /Single           : |01>, |0e>, |0r>
//   TwoPhoton /Double/Idealized : |11>, |et>, |rt>, |Rt>      (|Rt> = (|re>+|er>)/sqrt2)
//   TwoPhoton /Double/Forster   : |11>, |et>, |rt>, |Rt>, |rr>, |qq'>
//
// All waveform inputs are frequency/2pi in MHz; matrix entries come out in
// angular frequency (rad/us), i.e. multiplied by 2pi. A Doppler shift adds
// (Rydberg excitation count) * 2pi * delta_D * sign to each diagonal entry.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ormd/common.hpp"
#include "ormd/waveform.hpp"

namespace ormd {

enum class DriveKind { OnePhoton, TwoPhoton };
enum class BlockadeKind { Idealized, ForsterRISA };
enum class Manifold { SingleExcitation, DoubleExcitation };

/// Drive parameters. OnePhoton uses `drive` as (Omega_1, Delta_1). TwoPhoton
/// uses `drive` as (Omega_p, two-photon detuning delta) plus the constant
/// Stokes Rabi frequency Omega_S and intermediate-state detuning Delta.
struct DriveScheme {
    DriveKind kind = DriveKind::OnePhoton;
    WaveformSpec drive;
    double omega_stokes_mhz = 0.0;
    double delta_intermediate_mhz = 0.0;

    void validate() const {
        if (kind == DriveKind::TwoPhoton) {
            if (!(omega_stokes_mhz > 0.0))
                throw ConfigError("omega_stokes_mhz", "two-photon drive requires Omega_S > 0");
            if (!(std::abs(delta_intermediate_mhz) > 0.0))
                throw ConfigError("delta_intermediate_mhz",
                                  "two-photon drive requires a nonzero intermediate detuning");
        }
    }
};

struct BlockadeModel {
    BlockadeKind kind = BlockadeKind::Idealized;
    double b_mhz = 0.0;        // Forster coupling strength
    double delta_q_mhz = 0.0;  // energy penalty of |qq'>

    void validate() const {
        if (kind == BlockadeKind::ForsterRISA && !(b_mhz > 0.0))
            throw ConfigError("b_mhz", "Forster model requires B > 0");
    }
};

/// Doppler detuning shift, delta_D in MHz; `sign` is the propagation-direction
/// sign of the current pulse. Zero shift reproduces the unshifted Hamiltonian.
struct DopplerShift {
    double delta_d_mhz = 0.0;
    int sign = 1;
};

inline std::vector<std::string> state_labels(DriveKind drive, Manifold manifold,
                                             BlockadeKind blockade) {
    const bool forster = blockade == BlockadeKind::ForsterRISA;
    if (drive == DriveKind::OnePhoton) {
        if (manifold == Manifold::SingleExcitation) return {"01", "0r"};
        if (!forster) return {"11", "rt"};
        return {"11", "rt", "rr", "qq'"};
    }
    if (manifold == Manifold::SingleExcitation) return {"01", "0e", "0r"};
    if (!forster) return {"11", "et", "rt", "Rt"};
    return {"11", "et", "rt", "Rt", "rr", "qq'"};
}

/// Number of Rydberg excitations per state (drives the Doppler shift).
inline std::vector<int> rydberg_excitations(DriveKind drive, Manifold manifold,
                                            BlockadeKind blockade) {
    const bool forster = blockade == BlockadeKind::ForsterRISA;
    if (drive == DriveKind::OnePhoton) {
        if (manifold == Manifold::SingleExcitation) return {0, 1};
        if (!forster) return {0, 1};
        return {0, 1, 2, 2};
    }
    if (manifold == Manifold::SingleExcitation) return {0, 0, 1};
    if (!forster) return {0, 0, 1, 1};
    return {0, 0, 1, 1, 2, 2};
}

/// Builds H(x)/hbar in rad/us for one (drive, manifold, blockade) combination.
class HamiltonianModel {
  public:
    HamiltonianModel(DriveScheme scheme, Manifold manifold, BlockadeModel blockade,
                     DopplerShift doppler = {}, bool require_nonneg_amplitude = true)
        : scheme_(std::move(scheme)),
          manifold_(manifold),
          blockade_(blockade),
          doppler_(doppler),
          require_nonneg_(require_nonneg_amplitude) {
        scheme_.validate();
        blockade_.validate();
        ryd_ = rydberg_excitations(scheme_.kind, manifold_, blockade_.kind);
        dim_ = static_cast<int>(ryd_.size());
    }

    int dim() const { return dim_; }
    Manifold manifold() const { return manifold_; }
    const DriveScheme& scheme() const { return scheme_; }
    const BlockadeModel& blockade() const { return blockade_; }
    const DopplerShift& doppler() const { return doppler_; }

    /// Assembles H at normalized time x into `h` (resized if needed).
    /// `pulse_sign` flips the Doppler shift for the second pulse of a dual
    /// schedule; the effective sign is doppler.sign * pulse_sign.
    void assemble(double x, Eigen::MatrixXcd& h, int pulse_sign = 1) const {
        if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("assemble: x outside [0, 1]");
        const double omega = scheme_.drive.amplitude.value(x);
        if (require_nonneg_ && omega < -1e-9)
            throw PhysicalityError("negative Rabi amplitude " + format_sig(omega) +
                                   " MHz at x = " + format_sig(x));
        if (h.rows() != dim_ || h.cols() != dim_) h.resize(dim_, dim_);
        h.setZero();

        const double om = kTwoPi * omega;                         // rad/us
        const double det = kTwoPi * scheme_.drive.detuning.value(x);
        const double dop = kTwoPi * doppler_.delta_d_mhz * doppler_.sign * pulse_sign;
        const double b = kTwoPi * blockade_.b_mhz;
        const double dq = kTwoPi * blockade_.delta_q_mhz;
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

        if (scheme_.kind == DriveKind::OnePhoton) {
            if (manifold_ == Manifold::SingleExcitation) {
                h(0, 1) = h(1, 0) = 0.5 * om;
                h(1, 1) = det;
            } else {
                h(0, 1) = h(1, 0) = inv_sqrt2 * om;
                h(1, 1) = det;
                if (blockade_.kind == BlockadeKind::ForsterRISA) {
                    h(1, 2) = h(2, 1) = inv_sqrt2 * om;
                    h(2, 3) = h(3, 2) = b;
                    h(2, 2) = 2.0 * det;
                    h(3, 3) = 2.0 * det + dq;
                }
            }
        } else {
            const double om_s = kTwoPi * scheme_.omega_stokes_mhz;
            const double delta_e = kTwoPi * scheme_.delta_intermediate_mhz;
            if (manifold_ == Manifold::SingleExcitation) {
                h(0, 1) = h(1, 0) = 0.5 * om;
                h(1, 2) = h(2, 1) = 0.5 * om_s;
                h(1, 1) = delta_e;
                h(2, 2) = det;
            } else {
                h(0, 1) = h(1, 0) = inv_sqrt2 * om;
                h(1, 2) = h(2, 1) = 0.5 * om_s;
                h(2, 3) = h(3, 2) = 0.5 * om;
                h(1, 1) = delta_e;
                h(2, 2) = det;
                h(3, 3) = delta_e + det;
                if (blockade_.kind == BlockadeKind::ForsterRISA) {
                    h(3, 4) = h(4, 3) = std::sqrt(2.0) * 0.5 * om_s;
                    h(4, 5) = h(5, 4) = b;
                    h(4, 4) = 2.0 * det;
                    h(5, 5) = 2.0 * det + dq;
                }
            }
        }
        for (int i = 0; i < dim_; ++i) h(i, i) += static_cast<double>(ryd_[i]) * dop;
    }

    Eigen::MatrixXcd build(double x, int pulse_sign = 1) const {
        Eigen::MatrixXcd h;
        assemble(x, h, pulse_sign);
        return h;
    }

  private:
    DriveScheme scheme_;
    Manifold manifold_;
    BlockadeModel blockade_;
    DopplerShift doppler_;
    bool require_nonneg_;
    std::vector<int> ryd_;
    int dim_ = 0;
};

inline bool hermiticity_check(const Eigen::MatrixXcd& h) {
    if (h.rows() != h.cols()) throw ArgumentError("hermiticity_check: matrix not square");
    return (h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12;
}

}  // namespace ormd
