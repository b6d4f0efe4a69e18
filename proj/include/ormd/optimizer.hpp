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

// Waveform optimization. The objective is the gate error plus quadratic
// penalties for negative Rabi amplitude and for exceeding an amplitude cap,
// both integrated on the standard 2001-point grid. The search is a bounded
// Nelder-Mead simplex with restart-on-stall and optional seeded multi-start;
// everything is deterministic for a fixed (seed, budget).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ormd/common.hpp"
#include "ormd/gate_metrics.hpp"
#include "ormd/scenario.hpp"

namespace ormd {

/// Objective value returned for a propagation failure; large but finite so
/// the search continues.
inline constexpr double kFailureSentinel = 1e9;

struct PenaltySettings {
    double lambda_neg = 1e6;  // MHz^-2 scaled weight for Omega < 0
    double lambda_cap = 1e6;  // MHz^-2 scaled weight for Omega > omega_max
    double omega_max_mhz = std::numeric_limits<double>::infinity();
};

struct ParamSpec {
    std::string name;  // "amp[i]", "det.const", "det.cos[m]", "tp"
    double lo = 0.0;
    double hi = 0.0;
};

struct OptimizationProblem {
    ScenarioConfig base;
    std::vector<ParamSpec> free_params;
    PenaltySettings penalties;
    long budget = 5000;
    unsigned long long seed = 1;
    int n_starts = 1;
    double target_objective = 0.0;  // stop early once best <= target (0 = run out the budget)
    double rel_tol = kDefaultRelTol;

    void validate() const {
        base.validate();
        if (free_params.empty()) throw ArgumentError("optimize: no free parameters");
        for (const auto& p : free_params) {
            if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi))
                throw ArgumentError("optimize: bounds for '" + p.name +
                                    "' must be a finite increasing interval");
        }
        if (budget < 0) throw ArgumentError("optimize: budget must be >= 0");
        if (n_starts < 1) throw ArgumentError("optimize: n_starts must be >= 1");
        if (penalties.lambda_neg < 0.0 || penalties.lambda_cap < 0.0)
            throw ArgumentError("optimize: penalty weights must be >= 0");
    }

    std::vector<double> initial_point() const {
        std::vector<double> x;
        x.reserve(free_params.size());
        for (const auto& p : free_params) x.push_back(get_param(base, p.name));
        return x;
    }

    ScenarioConfig apply(const std::vector<double>& x) const {
        ScenarioConfig c = base;
        for (std::size_t i = 0; i < free_params.size(); ++i)
            set_param(c, free_params[i].name, x[i]);
        return c;
    }
};

struct ObjectiveValue {
    double total = 0.0;
    double gate_error = 0.0;
    double penalty_neg = 0.0;
    double penalty_cap = 0.0;
    bool propagation_failed = false;
};

/// Trapezoidal integral over x in [0,1] of max(0, -Omega)^2 (below) and
/// max(0, Omega - cap)^2 on the standard grid.
inline double negativity_integral(const SineSeries& amplitude,
                                  int grid_points = kAmplitudeGridPoints) {
    double acc = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = static_cast<double>(i) / (grid_points - 1);
        const double v = std::max(0.0, -amplitude.value(x));
        const double w = (i == 0 || i == grid_points - 1) ? 0.5 : 1.0;
        acc += w * v * v;
    }
    return acc / (grid_points - 1);
}

inline double cap_integral(const SineSeries& amplitude, double omega_max_mhz,
                           int grid_points = kAmplitudeGridPoints) {
    if (!std::isfinite(omega_max_mhz)) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = static_cast<double>(i) / (grid_points - 1);
        const double v = std::max(0.0, amplitude.value(x) - omega_max_mhz);
        const double w = (i == 0 || i == grid_points - 1) ? 0.5 : 1.0;
        acc += w * v * v;
    }
    return acc / (grid_points - 1);
}

/// Pure, deterministic objective. Propagation failures are recorded as a
/// large finite sentinel rather than thrown.
inline ObjectiveValue objective(const OptimizationProblem& problem,
                                const std::vector<double>& x) {
    const ScenarioConfig config = problem.apply(x);
    const SineSeries amp = config.amplitude();
    ObjectiveValue v;
    v.penalty_neg = problem.penalties.lambda_neg * negativity_integral(amp);
    v.penalty_cap =
        problem.penalties.lambda_cap * cap_integral(amp, problem.penalties.omega_max_mhz);
    try {
        const GateResult r =
            evaluate_gate(config.gate_scenario(), 0.0, problem.rel_tol,
                          /*require_nonneg_amplitude=*/false);
        v.gate_error = r.gate_error;
    } catch (const IntegrationError&) {
        v.gate_error = kFailureSentinel;
        v.propagation_failed = true;
    }
    v.total = v.gate_error + v.penalty_neg + v.penalty_cap;
    return v;
}

struct TracePoint {
    long evaluation;
    double best_objective;
};

struct OptimizationReport {
    std::vector<std::pair<std::string, double>> best_params;
    ObjectiveValue best;
    long evaluation_count = 0;
    std::vector<TracePoint> trace;  // best-so-far, recorded on improvement
    bool found_physical_point = false;
    int restarts = 0;

    bool infeasible() const { return !found_physical_point; }
};

namespace detail {

struct EvalBudget {
    const OptimizationProblem* problem;
    long used = 0;
    long cap = 0;
    OptimizationReport* report;

    bool exhausted() const { return used >= cap; }

    double eval(const std::vector<double>& x) {
        const ObjectiveValue v = objective(*problem, x);
        ++used;
        ++report->evaluation_count;
        if (v.penalty_neg == 0.0 && v.penalty_cap == 0.0 && !v.propagation_failed)
            report->found_physical_point = true;
        if (report->trace.empty() || v.total < report->best.total) {
            report->best = v;
            report->best_params.clear();
            for (std::size_t i = 0; i < problem->free_params.size(); ++i)
                report->best_params.emplace_back(problem->free_params[i].name, x[i]);
            report->trace.push_back({report->evaluation_count, report->best.total});
        }
        return v.total;
    }
};

/// One bounded Nelder-Mead run from x0. Returns when converged, budget is
/// exhausted, or the target was reached.
inline void nelder_mead(EvalBudget& budget, std::vector<double> x0,
                        const std::vector<double>& lo, const std::vector<double>& hi,
                        const std::vector<double>& step, double target) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    auto clamp_point = [&](std::vector<double>& p) {
        for (std::size_t i = 0; i < n; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    };

    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    clamp_point(xs[0]);
    fs[0] = budget.eval(xs[0]);
    for (std::size_t j = 0; j < n; ++j) {
        auto& p = xs[j + 1];
        p[j] += step[j];
        if (p[j] > hi[j]) p[j] = xs[0][j] - step[j];  // reflect into the box
        clamp_point(p);
        if (budget.exhausted()) return;
        fs[j + 1] = budget.eval(p);
    }

    std::vector<std::size_t> order(n + 1);
    while (!budget.exhausted()) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];
        if (fs[best] <= target) return;

        // Converged simplex: function spread and geometric size both small.
        double size = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            size = std::max(size, std::abs(xs[worst][j] - xs[best][j]) /
                                      std::max(1.0, std::abs(xs[best][j])));
        if (std::abs(fs[worst] - fs[best]) <= 1e-14 * (1.0 + std::abs(fs[best])) && size <= 1e-11)
            return;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j];
        }
        for (double& cj : centroid) cj /= static_cast<double>(n);

        auto blend = [&](const std::vector<double>& from, double scale) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + scale * (from[j] - centroid[j]);
            clamp_point(p);
            return p;
        };

        const std::vector<double> xr = blend(xs[worst], -alpha);
        const double fr = budget.eval(xr);
        if (fr < fs[best]) {
            if (!budget.exhausted()) {
                const std::vector<double> xe = blend(xs[worst], -alpha * gamma);
                const double fe = budget.eval(xe);
                if (fe < fr) {
                    xs[worst] = xe;
                    fs[worst] = fe;
                    continue;
                }
            }
            xs[worst] = xr;
            fs[worst] = fr;
            continue;
        }
        if (fr < fs[second_worst]) {
            xs[worst] = xr;
            fs[worst] = fr;
            continue;
        }
        if (budget.exhausted()) return;
        const bool outside = fr < fs[worst];
        const std::vector<double> xc = blend(outside ? xr : xs[worst], rho);
        const double fc = budget.eval(xc);
        if (fc < (outside ? fr : fs[worst])) {
            xs[worst] = xc;
            fs[worst] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j)
                xs[i][j] = xs[best][j] + sigma * (xs[i][j] - xs[best][j]);
            clamp_point(xs[i]);
            if (budget.exhausted()) return;
            fs[i] = budget.eval(xs[i]);
        }
    }
}

}  // namespace detail

/// Runs the bounded simplex search. The first start begins exactly at the
/// problem's seed point (so a zero/one budget returns the seed evaluation);
/// later starts perturb it with the seeded RNG. Stalled runs restart around
/// the incumbent with jittered steps until the budget is spent or the target
/// objective is reached.
inline OptimizationReport optimize(const OptimizationProblem& problem) {
    problem.validate();
    OptimizationReport report;
    const std::size_t n = problem.free_params.size();
    std::vector<double> lo(n), hi(n), base_step(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = problem.free_params[i].lo;
        hi[i] = problem.free_params[i].hi;
        base_step[i] = 0.05 * (hi[i] - lo[i]);
    }
    const std::vector<double> x0 = problem.initial_point();
    const double target = problem.target_objective;

    const long total_budget = std::max<long>(problem.budget, 1);
    const long per_start = total_budget / problem.n_starts;

    for (int s = 0; s < problem.n_starts; ++s) {
        detail::EvalBudget budget{&problem, 0,
                                  s == 0 ? per_start + total_budget % problem.n_starts
                                         : per_start,
                                  &report};
        if (budget.cap <= 0) continue;
        std::mt19937_64 rng(problem.seed + 0x9E3779B97F4A7C15ULL * static_cast<unsigned long long>(s));
        std::vector<double> start = x0;
        if (s > 0) {
            for (std::size_t i = 0; i < n; ++i) {
                std::uniform_real_distribution<double> jitter(-0.1 * (hi[i] - lo[i]),
                                                              0.1 * (hi[i] - lo[i]));
                start[i] = std::clamp(start[i] + jitter(rng), lo[i], hi[i]);
            }
        }
        std::vector<double> step = base_step;
        while (!budget.exhausted()) {
            detail::nelder_mead(budget, start, lo, hi, step, target);
            if (!report.trace.empty() && report.best.total <= target) return report;
            if (budget.exhausted()) break;
            // Restart around the incumbent with jittered, shrinking steps.
            ++report.restarts;
            start.resize(n);
            for (std::size_t i = 0; i < n; ++i) start[i] = report.best_params[i].second;
            std::uniform_real_distribution<double> scale(0.1, 1.0);
            for (std::size_t i = 0; i < n; ++i) step[i] = base_step[i] * scale(rng);
        }
        if (!report.trace.empty() && report.best.total <= target) return report;
    }
    return report;
}

struct ScanPoint {
    double tp_us;
    double gate_error;
};

struct ScanResult {
    std::vector<ScanPoint> coarse;
    double best_tp_us = 0.0;
    double best_gate_error = std::numeric_limits<double>::infinity();
    long evaluations = 0;
};

/// Gate error as a function of pulse time with the normalized waveform fixed.
/// Coarse grid first (evaluated in parallel), then iterative grid refinement
/// of the most promising local minima down to 1e-4 us resolution. Candidates
/// are refined in coarse-error order until one beats `target`.
inline ScanResult scan_pulse_time(const ScenarioConfig& config, double tp_lo_us, double tp_hi_us,
                                  int steps, double target = 1e-4,
                                  double rel_tol = kDefaultRelTol, int max_candidates = 12) {
    if (!(tp_lo_us > 0.0 && tp_hi_us > tp_lo_us))
        throw ArgumentError("scan_pulse_time: range must be positive and increasing");
    if (steps < 2) throw ArgumentError("scan_pulse_time: steps must be >= 2");

    ScanResult result;
    auto error_at = [&](double tp) {
        const GateResult r = evaluate_gate(config.gate_scenario(tp), 0.0, rel_tol);
        return r.gate_error;
    };

    result.coarse.resize(static_cast<std::size_t>(steps));
    parallel_for(static_cast<std::size_t>(steps), [&](std::size_t i) {
        const double tp =
            tp_lo_us + (tp_hi_us - tp_lo_us) * static_cast<double>(i) / (steps - 1);
        result.coarse[i] = {tp, error_at(tp)};
    });
    result.evaluations += steps;

    // Local minima of the coarse curve, endpoints included, best first.
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < result.coarse.size(); ++i) {
        const bool left_ok = i == 0 || result.coarse[i].gate_error <= result.coarse[i - 1].gate_error;
        const bool right_ok = i + 1 == result.coarse.size() ||
                              result.coarse[i].gate_error <= result.coarse[i + 1].gate_error;
        if (left_ok && right_ok) candidates.push_back(i);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return result.coarse[a].gate_error < result.coarse[b].gate_error;
    });
    if (candidates.size() > static_cast<std::size_t>(max_candidates))
        candidates.resize(static_cast<std::size_t>(max_candidates));

    for (std::size_t ci : candidates) {
        double blo = ci == 0 ? result.coarse[ci].tp_us : result.coarse[ci - 1].tp_us;
        double bhi = ci + 1 == result.coarse.size() ? result.coarse[ci].tp_us
                                                    : result.coarse[ci + 1].tp_us;
        double cand_tp = result.coarse[ci].tp_us;
        double cand_err = result.coarse[ci].gate_error;
        // Shrinking grids, repeated until a level with spacing <= 0.1 ns has
        // been evaluated.
        constexpr int kPoints = 13;
        double level_spacing;
        do {
            level_spacing = (bhi - blo) / (kPoints - 1);
            std::vector<ScanPoint> level(kPoints);
            parallel_for(kPoints, [&](std::size_t i) {
                const double tp = blo + (bhi - blo) * static_cast<double>(i) / (kPoints - 1);
                level[i] = {tp, error_at(tp)};
            });
            result.evaluations += kPoints;
            std::size_t ibest = 0;
            for (std::size_t i = 1; i < level.size(); ++i)
                if (level[i].gate_error < level[ibest].gate_error) ibest = i;
            if (level[ibest].gate_error < cand_err) {
                cand_err = level[ibest].gate_error;
                cand_tp = level[ibest].tp_us;
            }
            const double half_span = (bhi - blo) / 12.0;
            blo = std::max(tp_lo_us, level[ibest].tp_us - half_span);
            bhi = std::min(tp_hi_us, level[ibest].tp_us + half_span);
        } while (level_spacing > 1e-4);
        if (cand_err < result.best_gate_error) {
            result.best_gate_error = cand_err;
            result.best_tp_us = cand_tp;
        }
        if (result.best_gate_error < target) break;
    }
    return result;
}

}  // namespace ormd
