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

#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ormd {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Invalid scenario configuration; carries the offending field name.
class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string& message)
        : Error("config field '" + field + "': " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// Waveform violates the non-negativity requirement on the Rabi amplitude.
class PhysicalityError : public Error {
  public:
    using Error::Error;
};

/// Phase of a zero-magnitude amplitude was requested.
class UndefinedPhaseError : public Error {
  public:
    using Error::Error;
};

/// Adaptive integration could not proceed (step-size underflow).
class IntegrationError : public Error {
  public:
    IntegrationError(const std::string& message, double smallest_step_us, double t_reached_us)
        : Error(message + " (smallest step " + std::to_string(smallest_step_us) +
                " us at t = " + std::to_string(t_reached_us) + " us)"),
          smallest_step_us_(smallest_step_us),
          t_reached_us_(t_reached_us) {}
    double smallest_step_us() const { return smallest_step_us_; }
    double t_reached_us() const { return t_reached_us_; }

  private:
    double smallest_step_us_;
    double t_reached_us_;
};

/// Formats with the given number of significant digits ("%.Ng").
inline std::string format_sig(double value, int digits = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
    return buf;
}

/// Fixed-point formatting ("%.Nf").
inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

/// Wraps an angle into (-pi, pi]; ties at the branch cut map to +pi.
inline double wrap_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

/// Runs fn(0..n-1) on up to hardware_concurrency() threads. Each task must
/// write only to its own output slot, which keeps results independent of
/// scheduling. The lowest-index exception, if any, is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned max_threads = 0) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0 && max_threads < hw) hw = max_threads;
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n, hw));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ormd
