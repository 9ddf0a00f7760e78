// SPDX-License-Identifier: Apache-2.0
//
// rips: multipath error correction for radio interferometric ranging
// Copyright (C) 2026 The rips authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RIPS_PHASE_HPP
#define RIPS_PHASE_HPP

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace rips
{

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to (-pi, pi]. The result differs from the input by an exact
/// multiple of 2*pi (IEEE remainder). Throws std::invalid_argument on NaN/inf.
double wrap_to_pi(double angle);

/// Angle as an unsigned 64-bit fraction of a full turn.
///
/// Sums and differences are exact modulo one turn, which is what lets common
/// phase terms (transmit epochs, receiver down-conversion shifts) cancel
/// bit-exactly in the four-channel difference. Resolution is 2^-64 turn.
class PhaseTurns
{
  public:
    constexpr PhaseTurns() = default;

    static constexpr PhaseTurns from_raw(std::uint64_t raw)
    {
        PhaseTurns p;
        p.raw_ = raw;
        return p;
    }
    static PhaseTurns from_cycles(double cycles);
    static PhaseTurns from_radians(double radians);

    constexpr std::uint64_t raw() const { return raw_; }

    /// Value in (-pi, pi]; the half-turn maps to +pi.
    double radians() const;

    constexpr PhaseTurns operator+(PhaseTurns o) const { return from_raw(raw_ + o.raw_); }
    constexpr PhaseTurns operator-(PhaseTurns o) const { return from_raw(raw_ - o.raw_); }
    constexpr PhaseTurns operator-() const { return from_raw(0u - raw_); }
    constexpr PhaseTurns &operator+=(PhaseTurns o)
    {
        raw_ += o.raw_;
        return *this;
    }
    constexpr PhaseTurns &operator-=(PhaseTurns o)
    {
        raw_ -= o.raw_;
        return *this;
    }
    friend constexpr bool operator==(PhaseTurns, PhaseTurns) = default;

  private:
    std::uint64_t raw_ = 0;
};

/// Wrapped phase values (radians) over the K measurement frequencies.
struct PhaseSeries
{
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
};

/// sqrt(mean_k wrap(est[k] - truth[k])^2). Throws std::invalid_argument on
/// length mismatch or empty input.
double wrapped_rmse(std::span<const double> estimates, std::span<const double> truth);

/// Mean over k of wrap(est[k] - truth[k])^2, the per-trial quantity that
/// Monte Carlo sweeps accumulate.
double wrapped_mse(std::span<const double> estimates, std::span<const double> truth);

} // namespace rips

#endif
