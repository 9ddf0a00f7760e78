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

#include "rips/phase.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rips
{

double wrap_to_pi(double angle)
{
    if (!std::isfinite(angle))
        throw std::invalid_argument("wrap_to_pi: non-finite angle");
    if (angle > -pi && angle <= pi)
        return angle;
    double r = std::remainder(angle, two_pi);
    if (r <= -pi)
        r += two_pi;
    return r;
}

PhaseTurns PhaseTurns::from_cycles(double cycles)
{
    if (!std::isfinite(cycles))
        throw std::invalid_argument("PhaseTurns: non-finite phase");
    const double frac = cycles - std::floor(cycles);
    if (!(frac < 1.0))
        return from_raw(0);
    return from_raw(static_cast<std::uint64_t>(std::ldexp(frac, 64)));
}

PhaseTurns PhaseTurns::from_radians(double radians) { return from_cycles(radians / two_pi); }

double PhaseTurns::radians() const
{
    const auto s = static_cast<std::int64_t>(raw_);
    if (s == std::numeric_limits<std::int64_t>::min())
        return pi;
    const double r = std::ldexp(static_cast<double>(s), -63) * pi;
    return r <= -pi ? pi : r;
}

double wrapped_mse(std::span<const double> estimates, std::span<const double> truth)
{
    if (estimates.size() != truth.size())
        throw std::invalid_argument("wrapped_mse: length mismatch");
    if (estimates.empty())
        throw std::invalid_argument("wrapped_mse: empty series");
    double acc = 0.0;
    for (std::size_t k = 0; k < estimates.size(); ++k)
    {
        const double e = wrap_to_pi(estimates[k] - truth[k]);
        acc += e * e;
    }
    return acc / static_cast<double>(estimates.size());
}

double wrapped_rmse(std::span<const double> estimates, std::span<const double> truth)
{
    return std::sqrt(wrapped_mse(estimates, truth));
}

} // namespace rips
