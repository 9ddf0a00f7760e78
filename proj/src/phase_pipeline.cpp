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

#include "rips/phase_pipeline.hpp"

#include <vector>

namespace rips
{
namespace
{

// Differences are taken on exact turns and converted to radians once, so the
// result depends only on the phase terms that do not cancel.
std::vector<PhaseTurns> offset_turns(const QuadObservation &obs, Receiver receiver)
{
    const Channel from_a = receiver == Receiver::C ? Channel::AC : Channel::AD;
    const Channel from_b = receiver == Receiver::C ? Channel::BC : Channel::BD;
    const auto a = obs.phasors(from_a);
    const auto b = obs.phasors(from_b);
    std::vector<PhaseTurns> out(obs.grid().size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = a[k].phase - b[k].phase;
    return out;
}

PhaseSeries to_series(const std::vector<PhaseTurns> &turns)
{
    PhaseSeries s;
    s.values.reserve(turns.size());
    for (auto t : turns)
        s.values.push_back(t.radians());
    return s;
}

} // namespace

PhaseSeries receiver_phase_offset(const QuadObservation &obs, Receiver receiver)
{
    return to_series(offset_turns(obs, receiver));
}

PhaseSeries measured_phase_difference(const QuadObservation &obs)
{
    auto c = offset_turns(obs, Receiver::C);
    const auto d = offset_turns(obs, Receiver::D);
    for (std::size_t k = 0; k < c.size(); ++k)
        c[k] -= d[k];
    return to_series(c);
}

PhaseSeries true_phase_difference(const QuadScenario &scenario, const MeasurementGrid &grid)
{
    scenario.validate();
    const auto &d = scenario.distances;
    std::vector<PhaseTurns> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        out[k] = los_phase_turns(grid, Sender::A, k, scenario.t_a, d[Channel::AC]) -
                 los_phase_turns(grid, Sender::B, k, scenario.t_b, d[Channel::BC]) -
                 los_phase_turns(grid, Sender::A, k, scenario.t_a, d[Channel::AD]) +
                 los_phase_turns(grid, Sender::B, k, scenario.t_b, d[Channel::BD]);
    }
    return to_series(out);
}

} // namespace rips
