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

#ifndef RIPS_PHASE_PIPELINE_HPP
#define RIPS_PHASE_PIPELINE_HPP

#include "rips/channel_model.hpp"
#include "rips/phase.hpp"

namespace rips
{

/// phi_Y(k) = wrap(arg gamma_AY(k) - arg gamma_BY(k)). The receiver's
/// down-conversion shift is common to both tones and drops out.
PhaseSeries receiver_phase_offset(const QuadObservation &obs, Receiver receiver);

/// Delta phi(k) = wrap(phi_C(k) - phi_D(k)).
PhaseSeries measured_phase_difference(const QuadObservation &obs);

/// LOS-only oracle phi_AC - phi_BC - phi_AD + phi_BD (no noise, no multipath).
PhaseSeries true_phase_difference(const QuadScenario &scenario, const MeasurementGrid &grid);

} // namespace rips

#endif
