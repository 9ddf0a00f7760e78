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

#ifndef RIPS_QRANGE_ESTIMATOR_HPP
#define RIPS_QRANGE_ESTIMATOR_HPP

#include <cstddef>
#include <optional>

#include "rips/channel_model.hpp"
#include "rips/phase.hpp"

namespace rips
{

struct QRangeSearchConfig
{
    std::optional<double> d_min; ///< m; default -c/(2 delta_f)
    std::optional<double> d_max; ///< m; default +c/(2 delta_f)
    double coarse_step = 0.01;   ///< m
    std::size_t refine_iters = 40;
    std::size_t refine_candidates = 8; ///< coarse local maxima refined

    double d_min_for(const MeasurementGrid &grid) const;
    double d_max_for(const MeasurementGrid &grid) const;
    /// Throws std::invalid_argument on an empty interval, coarse_step <= 0 or
    /// refine_candidates == 0.
    void validate(const MeasurementGrid &grid) const;
};

struct QRangeEstimate
{
    double d_hat; ///< m
    double score; ///< S(d_hat) in [-1, 1]
};

/// wrap(2 pi f(k) d_q / c) at the centre frequencies.
PhaseSeries qrange_phase_model(double d_q, const MeasurementGrid &grid);

/// S(d) = (1/K) sum_k cos(phi(k) - 2 pi f(k) d / c). Only cos/sin of the input
/// phases enter, so no unwrapping is ever needed.
double qrange_score(const PhaseSeries &phases, const MeasurementGrid &grid, double d);

/// Maximizes S over [d_min, d_max]: a coarse scan at coarse_step, then
/// golden-section refinement around each of the refine_candidates strongest
/// coarse local maxima. Ties go to the smaller d.
QRangeEstimate estimate_qrange(const PhaseSeries &phases, const MeasurementGrid &grid,
                               const QRangeSearchConfig &cfg = {});

} // namespace rips

#endif
