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

#ifndef RIPS_MONTECARLO_HPP
#define RIPS_MONTECARLO_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rips/channel_model.hpp"
#include "rips/multipath_estimator.hpp"
#include "rips/qrange_estimator.hpp"

namespace rips
{

struct ParamDistribution
{
    enum class Kind
    {
        Fixed,
        Uniform
    };
    Kind kind = Kind::Fixed;
    double lo = 0.0; ///< the value, for Fixed
    double hi = 0.0;

    static ParamDistribution fixed(double value) { return {Kind::Fixed, value, value}; }
    static ParamDistribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }

    /// Fixed draws consume no randomness.
    double sample(RandomStream &rng) const;
    void validate() const;

    friend bool operator==(const ParamDistribution &, const ParamDistribution &) = default;
};

enum class ScenarioKind
{
    SingleChannel,
    Quad
};

enum class SweepParam
{
    Alpha,
    Tau
};

/// Channel used by single-channel experiments. Sender B, so f_X(0) = f_b0.
inline constexpr Channel single_channel = Channel::BC;

struct ExperimentConfig
{
    MeasurementGrid grid{2400e6, 20e3, 1e6, 100};
    double snr_db = 30.0; ///< +inf disables noise
    std::size_t trials = 10'000;
    std::uint64_t seed = 0;
    ParamDistribution alpha_dist = ParamDistribution::uniform(0.0, 1.0);
    ParamDistribution tau_dist = ParamDistribution::uniform(5e-9, 50e-9);
    ParamDistribution theta_dist = ParamDistribution::uniform(0.0, two_pi);
    std::size_t paths_per_channel = 1;
    ScenarioKind scenario_kind = ScenarioKind::SingleChannel;
    LosAmplitudeMode los_amplitude;
    EstimatorConfig estimator;
    QRangeSearchConfig qrange;
    double dq_target = 75.0; ///< m

    double snr_linear() const;
    /// Estimator settings with the frequency weighting matched to the LOS
    /// amplitude mode (flat LOS amplitude needs no 1/f compensation).
    EstimatorConfig effective_estimator() const;
    void validate() const;
};

/// Independent stream for (seed, point, trial); identical regardless of which
/// worker runs the trial.
RandomStream trial_stream(std::uint64_t seed, std::uint64_t point, std::uint64_t trial);

/// Runs body(i) for i in [0, count) on `threads` workers (0 = hardware
/// concurrency). If any call throws, the exception from the lowest index is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &body);

/// Random nuisance terms, distances and per-channel profiles. Quad scenarios
/// hit cfg.dq_target exactly via d_AD = dq + d_BD - d_BC + d_AC; single-channel
/// scenarios populate only the BC profile.
QuadScenario sample_scenario(const ExperimentConfig &cfg, RandomStream &rng);

struct SweepResult
{
    std::vector<double> sweep_values;
    std::vector<double> rmse_free;
    std::vector<double> rmse_distorted;
    std::vector<double> rmse_corrected;
    std::size_t trials_per_point = 0;
};

/// Single-channel phase RMSE under the multipath-free, distorted and corrected
/// scenarios, with the swept parameter fixed at each point. The MP-free and
/// MP phasors of a trial share one noise draw.
SweepResult run_phase_sweep(const ExperimentConfig &cfg, SweepParam param, std::span<const double> points,
                            unsigned threads = 0);

struct PercentileReport
{
    double median_distorted;
    double p95_distorted;
    double median_corrected;
    double p95_corrected;
};

struct QRangeCdfResult
{
    std::vector<double> errors_distorted; ///< sorted ascending, m
    std::vector<double> errors_corrected; ///< sorted ascending, m
    PercentileReport percentiles;
};

/// |d_hat - d_q| from uncorrected and corrected phase differences.
/// Throws std::invalid_argument unless cfg.scenario_kind is Quad.
QRangeCdfResult run_qrange_cdf(const ExperimentConfig &cfg, unsigned threads = 0);

/// Linear-interpolation percentile of a sorted sample, p in [0, 100].
double percentile(std::span<const double> sorted, double p);

struct CorrectionExample
{
    std::vector<double> frequencies;     ///< Hz, sender frequencies of the channel
    std::vector<double> error_before;    ///< measured phase - LOS truth, rad
    std::vector<double> error_after;     ///< corrected phase - LOS truth, rad
    ChannelEstimate estimate;
    double max_abs_before = 0.0;
    double max_abs_after = 0.0;
};

/// One single-channel correction run (stream (seed, 0, 0)).
CorrectionExample run_correction_example(const ExperimentConfig &cfg);

} // namespace rips

#endif
