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

#ifndef RIPS_MULTIPATH_ESTIMATOR_HPP
#define RIPS_MULTIPATH_ESTIMATOR_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rips/channel_model.hpp"
#include "rips/phase.hpp"

// Multipath profile estimation from amplitude-vs-frequency data.
//
// The frequency-weighted amplitude W(k) = A(k) f(k)/f(0) of a channel is a
// constant plus one sinusoid per reflected path, with the path's delay playing
// the role of the tone frequency. The LOS amplitude is the mean of W, the
// delays are periodogram peaks of the mean-removed series, and each path's
// (alpha, theta) comes from a linear least-squares fit on cos/sin columns.
// That linear model is the small-alpha expansion; a nonlinear fit of the exact
// amplitude model finishes the estimate.

namespace rips
{

/// Raised when the reflection least-squares problem is rank deficient or the
/// input cannot support an estimate.
class EstimationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct EstimatorConfig
{
    std::size_t num_paths = 4;
    std::size_t zero_pad_factor = 64;
    std::optional<double> min_delay;      ///< s; default 1/(2 K delta_f)
    std::optional<double> max_delay;      ///< s; default 1/(2 delta_f)
    std::optional<double> min_separation; ///< s; default 1/(K delta_f)
    double alpha_floor = 0.01;
    /// Apply the f(k)/f(0) weighting that removes the free-space 1/f roll-off.
    /// Turn off when the LOS amplitude is flat across frequency.
    bool frequency_weighting = true;
    /// Move each periodogram delay, within half a resolution bin, to the
    /// minimum of the least-squares fit residual (coordinate-wise
    /// golden-section search).
    bool refine_delays = true;
    std::size_t refine_sweeps = 2;
    /// Fit a constant column next to the cos/sin pairs and fold it into the
    /// LOS amplitude.
    bool fit_offset = true;
    /// Levenberg-Marquardt polish on the exact amplitude model
    /// |1 + sum_i alpha_i exp(-j psi_i)| over A, alpha, tau and theta, then
    /// drop weak paths the fit does not need.
    bool polish_exact = true;
    /// Upper bound on each polished alpha. Without it the exact model admits
    /// spurious strong-reflection fits (A alpha |1 + e^{j psi}/alpha| has the
    /// same magnitude shape).
    double alpha_max = 1.0;
    std::size_t polish_iterations = 30;

    double min_delay_for(const MeasurementGrid &grid) const;
    double max_delay_for(const MeasurementGrid &grid) const;
    double min_separation_for(const MeasurementGrid &grid) const;

    /// Throws std::invalid_argument on num_paths == 0, zero_pad_factor == 0,
    /// min_delay >= max_delay, a negative separation/floor or
    /// alpha_max <= alpha_floor.
    void validate(const MeasurementGrid &grid) const;
};

struct ChannelEstimate
{
    double los_amplitude_hat = 0.0;
    MultipathProfile profile_hat;
    double residual_rms = 0.0;
};

struct Reflection
{
    double alpha;
    double theta; ///< [0, 2pi)
};

struct ReflectionFit
{
    std::vector<Reflection> reflections; ///< same order as the delays
    double residual_rms = 0.0;           ///< RMS of b - design * x
    double offset = 0.0;                 ///< fitted constant in b units, 0 unless requested
};

struct DelayPeak
{
    double delay;     ///< s, interpolated
    double magnitude; ///< periodogram magnitude at the peak bin
};

/// W(k) = A(k) f_X(k)/f_X(0). Throws std::invalid_argument on a size mismatch
/// or a non-positive amplitude.
std::vector<double> weighted_amplitude_series(std::span<const double> amplitudes, const MeasurementGrid &grid,
                                              Sender sender);

/// Mean of W over all K samples. Throws std::invalid_argument on empty input.
double estimate_los_amplitude(std::span<const double> weighted);

/// W(k) - los_hat. Throws std::invalid_argument if los_hat <= 0.
std::vector<double> multipath_residual(std::span<const double> weighted, double los_hat);

/// Magnitude of the DFT of the residual zero-padded to K*zero_pad_factor
/// points, bins 0..N/2. Bin m corresponds to delay m/(N delta_f).
std::vector<double> residual_periodogram(std::span<const double> residual, std::size_t zero_pad_factor);

/// Periodogram peaks in [min_delay, max_delay], strongest first selection
/// with the min_separation guard, at most num_paths, sorted by delay.
/// Throws EstimationError when K < 8.
std::vector<DelayPeak> find_delay_peaks(std::span<const double> residual, const MeasurementGrid &grid,
                                        const EstimatorConfig &cfg);

/// Delays of find_delay_peaks, passed through refine_delays when
/// cfg.refine_delays is set.
std::vector<double> estimate_delays(std::span<const double> residual, const MeasurementGrid &grid,
                                    const EstimatorConfig &cfg);

/// Least-squares fit of b(k) = residual(k)/los_hat on the columns
/// cos(2 pi tau_i f_X(k)) and -sin(2 pi tau_i f_X(k)).
/// Throws EstimationError if the design matrix is rank deficient.
ReflectionFit fit_reflection_coefficients(std::span<const double> residual, double los_hat, const MeasurementGrid &grid,
                                          Sender sender, std::span<const double> delays, bool with_offset = false);

/// Coordinate-wise minimization of the fit residual over each delay, each
/// searched within half a resolution bin of its start value and kept inside
/// [min_delay, max_delay].
std::vector<double> refine_delays(std::span<const double> residual, double los_hat, const MeasurementGrid &grid,
                                  Sender sender, std::span<const double> delays, const EstimatorConfig &cfg);

std::vector<Reflection> solve_reflection_coefficients(std::span<const double> residual, double los_hat,
                                                      const MeasurementGrid &grid, Sender sender,
                                                      std::span<const double> delays);

/// Full estimate from |gamma(k)|. A rank-deficient fit drops the weakest
/// delay and retries; components below alpha_floor are pruned.
ChannelEstimate estimate_channel_profile(std::span<const double> amplitudes, const MeasurementGrid &grid,
                                         Sender sender, const EstimatorConfig &cfg);

/// epsilon evaluated on the estimated profile; 0 for an empty profile.
double predict_phase_error(const ChannelEstimate &estimate, double f);

/// phi(k) - predicted epsilon at the sender's frequencies, wrapped.
PhaseSeries correct_channel_phase(const PhaseSeries &measured, const ChannelEstimate &estimate,
                                  const MeasurementGrid &grid, Sender sender);

/// Delta phi(k) - (eps_AC - eps_AD - eps_BC + eps_BD)(k), wrapped, each
/// predicted error evaluated at its sender's frequency.
PhaseSeries correct_phase_difference(const PhaseSeries &measured, const PerChannel<ChannelEstimate> &estimates,
                                     const MeasurementGrid &grid);

} // namespace rips

#endif
