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

#include "rips/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rips
{

std::string_view channel_name(Channel ch)
{
    switch (ch)
    {
    case Channel::AC:
        return "AC";
    case Channel::AD:
        return "AD";
    case Channel::BC:
        return "BC";
    case Channel::BD:
        return "BD";
    }
    return "?";
}

MeasurementGrid::MeasurementGrid(double f_b0, double tone_gap, double delta_f, std::size_t num_freqs)
    : f_b0_(f_b0), tone_gap_(tone_gap), delta_f_(delta_f), num_freqs_(num_freqs)
{
    if (!(f_b0 > 0.0) || !std::isfinite(f_b0))
        throw std::invalid_argument("MeasurementGrid: f_b0 must be > 0");
    if (!(delta_f > 0.0) || !std::isfinite(delta_f))
        throw std::invalid_argument("MeasurementGrid: delta_f must be > 0");
    if (num_freqs < 2)
        throw std::invalid_argument("MeasurementGrid: need at least 2 frequencies");
    if (!(tone_gap >= 0.0) || !(tone_gap < delta_f))
        throw std::invalid_argument("MeasurementGrid: tone_gap must lie in [0, delta_f)");
}

PathComponent PathComponent::make(double alpha, double tau, double theta)
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("PathComponent: alpha must be >= 0");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("PathComponent: tau must be > 0");
    if (!std::isfinite(theta))
        throw std::invalid_argument("PathComponent: theta must be finite");
    double t = std::fmod(theta, two_pi);
    if (t < 0.0)
        t += two_pi;
    if (t >= two_pi)
        t = 0.0;
    return {alpha, tau, t};
}

MultipathProfile::MultipathProfile(std::vector<PathComponent> components) : components_(std::move(components))
{
    std::ranges::sort(components_, {}, &PathComponent::tau);
    for (std::size_t i = 1; i < components_.size(); ++i)
        if (components_[i].tau - components_[i - 1].tau < 1e-12)
            throw std::invalid_argument("MultipathProfile: delays closer than 1 ps");
}

double path_phase(double tau, double f, double theta)
{
    const double p = tau * f;
    const double err = std::fma(tau, f, -p);
    const double frac = (p - std::floor(p)) + err;
    return two_pi * frac + theta;
}

ChannelResponse composite_channel_response(const MultipathProfile &profile, double f)
{
    double re = 1.0;
    double im = 0.0;
    for (const auto &c : profile.components())
    {
        const double psi = path_phase(c.tau, f, c.theta);
        re += c.alpha * std::cos(psi);
        im += c.alpha * std::sin(psi);
    }
    // 1 + sum alpha exp(-j psi) has imaginary part -im
    return {std::hypot(re, im), wrap_to_pi(std::atan2(-im, re))};
}

double approx_amplitude_gain(const MultipathProfile &profile, double f)
{
    double g = 1.0;
    for (const auto &c : profile.components())
        g += c.alpha * std::cos(path_phase(c.tau, f, c.theta));
    return g;
}

double free_space_amplitude(double power, double gain, double f, double d)
{
    if (!(power > 0.0) || !(gain > 0.0) || !(f > 0.0) || !(d > 0.0))
        throw std::invalid_argument("free_space_amplitude: inputs must be > 0");
    return speed_of_light * std::sqrt(power * gain) / (4.0 * pi * f * d);
}

PhaseTurns los_phase_turns(const MeasurementGrid &grid, Sender sender, std::size_t k, double t_x, double d_xy)
{
    if (k >= grid.size())
        throw std::out_of_range("los_phase: frequency index out of range");
    if (!(d_xy > 0.0))
        throw std::invalid_argument("los_phase: distance must be > 0");
    const double f = grid.frequency(sender, k);
    return PhaseTurns::from_cycles(-f * t_x) + PhaseTurns::from_cycles(-(f * d_xy) / speed_of_light);
}

double los_phase(const MeasurementGrid &grid, Sender sender, std::size_t k, double t_x, double d_xy)
{
    return los_phase_turns(grid, sender, k, t_x, d_xy).radians();
}

double QuadScenario::qrange() const
{
    return distances[Channel::AD] - distances[Channel::BD] + distances[Channel::BC] - distances[Channel::AC];
}

void QuadScenario::validate() const
{
    for (Channel ch : all_channels)
        if (!(distances[ch] > 0.0) || !std::isfinite(distances[ch]))
            throw std::invalid_argument("QuadScenario: distance " + std::string(channel_name(ch)) + " must be > 0");
}

std::complex<double> Phasor::value() const { return std::polar(amplitude, phase.radians()); }

Phasor Phasor::from_complex(std::complex<double> z) { return {std::abs(z), PhaseTurns::from_radians(std::arg(z))}; }

QuadObservation::QuadObservation(MeasurementGrid grid, PerChannel<std::vector<Phasor>> phasors)
    : grid_(grid), phasors_(std::move(phasors))
{
    for (Channel ch : all_channels)
        if (phasors_[ch].size() != grid_.size())
            throw std::invalid_argument("QuadObservation: channel length differs from grid size");
}

std::vector<double> QuadObservation::amplitudes(Channel ch) const
{
    std::vector<double> out;
    out.reserve(grid_.size());
    for (const auto &p : phasors_[ch])
        out.push_back(p.amplitude);
    return out;
}

PhaseSeries QuadObservation::phases(Channel ch) const
{
    PhaseSeries out;
    out.values.reserve(grid_.size());
    for (const auto &p : phasors_[ch])
        out.values.push_back(p.phase.radians());
    return out;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double noise_variance(double snr_linear)
{
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("snr must be > 0");
    return std::isinf(snr_linear) ? 0.0 : 1.0 / snr_linear;
}

std::vector<std::complex<double>> draw_noise(std::size_t count, double variance, RandomStream &rng)
{
    std::vector<std::complex<double>> out(count);
    if (variance <= 0.0)
        return out;
    std::normal_distribution<double> quad(0.0, std::sqrt(0.5 * variance));
    for (auto &n : out)
    {
        const double re = quad(rng);
        const double im = quad(rng);
        n = {re, im};
    }
    return out;
}

double los_amplitude(const QuadScenario &scenario, const MeasurementGrid &grid, Channel ch, std::size_t k)
{
    if (scenario.los_amplitude.kind == LosAmplitudeMode::Kind::Normalized)
        return 1.0;
    return free_space_amplitude(scenario.los_amplitude.power, scenario.los_amplitude.gain,
                                grid.frequency(sender_of(ch), k), scenario.distances[ch]);
}

std::vector<PhaseTurns> channel_los_phase(const QuadScenario &scenario, const MeasurementGrid &grid, Channel ch)
{
    const Sender s = sender_of(ch);
    const PhaseTurns beta = PhaseTurns::from_radians(scenario.beta(receiver_of(ch)));
    std::vector<PhaseTurns> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        out[k] = los_phase_turns(grid, s, k, scenario.epoch(s), scenario.distances[ch]) - beta;
    return out;
}

std::vector<Phasor> channel_phasors(const QuadScenario &scenario, const MeasurementGrid &grid, Channel ch)
{
    const Sender s = sender_of(ch);
    const auto los = channel_los_phase(scenario, grid, ch);
    std::vector<Phasor> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        const auto resp = composite_channel_response(scenario.profiles[ch], grid.frequency(s, k));
        out[k].amplitude = los_amplitude(scenario, grid, ch, k) * resp.gain;
        out[k].phase = los[k] + PhaseTurns::from_radians(resp.phase_error);
    }
    return out;
}

std::vector<Phasor> add_noise(std::span<const Phasor> clean, std::span<const std::complex<double>> noise, double scale)
{
    if (clean.size() != noise.size())
        throw std::invalid_argument("add_noise: length mismatch");
    std::vector<Phasor> out(clean.size());
    for (std::size_t k = 0; k < clean.size(); ++k)
        out[k] = Phasor::from_complex(clean[k].value() + scale * noise[k]);
    return out;
}

QuadObservation synthesize_observation(const QuadScenario &scenario, const MeasurementGrid &grid, double snr_linear,
                                       RandomStream &rng)
{
    scenario.validate();
    const double variance = noise_variance(snr_linear);
    PerChannel<std::vector<Phasor>> phasors;
    for (Channel ch : all_channels)
    {
        auto clean = channel_phasors(scenario, grid, ch);
        if (variance > 0.0)
        {
            const auto noise = draw_noise(grid.size(), variance, rng);
            phasors[ch] = add_noise(clean, noise, los_amplitude(scenario, grid, ch, 0));
        }
        else
        {
            phasors[ch] = std::move(clean);
        }
    }
    return QuadObservation(grid, std::move(phasors));
}

} // namespace rips
