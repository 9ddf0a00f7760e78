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

#ifndef RIPS_CHANNEL_MODEL_HPP
#define RIPS_CHANNEL_MODEL_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "rips/phase.hpp"

// Ground-truth physics of one ranging unit: two senders (A, B) transmitting
// single tones on a stepped frequency grid, two receivers (C, D), and the four
// channels between them, each a LOS path plus a few specular reflections.

namespace rips
{

/// Speed of radio propagation, m/s.
inline constexpr double speed_of_light = 299'792'458.0;

using RandomStream = std::mt19937_64;

enum class Sender
{
    A,
    B
};

enum class Receiver
{
    C,
    D
};

enum class Channel
{
    AC = 0,
    AD = 1,
    BC = 2,
    BD = 3
};

inline constexpr std::array<Channel, 4> all_channels{Channel::AC, Channel::AD, Channel::BC, Channel::BD};

constexpr Sender sender_of(Channel ch) { return (ch == Channel::AC || ch == Channel::AD) ? Sender::A : Sender::B; }
constexpr Receiver receiver_of(Channel ch) { return (ch == Channel::AC || ch == Channel::BC) ? Receiver::C : Receiver::D; }
constexpr std::size_t index_of(Channel ch) { return static_cast<std::size_t>(ch); }
std::string_view channel_name(Channel ch);

/// Per-channel storage keyed by Channel.
template <typename T>
struct PerChannel
{
    std::array<T, 4> items{};

    T &operator[](Channel ch) { return items[index_of(ch)]; }
    const T &operator[](Channel ch) const { return items[index_of(ch)]; }
};

/// Stepped measurement frequencies of both senders.
///
/// f_B(k) = f_b0 + k*delta_f, f_A(k) = f_B(k) + tone_gap, and the centre
/// frequency f(k) = f_B(k) + tone_gap/2, for k = 0..K-1.
class MeasurementGrid
{
  public:
    /// Throws std::invalid_argument unless f_b0 > 0, delta_f > 0,
    /// num_freqs >= 2 and 0 <= tone_gap < delta_f.
    MeasurementGrid(double f_b0, double tone_gap, double delta_f, std::size_t num_freqs);

    double f_b0() const { return f_b0_; }
    double tone_gap() const { return tone_gap_; }
    double delta_f() const { return delta_f_; }
    std::size_t size() const { return num_freqs_; }

    double f_b(std::size_t k) const { return f_b0_ + static_cast<double>(k) * delta_f_; }
    double f_a(std::size_t k) const { return f_b(k) + tone_gap_; }
    double center(std::size_t k) const { return f_b(k) + 0.5 * tone_gap_; }
    double frequency(Sender s, std::size_t k) const { return s == Sender::A ? f_a(k) : f_b(k); }

    /// Delay resolution 1/(K*delta_f).
    double delay_resolution() const { return 1.0 / (static_cast<double>(num_freqs_) * delta_f_); }

    friend bool operator==(const MeasurementGrid &, const MeasurementGrid &) = default;

  private:
    double f_b0_;
    double tone_gap_;
    double delta_f_;
    std::size_t num_freqs_;
};

/// One reflected path relative to the direct one.
struct PathComponent
{
    double alpha = 0.0; ///< multipath-to-direct amplitude ratio
    double tau = 0.0;   ///< delay difference, s
    double theta = 0.0; ///< reflection phase shift, rad, in [0, 2pi)

    /// Validates alpha >= 0 and tau > 0, and normalizes theta to [0, 2pi).
    static PathComponent make(double alpha, double tau, double theta);
};

/// Reflected paths of one channel, sorted by ascending delay.
class MultipathProfile
{
  public:
    MultipathProfile() = default;

    /// Sorts by tau. Throws std::invalid_argument if two delays are within 1 ps.
    explicit MultipathProfile(std::vector<PathComponent> components);

    const std::vector<PathComponent> &components() const { return components_; }
    std::size_t size() const { return components_.size(); }
    bool empty() const { return components_.empty(); }

  private:
    std::vector<PathComponent> components_;
};

struct ChannelResponse
{
    double gain;        ///< |1 + sum_i alpha_i exp(-j(2 pi tau_i f + theta_i))|
    double phase_error; ///< epsilon, rad, in (-pi, pi]
};

/// Exact composite response of LOS plus reflections, LOS amplitude factored out.
ChannelResponse composite_channel_response(const MultipathProfile &profile, double f);

/// Small-alpha amplitude model 1 + sum_i alpha_i cos(2 pi tau_i f + theta_i).
double approx_amplitude_gain(const MultipathProfile &profile, double f);

/// Phase of 2 pi tau f + theta with the tau*f product reduced to a fraction of
/// a cycle first, so large carrier frequencies keep full precision.
double path_phase(double tau, double f, double theta);

/// c*sqrt(power*gain)/(4 pi f d). Throws std::invalid_argument on
/// non-positive input.
double free_space_amplitude(double power, double gain, double f, double d);

/// LOS phase -2 pi f_X(k) (t_x + d_xy/c), wrapped to (-pi, pi].
/// Throws std::out_of_range for k >= K and std::invalid_argument for d <= 0.
double los_phase(const MeasurementGrid &grid, Sender sender, std::size_t k, double t_x, double d_xy);

/// Same as los_phase, as exact turns. The epoch and distance terms are
/// quantized separately so that a shared epoch cancels exactly between
/// channels of the same sender.
PhaseTurns los_phase_turns(const MeasurementGrid &grid, Sender sender, std::size_t k, double t_x, double d_xy);

/// Normalized: LOS amplitude 1 at every frequency. FreeSpace: free-space
/// amplitude at the sender's frequency and the channel distance.
struct LosAmplitudeMode
{
    enum class Kind
    {
        Normalized,
        FreeSpace
    };
    Kind kind = Kind::Normalized;
    double power = 1.0;
    double gain = 1.0;

    static LosAmplitudeMode normalized() { return {}; }
    static LosAmplitudeMode free_space(double power, double gain) { return {Kind::FreeSpace, power, gain}; }
};

/// Ground truth of one ranging unit.
struct QuadScenario
{
    PerChannel<double> distances; ///< m
    double t_a = 0.0;             ///< transmit epoch of A, s
    double t_b = 0.0;             ///< transmit epoch of B, s
    double beta_c = 0.0;          ///< down-conversion phase shift of C, rad
    double beta_d = 0.0;          ///< down-conversion phase shift of D, rad
    PerChannel<MultipathProfile> profiles;
    LosAmplitudeMode los_amplitude;

    /// d_AD - d_BD + d_BC - d_AC.
    double qrange() const;

    double epoch(Sender s) const { return s == Sender::A ? t_a : t_b; }
    double beta(Receiver r) const { return r == Receiver::C ? beta_c : beta_d; }

    /// Throws std::invalid_argument if any distance is not > 0.
    void validate() const;
};

/// Complex received phasor stored in polar form. Amplitude and phase views are
/// the representation itself; there are no separately stored copies.
struct Phasor
{
    double amplitude = 0.0;
    PhaseTurns phase;

    std::complex<double> value() const;
    static Phasor from_complex(std::complex<double> z);
};

/// Noisy phasor series gamma(k) for each of the four channels.
class QuadObservation
{
  public:
    QuadObservation(MeasurementGrid grid, PerChannel<std::vector<Phasor>> phasors);

    const MeasurementGrid &grid() const { return grid_; }
    std::span<const Phasor> phasors(Channel ch) const { return phasors_[ch]; }

    /// |gamma(k)|
    std::vector<double> amplitudes(Channel ch) const;
    /// arg(gamma(k)), wrapped radians
    PhaseSeries phases(Channel ch) const;

  private:
    MeasurementGrid grid_;
    PerChannel<std::vector<Phasor>> phasors_;
};

/// Total complex noise variance sigma^2 = 1/snr_linear; snr_linear = inf
/// disables noise.
double noise_variance(double snr_linear);

double db_to_linear(double db);

/// K draws of zero-mean circular complex Gaussian noise with total variance
/// `variance` (variance/2 per quadrature). Real part drawn before imaginary.
std::vector<std::complex<double>> draw_noise(std::size_t count, double variance, RandomStream &rng);

/// Noiseless phasors of one channel: LOS amplitude * composite gain and phase
/// LOS + epsilon - beta_Y, at the owning sender's frequencies.
std::vector<Phasor> channel_phasors(const QuadScenario &scenario, const MeasurementGrid &grid, Channel ch);

/// Noiseless LOS-only phase (LOS - beta_Y) of one channel, the truth against
/// which single-channel phase errors are measured.
std::vector<PhaseTurns> channel_los_phase(const QuadScenario &scenario, const MeasurementGrid &grid, Channel ch);

/// LOS amplitude of one channel at index k.
double los_amplitude(const QuadScenario &scenario, const MeasurementGrid &grid, Channel ch, std::size_t k);

/// Adds noise to a phasor series. With FreeSpace LOS the noise is scaled by
/// the channel's LOS amplitude at k = 0 so the SNR stays referenced to the
/// direct path.
std::vector<Phasor> add_noise(std::span<const Phasor> clean, std::span<const std::complex<double>> noise, double scale);

/// Full four-channel synthesis. Noise is drawn channel by channel in the
/// order AC, AD, BC, BD. Throws std::invalid_argument if snr_linear <= 0.
QuadObservation synthesize_observation(const QuadScenario &scenario, const MeasurementGrid &grid, double snr_linear,
                                       RandomStream &rng);

} // namespace rips

#endif
