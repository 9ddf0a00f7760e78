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

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "rips/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

using Catch::Approx;
using namespace rips;

namespace
{

MeasurementGrid paper_grid() { return {2400e6, 20e3, 1e6, 100}; }

QuadScenario plain_scenario()
{
    QuadScenario sc;
    sc.distances[Channel::AC] = 50.0;
    sc.distances[Channel::AD] = 87.5;
    sc.distances[Channel::BC] = 87.5;
    sc.distances[Channel::BD] = 50.0;
    sc.t_a = 1.3e-4;
    sc.t_b = 7.1e-4;
    sc.beta_c = 0.7;
    sc.beta_d = -2.1;
    return sc;
}

std::vector<oracle::Path> to_oracle(const MultipathProfile &p)
{
    std::vector<oracle::Path> out;
    for (const auto &c : p.components())
        out.push_back({c.alpha, c.tau, c.theta});
    return out;
}

} // namespace

// ================================================================================================
// Grid and profile types
// ================================================================================================

TEST_CASE("Channel model - grid frequencies")
{
    const auto g = paper_grid();
    CHECK(g.size() == 100);
    CHECK(g.f_b(0) == 2400e6);
    CHECK(g.f_b(99) == 2499e6);
    CHECK(g.f_a(0) == 2400.02e6);
    CHECK(g.center(0) == 2400.01e6);
    CHECK(g.frequency(Sender::A, 5) == g.f_a(5));
    CHECK(g.frequency(Sender::B, 5) == g.f_b(5));
    CHECK(g.delay_resolution() == Approx(10e-9));
}

TEST_CASE("Channel model - grid validation")
{
    CHECK_THROWS_AS(MeasurementGrid(0.0, 20e3, 1e6, 100), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementGrid(2.4e9, 20e3, 0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementGrid(2.4e9, 20e3, 1e6, 1), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementGrid(2.4e9, 1e6, 1e6, 100), std::invalid_argument);
    CHECK_THROWS_AS(MeasurementGrid(2.4e9, -1.0, 1e6, 100), std::invalid_argument);
    CHECK_NOTHROW(MeasurementGrid(2.4e9, 0.0, 1e6, 100));
}

TEST_CASE("Channel model - path component and profile invariants")
{
    const auto c = PathComponent::make(0.3, 20e-9, -pi / 2);
    CHECK(c.theta == Approx(1.5 * pi));
    CHECK(PathComponent::make(0.3, 20e-9, two_pi).theta == 0.0);
    CHECK_THROWS_AS(PathComponent::make(-0.1, 20e-9, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(PathComponent::make(0.1, 0.0, 0.0), std::invalid_argument);

    const MultipathProfile p({PathComponent::make(0.1, 40e-9, 0.0), PathComponent::make(0.2, 10e-9, 0.0)});
    REQUIRE(p.size() == 2);
    CHECK(p.components()[0].tau == 10e-9);
    CHECK(p.components()[1].tau == 40e-9);
    CHECK(MultipathProfile().empty());
    CHECK_THROWS_AS(MultipathProfile({PathComponent::make(0.1, 20e-9, 0.0), PathComponent::make(0.1, 20.0005e-9, 0.0)}),
                    std::invalid_argument);
}

// ================================================================================================
// LOS phase and amplitude
// ================================================================================================

TEST_CASE("Channel model - los_phase whole cycle is zero")
{
    const auto g = paper_grid();
    const double d = 48.0 * speed_of_light / g.f_b(0);
    CHECK(los_phase(g, Sender::B, 0, 0.0, d) == Approx(0.0).margin(1e-9));
}

TEST_CASE("Channel model - los_phase half cycle maps to +pi")
{
    // 2^31 Hz keeps c/(2f) and f*d/c exact
    const MeasurementGrid g(2147483648.0, 0.0, 1e6, 4);
    const double d = speed_of_light / (2.0 * g.f_b(0));
    CHECK(los_phase(g, Sender::B, 0, 0.0, d) == pi);
}

TEST_CASE("Channel model - los_phase at 2.4 GHz and 10 m")
{
    const auto g = paper_grid();
    // mpmath, 40 digits: wrap(-2 pi 2.4e9 10 / c)
    const double expected = -0.3479806940367167573;
    CHECK(los_phase(g, Sender::B, 0, 0.0, 10.0) == Approx(expected).margin(1e-9));
    CHECK(los_phase(g, Sender::B, 0, 0.0, 10.0) == Approx(oracle::los_phase(2400e6L, 0.0L, 10.0L)).margin(1e-9));
}

TEST_CASE("Channel model - los_phase agrees with oracle over random inputs")
{
    const auto g = paper_grid();
    RandomStream rng(17);
    std::uniform_real_distribution<double> ud(1.0, 500.0), ut(0.0, 1e-3);
    std::uniform_int_distribution<std::size_t> uk(0, 99);
    for (int i = 0; i < 2000; ++i)
    {
        const double d = ud(rng), t = ut(rng);
        const std::size_t k = uk(rng);
        const Sender s = (i % 2) ? Sender::A : Sender::B;
        const double got = los_phase(g, s, k, t, d);
        const double want = oracle::los_phase(g.frequency(s, k), t, d);
        CHECK(std::abs(wrap_to_pi(got - want)) < 1e-6);
    }
}

TEST_CASE("Channel model - los_phase errors")
{
    const auto g = paper_grid();
    CHECK_THROWS_AS(los_phase(g, Sender::A, 100, 0.0, 10.0), std::out_of_range);
    CHECK_THROWS_AS(los_phase(g, Sender::A, 0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(los_phase(g, Sender::A, 0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("Channel model - free_space_amplitude")
{
    // mpmath: c / (4 pi 2.4e9 10)
    CHECK(free_space_amplitude(1.0, 1.0, 2.4e9, 10.0) == Approx(9.940302415076963e-4).epsilon(1e-12));
    const double a = free_space_amplitude(2.0, 3.0, 2.4e9, 10.0);
    CHECK(free_space_amplitude(2.0, 3.0, 2.4e9, 20.0) == Approx(a / 2.0).epsilon(1e-15));
    CHECK(free_space_amplitude(2.0, 3.0, 4.8e9, 10.0) == Approx(a / 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(free_space_amplitude(0.0, 1.0, 2.4e9, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(free_space_amplitude(1.0, -1.0, 2.4e9, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(free_space_amplitude(1.0, 1.0, 0.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(free_space_amplitude(1.0, 1.0, 2.4e9, 0.0), std::invalid_argument);
}

// ================================================================================================
// Composite response
// ================================================================================================

TEST_CASE("Channel model - composite response examples")
{
    const auto empty = composite_channel_response(MultipathProfile(), 2.4e9);
    CHECK(empty.gain == 1.0);
    CHECK(empty.phase_error == 0.0);

    // tau f = 48 exactly, so psi = theta; mpmath values of |1 + 0.3 e^{-j pi/4}| and its arg
    const MultipathProfile one({PathComponent::make(0.3, 20e-9, pi / 4)});
    const auto r = composite_channel_response(one, 2.4e9);
    CHECK(r.gain == Approx(1.2305543745450375321).epsilon(1e-12));
    CHECK(r.phase_error == Approx(-0.1732528133860711620).epsilon(1e-12));

    const MultipathProfile in_phase({PathComponent::make(0.5, 20e-9, 0.0)});
    const auto q = composite_channel_response(in_phase, 2.4e9);
    CHECK(q.gain == Approx(1.5).epsilon(1e-12));
    CHECK(q.phase_error == Approx(0.0).margin(1e-12));
}

TEST_CASE("Channel model - approx gain examples")
{
    CHECK(approx_amplitude_gain(MultipathProfile(), 2.4e9) == 1.0);
    const MultipathProfile one({PathComponent::make(0.3, 20e-9, pi / 4)});
    CHECK(approx_amplitude_gain(one, 2.4e9) == Approx(1.2121320343559642573).epsilon(1e-12));
}

TEST_CASE("Channel model - single-path approximation bound on a dense grid")
{
    // 100 x 100 grid of (alpha, psi); psi enters through theta with tau f integer
    for (int ia = 0; ia < 100; ++ia)
    {
        const double alpha = ia / 100.0;
        for (int ip = 0; ip < 100; ++ip)
        {
            const double psi = two_pi * ip / 100.0;
            const MultipathProfile p({PathComponent::make(alpha, 20e-9, psi)});
            const double diff = composite_channel_response(p, 2.4e9).gain - approx_amplitude_gain(p, 2.4e9);
            CHECK(diff >= -1e-14);
            CHECK(diff <= alpha * alpha / 2.0 + 1e-14);
        }
    }
}

TEST_CASE("Channel model - phase error equals complex argument")
{
    RandomStream rng(23);
    std::uniform_real_distribution<double> ua(0.0, 0.95), ut(5e-9, 50e-9), uth(0.0, two_pi), uf(2.4e9, 2.5e9);
    for (int i = 0; i < 500; ++i)
    {
        std::vector<PathComponent> comps;
        for (int j = 0; j <= i % 4; ++j)
            comps.push_back(PathComponent::make(ua(rng) / 2.0, ut(rng) + 60e-9 * j, uth(rng)));
        const MultipathProfile p(comps);
        const double f = uf(rng);
        const auto r = composite_channel_response(p, f);
        CHECK(r.phase_error == Approx(oracle::phase_error(to_oracle(p), f)).margin(1e-12));
        CHECK(r.gain == Approx(oracle::gain(to_oracle(p), f)).epsilon(1e-12));
        CHECK(r.phase_error > -pi);
        CHECK(r.phase_error <= pi);
    }
}

TEST_CASE("Channel model - gain is invariant under component permutation")
{
    std::vector<PathComponent> comps{PathComponent::make(0.2, 13e-9, 1.0), PathComponent::make(0.35, 27e-9, 4.0),
                                     PathComponent::make(0.1, 41e-9, 2.5)};
    const MultipathProfile base(comps);
    std::vector<oracle::Path> paths = to_oracle(base);
    std::sort(paths.begin(), paths.end(), [](auto &a, auto &b) { return a.tau < b.tau; });
    do
    {
        std::vector<PathComponent> perm;
        for (const auto &p : paths)
            perm.push_back(PathComponent::make(p.alpha, p.tau, p.theta));
        for (double f : {2.4e9, 2.4377e9, 2.499e9})
        {
            CHECK(composite_channel_response(MultipathProfile(perm), f).gain ==
                  composite_channel_response(base, f).gain);
            CHECK(oracle::gain(paths, f) == Approx(composite_channel_response(base, f).gain).epsilon(1e-13));
        }
    } while (std::next_permutation(paths.begin(), paths.end(), [](auto &a, auto &b) { return a.tau < b.tau; }));
}

// ================================================================================================
// Observation synthesis
// ================================================================================================

TEST_CASE("Channel model - noiseless multipath-free phasors are unit LOS")
{
    const auto g = paper_grid();
    RandomStream rng(1);
    const auto sc = plain_scenario();
    const auto obs = synthesize_observation(sc, g, std::numeric_limits<double>::infinity(), rng);
    for (Channel ch : all_channels)
    {
        const auto amp = obs.amplitudes(ch);
        const auto ph = obs.phases(ch);
        const auto los = channel_los_phase(sc, g, ch);
        for (std::size_t k = 0; k < g.size(); ++k)
        {
            CHECK(amp[k] == 1.0);
            CHECK(wrap_to_pi(ph[k] - los[k].radians()) == 0.0);
            const double want = oracle::los_phase(g.frequency(sender_of(ch), k), sc.epoch(sender_of(ch)),
                                                  sc.distances[ch]) -
                                sc.beta(receiver_of(ch));
            CHECK(std::abs(wrap_to_pi(ph[k] - want)) < 1e-6);
        }
    }
}

TEST_CASE("Channel model - noiseless single path amplitude matches response")
{
    const auto g = paper_grid();
    RandomStream rng(1);
    auto sc = plain_scenario();
    sc.profiles[Channel::BC] = MultipathProfile({PathComponent::make(0.3, 20e-9, pi / 4)});
    const auto obs = synthesize_observation(sc, g, std::numeric_limits<double>::infinity(), rng);
    CHECK(obs.amplitudes(Channel::BC)[0] == Approx(1.2305543745450375).epsilon(1e-12));
    CHECK(obs.amplitudes(Channel::AC)[0] == 1.0);
}

TEST_CASE("Channel model - free-space LOS amplitude")
{
    const auto g = paper_grid();
    RandomStream rng(1);
    auto sc = plain_scenario();
    sc.los_amplitude = LosAmplitudeMode::free_space(2.0, 1.5);
    const auto obs = synthesize_observation(sc, g, std::numeric_limits<double>::infinity(), rng);
    const auto amp = obs.amplitudes(Channel::AD);
    for (std::size_t k : {0u, 40u, 99u})
        CHECK(amp[k] == Approx(free_space_amplitude(2.0, 1.5, g.f_a(k), 87.5)).epsilon(1e-12));
}

TEST_CASE("Channel model - SNR conversion")
{
    CHECK(noise_variance(db_to_linear(30.0)) == Approx(1e-3).epsilon(1e-12));
    CHECK(noise_variance(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS_AS(noise_variance(0.0), std::invalid_argument);
    RandomStream rng(1);
    CHECK_THROWS_AS(synthesize_observation(plain_scenario(), paper_grid(), -1.0, rng), std::invalid_argument);
}

TEST_CASE("Channel model - noise calibration over one million draws")
{
    RandomStream rng(2024);
    const double var = noise_variance(db_to_linear(30.0));
    const auto n = draw_noise(1'000'000, var, rng);
    double power = 0.0, re2 = 0.0, im2 = 0.0, re = 0.0, im = 0.0;
    for (const auto &z : n)
    {
        power += std::norm(z);
        re += z.real();
        im += z.imag();
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
    }
    const double cnt = static_cast<double>(n.size());
    CHECK(power / cnt >= 0.00097);
    CHECK(power / cnt <= 0.00103);
    const double vr = re2 / cnt - (re / cnt) * (re / cnt);
    const double vi = im2 / cnt - (im / cnt) * (im / cnt);
    CHECK(vr == Approx(var / 2.0).epsilon(0.03));
    CHECK(vi == Approx(var / 2.0).epsilon(0.03));
}

TEST_CASE("Channel model - observation validates channel lengths")
{
    const auto g = paper_grid();
    PerChannel<std::vector<Phasor>> ph;
    for (Channel ch : all_channels)
        ph[ch].resize(100);
    ph[Channel::BD].resize(99);
    CHECK_THROWS_AS(QuadObservation(g, ph), std::invalid_argument);
}

TEST_CASE("Channel model - scenario q-range and validation")
{
    auto sc = plain_scenario();
    CHECK(sc.qrange() == Approx(75.0));
    sc.distances[Channel::AC] = 0.0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}
