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
#include "rips/phase.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

using Catch::Approx;
using rips::pi;
using rips::two_pi;

TEST_CASE("Phase - wrap_to_pi fixed points")
{
    CHECK(rips::wrap_to_pi(0.0) == 0.0);
    CHECK(rips::wrap_to_pi(3.0 * pi) == Approx(pi).margin(1e-15));
    CHECK(rips::wrap_to_pi(-pi) == pi);
    CHECK(rips::wrap_to_pi(pi) == pi);
    CHECK(rips::wrap_to_pi(-3.0 * pi) == Approx(pi).margin(1e-15));
    CHECK(rips::wrap_to_pi(1.0) == 1.0);
}

TEST_CASE("Phase - wrap_to_pi range and exact multiple of 2pi")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 10000; ++i)
    {
        const double x = u(rng);
        const double w = rips::wrap_to_pi(x);
        CHECK(w > -pi);
        CHECK(w <= pi);
        const double turns = (x - w) / two_pi;
        CHECK(std::abs(turns - std::round(turns)) < 1e-9);
        CHECK(w == Approx(oracle::wrap(x)).margin(1e-12));
    }
}

TEST_CASE("Phase - wrap_to_pi rejects non-finite input")
{
    CHECK_THROWS_AS(rips::wrap_to_pi(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(rips::wrap_to_pi(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("Phase - turns arithmetic is exact mod one turn")
{
    const auto a = rips::PhaseTurns::from_cycles(0.25);
    const auto b = rips::PhaseTurns::from_cycles(0.75);
    CHECK((a + b).raw() == 0u);
    CHECK((a - a).raw() == 0u);
    CHECK((-a).radians() == Approx(-pi / 2));
    CHECK(rips::PhaseTurns::from_cycles(0.5).radians() == pi);
    CHECK(rips::PhaseTurns::from_cycles(-0.5).radians() == pi);
    CHECK(rips::PhaseTurns::from_cycles(3.0).raw() == 0u);
    CHECK(rips::PhaseTurns::from_radians(1.0).radians() == Approx(1.0).margin(1e-15));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i)
    {
        const auto x = rips::PhaseTurns::from_cycles(u(rng));
        const auto y = rips::PhaseTurns::from_cycles(u(rng));
        CHECK(((x + y) - y) == x);
        CHECK((x - y + y - x).raw() == 0u);
    }
}

TEST_CASE("Phase - wrapped_rmse examples")
{
    const std::vector<double> truth{0.1, -2.0, 3.0, 1.5};
    CHECK(rips::wrapped_rmse(truth, truth) == 0.0);

    std::vector<double> shifted;
    for (double t : truth)
        shifted.push_back(t + pi);
    CHECK(rips::wrapped_rmse(shifted, truth) == Approx(pi).margin(1e-12));

    std::vector<double> plus_turn;
    for (double t : truth)
        plus_turn.push_back(t + two_pi);
    CHECK(rips::wrapped_rmse(plus_turn, truth) == Approx(0.0).margin(1e-15));
}

TEST_CASE("Phase - wrapped_rmse agrees with oracle and validates input")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> a(257), b(257);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    CHECK(rips::wrapped_rmse(a, b) == Approx(oracle::wrapped_rmse(a, b)).epsilon(1e-12));
    CHECK(rips::wrapped_mse(a, b) == Approx(std::pow(oracle::wrapped_rmse(a, b), 2)).epsilon(1e-12));

    const std::vector<double> short_one{1.0};
    const std::vector<double> empty;
    CHECK_THROWS_AS(rips::wrapped_rmse(a, short_one), std::invalid_argument);
    CHECK_THROWS_AS(rips::wrapped_rmse(empty, empty), std::invalid_argument);
}
