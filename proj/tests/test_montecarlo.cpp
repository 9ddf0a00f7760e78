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

#include "rips/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

using Catch::Approx;
using namespace rips;

namespace
{

ExperimentConfig small_config(std::size_t trials)
{
    ExperimentConfig cfg;
    cfg.trials = trials;
    cfg.seed = 42;
    return cfg;
}

} // namespace

// ================================================================================================
// Distributions and scenario sampling
// ================================================================================================

TEST_CASE("Monte Carlo - fixed distribution consumes no randomness")
{
    RandomStream a(3), b(3);
    CHECK(ParamDistribution::fixed(0.25).sample(a) == 0.25);
    CHECK(a() == b());
}

TEST_CASE("Monte Carlo - uniform mean")
{
    RandomStream rng(10);
    const auto u = ParamDistribution::uniform(0.0, 1.0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i)
    {
        const double x = u.sample(rng);
        CHECK((x >= 0.0 && x <= 1.0));
        sum += x;
    }
    CHECK(sum / 100000.0 == Approx(0.5).margin(0.01));
    CHECK_THROWS_AS(ParamDistribution::uniform(1.0, 0.0).validate(), std::invalid_argument);
}

TEST_CASE("Monte Carlo - fixed distributions give fixed profiles")
{
    auto cfg = small_config(1);
    cfg.alpha_dist = ParamDistribution::fixed(0.3);
    cfg.tau_dist = ParamDistribution::fixed(20e-9);
    cfg.theta_dist = ParamDistribution::fixed(1.0);
    cfg.scenario_kind = ScenarioKind::Quad;
    for (std::uint64_t seed : {1u, 2u, 99u})
    {
        auto rng = trial_stream(seed, 0, 0);
        const auto sc = sample_scenario(cfg, rng);
        for (Channel ch : all_channels)
        {
            REQUIRE(sc.profiles[ch].size() == 1);
            const auto &c = sc.profiles[ch].components()[0];
            CHECK(c.alpha == 0.3);
            CHECK(c.tau == 20e-9);
            CHECK(c.theta == 1.0);
        }
    }
}

TEST_CASE("Monte Carlo - quad scenarios hit the q-range target")
{
    auto cfg = small_config(1);
    cfg.scenario_kind = ScenarioKind::Quad;
    for (std::uint64_t t = 0; t < 2000; ++t)
    {
        auto rng = trial_stream(5, 0, t);
        const auto sc = sample_scenario(cfg, rng);
        CHECK(std::abs(sc.qrange() - 75.0) <= 1e-9);
        CHECK_NOTHROW(sc.validate());
    }
}

TEST_CASE("Monte Carlo - single-channel scenarios populate one channel")
{
    auto cfg = small_config(1);
    auto rng = trial_stream(5, 0, 0);
    const auto sc = sample_scenario(cfg, rng);
    for (Channel ch : all_channels)
        CHECK(sc.profiles[ch].size() == (ch == single_channel ? 1u : 0u));
}

TEST_CASE("Monte Carlo - config validation")
{
    auto cfg = small_config(0);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config(1);
    cfg.snr_db = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config(1);
    cfg.snr_db = std::numeric_limits<double>::infinity();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.snr_linear() == std::numeric_limits<double>::infinity());

    cfg = small_config(1);
    CHECK_FALSE(cfg.effective_estimator().frequency_weighting);
    cfg.los_amplitude = LosAmplitudeMode::free_space(1.0, 1.0);
    CHECK(cfg.effective_estimator().frequency_weighting);
}

// ================================================================================================
// Streams and workers
// ================================================================================================

TEST_CASE("Monte Carlo - trial streams are keyed by seed, point and trial")
{
    CHECK(trial_stream(1, 2, 3)() == trial_stream(1, 2, 3)());
    CHECK(trial_stream(1, 2, 3)() != trial_stream(1, 2, 4)());
    CHECK(trial_stream(1, 2, 3)() != trial_stream(1, 3, 3)());
    CHECK(trial_stream(1, 2, 3)() != trial_stream(2, 2, 3)());
    CHECK(trial_stream(1ull << 32, 0, 0)() != trial_stream(1, 0, 0)());
}

TEST_CASE("Monte Carlo - parallel_for covers every index once")
{
    for (unsigned threads : {1u, 3u, 8u})
    {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        CHECK(std::ranges::all_of(hits, [](const auto &h) { return h.load() == 1; }));
    }
}

TEST_CASE("Monte Carlo - parallel_for rethrows the lowest failing index")
{
    for (unsigned threads : {1u, 4u})
    {
        try
        {
            parallel_for(100, threads, [](std::size_t i) {
                if (i == 70 || i == 30)
                    throw std::runtime_error(std::to_string(i));
            });
            FAIL("no exception");
        }
        catch (const std::runtime_error &e)
        {
            CHECK(std::string(e.what()) == "30");
        }
    }
}

// ================================================================================================
// Experiments
// ================================================================================================

TEST_CASE("Monte Carlo - percentile")
{
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(percentile(v, 95.0) == Approx(95.05).epsilon(1e-14));
    CHECK(percentile(v, 50.0) == Approx(50.5).epsilon(1e-14));
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 100.0) == 100.0);
    CHECK(percentile(std::vector<double>{7.0}, 95.0) == 7.0);
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 50.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile(v, 101.0), std::invalid_argument);
}

TEST_CASE("Monte Carlo - phase sweep shape and noise floor")
{
    auto cfg = small_config(300);
    const std::vector<double> alphas{0.1, 0.5, 0.9};
    const auto r = run_phase_sweep(cfg, SweepParam::Alpha, alphas, 1);
    REQUIRE(r.sweep_values == alphas);
    REQUIRE(r.rmse_free.size() == 3);
    REQUIRE(r.rmse_distorted.size() == 3);
    REQUIRE(r.rmse_corrected.size() == 3);
    CHECK(r.trials_per_point == 300);
    const double floor = std::sqrt(1e-3 / 2.0);
    for (std::size_t i = 0; i < 3; ++i)
    {
        CHECK(r.rmse_free[i] == Approx(floor).epsilon(0.1));
        CHECK(r.rmse_corrected[i] < r.rmse_distorted[i]);
        CHECK(r.rmse_free[i] == Approx(r.rmse_free[0]).epsilon(0.1));
    }
}

TEST_CASE("Monte Carlo - noiseless sweep has a zero floor")
{
    auto cfg = small_config(20);
    cfg.snr_db = std::numeric_limits<double>::infinity();
    const std::vector<double> taus{20e-9, 40e-9};
    const auto r = run_phase_sweep(cfg, SweepParam::Tau, taus, 1);
    for (std::size_t i = 0; i < taus.size(); ++i)
    {
        CHECK(r.rmse_free[i] == 0.0);
        CHECK(r.rmse_distorted[i] > 0.0);
    }
}

TEST_CASE("Monte Carlo - sweep is identical across thread counts")
{
    auto cfg = small_config(40);
    const std::vector<double> alphas{0.2, 0.7};
    const auto a = run_phase_sweep(cfg, SweepParam::Alpha, alphas, 1);
    const auto b = run_phase_sweep(cfg, SweepParam::Alpha, alphas, 3);
    const auto c = run_phase_sweep(cfg, SweepParam::Alpha, alphas, 8);
    CHECK(a.rmse_free == b.rmse_free);
    CHECK(a.rmse_distorted == b.rmse_distorted);
    CHECK(a.rmse_corrected == b.rmse_corrected);
    CHECK(a.rmse_corrected == c.rmse_corrected);
    cfg.seed = 43;
    CHECK(run_phase_sweep(cfg, SweepParam::Alpha, alphas, 1).rmse_corrected != a.rmse_corrected);
}

TEST_CASE("Monte Carlo - clean q-range CDF")
{
    auto cfg = small_config(30);
    cfg.scenario_kind = ScenarioKind::Quad;
    cfg.snr_db = std::numeric_limits<double>::infinity();
    cfg.alpha_dist = ParamDistribution::fixed(0.0);
    const auto r = run_qrange_cdf(cfg, 1);
    REQUIRE(r.errors_distorted.size() == 30);
    REQUIRE(r.errors_corrected.size() == 30);
    CHECK(std::ranges::is_sorted(r.errors_distorted));
    CHECK(std::ranges::is_sorted(r.errors_corrected));
    CHECK(r.percentiles.median_distorted <= 1e-3);
    CHECK(r.percentiles.median_corrected <= 1e-3);
}

TEST_CASE("Monte Carlo - q-range CDF is identical across thread counts")
{
    auto cfg = small_config(12);
    cfg.scenario_kind = ScenarioKind::Quad;
    const auto a = run_qrange_cdf(cfg, 1);
    const auto b = run_qrange_cdf(cfg, 4);
    CHECK(a.errors_distorted == b.errors_distorted);
    CHECK(a.errors_corrected == b.errors_corrected);

    cfg.scenario_kind = ScenarioKind::SingleChannel;
    CHECK_THROWS_AS(run_qrange_cdf(cfg, 1), std::invalid_argument);
}

TEST_CASE("Monte Carlo - worked correction example")
{
    auto cfg = small_config(1);
    cfg.snr_db = std::numeric_limits<double>::infinity();
    cfg.alpha_dist = ParamDistribution::fixed(0.3);
    cfg.tau_dist = ParamDistribution::fixed(20e-9);
    cfg.theta_dist = ParamDistribution::fixed(pi / 4);
    const auto ex = run_correction_example(cfg);
    REQUIRE(ex.frequencies.size() == 100);
    CHECK(ex.frequencies[0] == 2400e6);
    CHECK(ex.max_abs_before > 0.2);
    CHECK(ex.max_abs_after <= 0.1 * ex.max_abs_before);
}
