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

#include "rips/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "rips/phase_pipeline.hpp"

namespace rips
{
namespace
{

constexpr double min_distance = 20.0;     // m
constexpr double max_distance = 120.0;    // m
constexpr double min_quad_distance = 1.0; // m, floor for the derived d_AD
constexpr double max_epoch = 1e-3;        // s

struct TrialErrors
{
    double free;
    double distorted;
    double corrected;
};

MultipathProfile sample_profile(const ExperimentConfig &cfg, RandomStream &rng)
{
    for (;;)
    {
        std::vector<PathComponent> comps;
        for (std::size_t i = 0; i < cfg.paths_per_channel; ++i)
        {
            const double alpha = cfg.alpha_dist.sample(rng);
            const double tau = cfg.tau_dist.sample(rng);
            const double theta = cfg.theta_dist.sample(rng);
            comps.push_back(PathComponent::make(alpha, tau, theta));
        }
        try
        {
            return MultipathProfile(std::move(comps));
        }
        catch (const std::invalid_argument &)
        {
            // coincident delays; with Fixed tau and several paths this never
            // resolves, so refuse instead of spinning
            if (cfg.tau_dist.kind == ParamDistribution::Kind::Fixed)
                throw;
        }
    }
}

std::vector<double> to_radians(std::span<const Phasor> phasors)
{
    std::vector<double> out;
    out.reserve(phasors.size());
    for (const auto &p : phasors)
        out.push_back(p.phase.radians());
    return out;
}

std::vector<double> to_radians(std::span<const PhaseTurns> turns)
{
    std::vector<double> out;
    out.reserve(turns.size());
    for (auto t : turns)
        out.push_back(t.radians());
    return out;
}

std::vector<double> amplitudes_of(std::span<const Phasor> phasors)
{
    std::vector<double> out;
    out.reserve(phasors.size());
    for (const auto &p : phasors)
        out.push_back(p.amplitude);
    return out;
}

std::vector<Phasor> noisy(const std::vector<Phasor> &clean, const std::vector<std::complex<double>> &noise,
                          double variance, double scale)
{
    if (variance <= 0.0)
        return clean;
    return add_noise(clean, noise, scale);
}

} // namespace

double ParamDistribution::sample(RandomStream &rng) const
{
    if (kind == Kind::Fixed)
        return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void ParamDistribution::validate() const
{
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("ParamDistribution: bounds must be finite");
    if (kind == Kind::Uniform && !(lo <= hi))
        throw std::invalid_argument("ParamDistribution: lo must be <= hi");
}

double ExperimentConfig::snr_linear() const
{
    return std::isinf(snr_db) && snr_db > 0 ? snr_db : db_to_linear(snr_db);
}

EstimatorConfig ExperimentConfig::effective_estimator() const
{
    EstimatorConfig e = estimator;
    e.frequency_weighting = los_amplitude.kind == LosAmplitudeMode::Kind::FreeSpace;
    return e;
}

void ExperimentConfig::validate() const
{
    if (std::isnan(snr_db) || (std::isinf(snr_db) && snr_db < 0))
        throw std::invalid_argument("ExperimentConfig: snr_db must be finite or +inf");
    if (trials == 0)
        throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
    if (paths_per_channel == 0)
        throw std::invalid_argument("ExperimentConfig: paths_per_channel must be >= 1");
    alpha_dist.validate();
    tau_dist.validate();
    theta_dist.validate();
    if (alpha_dist.lo < 0.0)
        throw std::invalid_argument("ExperimentConfig: alpha must be >= 0");
    if (!(tau_dist.lo > 0.0))
        throw std::invalid_argument("ExperimentConfig: tau must be > 0");
    if (los_amplitude.kind == LosAmplitudeMode::Kind::FreeSpace &&
        (!(los_amplitude.power > 0.0) || !(los_amplitude.gain > 0.0)))
        throw std::invalid_argument("ExperimentConfig: free-space power and gain must be > 0");
    if (!std::isfinite(dq_target))
        throw std::invalid_argument("ExperimentConfig: dq_target must be finite");
    estimator.validate(grid);
    qrange.validate(grid);
}

RandomStream trial_stream(std::uint64_t seed, std::uint64_t point, std::uint64_t trial)
{
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(point), hi(point), lo(trial), hi(trial)};
    return RandomStream(seq);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &body)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };

    if (threads <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    for (const auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

QuadScenario sample_scenario(const ExperimentConfig &cfg, RandomStream &rng)
{
    std::uniform_real_distribution<double> distance(min_distance, max_distance);
    std::uniform_real_distribution<double> epoch(0.0, max_epoch);
    std::uniform_real_distribution<double> phase(0.0, two_pi);

    QuadScenario sc;
    sc.los_amplitude = cfg.los_amplitude;
    if (cfg.scenario_kind == ScenarioKind::Quad)
    {
        do
        {
            sc.distances[Channel::AC] = distance(rng);
            sc.distances[Channel::BC] = distance(rng);
            sc.distances[Channel::BD] = distance(rng);
            sc.distances[Channel::AD] = cfg.dq_target + sc.distances[Channel::BD] - sc.distances[Channel::BC] +
                                        sc.distances[Channel::AC];
        } while (sc.distances[Channel::AD] < min_quad_distance);
    }
    else
    {
        for (Channel ch : all_channels)
            sc.distances[ch] = distance(rng);
    }
    sc.t_a = epoch(rng);
    sc.t_b = epoch(rng);
    sc.beta_c = phase(rng);
    sc.beta_d = phase(rng);

    if (cfg.scenario_kind == ScenarioKind::Quad)
    {
        for (Channel ch : all_channels)
            sc.profiles[ch] = sample_profile(cfg, rng);
    }
    else
    {
        sc.profiles[single_channel] = sample_profile(cfg, rng);
    }
    return sc;
}

SweepResult run_phase_sweep(const ExperimentConfig &cfg, SweepParam param, std::span<const double> points,
                            unsigned threads)
{
    cfg.validate();
    if (points.empty())
        throw std::invalid_argument("run_phase_sweep: no sweep points");
    for (double p : points)
    {
        if (param == SweepParam::Alpha && !(p >= 0.0))
            throw std::invalid_argument("run_phase_sweep: alpha points must be >= 0");
        if (param == SweepParam::Tau && !(p > 0.0))
            throw std::invalid_argument("run_phase_sweep: tau points must be > 0");
    }

    const MeasurementGrid &grid = cfg.grid;
    const double variance = noise_variance(cfg.snr_linear());
    const EstimatorConfig est_cfg = cfg.effective_estimator();
    const Sender sender = sender_of(single_channel);
    const std::size_t trials = cfg.trials;

    std::vector<ExperimentConfig> point_cfgs(points.size(), cfg);
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        point_cfgs[i].scenario_kind = ScenarioKind::SingleChannel;
        (param == SweepParam::Alpha ? point_cfgs[i].alpha_dist : point_cfgs[i].tau_dist) =
            ParamDistribution::fixed(points[i]);
    }

    std::vector<TrialErrors> results(points.size() * trials);
    parallel_for(results.size(), threads, [&](std::size_t idx) {
        const std::size_t point = idx / trials;
        const std::size_t trial = idx % trials;
        auto rng = trial_stream(cfg.seed, point, trial);
        const QuadScenario sc = sample_scenario(point_cfgs[point], rng);
        QuadScenario sc_free = sc;
        sc_free.profiles[single_channel] = MultipathProfile{};

        const auto noise = draw_noise(grid.size(), variance, rng);
        const double scale = los_amplitude(sc, grid, single_channel, 0);
        const auto with_mp = noisy(channel_phasors(sc, grid, single_channel), noise, variance, scale);
        const auto without_mp = noisy(channel_phasors(sc_free, grid, single_channel), noise, variance, scale);

        const auto truth = to_radians(channel_los_phase(sc, grid, single_channel));
        PhaseSeries measured{to_radians(with_mp)};
        const auto estimate = estimate_channel_profile(amplitudes_of(with_mp), grid, sender, est_cfg);
        const auto corrected = correct_channel_phase(measured, estimate, grid, sender);

        results[idx] = {wrapped_mse(to_radians(without_mp), truth), wrapped_mse(measured.values, truth),
                        wrapped_mse(corrected.values, truth)};
    });

    SweepResult out;
    out.sweep_values.assign(points.begin(), points.end());
    out.trials_per_point = trials;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        double free = 0.0, distorted = 0.0, corrected = 0.0;
        for (std::size_t t = 0; t < trials; ++t)
        {
            const auto &r = results[i * trials + t];
            free += r.free;
            distorted += r.distorted;
            corrected += r.corrected;
        }
        const double n = static_cast<double>(trials);
        out.rmse_free.push_back(std::sqrt(free / n));
        out.rmse_distorted.push_back(std::sqrt(distorted / n));
        out.rmse_corrected.push_back(std::sqrt(corrected / n));
    }
    return out;
}

double percentile(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        throw std::invalid_argument("percentile: empty sample");
    if (!(p >= 0.0 && p <= 100.0))
        throw std::invalid_argument("percentile: p must lie in [0, 100]");
    const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(rank));
    const std::size_t above = std::min(below + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(below);
    return sorted[below] + frac * (sorted[above] - sorted[below]);
}

QRangeCdfResult run_qrange_cdf(const ExperimentConfig &cfg, unsigned threads)
{
    cfg.validate();
    if (cfg.scenario_kind != ScenarioKind::Quad)
        throw std::invalid_argument("run_qrange_cdf: scenario kind must be Quad");

    const MeasurementGrid &grid = cfg.grid;
    const double snr = cfg.snr_linear();
    const EstimatorConfig est_cfg = cfg.effective_estimator();

    QRangeCdfResult out;
    out.errors_distorted.resize(cfg.trials);
    out.errors_corrected.resize(cfg.trials);
    parallel_for(cfg.trials, threads, [&](std::size_t trial) {
        auto rng = trial_stream(cfg.seed, 0, trial);
        const QuadScenario sc = sample_scenario(cfg, rng);
        const QuadObservation obs = synthesize_observation(sc, grid, snr, rng);
        const PhaseSeries measured = measured_phase_difference(obs);

        PerChannel<ChannelEstimate> estimates;
        for (Channel ch : all_channels)
            estimates[ch] = estimate_channel_profile(obs.amplitudes(ch), grid, sender_of(ch), est_cfg);
        const PhaseSeries corrected = correct_phase_difference(measured, estimates, grid);

        const double dq = sc.qrange();
        out.errors_distorted[trial] = std::abs(estimate_qrange(measured, grid, cfg.qrange).d_hat - dq);
        out.errors_corrected[trial] = std::abs(estimate_qrange(corrected, grid, cfg.qrange).d_hat - dq);
    });

    std::ranges::sort(out.errors_distorted);
    std::ranges::sort(out.errors_corrected);
    out.percentiles = {percentile(out.errors_distorted, 50.0), percentile(out.errors_distorted, 95.0),
                       percentile(out.errors_corrected, 50.0), percentile(out.errors_corrected, 95.0)};
    return out;
}

CorrectionExample run_correction_example(const ExperimentConfig &cfg)
{
    cfg.validate();
    ExperimentConfig single = cfg;
    single.scenario_kind = ScenarioKind::SingleChannel;
    const MeasurementGrid &grid = cfg.grid;
    const Sender sender = sender_of(single_channel);

    auto rng = trial_stream(cfg.seed, 0, 0);
    const QuadScenario sc = sample_scenario(single, rng);
    const double variance = noise_variance(cfg.snr_linear());
    const auto noise = draw_noise(grid.size(), variance, rng);
    const auto phasors = noisy(channel_phasors(sc, grid, single_channel), noise, variance,
                               los_amplitude(sc, grid, single_channel, 0));

    const auto truth = to_radians(channel_los_phase(sc, grid, single_channel));
    PhaseSeries measured{to_radians(phasors)};

    CorrectionExample ex;
    ex.estimate = estimate_channel_profile(amplitudes_of(phasors), grid, sender, cfg.effective_estimator());
    const auto corrected = correct_channel_phase(measured, ex.estimate, grid, sender);
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        ex.frequencies.push_back(grid.frequency(sender, k));
        ex.error_before.push_back(wrap_to_pi(measured[k] - truth[k]));
        ex.error_after.push_back(wrap_to_pi(corrected[k] - truth[k]));
        ex.max_abs_before = std::max(ex.max_abs_before, std::abs(ex.error_before.back()));
        ex.max_abs_after = std::max(ex.max_abs_after, std::abs(ex.error_after.back()));
    }
    return ex;
}

} // namespace rips
