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

#include "rips/multipath_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>

#include <Eigen/Dense>
#include <fftw3.h>

namespace rips
{
namespace
{

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex &planner_mutex()
{
    static std::mutex m;
    return m;
}

class RealFft
{
  public:
    explicit RealFft(std::size_t n) : n_(n)
    {
        std::lock_guard lock(planner_mutex());
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_complex(n / 2 + 1);
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    }
    RealFft(const RealFft &) = delete;
    RealFft &operator=(const RealFft &) = delete;
    ~RealFft()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }

    std::vector<double> magnitude(std::span<const double> x)
    {
        std::fill(in_, in_ + n_, 0.0);
        std::copy(x.begin(), x.end(), in_);
        fftw_execute(plan_);
        std::vector<double> mag(n_ / 2 + 1);
        for (std::size_t m = 0; m < mag.size(); ++m)
            mag[m] = std::hypot(out_[m][0], out_[m][1]);
        return mag;
    }

  private:
    std::size_t n_;
    double *in_ = nullptr;
    fftw_complex *out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

RealFft &fft_for(std::size_t n)
{
    thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    auto &slot = cache[n];
    if (!slot)
        slot = std::make_unique<RealFft>(n);
    return *slot;
}

double rms(std::span<const double> v)
{
    if (v.empty())
        return 0.0;
    double acc = 0.0;
    for (double x : v)
        acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double normalize_angle(double a)
{
    double t = std::fmod(a, two_pi);
    if (t < 0.0)
        t += two_pi;
    return t >= two_pi ? 0.0 : t;
}

// Mean squared residual of the reflection fit as a function of one delay with
// the others held fixed. The Gram matrix of the design is kept so that moving
// one delay only recomputes its cos/sin column pair.
class DelayFitCost
{
  public:
    DelayFitCost(std::span<const double> residual, double los_hat, const MeasurementGrid &grid, Sender sender,
                 std::span<const double> delays, bool with_offset)
        : rows_(static_cast<Eigen::Index>(residual.size())),
          cols_(static_cast<Eigen::Index>(2 * delays.size()) + (with_offset ? 1 : 0)), f0_(grid.frequency(sender, 0)),
          delta_f_(grid.delta_f()), design_(rows_, cols_), b_(rows_)
    {
        for (Eigen::Index k = 0; k < rows_; ++k)
            b_(k) = residual[static_cast<std::size_t>(k)] / los_hat;
        bb_ = b_.squaredNorm();
        for (std::size_t i = 0; i < delays.size(); ++i)
            fill_pair(delays[i], design_.col(static_cast<Eigen::Index>(2 * i)),
                      design_.col(static_cast<Eigen::Index>(2 * i + 1)));
        if (with_offset)
            design_.col(cols_ - 1).setOnes();
        gram_ = design_.transpose() * design_;
        proj_ = design_.transpose() * b_;
    }

    double cost() const { return solve(gram_, proj_); }

    double cost_with(std::size_t pair, double tau) const
    {
        Eigen::VectorXd c(rows_), s(rows_);
        fill_pair(tau, c, s);
        Eigen::MatrixXd gram = gram_;
        Eigen::VectorXd proj = proj_;
        patch(pair, c, s, gram, proj);
        return solve(gram, proj);
    }

    void set_delay(std::size_t pair, double tau)
    {
        const auto ci = static_cast<Eigen::Index>(2 * pair);
        Eigen::VectorXd c(rows_), s(rows_);
        fill_pair(tau, c, s);
        design_.col(ci) = c;
        design_.col(ci + 1) = s;
        patch(pair, c, s, gram_, proj_);
    }

  private:
    template <typename Col>
    void fill_pair(double tau, Col &&c, Col &&s) const
    {
        // exp(j 2 pi tau f(k)) by rotation from f(0); 100-step drift is ~1e-14
        std::complex<double> z = std::polar(1.0, path_phase(tau, f0_, 0.0));
        const std::complex<double> step = std::polar(1.0, path_phase(tau, delta_f_, 0.0));
        for (Eigen::Index k = 0; k < rows_; ++k)
        {
            c(k) = z.real();
            s(k) = -z.imag();
            z *= step;
        }
    }

    void patch(std::size_t pair, const Eigen::VectorXd &c, const Eigen::VectorXd &s, Eigen::MatrixXd &gram,
               Eigen::VectorXd &proj) const
    {
        const auto ci = static_cast<Eigen::Index>(2 * pair);
        Eigen::VectorXd gc = design_.transpose() * c;
        Eigen::VectorXd gs = design_.transpose() * s;
        gc(ci) = c.squaredNorm();
        gc(ci + 1) = c.dot(s);
        gs(ci) = gc(ci + 1);
        gs(ci + 1) = s.squaredNorm();
        gram.col(ci) = gc;
        gram.row(ci) = gc.transpose();
        gram.col(ci + 1) = gs;
        gram.row(ci + 1) = gs.transpose();
        proj(ci) = c.dot(b_);
        proj(ci + 1) = s.dot(b_);
    }

    double solve(const Eigen::MatrixXd &gram, const Eigen::VectorXd &proj) const
    {
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        const Eigen::VectorXd d = ldlt.vectorD();
        if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-9 * d.maxCoeff()))
            return std::numeric_limits<double>::infinity();
        const Eigen::VectorXd x = ldlt.solve(proj);
        return std::max(0.0, bb_ - proj.dot(x)) / static_cast<double>(rows_);
    }

    Eigen::Index rows_;
    Eigen::Index cols_;
    double f0_;
    double delta_f_;
    Eigen::MatrixXd design_;
    Eigen::VectorXd b_;
    double bb_ = 0.0;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd proj_;
};

// Search range clipped half a resolution bin away from zero delay and from
// the Nyquist delay, where the cos/sin column pair of a path degenerates.
std::pair<double, double> usable_delay_range(const MeasurementGrid &grid, const EstimatorConfig &cfg)
{
    const double half_bin = 0.5 * grid.delay_resolution();
    return {std::max(cfg.min_delay_for(grid), half_bin),
            std::min(cfg.max_delay_for(grid), 0.5 / grid.delta_f() - half_bin)};
}

// Levenberg-Marquardt fit of W(k) = A |1 + sum_i alpha_i exp(-j psi_i(k))| with
// psi_i(k) = phi_i + 2 pi tau_i k delta_f, phi_i the path phase at k = 0.
// Delays are carried in resolution units so all columns are O(1).
// Returns the final sum of squared residuals; `est` is left untouched if the
// fit does not improve on the start.
double polish_exact_model(std::span<const double> weighted, const MeasurementGrid &grid, Sender sender,
                        const EstimatorConfig &cfg, ChannelEstimate &est)
{
    const auto &start = est.profile_hat.components();
    const std::size_t paths = start.size();
    const auto rows = static_cast<Eigen::Index>(weighted.size());
    const auto cols = static_cast<Eigen::Index>(1 + 3 * paths);
    const double res = grid.delay_resolution();
    const double f0 = grid.frequency(sender, 0);
    const double k_scale = two_pi / static_cast<double>(grid.size());

    Eigen::VectorXd x(cols);
    x(0) = est.los_amplitude_hat;
    for (std::size_t i = 0; i < paths; ++i)
    {
        const auto c = static_cast<Eigen::Index>(1 + 3 * i);
        x(c) = start[i].alpha;
        x(c + 1) = start[i].tau / res;
        x(c + 2) = path_phase(start[i].tau, f0, start[i].theta);
    }
    Eigen::Map<const Eigen::VectorXd> y(weighted.data(), rows);

    Eigen::MatrixXd jac(rows, cols);
    const auto evaluate = [&](const Eigen::VectorXd &p, Eigen::VectorXd &r, bool with_jacobian) {
        r.resize(rows);
        for (Eigen::Index k = 0; k < rows; ++k)
        {
            std::complex<double> z = 1.0;
            for (std::size_t i = 0; i < paths; ++i)
            {
                const auto c = static_cast<Eigen::Index>(1 + 3 * i);
                z += std::polar(p(c), -(p(c + 2) + k_scale * p(c + 1) * static_cast<double>(k)));
            }
            const double mag = std::abs(z);
            r(k) = y(k) - p(0) * mag;
            if (!with_jacobian)
                continue;
            const double inv = 1.0 / std::max(mag, 1e-12);
            jac(k, 0) = mag;
            for (std::size_t i = 0; i < paths; ++i)
            {
                const auto c = static_cast<Eigen::Index>(1 + 3 * i);
                const std::complex<double> w = std::polar(1.0, -(p(c + 2) + k_scale * p(c + 1) * static_cast<double>(k)));
                const std::complex<double> zw = std::conj(z) * w;
                const double d_psi = p(0) * p(c) * zw.imag() * inv;
                jac(k, c) = p(0) * zw.real() * inv;
                jac(k, c + 1) = d_psi * k_scale * static_cast<double>(k);
                jac(k, c + 2) = d_psi;
            }
        }
        return r.squaredNorm();
    };

    const auto [lo_delay, hi_delay] = usable_delay_range(grid, cfg);
    const double min_gap = std::max(0.5 * cfg.min_separation_for(grid), 1e-11) / res;
    const auto admissible = [&](Eigen::VectorXd &p) {
        if (!(p(0) > 0.0))
            return false;
        for (std::size_t i = 0; i < paths; ++i)
        {
            const auto c = static_cast<Eigen::Index>(1 + 3 * i);
            if (p(c) < 0.0)
            {
                p(c) = -p(c);
                p(c + 2) += pi;
            }
            p(c) = std::min(p(c), cfg.alpha_max);
            p(c + 1) = std::clamp(p(c + 1), lo_delay / res, hi_delay / res);
            if (i > 0 && !(p(c + 1) - p(c - 2) >= min_gap))
                return false;
        }
        return p.allFinite();
    };

    Eigen::VectorXd r;
    Eigen::VectorXd r_trial;
    admissible(x);
    double cost = evaluate(x, r, true);
    const double start_cost = cost;
    double lambda = 1e-3;
    for (std::size_t it = 0; it < cfg.polish_iterations; ++it)
    {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool improved = false;
        while (lambda < 1e10)
        {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
            Eigen::VectorXd trial = x + a.ldlt().solve(jtr);
            if (admissible(trial))
            {
                const double trial_cost = evaluate(trial, r_trial, false);
                if (trial_cost < cost)
                {
                    const double gain = cost - trial_cost;
                    x = trial;
                    cost = evaluate(x, r, true);
                    lambda = std::max(lambda * 0.3, 1e-12);
                    improved = gain > 1e-14 * cost;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!improved)
            break;
    }
    if (!(cost < start_cost))
        return start_cost;

    std::vector<PathComponent> kept;
    for (std::size_t i = 0; i < paths; ++i)
    {
        const auto c = static_cast<Eigen::Index>(1 + 3 * i);
        if (x(c) < cfg.alpha_floor)
            continue;
        const double tau = x(c + 1) * res;
        kept.push_back(PathComponent::make(x(c), tau, x(c + 2) - path_phase(tau, f0, 0.0)));
    }
    const bool dropped = kept.size() < paths;
    est.los_amplitude_hat = x(0);
    est.profile_hat = MultipathProfile(std::move(kept));
    est.residual_rms = std::sqrt(cost / static_cast<double>(rows)) / x(0);
    // the survivors were fitted alongside the dropped paths
    if (dropped)
        return polish_exact_model(weighted, grid, sender, cfg, est);
    return cost;
}

double information_score(double sse, std::size_t rows, std::size_t paths)
{
    const auto k = static_cast<double>(rows);
    return k * std::log(std::max(sse, 1e-300) / k) + 3.0 * static_cast<double>(paths) * std::log(k);
}

// Polish, then drop the weakest path while the fit without it is not
// significantly worse (BIC-style penalty of 3 ln K noise variances per path).
// Returns the final sum of squared residuals.
double select_exact_model(std::span<const double> weighted, const MeasurementGrid &grid, Sender sender,
                          const EstimatorConfig &cfg, ChannelEstimate &est)
{
    double cost = polish_exact_model(weighted, grid, sender, cfg, est);
    const auto rows = static_cast<double>(weighted.size());
    while (!est.profile_hat.empty())
    {
        const auto &comps = est.profile_hat.components();
        const double dof = rows - 1.0 - 3.0 * static_cast<double>(comps.size());
        if (!(dof > 0.0))
            break;
        const double penalty = 3.0 * std::log(rows) * cost / dof;
        const auto weakest = std::ranges::min_element(comps, {}, &PathComponent::alpha);
        std::vector<PathComponent> rest;
        for (auto it = comps.begin(); it != comps.end(); ++it)
            if (it != weakest)
                rest.push_back(*it);
        ChannelEstimate reduced{est.los_amplitude_hat, MultipathProfile(std::move(rest)), est.residual_rms};
        const double reduced_cost = polish_exact_model(weighted, grid, sender, cfg, reduced);
        if (!(reduced_cost - cost < penalty))
            break;
        est = std::move(reduced);
        cost = reduced_cost;
    }

    // spurious companions can pull the dominant path into a local minimum
    // that elimination cannot leave; restart from the dominant path alone
    if (est.profile_hat.size() > 1)
    {
        const auto &comps = est.profile_hat.components();
        const auto strongest = *std::ranges::max_element(comps, {}, &PathComponent::alpha);
        ChannelEstimate single{est.los_amplitude_hat, MultipathProfile({strongest}), est.residual_rms};
        const double single_cost = polish_exact_model(weighted, grid, sender, cfg, single);
        if (information_score(single_cost, weighted.size(), single.profile_hat.size()) <
            information_score(cost, weighted.size(), comps.size()))
        {
            est = std::move(single);
            cost = single_cost;
        }
    }
    return cost;
}

bool hit_alpha_bound(const ChannelEstimate &est, const EstimatorConfig &cfg)
{
    return std::ranges::any_of(est.profile_hat.components(),
                               [&](const PathComponent &c) { return c.alpha >= cfg.alpha_max * (1.0 - 1e-9); });
}

// LS start for the given delays: reflection fit with the offset folded into
// the LOS amplitude. Throws EstimationError on a degenerate fit.
ChannelEstimate linear_start(std::span<const double> residual, double los_hat, const MeasurementGrid &grid,
                             Sender sender, std::span<const double> delays, const EstimatorConfig &cfg)
{
    const auto fit = fit_reflection_coefficients(residual, los_hat, grid, sender, delays, cfg.fit_offset);
    // b = (W - los)/los with W = los_true (1 + sum alpha cos): the
    // constant is los_true/los - 1 and the path terms carry los_true/los
    const double scale = 1.0 + fit.offset;
    if (!(scale > 0.0))
        throw EstimationError("estimate_channel_profile: non-positive LOS amplitude");
    std::vector<PathComponent> kept;
    for (std::size_t i = 0; i < delays.size(); ++i)
    {
        const double alpha = fit.reflections[i].alpha / scale;
        if (alpha >= cfg.alpha_floor)
            kept.push_back(PathComponent::make(alpha, delays[i], fit.reflections[i].theta));
    }
    return {los_hat * scale, MultipathProfile(std::move(kept)), fit.residual_rms};
}

// Restarts for a polish that ran into the alpha bound, usually two close paths
// merged into one periodogram lobe: each delay in turn is split into a pair
// half a bin either side, dropping the weakest other peak if that would exceed
// num_paths. The best fit by information score wins.
void split_restarts(std::span<const double> weighted, std::span<const double> residual, double los_hat,
                    const MeasurementGrid &grid, Sender sender, const EstimatorConfig &cfg,
                    std::span<const double> delays, std::span<const double> magnitudes, ChannelEstimate &est,
                    double &cost)
{
    const double half_bin = 0.5 * grid.delay_resolution();
    const auto [lo_delay, hi_delay] = usable_delay_range(grid, cfg);
    double best = information_score(cost, weighted.size(), est.profile_hat.size());
    for (std::size_t i = 0; i < delays.size(); ++i)
    {
        std::size_t drop = delays.size();
        if (delays.size() >= cfg.num_paths)
        {
            for (std::size_t j = 0; j < delays.size(); ++j)
                if (j != i && (drop == delays.size() || magnitudes[j] < magnitudes[drop]))
                    drop = j;
            if (drop == delays.size())
                continue;
        }
        std::vector<double> split;
        for (std::size_t j = 0; j < delays.size(); ++j)
        {
            if (j == drop)
                continue;
            if (j != i)
            {
                split.push_back(delays[j]);
                continue;
            }
            split.push_back(std::max(lo_delay, delays[j] - half_bin));
            split.push_back(std::min(hi_delay, delays[j] + half_bin));
        }
        std::ranges::sort(split);
        try
        {
            auto trial = linear_start(residual, los_hat, grid, sender, split, cfg);
            const double trial_cost = select_exact_model(weighted, grid, sender, cfg, trial);
            const double score = information_score(trial_cost, weighted.size(), trial.profile_hat.size());
            if (score < best && !hit_alpha_bound(trial, cfg))
            {
                best = score;
                est = std::move(trial);
                cost = trial_cost;
            }
        }
        catch (const EstimationError &)
        {
        }
        catch (const std::invalid_argument &)
        {
        }
    }
}

} // namespace

double EstimatorConfig::min_delay_for(const MeasurementGrid &grid) const
{
    return min_delay.value_or(0.5 * grid.delay_resolution());
}

double EstimatorConfig::max_delay_for(const MeasurementGrid &grid) const
{
    return max_delay.value_or(0.5 / grid.delta_f());
}

double EstimatorConfig::min_separation_for(const MeasurementGrid &grid) const
{
    return min_separation.value_or(grid.delay_resolution());
}

void EstimatorConfig::validate(const MeasurementGrid &grid) const
{
    if (num_paths == 0)
        throw std::invalid_argument("EstimatorConfig: num_paths must be >= 1");
    if (zero_pad_factor == 0)
        throw std::invalid_argument("EstimatorConfig: zero_pad_factor must be >= 1");
    if (!(min_delay_for(grid) < max_delay_for(grid)))
        throw std::invalid_argument("EstimatorConfig: min_delay must be < max_delay");
    if (!(min_separation_for(grid) >= 0.0))
        throw std::invalid_argument("EstimatorConfig: min_separation must be >= 0");
    if (!(alpha_floor >= 0.0))
        throw std::invalid_argument("EstimatorConfig: alpha_floor must be >= 0");
    if (!(alpha_max > alpha_floor))
        throw std::invalid_argument("EstimatorConfig: alpha_max must be > alpha_floor");
}

std::vector<double> weighted_amplitude_series(std::span<const double> amplitudes, const MeasurementGrid &grid,
                                              Sender sender)
{
    if (amplitudes.size() != grid.size())
        throw std::invalid_argument("weighted_amplitude_series: length differs from grid size");
    const double f0 = grid.frequency(sender, 0);
    std::vector<double> w(amplitudes.size());
    for (std::size_t k = 0; k < w.size(); ++k)
    {
        if (!(amplitudes[k] > 0.0))
            throw std::invalid_argument("weighted_amplitude_series: amplitude must be > 0");
        w[k] = k == 0 ? amplitudes[0] : amplitudes[k] * (grid.frequency(sender, k) / f0);
    }
    return w;
}

double estimate_los_amplitude(std::span<const double> weighted)
{
    if (weighted.empty())
        throw std::invalid_argument("estimate_los_amplitude: empty input");
    return std::accumulate(weighted.begin(), weighted.end(), 0.0) / static_cast<double>(weighted.size());
}

std::vector<double> multipath_residual(std::span<const double> weighted, double los_hat)
{
    if (!(los_hat > 0.0))
        throw std::invalid_argument("multipath_residual: los_hat must be > 0");
    std::vector<double> r(weighted.begin(), weighted.end());
    for (double &x : r)
        x -= los_hat;
    return r;
}

std::vector<double> residual_periodogram(std::span<const double> residual, std::size_t zero_pad_factor)
{
    if (residual.empty() || zero_pad_factor == 0)
        throw std::invalid_argument("residual_periodogram: empty input or zero pad factor");
    return fft_for(residual.size() * zero_pad_factor).magnitude(residual);
}

std::vector<DelayPeak> find_delay_peaks(std::span<const double> residual, const MeasurementGrid &grid,
                                        const EstimatorConfig &cfg)
{
    cfg.validate(grid);
    if (residual.size() != grid.size())
        throw std::invalid_argument("find_delay_peaks: length differs from grid size");
    if (residual.size() < 8)
        throw EstimationError("find_delay_peaks: need at least 8 frequencies");
    if (std::ranges::all_of(residual, [](double x) { return x == 0.0; }))
        return {};

    const std::size_t n = residual.size() * cfg.zero_pad_factor;
    const auto mag = residual_periodogram(residual, cfg.zero_pad_factor);
    const double bin_delay = 1.0 / (static_cast<double>(n) * grid.delta_f());
    const auto [lo_delay, hi_delay] = usable_delay_range(grid, cfg);

    const auto lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lo_delay / bin_delay)));
    const auto hi = std::min<std::size_t>(n / 2 - 1, static_cast<std::size_t>(std::floor(hi_delay / bin_delay)));

    std::vector<DelayPeak> candidates;
    for (std::size_t m = lo; m <= hi; ++m)
    {
        if (!(mag[m] > mag[m - 1] && mag[m] >= mag[m + 1]))
            continue;
        double offset = 0.0;
        if (mag[m - 1] > 0.0 && mag[m + 1] > 0.0)
        {
            const double l = std::log(mag[m - 1]);
            const double c = std::log(mag[m]);
            const double r = std::log(mag[m + 1]);
            const double denom = l - 2.0 * c + r;
            if (denom < 0.0)
                offset = std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
        }
        const double delay = std::clamp((static_cast<double>(m) + offset) * bin_delay, lo_delay, hi_delay);
        candidates.push_back({delay, mag[m]});
    }

    // strongest first; stable on bin order for equal magnitudes
    std::ranges::stable_sort(candidates, std::ranges::greater{}, &DelayPeak::magnitude);
    const double separation = cfg.min_separation_for(grid);
    std::vector<DelayPeak> accepted;
    for (const auto &c : candidates)
    {
        if (accepted.size() == cfg.num_paths)
            break;
        const bool clear = std::ranges::none_of(
            accepted, [&](const DelayPeak &a) { return std::abs(a.delay - c.delay) < separation; });
        if (clear)
            accepted.push_back(c);
    }
    std::ranges::sort(accepted, {}, &DelayPeak::delay);
    return accepted;
}

std::vector<double> estimate_delays(std::span<const double> residual, const MeasurementGrid &grid,
                                    const EstimatorConfig &cfg)
{
    std::vector<double> out;
    for (const auto &p : find_delay_peaks(residual, grid, cfg))
        out.push_back(p.delay);
    // the delay fit is invariant to the residual scale and to the sender's
    // frequency offset, which only rotates each cos/sin pair
    if (cfg.refine_delays && !out.empty())
        out = refine_delays(residual, 1.0, grid, Sender::B, out, cfg);
    return out;
}

ReflectionFit fit_reflection_coefficients(std::span<const double> residual, double los_hat, const MeasurementGrid &grid,
                                          Sender sender, std::span<const double> delays, bool with_offset)
{
    if (delays.empty())
        throw std::invalid_argument("fit_reflection_coefficients: no delays");
    if (residual.size() != grid.size())
        throw std::invalid_argument("fit_reflection_coefficients: length differs from grid size");
    if (!(los_hat > 0.0))
        throw std::invalid_argument("fit_reflection_coefficients: los_hat must be > 0");

    const auto rows = static_cast<Eigen::Index>(residual.size());
    const auto path_cols = static_cast<Eigen::Index>(2 * delays.size());
    const auto cols = path_cols + (with_offset ? 1 : 0);
    if (cols > rows)
        throw EstimationError("fit_reflection_coefficients: more unknowns than frequencies");

    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index k = 0; k < rows; ++k)
    {
        const double f = grid.frequency(sender, static_cast<std::size_t>(k));
        b(k) = residual[static_cast<std::size_t>(k)] / los_hat;
        for (std::size_t i = 0; i < delays.size(); ++i)
        {
            const double psi = path_phase(delays[i], f, 0.0);
            design(k, static_cast<Eigen::Index>(2 * i)) = std::cos(psi);
            design(k, static_cast<Eigen::Index>(2 * i + 1)) = -std::sin(psi);
        }
        if (with_offset)
            design(k, path_cols) = 1.0;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-9);
    if (qr.rank() < cols)
        throw EstimationError("fit_reflection_coefficients: rank-deficient design matrix");
    const Eigen::VectorXd x = qr.solve(b);
    const Eigen::VectorXd resid = b - design * x;

    ReflectionFit fit;
    fit.reflections.reserve(delays.size());
    for (std::size_t i = 0; i < delays.size(); ++i)
    {
        const double xc = x(static_cast<Eigen::Index>(2 * i));
        const double xs = x(static_cast<Eigen::Index>(2 * i + 1));
        fit.reflections.push_back({std::hypot(xc, xs), normalize_angle(std::atan2(xs, xc))});
    }
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(rows));
    if (with_offset)
        fit.offset = x(path_cols);
    return fit;
}

std::vector<double> refine_delays(std::span<const double> residual, double los_hat, const MeasurementGrid &grid,
                                  Sender sender, std::span<const double> delays, const EstimatorConfig &cfg)
{
    std::vector<double> current(delays.begin(), delays.end());
    if (current.empty())
        return current;
    if (residual.size() != grid.size())
        throw std::invalid_argument("refine_delays: length differs from grid size");
    if (!(los_hat > 0.0))
        throw std::invalid_argument("refine_delays: los_hat must be > 0");

    DelayFitCost fit(residual, los_hat, grid, sender, current, cfg.fit_offset);

    constexpr int golden_iters = 40;
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    const double half_bin = 0.5 * grid.delay_resolution();
    const auto [lo_delay, hi_delay] = usable_delay_range(grid, cfg);
    const double guard = std::max(0.5 * cfg.min_separation_for(grid), 1e-11);

    double best_cost = fit.cost();
    for (std::size_t sweep = 0; sweep < cfg.refine_sweeps; ++sweep)
    {
        for (std::size_t i = 0; i < current.size(); ++i)
        {
            const auto eval = [&](double tau) { return fit.cost_with(i, tau); };
            double a = std::max(lo_delay, current[i] - half_bin);
            double b = std::min(hi_delay, current[i] + half_bin);
            if (i > 0)
                a = std::max(a, current[i - 1] + guard);
            if (i + 1 < current.size())
                b = std::min(b, current[i + 1] - guard);
            if (!(a < b))
                continue;
            double x1 = b - golden * (b - a);
            double x2 = a + golden * (b - a);
            double c1 = eval(x1);
            double c2 = eval(x2);
            for (int it = 0; it < golden_iters; ++it)
            {
                if (c1 <= c2)
                {
                    b = x2;
                    x2 = x1;
                    c2 = c1;
                    x1 = b - golden * (b - a);
                    c1 = eval(x1);
                }
                else
                {
                    a = x1;
                    x1 = x2;
                    c1 = c2;
                    x2 = a + golden * (b - a);
                    c2 = eval(x2);
                }
            }
            const double x = c1 <= c2 ? x1 : x2;
            const double c = std::min(c1, c2);
            if (c < best_cost)
            {
                best_cost = c;
                current[i] = x;
                fit.set_delay(i, x);
            }
        }
    }
    return current;
}

std::vector<Reflection> solve_reflection_coefficients(std::span<const double> residual, double los_hat,
                                                      const MeasurementGrid &grid, Sender sender,
                                                      std::span<const double> delays)
{
    return fit_reflection_coefficients(residual, los_hat, grid, sender, delays).reflections;
}

ChannelEstimate estimate_channel_profile(std::span<const double> amplitudes, const MeasurementGrid &grid,
                                         Sender sender, const EstimatorConfig &cfg)
{
    if (amplitudes.size() != grid.size())
        throw std::invalid_argument("estimate_channel_profile: length differs from grid size");
    std::vector<double> weighted;
    if (cfg.frequency_weighting)
    {
        weighted = weighted_amplitude_series(amplitudes, grid, sender);
    }
    else
    {
        if (!std::ranges::all_of(amplitudes, [](double a) { return a > 0.0; }))
            throw std::invalid_argument("estimate_channel_profile: amplitude must be > 0");
        weighted.assign(amplitudes.begin(), amplitudes.end());
    }

    ChannelEstimate est;
    est.los_amplitude_hat = estimate_los_amplitude(weighted);
    const auto residual = multipath_residual(weighted, est.los_amplitude_hat);
    auto peaks = find_delay_peaks(residual, grid, cfg);

    while (!peaks.empty())
    {
        std::vector<double> delays;
        for (const auto &p : peaks)
            delays.push_back(p.delay);
        try
        {
            if (cfg.refine_delays)
                delays = refine_delays(residual, est.los_amplitude_hat, grid, sender, delays, cfg);
            const double los_hat = est.los_amplitude_hat;
            est = linear_start(residual, los_hat, grid, sender, delays, cfg);
            if (cfg.polish_exact)
            {
                double cost = select_exact_model(weighted, grid, sender, cfg, est);
                if (hit_alpha_bound(est, cfg))
                {
                    std::vector<double> magnitudes;
                    for (const auto &p : peaks)
                        magnitudes.push_back(p.magnitude);
                    split_restarts(weighted, residual, los_hat, grid, sender, cfg, delays, magnitudes, est, cost);
                }
            }
            return est;
        }
        catch (const EstimationError &)
        {
            const auto weakest = std::ranges::min_element(peaks, {}, &DelayPeak::magnitude);
            peaks.erase(weakest);
        }
    }

    est.residual_rms = rms(residual) / est.los_amplitude_hat;
    return est;
}

double predict_phase_error(const ChannelEstimate &estimate, double f)
{
    if (estimate.profile_hat.empty())
        return 0.0;
    return composite_channel_response(estimate.profile_hat, f).phase_error;
}

PhaseSeries correct_channel_phase(const PhaseSeries &measured, const ChannelEstimate &estimate,
                                  const MeasurementGrid &grid, Sender sender)
{
    if (measured.size() != grid.size())
        throw std::invalid_argument("correct_channel_phase: length differs from grid size");
    PhaseSeries out;
    out.values.resize(measured.size());
    for (std::size_t k = 0; k < measured.size(); ++k)
        out.values[k] = wrap_to_pi(measured[k] - predict_phase_error(estimate, grid.frequency(sender, k)));
    return out;
}

PhaseSeries correct_phase_difference(const PhaseSeries &measured, const PerChannel<ChannelEstimate> &estimates,
                                     const MeasurementGrid &grid)
{
    if (measured.size() != grid.size())
        throw std::invalid_argument("correct_phase_difference: length differs from grid size");
    PhaseSeries out;
    out.values.resize(measured.size());
    for (std::size_t k = 0; k < measured.size(); ++k)
    {
        const double fa = grid.f_a(k);
        const double fb = grid.f_b(k);
        const double combined = predict_phase_error(estimates[Channel::AC], fa) -
                                predict_phase_error(estimates[Channel::AD], fa) -
                                predict_phase_error(estimates[Channel::BC], fb) +
                                predict_phase_error(estimates[Channel::BD], fb);
        out.values[k] = wrap_to_pi(measured[k] - combined);
    }
    return out;
}

} // namespace rips
