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

#include "rips/qrange_estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace rips
{
namespace
{

// 2 pi * frac(f d / c): reduces the cycle count before scaling so carrier
// phases at hundreds of metres keep full precision.
double propagation_phase(double f, double d)
{
    const double cycles = (f * d) / speed_of_light;
    return two_pi * (cycles - std::floor(cycles));
}

} // namespace

double QRangeSearchConfig::d_min_for(const MeasurementGrid &grid) const
{
    return d_min.value_or(-speed_of_light / (2.0 * grid.delta_f()));
}

double QRangeSearchConfig::d_max_for(const MeasurementGrid &grid) const
{
    return d_max.value_or(speed_of_light / (2.0 * grid.delta_f()));
}

void QRangeSearchConfig::validate(const MeasurementGrid &grid) const
{
    if (!(d_min_for(grid) < d_max_for(grid)))
        throw std::invalid_argument("QRangeSearchConfig: empty search interval");
    if (!(coarse_step > 0.0))
        throw std::invalid_argument("QRangeSearchConfig: coarse_step must be > 0");
    if (refine_candidates == 0)
        throw std::invalid_argument("QRangeSearchConfig: refine_candidates must be >= 1");
}

PhaseSeries qrange_phase_model(double d_q, const MeasurementGrid &grid)
{
    PhaseSeries out;
    out.values.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        out.values.push_back(PhaseTurns::from_cycles((grid.center(k) * d_q) / speed_of_light).radians());
    return out;
}

double qrange_score(const PhaseSeries &phases, const MeasurementGrid &grid, double d)
{
    if (phases.size() != grid.size())
        throw std::invalid_argument("qrange_score: length differs from grid size");
    double acc = 0.0;
    for (std::size_t k = 0; k < phases.size(); ++k)
        acc += std::cos(phases[k] - propagation_phase(grid.center(k), d));
    return acc / static_cast<double>(phases.size());
}

namespace
{

// Golden-section search for the maximum of S within one coarse step of `d0`.
QRangeEstimate refine_peak(const PhaseSeries &phases, const MeasurementGrid &grid, double d0, double lo, double hi,
                           const QRangeSearchConfig &cfg)
{
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::max(lo, d0 - cfg.coarse_step);
    double b = std::min(hi, d0 + cfg.coarse_step);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double s1 = qrange_score(phases, grid, x1);
    double s2 = qrange_score(phases, grid, x2);
    for (std::size_t i = 0; i < cfg.refine_iters; ++i)
    {
        if (s1 >= s2)
        {
            b = x2;
            x2 = x1;
            s2 = s1;
            x1 = b - phi * (b - a);
            s1 = qrange_score(phases, grid, x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            s1 = s2;
            x2 = a + phi * (b - a);
            s2 = qrange_score(phases, grid, x2);
        }
    }

    QRangeEstimate est{d0, qrange_score(phases, grid, d0)};
    const double mid = 0.5 * (a + b);
    for (const auto &[d, s] : {std::pair{x1, s1}, std::pair{x2, s2}, std::pair{mid, qrange_score(phases, grid, mid)}})
        if (s > est.score)
            est = {d, s};
    return est;
}

} // namespace

QRangeEstimate estimate_qrange(const PhaseSeries &phases, const MeasurementGrid &grid, const QRangeSearchConfig &cfg)
{
    cfg.validate(grid);
    if (phases.size() != grid.size())
        throw std::invalid_argument("estimate_qrange: length differs from grid size");

    const double lo = cfg.d_min_for(grid);
    const double hi = cfg.d_max_for(grid);
    const std::size_t points = static_cast<std::size_t>(std::floor((hi - lo) / cfg.coarse_step + 1e-9)) + 1;
    const double inv_k = 1.0 / static_cast<double>(phases.size());

    std::vector<std::complex<double>> z(phases.size());
    for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = {std::cos(phases[k]), std::sin(phases[k])};

    // S(d) = Re(exp(-j 2 pi f(0) d/c) * sum_k z_k u^k) / K with
    // u = exp(-j 2 pi delta_f d / c); the polynomial is evaluated by Horner.
    const double f0 = grid.center(0);
    // Horner chains of four grid points run interleaved; one chain alone is
    // latency bound
    std::vector<double> coarse(points);
    constexpr std::size_t lanes = 4;
    for (std::size_t m0 = 0; m0 < points; m0 += lanes)
    {
        std::array<double, lanes> ur{}, ui{}, yr{}, yi{};
        for (std::size_t l = 0; l < lanes; ++l)
        {
            const double d = lo + static_cast<double>(m0 + l) * cfg.coarse_step;
            const std::complex<double> u = std::polar(1.0, -propagation_phase(grid.delta_f(), d));
            ur[l] = u.real();
            ui[l] = u.imag();
            yr[l] = z.back().real();
            yi[l] = z.back().imag();
        }
        for (std::size_t k = z.size() - 1; k-- > 0;)
        {
            for (std::size_t l = 0; l < lanes; ++l)
            {
                const double tr = yr[l] * ur[l] - yi[l] * ui[l] + z[k].real();
                yi[l] = yr[l] * ui[l] + yi[l] * ur[l] + z[k].imag();
                yr[l] = tr;
            }
        }
        for (std::size_t l = 0; l < lanes && m0 + l < points; ++l)
        {
            const double d = lo + static_cast<double>(m0 + l) * cfg.coarse_step;
            const std::complex<double> e = std::polar(1.0, -propagation_phase(f0, d));
            coarse[m0 + l] = (e.real() * yr[l] - e.imag() * yi[l]) * inv_k;
        }
    }

    // Neighbouring carrier fringes score within a few 1e-3 of the true peak, less
    // than the loss from sampling a fringe at 1 cm, so the strongest coarse
    // local maxima are all refined before choosing.
    std::vector<std::size_t> peaks;
    for (std::size_t m = 0; m < points; ++m)
    {
        const bool left = m == 0 || coarse[m] >= coarse[m - 1];
        const bool right = m + 1 == points || coarse[m] >= coarse[m + 1];
        if (left && right)
            peaks.push_back(m);
    }
    std::ranges::stable_sort(peaks, [&](std::size_t i, std::size_t j) { return coarse[i] > coarse[j]; });
    if (peaks.size() > cfg.refine_candidates)
        peaks.resize(cfg.refine_candidates);

    QRangeEstimate est{0.0, -2.0};
    for (const std::size_t m : peaks)
    {
        const auto cand = refine_peak(phases, grid, lo + static_cast<double>(m) * cfg.coarse_step, lo, hi, cfg);
        if (cand.score > est.score || (cand.score == est.score && cand.d_hat < est.d_hat))
            est = cand;
    }
    return est;
}

} // namespace rips
