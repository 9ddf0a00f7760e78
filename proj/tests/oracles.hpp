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

#ifndef RIPS_TEST_ORACLES_HPP
#define RIPS_TEST_ORACLES_HPP

// Independent reference formulations used by the tests. Everything here is
// written from the defining formulas in long double, without the library's
// fixed-point turns, Horner scans or FFTs.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle
{

inline constexpr long double c0 = 299792458.0L;
inline constexpr long double pi_l = std::numbers::pi_v<long double>;

// (-pi, pi]
inline double wrap(long double x)
{
    long double y = std::fmod(x + pi_l, 2.0L * pi_l);
    if (y <= 0.0L)
        y += 2.0L * pi_l;
    return static_cast<double>(y - pi_l);
}

// -2 pi f (t + d/c), reduced through the cycle count
inline double los_phase(long double f, long double t, long double d)
{
    const long double cycles = f * (t + d / c0);
    const long double frac = cycles - std::floor(cycles);
    return wrap(-2.0L * pi_l * frac);
}

struct Path
{
    double alpha, tau, theta;
};

inline std::complex<long double> response(const std::vector<Path> &paths, long double f)
{
    std::complex<long double> z = 1.0L;
    for (const auto &p : paths)
    {
        const long double cyc = static_cast<long double>(p.tau) * f;
        const long double psi = 2.0L * pi_l * (cyc - std::floor(cyc)) + p.theta;
        z += std::polar(static_cast<long double>(p.alpha), -psi);
    }
    return z;
}

inline double gain(const std::vector<Path> &paths, double f) { return static_cast<double>(std::abs(response(paths, f))); }
inline double phase_error(const std::vector<Path> &paths, double f) { return static_cast<double>(std::arg(response(paths, f))); }

inline double approx_gain(const std::vector<Path> &paths, long double f)
{
    long double g = 1.0L;
    for (const auto &p : paths)
    {
        const long double cyc = static_cast<long double>(p.tau) * f;
        g += p.alpha * std::cos(2.0L * pi_l * (cyc - std::floor(cyc)) + p.theta);
    }
    return static_cast<double>(g);
}

// |DFT| of x zero-padded to n points, bins 0..n/2, by direct summation
inline std::vector<double> dft_magnitude(const std::vector<double> &x, std::size_t n)
{
    std::vector<double> out(n / 2 + 1);
    for (std::size_t m = 0; m < out.size(); ++m)
    {
        std::complex<long double> acc = 0.0L;
        for (std::size_t k = 0; k < x.size(); ++k)
        {
            const long double ang = -2.0L * pi_l * static_cast<long double>((m * k) % n) / static_cast<long double>(n);
            acc += std::polar(static_cast<long double>(x[k]), ang);
        }
        out[m] = static_cast<double>(std::abs(acc));
    }
    return out;
}

// (1/K) sum cos(phi(k) - 2 pi f(k) d / c)
inline double qrange_score(const std::vector<double> &phases, const std::vector<double> &freqs, long double d)
{
    long double acc = 0.0L;
    for (std::size_t k = 0; k < phases.size(); ++k)
    {
        const long double cyc = freqs[k] * d / c0;
        acc += std::cos(phases[k] - 2.0L * pi_l * (cyc - std::floor(cyc)));
    }
    return static_cast<double>(acc / static_cast<long double>(phases.size()));
}

// sqrt(mean wrap(a - b)^2)
inline double wrapped_rmse(const std::vector<double> &a, const std::vector<double> &b)
{
    long double acc = 0.0L;
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        const long double d = wrap(static_cast<long double>(a[k]) - b[k]);
        acc += d * d;
    }
    return static_cast<double>(std::sqrt(acc / static_cast<long double>(a.size())));
}

} // namespace oracle

#endif
