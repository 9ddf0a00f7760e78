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

#include "rips/cli/config_io.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "rips/cli/output.hpp"

namespace rips::cli
{
namespace
{

Json optional_number(const std::optional<double> &v) { return v ? Json(*v) : Json(nullptr); }

[[noreturn]] void fail(std::string_view key, std::string_view what)
{
    throw std::invalid_argument("config: '" + std::string(key) + "' " + std::string(what));
}

double get_number(const Json &v, std::string_view key)
{
    if (!v.is_number())
        fail(key, "must be a number");
    return v.get<double>();
}

std::optional<double> get_optional_number(const Json &v, std::string_view key)
{
    if (v.is_null())
        return std::nullopt;
    return get_number(v, key);
}

std::uint64_t get_unsigned(const Json &v, std::string_view key)
{
    if (!v.is_number_unsigned())
        fail(key, "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const Json &v, std::string_view key)
{
    if (!v.is_boolean())
        fail(key, "must be true or false");
    return v.get<bool>();
}

std::string get_string(const Json &v, std::string_view key)
{
    if (!v.is_string())
        fail(key, "must be a string");
    return v.get<std::string>();
}

const Json &require_object(const Json &v, std::string_view key)
{
    if (!v.is_object())
        fail(key, "must be an object");
    return v;
}

// Calls handler(key, value) for each member; the handler returns false for
// keys it does not know.
template <typename Handler>
void for_members(const Json &obj, std::string_view where, Handler &&handler)
{
    require_object(obj, where);
    for (const auto &[key, value] : obj.items())
        if (!handler(key, value))
            fail(std::string(where) + "." + key, "is not a known field");
}

ParamDistribution distribution_from(const Json &obj, std::string_view where)
{
    std::string kind;
    std::optional<double> value, lo, hi;
    for_members(obj, where, [&](const std::string &key, const Json &v) {
        if (key == "kind")
            kind = get_string(v, key);
        else if (key == "value")
            value = get_number(v, key);
        else if (key == "lo")
            lo = get_number(v, key);
        else if (key == "hi")
            hi = get_number(v, key);
        else
            return false;
        return true;
    });
    if (kind == "fixed" && value && !lo && !hi)
        return ParamDistribution::fixed(*value);
    if (kind == "uniform" && lo && hi && !value)
        return ParamDistribution::uniform(*lo, *hi);
    fail(where, "must be {kind: fixed, value} or {kind: uniform, lo, hi}");
}

void apply_estimator(const Json &obj, EstimatorConfig &e)
{
    for_members(obj, "estimator", [&](const std::string &key, const Json &v) {
        if (key == "num_paths")
            e.num_paths = get_unsigned(v, key);
        else if (key == "zero_pad_factor")
            e.zero_pad_factor = get_unsigned(v, key);
        else if (key == "min_delay")
            e.min_delay = get_optional_number(v, key);
        else if (key == "max_delay")
            e.max_delay = get_optional_number(v, key);
        else if (key == "min_separation")
            e.min_separation = get_optional_number(v, key);
        else if (key == "alpha_floor")
            e.alpha_floor = get_number(v, key);
        else if (key == "frequency_weighting")
            e.frequency_weighting = get_bool(v, key);
        else if (key == "refine_delays")
            e.refine_delays = get_bool(v, key);
        else if (key == "refine_sweeps")
            e.refine_sweeps = get_unsigned(v, key);
        else if (key == "fit_offset")
            e.fit_offset = get_bool(v, key);
        else if (key == "polish_exact")
            e.polish_exact = get_bool(v, key);
        else if (key == "alpha_max")
            e.alpha_max = get_number(v, key);
        else if (key == "polish_iterations")
            e.polish_iterations = get_unsigned(v, key);
        else
            return false;
        return true;
    });
}

void apply_qrange(const Json &obj, QRangeSearchConfig &q)
{
    for_members(obj, "qrange", [&](const std::string &key, const Json &v) {
        if (key == "d_min")
            q.d_min = get_optional_number(v, key);
        else if (key == "d_max")
            q.d_max = get_optional_number(v, key);
        else if (key == "coarse_step")
            q.coarse_step = get_number(v, key);
        else if (key == "refine_iters")
            q.refine_iters = get_unsigned(v, key);
        else if (key == "refine_candidates")
            q.refine_candidates = get_unsigned(v, key);
        else
            return false;
        return true;
    });
}

MeasurementGrid grid_from(const Json &obj, const MeasurementGrid &base)
{
    double f_b0 = base.f_b0(), tone_gap = base.tone_gap(), delta_f = base.delta_f();
    std::size_t num_freqs = base.size();
    for_members(obj, "grid", [&](const std::string &key, const Json &v) {
        if (key == "f_b0")
            f_b0 = get_number(v, key);
        else if (key == "tone_gap")
            tone_gap = get_number(v, key);
        else if (key == "delta_f")
            delta_f = get_number(v, key);
        else if (key == "num_freqs")
            num_freqs = get_unsigned(v, key);
        else
            return false;
        return true;
    });
    return MeasurementGrid(f_b0, tone_gap, delta_f, num_freqs);
}

LosAmplitudeMode los_from(const Json &obj, LosAmplitudeMode m)
{
    for_members(obj, "los_amplitude", [&](const std::string &key, const Json &v) {
        if (key == "kind")
        {
            const auto kind = get_string(v, key);
            if (kind == "normalized")
                m.kind = LosAmplitudeMode::Kind::Normalized;
            else if (kind == "free_space")
                m.kind = LosAmplitudeMode::Kind::FreeSpace;
            else
                fail(key, "must be normalized or free_space");
        }
        else if (key == "power")
            m.power = get_number(v, key);
        else if (key == "gain")
            m.gain = get_number(v, key);
        else
            return false;
        return true;
    });
    return m;
}

} // namespace

Json to_json(const ParamDistribution &d)
{
    if (d.kind == ParamDistribution::Kind::Fixed)
        return {{"kind", "fixed"}, {"value", d.lo}};
    return {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
}

Json to_json(const EstimatorConfig &e)
{
    return {{"num_paths", e.num_paths},
            {"zero_pad_factor", e.zero_pad_factor},
            {"min_delay", optional_number(e.min_delay)},
            {"max_delay", optional_number(e.max_delay)},
            {"min_separation", optional_number(e.min_separation)},
            {"alpha_floor", e.alpha_floor},
            {"frequency_weighting", e.frequency_weighting},
            {"refine_delays", e.refine_delays},
            {"refine_sweeps", e.refine_sweeps},
            {"fit_offset", e.fit_offset},
            {"polish_exact", e.polish_exact},
            {"alpha_max", e.alpha_max},
            {"polish_iterations", e.polish_iterations}};
}

Json to_json(const QRangeSearchConfig &q)
{
    return {{"d_min", optional_number(q.d_min)},
            {"d_max", optional_number(q.d_max)},
            {"coarse_step", q.coarse_step},
            {"refine_iters", q.refine_iters},
            {"refine_candidates", q.refine_candidates}};
}

Json to_json(const ExperimentConfig &cfg)
{
    Json j;
    j["grid"] = {{"f_b0", cfg.grid.f_b0()},
                 {"tone_gap", cfg.grid.tone_gap()},
                 {"delta_f", cfg.grid.delta_f()},
                 {"num_freqs", cfg.grid.size()}};
    j["snr_db"] = std::isinf(cfg.snr_db) ? Json(nullptr) : Json(cfg.snr_db);
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["alpha_dist"] = to_json(cfg.alpha_dist);
    j["tau_dist"] = to_json(cfg.tau_dist);
    j["theta_dist"] = to_json(cfg.theta_dist);
    j["paths_per_channel"] = cfg.paths_per_channel;
    j["scenario_kind"] = cfg.scenario_kind == ScenarioKind::Quad ? "quad" : "single_channel";
    j["los_amplitude"] = {
        {"kind", cfg.los_amplitude.kind == LosAmplitudeMode::Kind::FreeSpace ? "free_space" : "normalized"},
        {"power", cfg.los_amplitude.power},
        {"gain", cfg.los_amplitude.gain}};
    j["estimator"] = to_json(cfg.estimator);
    j["qrange"] = to_json(cfg.qrange);
    j["dq_target"] = cfg.dq_target;
    return j;
}

void apply_json(const Json &doc, ExperimentConfig &cfg)
{
    for_members(doc, "config", [&](const std::string &key, const Json &v) {
        if (key == "grid")
            cfg.grid = grid_from(v, cfg.grid);
        else if (key == "snr_db")
            cfg.snr_db = v.is_null() ? std::numeric_limits<double>::infinity() : get_number(v, key);
        else if (key == "trials")
            cfg.trials = get_unsigned(v, key);
        else if (key == "seed")
            cfg.seed = get_unsigned(v, key);
        else if (key == "alpha_dist")
            cfg.alpha_dist = distribution_from(v, key);
        else if (key == "tau_dist")
            cfg.tau_dist = distribution_from(v, key);
        else if (key == "theta_dist")
            cfg.theta_dist = distribution_from(v, key);
        else if (key == "paths_per_channel")
            cfg.paths_per_channel = get_unsigned(v, key);
        else if (key == "scenario_kind")
        {
            const auto kind = get_string(v, key);
            if (kind == "quad")
                cfg.scenario_kind = ScenarioKind::Quad;
            else if (kind == "single_channel")
                cfg.scenario_kind = ScenarioKind::SingleChannel;
            else
                fail(key, "must be single_channel or quad");
        }
        else if (key == "los_amplitude")
            cfg.los_amplitude = los_from(v, cfg.los_amplitude);
        else if (key == "estimator")
            apply_estimator(v, cfg.estimator);
        else if (key == "qrange")
            apply_qrange(v, cfg.qrange);
        else if (key == "dq_target")
            cfg.dq_target = get_number(v, key);
        else
            return false;
        return true;
    });
}

ParamDistribution parse_distribution(const std::string &text)
{
    std::string_view rest = text;
    std::string kind;
    if (rest.starts_with("fixed:"))
    {
        kind = "fixed";
        rest.remove_prefix(6);
    }
    else if (rest.starts_with("uniform:"))
    {
        kind = "uniform";
        rest.remove_prefix(8);
    }
    const auto colon = rest.find(':');
    try
    {
        if (colon == std::string_view::npos && kind != "uniform")
        {
            const auto v = parse_points(std::string(rest));
            if (v.size() == 1)
                return ParamDistribution::fixed(v[0]);
        }
        if (colon != std::string_view::npos && kind != "fixed")
        {
            const auto lo = parse_points(std::string(rest.substr(0, colon)));
            const auto hi = parse_points(std::string(rest.substr(colon + 1)));
            if (lo.size() == 1 && hi.size() == 1)
            {
                const auto d = ParamDistribution::uniform(lo[0], hi[0]);
                d.validate();
                return d;
            }
        }
    }
    catch (const std::invalid_argument &)
    {
    }
    throw std::invalid_argument("bad distribution '" + text + "': use fixed:V, uniform:LO:HI, V or LO:HI");
}

} // namespace rips::cli
