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

#include "rips/cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rips/cli/config_io.hpp"
#include "rips/cli/output.hpp"
#include "rips/montecarlo.hpp"

#ifndef RIPS_VERSION
#define RIPS_VERSION "unknown"
#endif

namespace rips::cli
{
namespace
{

using Summary = std::vector<std::pair<std::string, double>>;

struct CommonOptions
{
    std::uint64_t seed = 0;
    double snr_db = 30.0;
    bool no_noise = false;
    std::string out;
    std::string format = "csv";
    std::string config;
    unsigned threads = 0;
    std::size_t trials = 0;
    std::size_t paths = 1;
    std::string los = "normalized";
    std::string alpha_dist, tau_dist, theta_dist;

    CLI::Option *seed_opt = nullptr;
    CLI::Option *snr_opt = nullptr;
    CLI::Option *format_opt = nullptr;
    CLI::Option *paths_opt = nullptr;
    CLI::Option *los_opt = nullptr;
    CLI::Option *trials_opt = nullptr;
    CLI::Option *alpha_dist_opt = nullptr;
    CLI::Option *tau_dist_opt = nullptr;
    CLI::Option *theta_dist_opt = nullptr;
};

struct DemoOptions
{
    double alpha = 0.3, tau = 20e-9, theta = pi / 4;
    CLI::Option *alpha_opt = nullptr, *tau_opt = nullptr, *theta_opt = nullptr;
};

struct SweepOptions
{
    std::string param = "alpha";
    std::string points;
    CLI::Option *param_opt = nullptr, *points_opt = nullptr;
};

struct QRangeOptions
{
    double dq = 75.0;
    CLI::Option *dq_opt = nullptr;
};

void add_common(CLI::App &cmd, CommonOptions &o, bool experiment)
{
    o.seed_opt = cmd.add_option("--seed", o.seed, "RNG seed (default 0)");
    o.snr_opt = cmd.add_option("--snr-db", o.snr_db, "SNR of the direct path, dB (default 30)");
    cmd.add_flag("--no-noise", o.no_noise, "Disable receiver noise");
    cmd.add_option("--out", o.out, "Result file (default stdout); a .manifest.json sidecar is written next to it");
    o.format_opt = cmd.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("--config", o.config, "JSON config document or a previous run's manifest");
    cmd.add_option("--threads", o.threads, "Worker threads, 0 = all cores");
    o.paths_opt = cmd.add_option("--paths", o.paths, "Reflected paths per channel")->check(CLI::PositiveNumber);
    o.los_opt = cmd.add_option("--los", o.los, "LOS amplitude: normalized or free_space")
                    ->check(CLI::IsMember({"normalized", "free_space"}));
    if (!experiment)
        return;
    o.trials_opt = cmd.add_option("--trials", o.trials, "Monte Carlo trials (per sweep point)");
    o.alpha_dist_opt =
        cmd.add_option("--alpha-dist", o.alpha_dist, "alpha distribution: V, LO:HI, fixed:V or uniform:LO:HI");
    o.tau_dist_opt = cmd.add_option("--tau-dist", o.tau_dist, "tau distribution, s");
    o.theta_dist_opt = cmd.add_option("--theta-dist", o.theta_dist, "theta distribution, rad");
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read '" + path + "'");
    return s.str();
}

// The --config document, or an empty object without one.
Json read_document(const CommonOptions &o)
{
    if (o.config.empty())
        return Json::object();
    Json doc;
    try
    {
        doc = Json::parse(read_file(o.config));
    }
    catch (const Json::parse_error &e)
    {
        throw std::invalid_argument("config '" + o.config + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("config '" + o.config + "' must be a JSON object");
    return doc;
}

bool is_manifest(const Json &doc) { return doc.contains("config"); }

// A manifest carries the config under "config" next to command-level
// settings; a plain document is the config itself.
void apply_document(const Json &doc, const std::string &command, ExperimentConfig &cfg)
{
    if (!is_manifest(doc))
    {
        apply_json(doc, cfg);
        return;
    }
    const auto owner = doc.value("command", std::string("?"));
    if (owner != command)
        throw std::invalid_argument("manifest belongs to command '" + owner + "', not '" + command + "'");
    apply_json(doc["config"], cfg);
}

void apply_common(const CommonOptions &o, const Json &doc, ExperimentConfig &cfg, std::string &format)
{
    if (is_manifest(doc) && doc.contains("format") && doc["format"].is_string())
        format = doc["format"].get<std::string>();
    if (o.format_opt->count())
        format = o.format;
    if (o.seed_opt->count())
        cfg.seed = o.seed;
    if (o.snr_opt->count())
        cfg.snr_db = o.snr_db;
    if (o.no_noise)
        cfg.snr_db = std::numeric_limits<double>::infinity();
    if (o.paths_opt->count())
        cfg.paths_per_channel = o.paths;
    if (o.los_opt->count())
        cfg.los_amplitude.kind =
            o.los == "free_space" ? LosAmplitudeMode::Kind::FreeSpace : LosAmplitudeMode::Kind::Normalized;
    if (o.trials_opt && o.trials_opt->count())
        cfg.trials = o.trials;
    if (o.alpha_dist_opt && o.alpha_dist_opt->count())
        cfg.alpha_dist = parse_distribution(o.alpha_dist);
    if (o.tau_dist_opt && o.tau_dist_opt->count())
        cfg.tau_dist = parse_distribution(o.tau_dist);
    if (o.theta_dist_opt && o.theta_dist_opt->count())
        cfg.theta_dist = parse_distribution(o.theta_dist);
}

void emit(const CommonOptions &o, const std::string &command, const std::string &format, const ExperimentConfig &cfg,
          const Table &table, const Summary &summary, const Json &extra, std::chrono::steady_clock::time_point started,
          std::ostream &out, std::ostream &err)
{
    const std::string body = format == "json" ? render_json(table, summary) : render_csv(table);
    if (o.out.empty())
    {
        out << body;
        out.flush();
    }
    else
    {
        write_atomic(o.out, body);
        Json manifest;
        manifest["command"] = command;
        manifest["version"] = RIPS_VERSION;
        manifest["seed"] = cfg.seed;
        manifest["format"] = format;
        manifest["threads"] = o.threads;
        manifest["config"] = to_json(cfg);
        for (const auto &[key, value] : extra.items())
            manifest[key] = value;
        manifest["outputs"] = Json::array({o.out});
        manifest["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_atomic(o.out + ".manifest.json", manifest.dump(2) + "\n");
    }
    std::ostream &report = o.out.empty() ? err : out;
    for (const auto &[key, value] : summary)
        report << key << '=' << format_double(value) << '\n';
}

void run_demo(const CommonOptions &o, const DemoOptions &d, std::ostream &out, std::ostream &err)
{
    const auto started = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.trials = 1;
    cfg.alpha_dist = ParamDistribution::fixed(0.3);
    cfg.tau_dist = ParamDistribution::fixed(20e-9);
    cfg.theta_dist = ParamDistribution::fixed(pi / 4);
    const Json doc = read_document(o);
    apply_document(doc, "demo-correct", cfg);
    std::string format = "csv";
    apply_common(o, doc, cfg, format);
    if (d.alpha_opt->count())
        cfg.alpha_dist = ParamDistribution::fixed(d.alpha);
    if (d.tau_opt->count())
        cfg.tau_dist = ParamDistribution::fixed(d.tau);
    if (d.theta_opt->count())
        cfg.theta_dist = ParamDistribution::fixed(d.theta);
    cfg.scenario_kind = ScenarioKind::SingleChannel;
    cfg.validate();

    const auto ex = run_correction_example(cfg);
    Table t;
    std::vector<double> k(ex.frequencies.size());
    for (std::size_t i = 0; i < k.size(); ++i)
        k[i] = static_cast<double>(i);
    t.add("k", std::move(k), true);
    t.add("f_hz", ex.frequencies);
    t.add("phase_error_true_rad", ex.error_before);
    t.add("phase_error_corrected_rad", ex.error_after);
    emit(o, "demo-correct", format, cfg, t,
         {{"max_abs_before_rad", ex.max_abs_before}, {"max_abs_after_rad", ex.max_abs_after}}, Json::object(),
         started, out, err);
}

void run_sweep(const CommonOptions &o, const SweepOptions &s, std::ostream &out, std::ostream &err)
{
    const auto started = std::chrono::steady_clock::now();
    const Json doc = read_document(o);

    std::string param = "alpha";
    std::vector<double> points;
    if (is_manifest(doc) && doc.contains("sweep"))
    {
        const auto &sw = doc["sweep"];
        if (!sw.is_object() || !sw.contains("param") || !sw["param"].is_string() || !sw.contains("points") ||
            !sw["points"].is_array())
            throw std::invalid_argument("manifest 'sweep' must hold param and points");
        param = sw["param"].get<std::string>();
        for (const auto &p : sw["points"])
        {
            if (!p.is_number())
                throw std::invalid_argument("manifest sweep points must be numbers");
            points.push_back(p.get<double>());
        }
    }
    if (s.param_opt->count() && s.param != param)
    {
        param = s.param;
        points.clear();
    }
    if (param != "alpha" && param != "tau")
        throw std::invalid_argument("--param must be alpha or tau, got '" + param + "'");
    if (s.points_opt->count())
        points = parse_points(s.points);
    else if (points.empty())
        points = parse_points(param == "alpha" ? "0.05:1.0:0.05" : "5e-9:50e-9:5e-9");

    // a tau sweep draws alpha from U(0.1, 0.4) unless told otherwise
    ExperimentConfig cfg;
    if (param == "tau")
        cfg.alpha_dist = ParamDistribution::uniform(0.1, 0.4);
    apply_document(doc, "sweep", cfg);
    std::string format = "csv";
    apply_common(o, doc, cfg, format);
    cfg.scenario_kind = ScenarioKind::SingleChannel;
    cfg.validate();

    const auto res = run_phase_sweep(cfg, param == "alpha" ? SweepParam::Alpha : SweepParam::Tau, points, o.threads);
    Table t;
    t.add("sweep_value", res.sweep_values);
    t.add("rmse_free_rad", res.rmse_free);
    t.add("rmse_distorted_rad", res.rmse_distorted);
    t.add("rmse_corrected_rad", res.rmse_corrected);
    t.add("trials", std::vector<double>(res.sweep_values.size(), static_cast<double>(res.trials_per_point)), true);
    Json extra;
    extra["sweep"] = {{"param", param}, {"points", points}};
    emit(o, "sweep", format, cfg, t, {}, extra, started, out, err);
}

void run_qrange(const CommonOptions &o, const QRangeOptions &q, std::ostream &out, std::ostream &err)
{
    const auto started = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.tau_dist = ParamDistribution::uniform(10e-9, 50e-9);
    const Json doc = read_document(o);
    apply_document(doc, "qrange-cdf", cfg);
    std::string format = "csv";
    apply_common(o, doc, cfg, format);
    if (q.dq_opt->count())
        cfg.dq_target = q.dq;
    cfg.scenario_kind = ScenarioKind::Quad;
    cfg.validate();

    const auto res = run_qrange_cdf(cfg, o.threads);
    Table t;
    t.add("error_m_distorted", res.errors_distorted);
    t.add("error_m_corrected", res.errors_corrected);
    const auto &p = res.percentiles;
    emit(o, "qrange-cdf", format, cfg, t,
         {{"median_m_distorted", p.median_distorted},
          {"p95_m_distorted", p.p95_distorted},
          {"median_m_corrected", p.median_corrected},
          {"p95_m_corrected", p.p95_corrected}},
         Json::object(), started, out, err);
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"rips-sim: multipath error correction for radio interferometric ranging"};
    app.set_version_flag("--version", RIPS_VERSION);
    app.require_subcommand(1);

    CommonOptions demo_common, sweep_common, qrange_common;
    DemoOptions demo;
    SweepOptions sweep;
    QRangeOptions qrange;

    auto *demo_cmd = app.add_subcommand("demo-correct", "Correct one single-channel example");
    add_common(*demo_cmd, demo_common, false);
    demo.alpha_opt = demo_cmd->add_option("--alpha", demo.alpha, "Reflection amplitude ratio (default 0.3)");
    demo.tau_opt = demo_cmd->add_option("--tau", demo.tau, "Delay difference, s (default 20e-9)");
    demo.theta_opt = demo_cmd->add_option("--theta", demo.theta, "Reflection phase, rad (default pi/4)");

    auto *sweep_cmd = app.add_subcommand("sweep", "Phase RMSE sweep over alpha or tau");
    add_common(*sweep_cmd, sweep_common, true);
    sweep.param_opt = sweep_cmd->add_option("--param", sweep.param, "alpha or tau");
    sweep.points_opt = sweep_cmd->add_option("--points", sweep.points, "lo:hi:step or a comma list");

    auto *qrange_cmd = app.add_subcommand("qrange-cdf", "q-range error distribution over four-channel trials");
    add_common(*qrange_cmd, qrange_common, true);
    qrange.dq_opt = qrange_cmd->add_option("--dq", qrange.dq, "True q-range, m (default 75)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    try
    {
        if (demo_cmd->parsed())
            run_demo(demo_common, demo, out, err);
        else if (sweep_cmd->parsed())
            run_sweep(sweep_common, sweep, out, err);
        else
            run_qrange(qrange_common, qrange, out, err);
        return exit_ok;
    }
    catch (const IoError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
    catch (const EstimationError &e)
    {
        err << "estimation failed: " << e.what() << '\n';
        return exit_estimation;
    }
    catch (const std::invalid_argument &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const std::exception &e)
    {
        err << "internal error: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace rips::cli
