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

#ifndef RIPS_CLI_CONFIG_IO_HPP
#define RIPS_CLI_CONFIG_IO_HPP

#include <string>

#include <json.hpp>

#include "rips/montecarlo.hpp"

// JSON mapping of ExperimentConfig. Keys mirror the struct fields one to one;
// optional values and an infinite snr_db (noise off) are written as null.

namespace rips::cli
{

using Json = nlohmann::ordered_json;

Json to_json(const ParamDistribution &d);
Json to_json(const EstimatorConfig &e);
Json to_json(const QRangeSearchConfig &q);
Json to_json(const ExperimentConfig &cfg);

/// Overwrites the fields present in `doc`, leaving the rest untouched.
/// Throws std::invalid_argument on unknown keys or wrongly typed values.
void apply_json(const Json &doc, ExperimentConfig &cfg);

/// "fixed:V", "uniform:LO:HI", a bare "V" (fixed) or "LO:HI" (uniform).
/// Throws std::invalid_argument on anything else.
ParamDistribution parse_distribution(const std::string &text);

} // namespace rips::cli

#endif
