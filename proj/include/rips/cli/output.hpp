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

#ifndef RIPS_CLI_OUTPUT_HPP
#define RIPS_CLI_OUTPUT_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rips::cli
{

class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// Column-major result table. Integer columns are printed without a decimal
/// point.
struct Table
{
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<bool> integer;

    void add(std::string name, std::vector<double> values, bool is_integer = false);
    std::size_t rows() const;
};

/// Header row plus one line per row, '\n' line endings.
std::string render_csv(const Table &table);

/// {"columns": {name: [...]}, "summary": {...}} with summary entries as given.
std::string render_json(const Table &table, const std::vector<std::pair<std::string, double>> &summary);

/// Writes to a temporary file in the target directory, then renames it over
/// `path`. Throws IoError on failure.
void write_atomic(const std::filesystem::path &path, std::string_view content);

/// "lo:hi:step" (inclusive of hi within half a step) or a comma-separated
/// list. Throws std::invalid_argument on malformed input or an empty result.
std::vector<double> parse_points(const std::string &text);

} // namespace rips::cli

#endif
