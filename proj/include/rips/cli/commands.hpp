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

#ifndef RIPS_CLI_COMMANDS_HPP
#define RIPS_CLI_COMMANDS_HPP

#include <ostream>

// Front end of the rips-sim tool: demo-correct, sweep and qrange-cdf.

namespace rips::cli
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
    exit_io = 3,
    exit_estimation = 4
};

/// Parses argv and runs one command. Results go to --out or `out`;
/// diagnostics and summaries go to `err` (summaries to `out` when --out
/// names a file). Never throws.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace rips::cli

#endif
