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

#include "rips/cli/output.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "rips/cli/config_io.hpp"

namespace rips::cli
{
namespace
{

std::string format_integer(double x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(x));
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view s)
{
    while (!s.empty() && s.front() == ' ')
        s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

// lo + i*step rounded to 12 significant digits, so 0.05:1:0.05 yields 0.15
// rather than 0.15000000000000002.
double snap(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
    double v = x;
    std::from_chars(buf, res.ptr, v);
    return v;
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void Table::add(std::string name, std::vector<double> values, bool is_integer)
{
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
    integer.push_back(is_integer);
}

std::size_t Table::rows() const { return columns.empty() ? 0 : columns.front().size(); }

std::string render_csv(const Table &table)
{
    std::string s;
    for (std::size_t c = 0; c < table.names.size(); ++c)
    {
        if (c > 0)
            s += ',';
        s += table.names[c];
    }
    s += '\n';
    for (std::size_t r = 0; r < table.rows(); ++r)
    {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
        {
            if (c > 0)
                s += ',';
            const double v = table.columns[c][r];
            s += table.integer[c] ? format_integer(v) : format_double(v);
        }
        s += '\n';
    }
    return s;
}

std::string render_json(const Table &table, const std::vector<std::pair<std::string, double>> &summary)
{
    Json doc;
    Json &cols = doc["columns"] = Json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c)
    {
        Json arr = Json::array();
        for (double v : table.columns[c])
            arr.push_back(table.integer[c] ? Json(static_cast<long long>(v)) : Json(v));
        cols[table.names[c]] = std::move(arr);
    }
    Json &sum = doc["summary"] = Json::object();
    for (const auto &[k, v] : summary)
        sum[k] = v;
    return doc.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path &path, std::string_view content)
{
    static std::atomic<unsigned> counter{0};
    auto tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f)
        {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
    {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw IoError("cannot rename onto '" + path.string() + "': " + ec.message());
    }
}

std::vector<double> parse_points(const std::string &text)
{
    std::vector<double> out;
    if (text.find(':') != std::string::npos)
    {
        std::vector<std::string_view> parts;
        std::string_view rest = text;
        for (auto colon = rest.find(':'); colon != std::string_view::npos; colon = rest.find(':'))
        {
            parts.push_back(rest.substr(0, colon));
            rest.remove_prefix(colon + 1);
        }
        parts.push_back(rest);
        if (parts.size() != 3)
            throw std::invalid_argument("range must be lo:hi:step, got '" + text + "'");
        const double lo = parse_number(parts[0]);
        const double hi = parse_number(parts[1]);
        const double step = parse_number(parts[2]);
        if (!(step > 0.0) || !(lo <= hi))
            throw std::invalid_argument("range needs lo <= hi and step > 0, got '" + text + "'");
        const double span = std::floor((hi - lo) / step + 0.5);
        if (!(span < 1e6))
            throw std::invalid_argument("range has too many points: '" + text + "'");
        for (std::size_t i = 0; i <= static_cast<std::size_t>(span); ++i)
            out.push_back(i == 0 ? lo : snap(lo + static_cast<double>(i) * step));
        return out;
    }
    std::string_view rest = text;
    while (true)
    {
        const auto comma = rest.find(',');
        out.push_back(parse_number(rest.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace rips::cli
