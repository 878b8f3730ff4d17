// SPDX-License-Identifier: Apache-2.0
//
// uwbchan - processing and statistical modelling of double-directional channel measurements
// Copyright (C) 2026 The uwbchan Authors
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

#ifndef UWBCHAN_IO_UTIL_HPP
#define UWBCHAN_IO_UTIL_HPP

#include "error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace uwbchan::io
{

namespace fs = std::filesystem;

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void append_double(std::string &out, double v)
{
    if (!std::isfinite(v))
    {
        out += format_double(v);
        return;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string &context)
{
    if (s == "nan")
        return std::nan("");
    if (s == "inf")
        return INFINITY;
    if (s == "-inf")
        return -INFINITY;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError(context + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true)
    {
        const std::size_t comma = line.find(',', pos);
        cells.emplace_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r')
        cells.back().pop_back();
    return cells;
}

inline std::vector<std::vector<std::string>> read_csv(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open '" + path.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line != "\r")
            rows.push_back(split_csv_line(line));
    return rows;
}

// Writes through a temporary sibling and renames it into place, so readers
// never observe a partially written file.
inline void write_bytes_atomic(const fs::path &path, std::span<const char> bytes)
{
    if (path.has_parent_path())
    {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write '" + path.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error("short write to '" + path.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

inline void write_file_atomic(const fs::path &path, std::string_view text)
{
    write_bytes_atomic(path, std::span<const char>(text.data(), text.size()));
}

inline std::string read_text_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Little-endian IEEE-754 float64 encoding of a run of doubles.
inline void encode_f64le(std::span<const double> values, std::vector<char> &out)
{
    const std::size_t offset = out.size();
    out.resize(offset + values.size() * 8);
    char *dst = out.data() + offset;
    if constexpr (std::endian::native == std::endian::little)
    {
        std::memcpy(dst, values.data(), values.size() * 8);
    }
    else
    {
        for (double v : values)
        {
            auto bits = std::bit_cast<std::uint64_t>(v);
            for (int b = 0; b < 8; ++b)
                *dst++ = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
    }
}

inline void decode_f64le(std::span<const char> bytes, std::span<double> out)
{
    if constexpr (std::endian::native == std::endian::little)
    {
        std::memcpy(out.data(), bytes.data(), out.size() * 8);
    }
    else
    {
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= std::uint64_t(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
            out[i] = std::bit_cast<double>(bits);
        }
    }
}

} // namespace uwbchan::io

#endif
