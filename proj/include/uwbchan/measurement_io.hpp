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

// Measurement-set directory format
// --------------------------------
// manifest.json  {"version":1,
//                 "frequency":{"start_hz":..,"stop_hz":..,"n_points":..},
//                 "angles":{"tx_az_deg":[..],"rx_az_deg":[..],"rx_coel_deg":[..]},
//                 "ota":{"file":"ota.bin","distance_m":56.45},
//                 "links":[{"rx_id":"Rx1","distance_m":65.1,"los_class":"LoS","file":"rx1.bin"},..]}
// *.bin          little-endian float64 (re, im) pairs, row-major [tx_az][rx_az][rx_coel][f];
//                ota.bin holds [f] only.

#ifndef UWBCHAN_MEASUREMENT_IO_HPP
#define UWBCHAN_MEASUREMENT_IO_HPP

#include "io_util.hpp"
#include "types.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace uwbchan
{

inline constexpr int measurement_format_version = 1;

struct LinkEntry
{
    LinkGeometry geometry;
    std::string file;
};

struct Manifest
{
    FrequencyGrid grid;
    AngularGrid angles;
    std::string ota_file = "ota.bin";
    double ota_distance_m = 56.45;
    std::vector<LinkEntry> links;
};

struct MeasurementSet
{
    Manifest manifest;
    CalibrationTrace ota;
    std::vector<FrequencyScanTensor> tensors; // one per manifest link, same order
};

namespace detail
{

template <typename T>
T manifest_field(const nlohmann::json &j, const std::string &file, const std::string &path)
{
    const nlohmann::json *node = &j;
    std::size_t pos = 0;
    while (pos <= path.size())
    {
        const std::size_t dot = std::min(path.find('.', pos), path.size());
        const std::string key = path.substr(pos, dot - pos);
        pos = dot + 1;
        if (!node->is_object() || !node->contains(key))
            throw ValidationError(file + ": missing field '" + path + "'");
        node = &(*node)[key];
    }
    try
    {
        return node->get<T>();
    }
    catch (const nlohmann::json::exception &)
    {
        throw ValidationError(file + ": field '" + path + "' has the wrong type");
    }
}

inline std::vector<cdouble> read_complex_payload(const std::filesystem::path &path, std::size_t expected_values,
                                                 const std::string &what)
{
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec)
        throw ValidationError(path.string() + ": cannot read payload for " + what);
    if (size % 16 != 0 || size / 16 != expected_values)
        throw ValidationError(path.string() + ": dimension mismatch for " + what + ": manifest declares " +
                              std::to_string(expected_values) + " complex values, payload holds " +
                              (size % 16 == 0 ? std::to_string(size / 16) : std::to_string(size) + " bytes"));
    std::vector<cdouble> values(expected_values);
    std::ifstream in(path, std::ios::binary);
    if constexpr (std::endian::native == std::endian::little)
    {
        // std::complex<double> is layout-compatible with double[2]
        in.read(reinterpret_cast<char *>(values.data()), static_cast<std::streamsize>(size));
        if (!in)
            throw ValidationError(path.string() + ": short read");
    }
    else
    {
        std::vector<char> bytes(size);
        in.read(bytes.data(), static_cast<std::streamsize>(size));
        if (!in)
            throw ValidationError(path.string() + ": short read");
        io::decode_f64le(bytes, std::span<double>(reinterpret_cast<double *>(values.data()), 2 * expected_values));
    }
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
            throw ValidationError(path.string() + ": non-finite value in " + what + " at flat index " +
                                  std::to_string(i));
    return values;
}

inline void write_complex_payload(const std::filesystem::path &path, std::span<const cdouble> values)
{
    std::vector<char> bytes;
    bytes.reserve(values.size() * 16);
    io::encode_f64le(std::span<const double>(reinterpret_cast<const double *>(values.data()), 2 * values.size()),
                     bytes);
    io::write_bytes_atomic(path, std::span<const char>(bytes));
}

} // namespace detail

inline Manifest read_manifest(const std::filesystem::path &dir)
{
    const auto path = dir / "manifest.json";
    const std::string file = path.string();
    if (!std::filesystem::exists(path))
        throw ValidationError(file + ": missing manifest");
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(io::read_text_file(path));
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ValidationError(file + ": malformed JSON: " + e.what());
    }
    using detail::manifest_field;
    const int version = manifest_field<int>(j, file, "version");
    if (version != measurement_format_version)
        throw ValidationError(file + ": unknown format version " + std::to_string(version));

    const auto n_points = manifest_field<long long>(j, file, "frequency.n_points");
    if (n_points < 2)
        throw ValidationError(file + ": field 'frequency.n_points' must be at least 2");

    auto wrap = [&](auto &&make, const char *field) {
        try
        {
            return make();
        }
        catch (const ValidationError &e)
        {
            throw ValidationError(file + ": field '" + field + "': " + e.what());
        }
    };
    FrequencyGrid grid = wrap(
        [&] {
            return FrequencyGrid(manifest_field<double>(j, file, "frequency.start_hz"),
                                 manifest_field<double>(j, file, "frequency.stop_hz"),
                                 static_cast<std::size_t>(n_points));
        },
        "frequency");
    AngularGrid angles = wrap(
        [&] {
            return AngularGrid(manifest_field<std::vector<double>>(j, file, "angles.tx_az_deg"),
                               manifest_field<std::vector<double>>(j, file, "angles.rx_az_deg"),
                               manifest_field<std::vector<double>>(j, file, "angles.rx_coel_deg"));
        },
        "angles");

    Manifest m{grid, angles, "ota.bin", 56.45, {}};
    m.ota_file = manifest_field<std::string>(j, file, "ota.file");
    m.ota_distance_m = manifest_field<double>(j, file, "ota.distance_m");
    if (!(m.ota_distance_m > 0.0))
        throw ValidationError(file + ": field 'ota.distance_m' must be positive");

    if (!j.contains("links") || !j["links"].is_array())
        throw ValidationError(file + ": missing field 'links'");
    for (std::size_t i = 0; i < j["links"].size(); ++i)
    {
        const auto &l = j["links"][i];
        const std::string prefix = "links[" + std::to_string(i) + "].";
        LinkEntry e;
        e.geometry.rx_id = manifest_field<std::string>(l, file, "rx_id");
        e.geometry.distance_m = manifest_field<double>(l, file, "distance_m");
        e.file = manifest_field<std::string>(l, file, "file");
        wrap([&] { e.geometry.los_class = parse_los_class(manifest_field<std::string>(l, file, "los_class")); return 0; },
             (prefix + "los_class").c_str());
        wrap([&] { e.geometry.validate(); return 0; }, (prefix + "distance_m").c_str());
        m.links.push_back(std::move(e));
    }
    return m;
}

inline nlohmann::json manifest_to_json(const Manifest &m)
{
    nlohmann::json j;
    j["version"] = measurement_format_version;
    j["frequency"] = {{"start_hz", m.grid.start_hz()}, {"stop_hz", m.grid.stop_hz()}, {"n_points", m.grid.n_points()}};
    j["angles"] = {{"tx_az_deg", m.angles.tx_az_deg()},
                   {"rx_az_deg", m.angles.rx_az_deg()},
                   {"rx_coel_deg", m.angles.rx_coel_deg()}};
    j["ota"] = {{"file", m.ota_file}, {"distance_m", m.ota_distance_m}};
    j["links"] = nlohmann::json::array();
    for (const auto &l : m.links)
        j["links"].push_back({{"rx_id", l.geometry.rx_id},
                              {"distance_m", l.geometry.distance_m},
                              {"los_class", to_string(l.geometry.los_class)},
                              {"file", l.file}});
    return j;
}

inline void write_manifest(const std::filesystem::path &dir, const Manifest &m)
{
    io::write_file_atomic(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

inline CalibrationTrace load_calibration(const std::filesystem::path &dir, const Manifest &m)
{
    auto values = detail::read_complex_payload(dir / m.ota_file, m.grid.n_points(), "OTA calibration");
    return CalibrationTrace(m.grid, std::move(values), m.ota_distance_m);
}

inline FrequencyScanTensor load_link_tensor(const std::filesystem::path &dir, const Manifest &m, std::size_t link)
{
    const auto &entry = m.links.at(link);
    auto values = detail::read_complex_payload(dir / entry.file, m.angles.n_beams() * m.grid.n_points(),
                                               "link '" + entry.geometry.rx_id + "'");
    return FrequencyScanTensor(m.grid, m.angles, std::move(values));
}

inline void write_calibration(const std::filesystem::path &dir, const Manifest &m, const CalibrationTrace &ota)
{
    if (!(ota.grid() == m.grid))
        throw ValidationError("OTA trace grid differs from the manifest grid");
    detail::write_complex_payload(dir / m.ota_file, ota.values());
}

inline void write_link_tensor(const std::filesystem::path &dir, const Manifest &m, std::size_t link,
                              const FrequencyScanTensor &t)
{
    if (!(t.grid() == m.grid) || !(t.angles() == m.angles))
        throw ValidationError("tensor for link '" + m.links.at(link).geometry.rx_id + "' does not match the manifest grids");
    detail::write_complex_payload(dir / m.links.at(link).file, t.values());
}

inline MeasurementSet load_measurement_set(const std::filesystem::path &dir)
{
    Manifest m = read_manifest(dir);
    CalibrationTrace ota = load_calibration(dir, m);
    std::vector<FrequencyScanTensor> tensors;
    tensors.reserve(m.links.size());
    for (std::size_t i = 0; i < m.links.size(); ++i)
        tensors.push_back(load_link_tensor(dir, m, i));
    return {std::move(m), std::move(ota), std::move(tensors)};
}

inline void save_measurement_set(const std::filesystem::path &dir, const MeasurementSet &set)
{
    if (set.tensors.size() != set.manifest.links.size())
        throw ValidationError("measurement set has " + std::to_string(set.tensors.size()) + " tensors for " +
                              std::to_string(set.manifest.links.size()) + " links");
    write_calibration(dir, set.manifest, set.ota);
    for (std::size_t i = 0; i < set.tensors.size(); ++i)
        write_link_tensor(dir, set.manifest, i, set.tensors[i]);
    write_manifest(dir, set.manifest);
}

} // namespace uwbchan

#endif
