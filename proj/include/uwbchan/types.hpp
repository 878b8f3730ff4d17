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

#ifndef UWBCHAN_TYPES_HPP
#define UWBCHAN_TYPES_HPP

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace uwbchan
{

using cdouble = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0;

// Uniformly spaced frequency axis, both end points included.
class FrequencyGrid
{
public:
    FrequencyGrid(double start_hz, double stop_hz, std::size_t n_points)
        : start_hz_(start_hz), stop_hz_(stop_hz), n_points_(n_points)
    {
        if (!std::isfinite(start_hz) || !std::isfinite(stop_hz))
            throw ValidationError("FrequencyGrid: non-finite frequency bounds");
        if (n_points < 2)
            throw ValidationError("FrequencyGrid: at least 2 frequency points are required");
        if (!(stop_hz > start_hz))
            throw ValidationError("FrequencyGrid: frequency spacing must be strictly positive");
    }

    // 6 - 14 GHz, 8001 points, 1 MHz spacing.
    static FrequencyGrid nominal() { return {6.0e9, 14.0e9, 8001}; }

    double start_hz() const { return start_hz_; }
    double stop_hz() const { return stop_hz_; }
    std::size_t n_points() const { return n_points_; }
    double spacing_hz() const { return (stop_hz_ - start_hz_) / double(n_points_ - 1); }

    double frequency(std::size_t i) const
    {
        return start_hz_ + (stop_hz_ - start_hz_) * (double(i) / double(n_points_ - 1));
    }

    // Index of the grid point at f, if f lies on the grid (within 1e-6 of a step).
    std::optional<std::size_t> index_of(double f_hz) const
    {
        const double pos = (f_hz - start_hz_) / spacing_hz();
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) > 1e-6 || nearest < 0.0 || nearest > double(n_points_ - 1))
            return std::nullopt;
        return static_cast<std::size_t>(nearest);
    }

    bool operator==(const FrequencyGrid &) const = default;

private:
    double start_hz_;
    double stop_hz_;
    std::size_t n_points_;
};

// Position of one beam pair inside the rotation grid.
struct BeamIndex
{
    std::size_t tx = 0;
    std::size_t rx = 0;
    std::size_t coel = 0;

    auto operator<=>(const BeamIndex &) const = default;
};

// Rotation grid of the positioners, all values in degrees.
// Rx azimuth lives on the circle [0, 360); 360 is the same position as 0 and is stored once.
class AngularGrid
{
public:
    AngularGrid(std::vector<double> tx_az_deg, std::vector<double> rx_az_deg, std::vector<double> rx_coel_deg)
        : tx_az_(std::move(tx_az_deg)), rx_az_(std::move(rx_az_deg)), rx_coel_(std::move(rx_coel_deg))
    {
        check_axis(tx_az_, "tx_az_deg");
        check_axis(rx_az_, "rx_az_deg");
        check_axis(rx_coel_, "rx_coel_deg");
        if (rx_az_.front() < 0.0 || rx_az_.back() >= 360.0)
            throw ValidationError("AngularGrid: rx_az_deg values must lie in [0, 360)");
    }

    // Tx -60:10:60, Rx 0:10:350, co-elevation -20:10:20; 13 x 36 x 5 = 2340 beams.
    static AngularGrid nominal()
    {
        return {range(-60.0, 60.0, 10.0), range(0.0, 350.0, 10.0), range(-20.0, 20.0, 10.0)};
    }

    static std::vector<double> range(double first, double last, double step)
    {
        std::vector<double> v;
        const auto n = static_cast<std::size_t>(std::llround((last - first) / step)) + 1;
        v.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            v.push_back(first + step * double(i));
        return v;
    }

    const std::vector<double> &tx_az_deg() const { return tx_az_; }
    const std::vector<double> &rx_az_deg() const { return rx_az_; }
    const std::vector<double> &rx_coel_deg() const { return rx_coel_; }

    std::size_t n_tx() const { return tx_az_.size(); }
    std::size_t n_rx() const { return rx_az_.size(); }
    std::size_t n_coel() const { return rx_coel_.size(); }
    std::size_t n_beams() const { return n_tx() * n_rx() * n_coel(); }

    std::size_t flat_index(BeamIndex b) const { return (b.tx * n_rx() + b.rx) * n_coel() + b.coel; }

    bool operator==(const AngularGrid &) const = default;

private:
    static void check_axis(const std::vector<double> &v, const char *name)
    {
        if (v.empty())
            throw ValidationError(std::string("AngularGrid: ") + name + " is empty");
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (!std::isfinite(v[i]))
                throw ValidationError(std::string("AngularGrid: ") + name + " contains a non-finite value");
            if (i > 0 && !(v[i] > v[i - 1]))
                throw ValidationError(std::string("AngularGrid: ") + name + " must be strictly increasing");
        }
    }

    std::vector<double> tx_az_;
    std::vector<double> rx_az_;
    std::vector<double> rx_coel_;
};

// Complex transfer function samples of one link, row-major [tx_az][rx_az][rx_coel][f].
class FrequencyScanTensor
{
public:
    FrequencyScanTensor(FrequencyGrid grid, AngularGrid angles, std::vector<cdouble> values)
        : grid_(std::move(grid)), angles_(std::move(angles)), values_(std::move(values))
    {
        const std::size_t expected = angles_.n_beams() * grid_.n_points();
        if (values_.size() != expected)
            throw ValidationError("FrequencyScanTensor: expected " + std::to_string(expected) +
                                  " complex values, got " + std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
                throw ValidationError("FrequencyScanTensor: non-finite value at flat index " + std::to_string(i));
    }

    const FrequencyGrid &grid() const { return grid_; }
    const AngularGrid &angles() const { return angles_; }
    std::span<const cdouble> values() const { return values_; }

    std::span<const cdouble> beam(BeamIndex b) const
    {
        return std::span<const cdouble>(values_).subspan(angles_.flat_index(b) * grid_.n_points(), grid_.n_points());
    }

    // Hands the sample buffer to the caller, leaving this tensor empty.
    std::vector<cdouble> release_values() && { return std::move(values_); }

    bool operator==(const FrequencyScanTensor &) const = default;

private:
    FrequencyGrid grid_;
    AngularGrid angles_;
    std::vector<cdouble> values_;
};

// Over-the-air reference measurement H_OTA(f) at a known distance.
class CalibrationTrace
{
public:
    CalibrationTrace(FrequencyGrid grid, std::vector<cdouble> values, double d_ota_m)
        : grid_(std::move(grid)), values_(std::move(values)), d_ota_m_(d_ota_m)
    {
        if (values_.size() != grid_.n_points())
            throw ValidationError("CalibrationTrace: expected " + std::to_string(grid_.n_points()) +
                                  " complex values, got " + std::to_string(values_.size()));
        if (!(d_ota_m_ > 0.0) || !std::isfinite(d_ota_m_))
            throw ValidationError("CalibrationTrace: OTA distance must be positive");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
                throw ValidationError("CalibrationTrace: non-finite value at frequency index " + std::to_string(i));
    }

    // Unit response; dividing by it leaves a tensor unchanged.
    static CalibrationTrace identity(const FrequencyGrid &grid, double d_ota_m = 56.45)
    {
        return {grid, std::vector<cdouble>(grid.n_points(), cdouble(1.0, 0.0)), d_ota_m};
    }

    const FrequencyGrid &grid() const { return grid_; }
    std::span<const cdouble> values() const { return values_; }
    double d_ota_m() const { return d_ota_m_; }

    bool operator==(const CalibrationTrace &) const = default;

private:
    FrequencyGrid grid_;
    std::vector<cdouble> values_;
    double d_ota_m_;
};

enum class LosClass
{
    LoS,
    OLoS
};

inline std::string to_string(LosClass c) { return c == LosClass::LoS ? "LoS" : "OLoS"; }

inline LosClass parse_los_class(const std::string &s)
{
    if (s == "LoS")
        return LosClass::LoS;
    if (s == "OLoS")
        return LosClass::OLoS;
    throw ValidationError("unknown LoS class '" + s + "' (expected LoS or OLoS)");
}

struct LinkGeometry
{
    std::string rx_id;
    double distance_m = 0.0;
    LosClass los_class = LosClass::LoS;

    void validate() const
    {
        if (!(distance_m > 0.0) || !std::isfinite(distance_m))
            throw ValidationError("LinkGeometry '" + rx_id + "': distance must be positive");
    }

    bool operator==(const LinkGeometry &) const = default;
};

// The eleven receiver positions of the campaign (Rx1 line-of-sight, the rest obstructed).
inline std::vector<LinkGeometry> campaign_links()
{
    const double d[] = {65.1, 62.1, 103.5, 139.1, 143.6, 162.8, 201.4, 214.9, 336.3, 404.9, 436.1};
    std::vector<LinkGeometry> links;
    for (std::size_t i = 0; i < std::size(d); ++i)
        links.push_back({"Rx" + std::to_string(i + 1), d[i], i == 0 ? LosClass::LoS : LosClass::OLoS});
    return links;
}

class SubBand
{
public:
    SubBand(double f_lo_hz, double f_hi_hz, std::string label = {})
        : f_lo_(f_lo_hz), f_hi_(f_hi_hz), label_(std::move(label))
    {
        if (!(f_lo_ < f_hi_))
            throw ValidationError("SubBand: lower edge must be below upper edge");
        if (label_.empty())
            label_ = default_label(f_lo_, f_hi_);
    }

    // The whole span of a grid, labelled like the wideband table rows.
    static SubBand full(const FrequencyGrid &grid) { return {grid.start_hz(), grid.stop_hz(), "All Bands"}; }

    double f_lo_hz() const { return f_lo_; }
    double f_hi_hz() const { return f_hi_; }
    double center_hz() const { return 0.5 * (f_lo_ + f_hi_); }
    double width_hz() const { return f_hi_ - f_lo_; }
    const std::string &label() const { return label_; }

    bool operator==(const SubBand &) const = default;

    static std::string default_label(double lo, double hi)
    {
        auto ghz = [](double f) {
            std::string s = std::to_string(f / 1e9);
            s.erase(s.find_last_not_of('0') + 1);
            if (s.back() == '.')
                s.pop_back();
            return s;
        };
        return ghz(lo) + "-" + ghz(hi) + " GHz";
    }

private:
    double f_lo_;
    double f_hi_;
    std::string label_;
};

// "All Bands" followed by every whole 1-GHz band inside the grid span.
inline std::vector<SubBand> default_subbands(const FrequencyGrid &grid)
{
    std::vector<SubBand> bands{SubBand::full(grid)};
    for (double lo = std::ceil(grid.start_hz() / 1e9 - 1e-9) * 1e9; lo + 1e9 <= grid.stop_hz() * (1 + 1e-12); lo += 1e9)
        if (grid.index_of(lo) && grid.index_of(lo + 1e9))
            bands.emplace_back(lo, lo + 1e9);
    return bands;
}

// Parses "6-7,7-8,all" (GHz) into sub-bands; "all" is the full grid span.
inline std::vector<SubBand> parse_band_list(const std::string &list, const FrequencyGrid &grid)
{
    std::vector<SubBand> bands;
    std::size_t pos = 0;
    while (pos <= list.size())
    {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        const std::string item = list.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.empty())
            continue;
        if (item == "all")
        {
            bands.push_back(SubBand::full(grid));
            continue;
        }
        const std::size_t dash = item.find('-', 1);
        if (dash == std::string::npos)
            throw ValidationError("band '" + item + "' is not of the form <lo>-<hi> (GHz) or 'all'");
        try
        {
            bands.emplace_back(std::stod(item.substr(0, dash)) * 1e9, std::stod(item.substr(dash + 1)) * 1e9);
        }
        catch (const std::logic_error &)
        {
            throw ValidationError("band '" + item + "' has a non-numeric edge");
        }
    }
    if (bands.empty())
        throw ValidationError("empty band list");
    return bands;
}

// Gain of the elevation-summed virtual omni pattern over the horn, in dB versus frequency.
class AntennaElevationGainTable
{
public:
    struct Entry
    {
        double freq_hz;
        double correction_db;
        bool operator==(const Entry &) const = default;
    };

    explicit AntennaElevationGainTable(std::vector<Entry> entries) : entries_(std::move(entries))
    {
        if (entries_.empty())
            throw ValidationError("gain table is empty");
        for (std::size_t i = 0; i < entries_.size(); ++i)
        {
            if (!std::isfinite(entries_[i].freq_hz) || !std::isfinite(entries_[i].correction_db))
                throw ValidationError("gain table: non-finite entry at row " + std::to_string(i));
            if (i > 0 && !(entries_[i].freq_hz > entries_[i - 1].freq_hz))
                throw ValidationError("gain table: frequencies must be strictly increasing");
        }
    }

    // 3.7 dB at 6.5 GHz, 1.57 dB at 13.5 GHz.
    static AntennaElevationGainTable horn_default() { return AntennaElevationGainTable({{6.5e9, 3.7}, {13.5e9, 1.57}}); }

    // Flat table; used when no correction should be applied.
    static AntennaElevationGainTable zero() { return AntennaElevationGainTable({{0.0, 0.0}, {1e15, 0.0}}); }

    const std::vector<Entry> &entries() const { return entries_; }

    // Linear interpolation in dB; frequencies outside the table hull are refused.
    double correction_db(double f_hz) const
    {
        const double lo = entries_.front().freq_hz;
        const double hi = entries_.back().freq_hz;
        const double tol = 1e-9 * std::max(std::abs(lo), std::abs(hi));
        if (f_hz < lo - tol || f_hz > hi + tol)
            throw ValidationError("gain table does not cover " + std::to_string(f_hz) + " Hz (hull " +
                                  std::to_string(lo) + " - " + std::to_string(hi) + " Hz)");
        if (entries_.size() == 1 || f_hz <= lo)
            return entries_.front().correction_db;
        if (f_hz >= hi)
            return entries_.back().correction_db;
        const auto it = std::upper_bound(entries_.begin(), entries_.end(), f_hz,
                                         [](double f, const Entry &e) { return f < e.freq_hz; });
        const Entry &b = *it;
        const Entry &a = *(it - 1);
        const double t = (f_hz - a.freq_hz) / (b.freq_hz - a.freq_hz);
        return a.correction_db + t * (b.correction_db - a.correction_db);
    }

private:
    std::vector<Entry> entries_;
};

} // namespace uwbchan

#endif
