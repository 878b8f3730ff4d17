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

#ifndef UWBCHAN_PDP_HPP
#define UWBCHAN_PDP_HPP

#include "types.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uwbchan
{

enum class Window
{
    Rectangular,
    Hann
};

inline std::string to_string(Window w) { return w == Window::Hann ? "hann" : "rect"; }

inline Window parse_window(const std::string &s)
{
    if (s == "hann")
        return Window::Hann;
    if (s == "rect" || s == "rectangular")
        return Window::Rectangular;
    throw ValidationError("unknown window '" + s + "' (expected hann or rect)");
}

struct PdpOptions
{
    Window window = Window::Hann;
    unsigned oversample_factor = 10;
    double gate_delay_s = 966.67e-9; // 290 m excess run length
    double threshold_below_peak_db = 22.0;

    void validate() const
    {
        if (oversample_factor < 1)
            throw ValidationError("oversample factor must be at least 1");
        if (!(gate_delay_s > 0.0))
            throw ValidationError("gate delay must be positive");
        if (!(threshold_below_peak_db > 0.0))
            throw ValidationError("threshold below peak must be positive");
    }
};

struct PowerDelayProfile
{
    double delay_step_s = 0.0; // bin k sits at k * delay_step_s
    std::vector<double> powers;
    SubBand band{0.0, 1.0};
    std::optional<BeamIndex> beam;
    bool gated = false;
    std::vector<bool> kept_mask; // all true until gated

    std::size_t size() const { return powers.size(); }
    double delay(std::size_t k) const { return double(k) * delay_step_s; }
    double kept_power(std::size_t k) const { return kept_mask[k] ? powers[k] : 0.0; }

    bool all_excluded() const { return std::none_of(kept_mask.begin(), kept_mask.end(), [](bool b) { return b; }); }

    double peak_power() const { return powers.empty() ? 0.0 : *std::max_element(powers.begin(), powers.end()); }

    // Sum of kept bins in ascending delay order.
    double kept_total() const
    {
        double sum = 0.0;
        for (std::size_t k = 0; k < powers.size(); ++k)
            if (kept_mask[k])
                sum += powers[k];
        return sum;
    }
};

// H = H_meas / H_OTA at every beam and frequency.
inline FrequencyScanTensor calibrate(FrequencyScanTensor h_meas, const CalibrationTrace &h_ota)
{
    if (!(h_meas.grid() == h_ota.grid()))
        throw ValidationError("calibrate: measurement and OTA frequency grids differ");
    const auto ota = h_ota.values();
    double max_abs = 0.0;
    for (const auto &v : ota)
        max_abs = std::max(max_abs, std::abs(v));
    const double eps = 1e-12 * max_abs;
    for (std::size_t i = 0; i < ota.size(); ++i)
        if (!(std::abs(ota[i]) > eps))
            throw ValidationError("calibrate: |H_OTA| below 1e-12 of its maximum at " +
                                  std::to_string(h_ota.grid().frequency(i)) + " Hz (index " + std::to_string(i) + ")");

    FrequencyGrid grid = h_meas.grid();
    AngularGrid angles = h_meas.angles();
    std::vector<cdouble> values = std::move(h_meas).release_values();
    const std::size_t nf = grid.n_points();
    for (std::size_t off = 0; off < values.size(); off += nf)
        for (std::size_t i = 0; i < nf; ++i)
            values[off + i] /= ota[i];
    return FrequencyScanTensor(std::move(grid), std::move(angles), std::move(values));
}

// Grid indices [first, last] covering the band; both edges must be grid points.
inline std::pair<std::size_t, std::size_t> subband_indices(const FrequencyGrid &grid, const SubBand &band)
{
    const auto lo = grid.index_of(band.f_lo_hz());
    const auto hi = grid.index_of(band.f_hi_hz());
    if (!lo || !hi)
        throw ValidationError("band " + band.label() + ": edge is not on the frequency grid or outside its span");
    return {*lo, *hi};
}

inline FrequencyGrid subband_grid(const FrequencyGrid &grid, const SubBand &band)
{
    const auto [lo, hi] = subband_indices(grid, band);
    return FrequencyGrid(grid.frequency(lo), grid.frequency(hi), hi - lo + 1);
}

inline FrequencyScanTensor extract_subband(const FrequencyScanTensor &h, const SubBand &band)
{
    const auto [lo, hi] = subband_indices(h.grid(), band);
    const std::size_t n = hi - lo + 1;
    const std::size_t nf = h.grid().n_points();
    const auto src = h.values();
    std::vector<cdouble> out;
    out.reserve(h.angles().n_beams() * n);
    for (std::size_t off = 0; off < src.size(); off += nf)
        out.insert(out.end(), src.begin() + off + lo, src.begin() + off + hi + 1);
    return FrequencyScanTensor(subband_grid(h.grid(), band), h.angles(), std::move(out));
}

// Window samples scaled so that sum(w^2) == n.
inline std::vector<double> window_samples(Window window, std::size_t n)
{
    std::vector<double> w(n, 1.0);
    if (window == Window::Hann && n > 1)
    {
        double energy = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(i) / double(n - 1)));
            energy += w[i] * w[i];
        }
        const double scale = std::sqrt(double(n) / energy);
        for (auto &v : w)
            v *= scale;
    }
    return w;
}

namespace detail
{

// Backward (e^{+j}) DFT plans, one per length. FFTW's planner is not thread safe,
// execution on distinct buffers is. Estimate-mode plans keep results reproducible run to run.
class InverseDftPlans
{
public:
    static InverseDftPlans &instance()
    {
        static InverseDftPlans plans;
        return plans;
    }

    fftw_plan get(std::size_t n)
    {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end())
            return it->second;
        std::vector<cdouble> a(n), b(n);
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex *>(a.data()),
                                       reinterpret_cast<fftw_complex *>(b.data()), FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p)
            throw NumericalError("FFTW could not plan a transform of length " + std::to_string(n));
        plans_.emplace(n, p);
        return p;
    }

    InverseDftPlans(const InverseDftPlans &) = delete;
    InverseDftPlans &operator=(const InverseDftPlans &) = delete;

    ~InverseDftPlans()
    {
        for (auto &[n, p] : plans_)
            fftw_destroy_plan(p);
    }

private:
    InverseDftPlans() = default;
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

} // namespace detail

// Windowed, zero-padded inverse DFT of one beam's transfer function.
//
// The padded length is M = L * n (L = oversample factor). With the 1/M inverse
// convention, sum_k |h[k]|^2 = mean_f |H w|^2 / L, so powers are scaled by L to
// make the profile's total equal mean_f |H(f) w(f)|^2 for every L.
// The delay step is 1 / (M * df).
inline PowerDelayProfile compute_pdp(std::span<const cdouble> h, const FrequencyGrid &band_grid, const PdpOptions &opts)
{
    opts.validate();
    const std::size_t n = h.size();
    if (n < 2)
        throw ValidationError("compute_pdp: at least 2 frequency points are required");
    if (n != band_grid.n_points())
        throw ValidationError("compute_pdp: transfer function length does not match its frequency grid");

    const std::size_t L = opts.oversample_factor;
    const std::size_t m = L * n;

    thread_local std::vector<cdouble> in, out;
    thread_local std::map<std::pair<Window, std::size_t>, std::vector<double>> windows;
    auto win_it = windows.find({opts.window, n});
    if (win_it == windows.end())
        win_it = windows.emplace(std::pair{opts.window, n}, window_samples(opts.window, n)).first;
    const std::vector<double> &win = win_it->second;
    in.assign(m, cdouble(0.0, 0.0));
    out.resize(m);
    for (std::size_t i = 0; i < n; ++i)
        in[i] = h[i] * win[i];

    fftw_plan plan = detail::InverseDftPlans::instance().get(m);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(in.data()), reinterpret_cast<fftw_complex *>(out.data()));

    PowerDelayProfile pdp;
    pdp.delay_step_s = 1.0 / (double(m) * band_grid.spacing_hz());
    pdp.band = SubBand(band_grid.start_hz(), band_grid.stop_hz());
    pdp.powers.resize(m);
    // |FFTW output / M|^2 * L
    const double scale = double(L) / (double(m) * double(m));
    for (std::size_t k = 0; k < m; ++k)
        pdp.powers[k] = std::norm(out[k]) * scale;
    pdp.kept_mask.assign(m, true);
    return pdp;
}

// Keeps bins with delay <= gate AND power >= peak * 10^(-threshold/10), both inclusive.
// The peak is taken over the raw (un-gated) powers; a second pass with the same options
// therefore reproduces the same mask.
inline PowerDelayProfile apply_gate_threshold(PowerDelayProfile pdp, const PdpOptions &opts)
{
    opts.validate();
    const double peak = pdp.peak_power();
    const double floor = peak * std::pow(10.0, -opts.threshold_below_peak_db / 10.0);
    if (pdp.kept_mask.size() != pdp.powers.size())
        pdp.kept_mask.assign(pdp.powers.size(), true);
    for (std::size_t k = 0; k < pdp.powers.size(); ++k)
        if (!(pdp.delay(k) <= opts.gate_delay_s && pdp.powers[k] >= floor))
            pdp.kept_mask[k] = false;
    pdp.gated = true;
    return pdp;
}

} // namespace uwbchan

#endif
