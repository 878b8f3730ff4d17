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

// Synthetic channels: the inverse of the processing chain. Multipath components
// drawn from fitted statistics are rendered through simple horn patterns into
// complete frequency-scan tensors.

#ifndef UWBCHAN_GENERATOR_HPP
#define UWBCHAN_GENERATOR_HPP

#include "metrics.hpp"
#include "types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace uwbchan
{

// Free-space loss between isotropic antennas, dB.
inline double friis_pl_db(double distance_m, double freq_hz)
{
    if (!(distance_m > 0.0) || !(freq_hz > 0.0))
        throw ValidationError("friis_pl_db: distance and frequency must be positive");
    return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * freq_hz / speed_of_light);
}

struct SyntheticMpc
{
    double delay_s = 0.0;
    double power = 0.0;
    double tx_az_deg = 0.0;
    double rx_az_deg = 0.0;
    double rx_coel_deg = 0.0;
    double phase_rad = 0.0;

    void validate() const
    {
        if (!(delay_s >= 0.0) || !(power > 0.0) || !std::isfinite(delay_s) || !std::isfinite(power))
            throw ValidationError("SyntheticMpc: delay must be >= 0 and power > 0");
    }

    bool operator==(const SyntheticMpc &) const = default;
};

// Signed azimuth difference folded into (-180, 180].
inline double wrap_degrees(double d)
{
    d = std::fmod(d, 360.0);
    if (d > 180.0)
        d -= 360.0;
    else if (d <= -180.0)
        d += 360.0;
    return d;
}

// Gaussian-beam horn: power is -3 dB at half the HPBW off boresight, i.e.
// amplitude(delta) = 10^(-0.15 (2 delta / hpbw)^2). The ideal kind passes
// on-boresight components with unit amplitude and blocks everything else.
struct HornPatternModel
{
    enum class Kind
    {
        Gaussian,
        Ideal
    };

    Kind kind = Kind::Gaussian;
    double hpbw_az_deg = 30.0;
    double hpbw_el_deg = 30.0;
    double peak_gain_db = 0.0;

    static HornPatternModel ideal() { return {Kind::Ideal, 30.0, 30.0, 0.0}; }

    void validate() const
    {
        if (!(hpbw_az_deg > 0.0) || !(hpbw_el_deg > 0.0))
            throw ValidationError("HornPatternModel: beamwidths must be positive");
    }

    double tx_amplitude(double d_az_deg) const
    {
        if (kind == Kind::Ideal)
            return std::abs(wrap_degrees(d_az_deg)) < 1e-9 ? 1.0 : 0.0;
        const double u = 2.0 * wrap_degrees(d_az_deg) / hpbw_az_deg;
        return std::pow(10.0, peak_gain_db / 20.0 - 0.15 * u * u);
    }

    double rx_amplitude(double d_az_deg, double d_el_deg) const
    {
        if (kind == Kind::Ideal)
            return std::abs(wrap_degrees(d_az_deg)) < 1e-9 && std::abs(d_el_deg) < 1e-9 ? 1.0 : 0.0;
        const double u = 2.0 * wrap_degrees(d_az_deg) / hpbw_az_deg;
        const double v = 2.0 * d_el_deg / hpbw_el_deg;
        return std::pow(10.0, peak_gain_db / 20.0 - 0.15 * (u * u + v * v));
    }
};

inline std::string to_string(HornPatternModel::Kind k) { return k == HornPatternModel::Kind::Ideal ? "ideal" : "gaussian"; }

inline HornPatternModel::Kind parse_pattern_kind(const std::string &s)
{
    if (s == "ideal")
        return HornPatternModel::Kind::Ideal;
    if (s == "gaussian")
        return HornPatternModel::Kind::Gaussian;
    throw ValidationError("unknown pattern kind '" + s + "' (expected gaussian or ideal)");
}

// H(f, beam) = sum_l sqrt(P_l) g_T g_R e^{j psi_l} e^{-j 2 pi f tau_l}
inline FrequencyScanTensor render_tensor(std::span<const SyntheticMpc> mpcs, const FrequencyGrid &grid,
                                         const AngularGrid &angles, const HornPatternModel &pattern)
{
    pattern.validate();
    const std::size_t nf = grid.n_points();
    // per-component frequency responses, computed once
    std::vector<cdouble> phasors(mpcs.size() * nf);
    for (std::size_t l = 0; l < mpcs.size(); ++l)
    {
        mpcs[l].validate();
        const double amp = std::sqrt(mpcs[l].power);
        for (std::size_t i = 0; i < nf; ++i)
        {
            const double cycles = grid.frequency(i) * mpcs[l].delay_s;
            const double frac = cycles - std::floor(cycles);
            phasors[l * nf + i] = std::polar(amp, mpcs[l].phase_rad - 2.0 * std::numbers::pi * frac);
        }
    }

    std::vector<cdouble> values(angles.n_beams() * nf, cdouble(0.0, 0.0));
    for (std::size_t i = 0; i < angles.n_tx(); ++i)
        for (std::size_t j = 0; j < angles.n_rx(); ++j)
            for (std::size_t k = 0; k < angles.n_coel(); ++k)
            {
                cdouble *dst = values.data() + angles.flat_index({i, j, k}) * nf;
                for (std::size_t l = 0; l < mpcs.size(); ++l)
                {
                    const double g = pattern.tx_amplitude(angles.tx_az_deg()[i] - mpcs[l].tx_az_deg) *
                                     pattern.rx_amplitude(angles.rx_az_deg()[j] - mpcs[l].rx_az_deg,
                                                          angles.rx_coel_deg()[k] - mpcs[l].rx_coel_deg);
                    if (g == 0.0)
                        continue;
                    const cdouble *src = phasors.data() + l * nf;
                    for (std::size_t n = 0; n < nf; ++n)
                        dst[n] += g * src[n];
                }
            }
    return FrequencyScanTensor(grid, angles, std::move(values));
}

struct AngularSpreadTargets
{
    std::optional<double> tx_az;
    std::optional<double> rx_az;
    std::optional<double> rx_el;
};

// Parameters of one fitted model (one band), used to draw synthetic links.
struct ModelParams
{
    double alpha = 21.76;
    double beta = 4.14;
    double sigma_shadow_db = 3.22;
    double rmsds_mu_dbs = -84.54;
    double rmsds_sigma_dbs = 8.59;
    AngularSpreadTargets as_targets{0.20, 0.20, 0.11};
    std::uint64_t seed = 1;

    double first_tap_delay_s = 20e-9;
    double max_excess_delay_s = 966.67e-9; // every generated delay stays at or below this
    double power_span_db = 15.0;           // last tap relative to the first
    double spacing_growth = 0.25;          // ratio e^g between consecutive delay gaps

    void validate() const
    {
        if (!(sigma_shadow_db >= 0.0) || !(rmsds_sigma_dbs >= 0.0))
            throw ValidationError("ModelParams: standard deviations must be non-negative");
        if (!(first_tap_delay_s >= 0.0) || !(max_excess_delay_s > first_tap_delay_s))
            throw ValidationError("ModelParams: need 0 <= first_tap_delay_s < max_excess_delay_s");
        if (!(power_span_db >= 0.0) || !(spacing_growth > 0.0))
            throw ValidationError("ModelParams: power_span_db must be >= 0 and spacing_growth > 0");
        for (const auto &t : {as_targets.tx_az, as_targets.rx_az, as_targets.rx_el})
            if (t && !(*t >= 0.0 && *t <= 1.0))
                throw ValidationError("ModelParams: angular spread targets must lie in [0, 1]");
    }
};

// Two angles on a grid axis and the power fraction sent to the second one.
// Fleury spread of the pair: sigma = 2 sqrt(q (1 - q)) |sin(delta / 2)|.
struct TwoClusterPlacement
{
    double angle_a_deg = 0.0;
    double angle_b_deg = 0.0;
    double fraction_b = 0.0;
    double realized_sigma = 0.0;
};

inline TwoClusterPlacement place_two_clusters(double target, const std::vector<double> &axis_deg, bool circular)
{
    auto central = [&](double a) { return circular ? 0.0 : std::abs(a); };
    TwoClusterPlacement best;
    // single cluster at the most central grid angle
    best.angle_a_deg = best.angle_b_deg = axis_deg.front();
    for (double a : axis_deg)
        if (central(a) < central(best.angle_a_deg))
            best.angle_a_deg = best.angle_b_deg = a;
    if (target <= 1e-12)
        return best;

    double best_s2 = INFINITY, best_mid = INFINITY;
    std::optional<std::pair<double, double>> pair;
    for (std::size_t i = 0; i < axis_deg.size(); ++i)
        for (std::size_t j = i + 1; j < axis_deg.size(); ++j)
        {
            const double delta = axis_deg[j] - axis_deg[i];
            const double s = std::sin(delta * std::numbers::pi / 360.0);
            const double s2 = s * s;
            if (s2 < target * target)
                continue;
            const double mid = circular ? 0.0 : std::abs(0.5 * (axis_deg[i] + axis_deg[j]));
            if (s2 < best_s2 - 1e-12 || (std::abs(s2 - best_s2) <= 1e-12 && mid < best_mid))
            {
                best_s2 = s2;
                best_mid = mid;
                pair = {axis_deg[i], axis_deg[j]};
            }
        }
    if (!pair)
        throw NumericalError("angular spread target " + std::to_string(target) + " is not realizable on this grid");
    best.angle_a_deg = pair->first;
    best.angle_b_deg = pair->second;
    best.fraction_b = 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - target * target / best_s2)));
    best.realized_sigma = 2.0 * std::sqrt(best.fraction_b * (1.0 - best.fraction_b) * best_s2);
    return best;
}

struct LinkRealization
{
    std::vector<SyntheticMpc> mpcs;
    double shadowing_db = 0.0;
    double path_loss_db = 0.0;        // -10 log10 of the total generated power
    double rmsds_target_dbs = 0.0;    // accepted draw
    double rmsds_s = 0.0;             // analytic spread of the generated taps
    std::size_t rmsds_rejections = 0; // draws refused by the delay bound
    std::vector<double> tap_delays_s;
    std::vector<double> tap_powers;
    TwoClusterPlacement tx_az, rx_az, rx_el;
};

// Stream seed for link `index`: splitmix64 of (seed, index).
inline std::uint64_t link_stream_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Draws one link realization.
//
// Total power is -(alpha + 10 beta log10 d + eps). Taps have exponentially
// growing gaps and exponentially decaying powers; their common delay scale is
// set so that the analytic RMS delay spread equals a draw from
// N(rmsds_mu, rmsds_sigma) in dB-seconds (draws that would push the last tap
// past max_excess_delay are redrawn). Each tap is split over at most two grid
// angles per end so the delay-integrated spectra have the requested Fleury spreads.
inline LinkRealization sample_link(const ModelParams &params, const LinkGeometry &geometry, std::size_t n_taps,
                                   const AngularGrid &angles, std::uint64_t stream_index = 0)
{
    params.validate();
    geometry.validate();
    if (n_taps < 1)
        throw ValidationError("sample_link: at least one multipath component is required");

    std::mt19937_64 rng(link_stream_seed(params.seed, stream_index));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform_phase(-std::numbers::pi, std::numbers::pi);

    LinkRealization out;
    out.shadowing_db = params.sigma_shadow_db > 0.0 ? params.sigma_shadow_db * normal(rng) : 0.0;
    out.path_loss_db = params.alpha + 10.0 * params.beta * std::log10(geometry.distance_m) + out.shadowing_db;
    const double total_power = std::pow(10.0, -out.path_loss_db / 10.0);

    // unit delay shape on [0, 1] and its power profile
    std::vector<double> shape(n_taps, 0.0), weights(n_taps, 1.0);
    for (std::size_t l = 1; l < n_taps; ++l)
        shape[l] = std::expm1(params.spacing_growth * double(l)) / std::expm1(params.spacing_growth * double(n_taps - 1));
    for (std::size_t l = 0; l < n_taps; ++l)
        weights[l] = std::pow(10.0, -params.power_span_db / 10.0 * shape[l]);
    double weight_sum = 0.0;
    for (double w : weights)
        weight_sum += w;

    double scale_s = 0.0;
    if (n_taps > 1)
    {
        const double shape_spread = rms_delay_spread(shape, weights);
        const double room = params.max_excess_delay_s - params.first_tap_delay_s;
        constexpr std::size_t max_draws = 1000;
        bool accepted = false;
        for (std::size_t draw = 0; draw < max_draws; ++draw)
        {
            const double target_dbs = params.rmsds_mu_dbs + params.rmsds_sigma_dbs * normal(rng);
            const double candidate = std::pow(10.0, target_dbs / 10.0) / shape_spread;
            if (candidate <= room)
            {
                out.rmsds_target_dbs = target_dbs;
                scale_s = candidate;
                accepted = true;
                break;
            }
            ++out.rmsds_rejections;
        }
        if (!accepted)
            throw NumericalError("sample_link: no delay-spread draw fits below the delay bound after " +
                                 std::to_string(max_draws) + " attempts");
    }
    else
    {
        out.rmsds_target_dbs = -INFINITY;
    }

    for (std::size_t l = 0; l < n_taps; ++l)
    {
        out.tap_delays_s.push_back(params.first_tap_delay_s + scale_s * shape[l]);
        out.tap_powers.push_back(total_power * weights[l] / weight_sum);
    }
    out.rmsds_s = n_taps > 1 ? rms_delay_spread(out.tap_delays_s, out.tap_powers) : 0.0;

    auto place = [](const std::optional<double> &t, const std::vector<double> &axis, bool circular) {
        return place_two_clusters(t.value_or(0.0), axis, circular);
    };
    out.tx_az = place(params.as_targets.tx_az, angles.tx_az_deg(), false);
    out.rx_az = place(params.as_targets.rx_az, angles.rx_az_deg(), true);
    out.rx_el = place(params.as_targets.rx_el, angles.rx_coel_deg(), false);

    struct Share
    {
        double angle;
        double fraction;
    };
    auto shares = [](const TwoClusterPlacement &p) {
        std::vector<Share> s{{p.angle_a_deg, 1.0 - p.fraction_b}};
        if (p.fraction_b > 0.0)
            s.push_back({p.angle_b_deg, p.fraction_b});
        return s;
    };
    const auto tx = shares(out.tx_az), rx = shares(out.rx_az), el = shares(out.rx_el);
    // one phase per tap, shared by its angular copies
    for (std::size_t l = 0; l < n_taps; ++l)
    {
        const double phase = uniform_phase(rng);
        for (const auto &a : tx)
            for (const auto &b : rx)
                for (const auto &c : el)
                    out.mpcs.push_back({out.tap_delays_s[l], out.tap_powers[l] * a.fraction * b.fraction * c.fraction,
                                        a.angle, b.angle, c.angle, phase});
    }
    return out;
}

} // namespace uwbchan

#endif
