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

#ifndef UWBCHAN_METRICS_HPP
#define UWBCHAN_METRICS_HPP

#include "directional.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uwbchan
{

// ---- path gain / loss --------------------------------------------------------------------------

inline double path_gain(const PowerDelayProfile &pdp)
{
    const double g = pdp.kept_total();
    if (!(g > 0.0))
        throw OutageError("path_gain: no power left in band " + pdp.band.label() + " after gating");
    return g;
}

inline double path_loss_db(const PowerDelayProfile &pdp) { return -10.0 * std::log10(path_gain(pdp)); }

// ---- delay spread ------------------------------------------------------------------------------

// Square root of the second central moment of a discrete power profile.
inline double rms_delay_spread(std::span<const double> delays_s, std::span<const double> powers)
{
    if (delays_s.size() != powers.size())
        throw ValidationError("rms_delay_spread: delays and powers differ in length");
    double total = 0.0, first = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i)
    {
        total += powers[i];
        first += powers[i] * delays_s[i];
    }
    if (!(total > 0.0))
        throw OutageError("rms_delay_spread: zero total power");
    const double mean = first / total;
    double central = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i)
    {
        const double d = delays_s[i] - mean;
        central += powers[i] * d * d;
    }
    return std::sqrt(central / total);
}

inline double rmsds(const PowerDelayProfile &pdp)
{
    std::vector<double> delays, powers;
    for (std::size_t k = 0; k < pdp.size(); ++k)
        if (pdp.kept_mask[k] && pdp.powers[k] > 0.0)
        {
            delays.push_back(pdp.delay(k));
            powers.push_back(pdp.powers[k]);
        }
    if (powers.empty())
        throw OutageError("rmsds: no power left in band " + pdp.band.label() + " after gating");
    return rms_delay_spread(delays, powers);
}

// 10 log10(sigma_tau / 1 s); -inf for a zero spread.
inline double to_db_seconds(double seconds) { return 10.0 * std::log10(seconds); }

// ---- angular power spectra ---------------------------------------------------------------------

enum class AngularEnd
{
    TxAz,
    RxAz,
    RxEl
};

inline std::string to_string(AngularEnd e)
{
    switch (e)
    {
    case AngularEnd::TxAz:
        return "tx_az";
    case AngularEnd::RxAz:
        return "rx_az";
    default:
        return "rx_el";
    }
}

// Delay-integrated power per beam triple and its co-elevation sum.
struct Ddaps
{
    AngularGrid angles;
    std::vector<double> values_full; // [tx][rx][coel]
    std::vector<double> values_az;   // [tx][rx]

    double full(BeamIndex b) const { return values_full[angles.flat_index(b)]; }
    double az(std::size_t tx, std::size_t rx) const { return values_az[tx * angles.n_rx() + rx]; }

    static Ddaps from_beam_totals(AngularGrid angles, std::vector<double> totals)
    {
        if (totals.size() != angles.n_beams())
            throw ValidationError("DDAPS: one total per beam is required");
        Ddaps d{std::move(angles), std::move(totals), {}};
        const std::size_t nc = d.angles.n_coel();
        d.values_az.assign(d.angles.n_tx() * d.angles.n_rx(), 0.0);
        for (std::size_t p = 0; p < d.values_az.size(); ++p)
            for (std::size_t k = 0; k < nc; ++k)
                d.values_az[p] += d.values_full[p * nc + k];
        return d;
    }

    double total() const
    {
        double s = 0.0;
        for (double v : values_full)
            s += v;
        return s;
    }
};

inline Ddaps compute_ddaps(const DirectionalPdpSet &set)
{
    set.validate();
    std::vector<double> totals(set.pdps.size());
    for (std::size_t i = 0; i < set.pdps.size(); ++i)
        totals[i] = set.pdps[i].kept_total();
    return Ddaps::from_beam_totals(set.angles, std::move(totals));
}

// Tx: sum over Rx azimuth; Rx azimuth: sum over Tx; Rx elevation: sum over both azimuths.
inline std::vector<double> marginal_aps(const Ddaps &d, AngularEnd end)
{
    const auto &a = d.angles;
    std::vector<double> out;
    switch (end)
    {
    case AngularEnd::TxAz:
        out.assign(a.n_tx(), 0.0);
        for (std::size_t i = 0; i < a.n_tx(); ++i)
            for (std::size_t j = 0; j < a.n_rx(); ++j)
                out[i] += d.az(i, j);
        break;
    case AngularEnd::RxAz:
        out.assign(a.n_rx(), 0.0);
        for (std::size_t i = 0; i < a.n_tx(); ++i)
            for (std::size_t j = 0; j < a.n_rx(); ++j)
                out[j] += d.az(i, j);
        break;
    case AngularEnd::RxEl:
        out.assign(a.n_coel(), 0.0);
        for (std::size_t i = 0; i < a.n_tx(); ++i)
            for (std::size_t j = 0; j < a.n_rx(); ++j)
                for (std::size_t k = 0; k < a.n_coel(); ++k)
                    out[k] += d.full({i, j, k});
        break;
    }
    return out;
}

inline const std::vector<double> &end_angles_deg(const AngularGrid &g, AngularEnd end)
{
    switch (end)
    {
    case AngularEnd::TxAz:
        return g.tx_az_deg();
    case AngularEnd::RxAz:
        return g.rx_az_deg();
    default:
        return g.rx_coel_deg();
    }
}

struct AngularSpreadResult
{
    double sigma = 0.0;
    std::complex<double> mu_phi;
    AngularEnd end = AngularEnd::TxAz;
};

// Circular-moment spread: mu = sum e^{j phi} APS / sum APS,
// sigma = sqrt(sum |e^{j phi} - mu|^2 APS / sum APS), which lies in [0, 1].
inline AngularSpreadResult angular_spread(std::span<const double> aps, std::span<const double> angles_deg,
                                          AngularEnd end = AngularEnd::TxAz)
{
    if (aps.size() != angles_deg.size())
        throw ValidationError("angular_spread: APS and angle lists differ in length");
    double total = 0.0;
    for (double p : aps)
    {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ValidationError("angular_spread: APS values must be finite and non-negative");
        total += p;
    }
    if (!(total > 0.0))
        throw OutageError("angular_spread: zero total power");

    std::complex<double> mu(0.0, 0.0);
    for (std::size_t i = 0; i < aps.size(); ++i)
        mu += std::polar(1.0, angles_deg[i] * std::numbers::pi / 180.0) * aps[i];
    mu /= total;

    double spread = 0.0;
    for (std::size_t i = 0; i < aps.size(); ++i)
        spread += std::norm(std::polar(1.0, angles_deg[i] * std::numbers::pi / 180.0) - mu) * aps[i];
    spread /= total;

    // sigma^2 + |mu|^2 == 1 for any normalised APS
    if (std::abs(spread + std::norm(mu) - 1.0) > 1e-9)
        throw NumericalError("angular_spread: circular moment identity violated");
    return {std::sqrt(std::max(spread, 0.0)), mu, end};
}

inline AngularSpreadResult angular_spread(const Ddaps &d, AngularEnd end)
{
    const auto aps = marginal_aps(d, end);
    return angular_spread(aps, end_angles_deg(d.angles, end), end);
}

// ---- condensed per-link parameters -------------------------------------------------------------

struct CondensedLinkParams
{
    std::string rx_id;
    double distance_m = 0.0;
    LosClass los_class = LosClass::LoS;
    std::string band;
    double pl_omni_db = 0.0;
    double pl_maxdir_db = 0.0;
    double pl_total_db = 0.0; // power summed over every beam; diagnostic for synthetic round trips
    double rmsds_omni_s = 0.0;
    double rmsds_omni_dbs = 0.0;
    double rmsds_maxdir_s = 0.0;
    double rmsds_maxdir_dbs = 0.0;
    double as_tx_az = 0.0;
    double as_rx_az = 0.0;
    double as_rx_el = 0.0;
    double maxdir_tx_az_deg = 0.0;
    double maxdir_rx_az_deg = 0.0;
    double maxdir_rx_coel_deg = 0.0;
    double omni_correction_db = 0.0;

    bool operator==(const CondensedLinkParams &) const = default;
};

} // namespace uwbchan

#endif
