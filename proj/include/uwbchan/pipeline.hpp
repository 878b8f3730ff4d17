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

#ifndef UWBCHAN_PIPELINE_HPP
#define UWBCHAN_PIPELINE_HPP

#include "directional.hpp"
#include "fitting.hpp"
#include "metrics.hpp"
#include "pdp.hpp"

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace uwbchan
{

struct PipelineOptions
{
    PdpOptions pdp;                          // pdp.window shapes the delay-spread profiles
    Window pl_window = Window::Rectangular;  // window for path gain, Max-Dir selection and DDAPS
    AntennaElevationGainTable gains = AntennaElevationGainTable::horn_default();
};

struct BandResult
{
    SubBand band;
    OmniPdp omni_pl;  // path-loss window
    OmniPdp omni_ds;  // delay-spread window
    BeamIndex maxdir_beam;
    PowerDelayProfile maxdir_pl;
    PowerDelayProfile maxdir_ds;
    Ddaps ddaps;
    CondensedLinkParams params;
};

struct LinkResult
{
    LinkGeometry geometry;
    std::vector<BandResult> bands;
};

// Runs one band of one calibrated link: per-beam profiles are computed, gated
// and streamed into the omni / Max-Dir / DDAPS accumulators without holding
// the whole directional set in memory.
inline BandResult process_band(const FrequencyScanTensor &h, const LinkGeometry &geometry, const SubBand &band,
                               const PipelineOptions &opts)
{
    opts.pdp.validate();
    const auto [lo, hi] = subband_indices(h.grid(), band);
    const FrequencyGrid bgrid = subband_grid(h.grid(), band);
    const double correction_db = opts.gains.correction_db(band.center_hz());
    const AngularGrid &angles = h.angles();
    const std::size_t nc = angles.n_coel();

    PdpOptions pl_opts = opts.pdp;
    pl_opts.window = opts.pl_window;
    const bool same_window = pl_opts.window == opts.pdp.window;

    DirectionalAccumulator acc_pl(angles, band), acc_ds(angles, band);
    std::vector<PowerDelayProfile> pl(nc), ds(nc);
    PowerDelayProfile best_pl, best_ds;

    for (std::size_t i = 0; i < angles.n_tx(); ++i)
        for (std::size_t j = 0; j < angles.n_rx(); ++j)
        {
            for (std::size_t k = 0; k < nc; ++k)
            {
                const BeamIndex b{i, j, k};
                const auto beam = h.beam(b).subspan(lo, hi - lo + 1);
                pl[k] = apply_gate_threshold(compute_pdp(beam, bgrid, pl_opts), pl_opts);
                pl[k].band = band;
                pl[k].beam = b;
                if (same_window)
                    ds[k] = pl[k];
                else
                {
                    ds[k] = apply_gate_threshold(compute_pdp(beam, bgrid, opts.pdp), opts.pdp);
                    ds[k].band = band;
                    ds[k].beam = b;
                }
            }
            if (const auto k = acc_pl.add_pair(i, j, pl))
            {
                best_pl = pl[*k];
                best_ds = ds[*k];
            }
            acc_ds.add_pair(i, j, ds);
        }

    if (!acc_pl.best() || !(acc_pl.best()->total_power > 0.0))
        throw OutageError("link " + geometry.rx_id + ", band " + band.label() + ": every beam is empty after gating");

    BandResult r{band,
                 acc_pl.omni(correction_db),
                 acc_ds.omni(correction_db),
                 acc_pl.best()->beam,
                 std::move(best_pl),
                 std::move(best_ds),
                 Ddaps::from_beam_totals(angles, acc_pl.beam_totals()),
                 {}};

    auto &p = r.params;
    p.rx_id = geometry.rx_id;
    p.distance_m = geometry.distance_m;
    p.los_class = geometry.los_class;
    p.band = band.label();
    p.pl_omni_db = path_loss_db(r.omni_pl.pdp);
    p.pl_maxdir_db = path_loss_db(r.maxdir_pl);
    p.pl_total_db = -10.0 * std::log10(r.ddaps.total());
    p.rmsds_omni_s = rmsds(r.omni_ds.pdp);
    p.rmsds_omni_dbs = to_db_seconds(p.rmsds_omni_s);
    p.rmsds_maxdir_s = rmsds(r.maxdir_ds);
    p.rmsds_maxdir_dbs = to_db_seconds(p.rmsds_maxdir_s);
    p.as_tx_az = angular_spread(r.ddaps, AngularEnd::TxAz).sigma;
    p.as_rx_az = angular_spread(r.ddaps, AngularEnd::RxAz).sigma;
    p.as_rx_el = angular_spread(r.ddaps, AngularEnd::RxEl).sigma;
    p.maxdir_tx_az_deg = angles.tx_az_deg()[r.maxdir_beam.tx];
    p.maxdir_rx_az_deg = angles.rx_az_deg()[r.maxdir_beam.rx];
    p.maxdir_rx_coel_deg = angles.rx_coel_deg()[r.maxdir_beam.coel];
    p.omni_correction_db = correction_db;
    return r;
}

inline LinkResult process_link(const FrequencyScanTensor &h_calibrated, const LinkGeometry &geometry,
                               std::span<const SubBand> bands, const PipelineOptions &opts)
{
    geometry.validate();
    LinkResult out{geometry, {}};
    for (const auto &band : bands)
        out.bands.push_back(process_band(h_calibrated, geometry, band, opts));
    return out;
}

// ---- fits over links ---------------------------------------------------------------------------

struct FitTables
{
    std::vector<PowerLawFit> linear;
    std::vector<NormalFit> normal;
    std::vector<std::string> skipped; // "<metric>/<band>: reason"
};

struct MetricDef
{
    const char *id;
    double CondensedLinkParams::*field;
    bool normal_fit;
};

// Metrics fitted per band; RMSDS in dB-seconds, angular spreads as-is.
inline const std::vector<MetricDef> &fitted_metrics()
{
    static const std::vector<MetricDef> defs{
        {"pl_omni", &CondensedLinkParams::pl_omni_db, false},
        {"pl_maxdir", &CondensedLinkParams::pl_maxdir_db, false},
        {"rmsds_omni", &CondensedLinkParams::rmsds_omni_dbs, true},
        {"rmsds_maxdir", &CondensedLinkParams::rmsds_maxdir_dbs, true},
        {"as_tx_az", &CondensedLinkParams::as_tx_az, true},
        {"as_rx_az", &CondensedLinkParams::as_rx_az, true},
        {"as_rx_el", &CondensedLinkParams::as_rx_el, true},
    };
    return defs;
}

inline FitTables fit_tables(std::span<const CondensedLinkParams> rows, const DistanceWeighting &weighting)
{
    std::vector<std::string> band_order;
    for (const auto &r : rows)
        if (std::find(band_order.begin(), band_order.end(), r.band) == band_order.end())
            band_order.push_back(r.band);

    FitTables out;
    for (const auto &m : fitted_metrics())
        for (const auto &band : band_order)
        {
            std::vector<DistanceSample> samples;
            std::vector<double> values;
            for (const auto &r : rows)
                if (r.band == band && std::isfinite(r.*m.field))
                {
                    samples.push_back({r.distance_m, r.*m.field});
                    values.push_back(r.*m.field);
                }
            try
            {
                auto fit = fit_power_law(samples, weighting);
                fit.band = band;
                fit.metric_id = m.id;
                out.linear.push_back(std::move(fit));
            }
            catch (const ValidationError &e)
            {
                out.skipped.push_back(std::string(m.id) + " linear/" + band + ": " + e.what());
            }
            if (!m.normal_fit)
                continue;
            try
            {
                auto fit = fit_normal(values);
                fit.band = band;
                fit.metric_id = m.id;
                out.normal.push_back(std::move(fit));
            }
            catch (const ValidationError &e)
            {
                out.skipped.push_back(std::string(m.id) + " normal/" + band + ": " + e.what());
            }
        }
    return out;
}

} // namespace uwbchan

#endif
