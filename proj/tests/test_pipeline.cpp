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

#include <catch2/catch_amalgamated.hpp>
#include <uwbchan.hpp>

using namespace uwbchan;

static const AngularGrid grid_small{{-30.0, 0.0, 30.0}, {0.0, 90.0, 180.0, 270.0}, {-10.0, 0.0, 10.0}};

static FrequencyScanTensor synthetic_tensor(const FrequencyGrid &g, std::uint64_t seed)
{
    ModelParams mp;
    mp.seed = seed;
    mp.rmsds_mu_dbs = -75.0;
    mp.rmsds_sigma_dbs = 1.0;
    const auto r = sample_link(mp, campaign_links()[2], 4, grid_small);
    return render_tensor(r.mpcs, g, grid_small, HornPatternModel{});
}

TEST_CASE("Streaming band processing matches the materialized directional set")
{
    const FrequencyGrid g(6e9, 8e9, 401);
    const auto h = synthetic_tensor(g, 17);
    const SubBand band(6e9, 7e9);
    PipelineOptions o;
    o.pl_window = Window::Rectangular;
    const LinkGeometry geo = campaign_links()[2];
    const auto r = process_band(h, geo, band, o);

    const auto [lo, hi] = subband_indices(g, band);
    const auto bg = subband_grid(g, band);
    DirectionalPdpSet pl{grid_small, band, {}}, ds{grid_small, band, {}};
    PdpOptions pl_opts = o.pdp;
    pl_opts.window = Window::Rectangular;
    for (std::size_t b = 0; b < grid_small.n_beams(); ++b)
    {
        const auto beam = h.values().subspan(b * g.n_points() + lo, hi - lo + 1);
        pl.pdps.push_back(apply_gate_threshold(compute_pdp(beam, bg, pl_opts), pl_opts));
        ds.pdps.push_back(apply_gate_threshold(compute_pdp(beam, bg, o.pdp), o.pdp));
    }
    const auto omni_pl = build_omni(pl, o.gains);
    const auto omni_ds = build_omni(ds, o.gains);
    const auto [beam, maxdir] = select_max_dir(pl);
    const auto dd = compute_ddaps(pl);

    CHECK(r.omni_pl.pdp.powers == omni_pl.pdp.powers);
    CHECK(r.omni_ds.pdp.powers == omni_ds.pdp.powers);
    CHECK(r.maxdir_beam == beam);
    CHECK(r.maxdir_pl.powers == maxdir.powers);
    CHECK(r.maxdir_ds.powers == ds.at(beam).powers);
    for (std::size_t b = 0; b < dd.values_full.size(); ++b)
        CHECK(r.ddaps.values_full[b] == Catch::Approx(dd.values_full[b]).epsilon(1e-14));

    const auto &p = r.params;
    CHECK(p.rx_id == geo.rx_id);
    CHECK(p.band == "6-7 GHz");
    CHECK(p.pl_omni_db == Catch::Approx(path_loss_db(omni_pl.pdp)).epsilon(1e-14));
    CHECK(p.rmsds_omni_s == Catch::Approx(rmsds(omni_ds.pdp)).epsilon(1e-12));
    CHECK(p.rmsds_omni_dbs == Catch::Approx(10.0 * std::log10(p.rmsds_omni_s)).epsilon(1e-14));
    CHECK(p.as_rx_az == Catch::Approx(angular_spread(dd, AngularEnd::RxAz).sigma).epsilon(1e-12));
    CHECK(p.maxdir_tx_az_deg == grid_small.tx_az_deg()[beam.tx]);
    CHECK(p.omni_correction_db == 3.7);
    CHECK(p.pl_maxdir_db >= p.pl_omni_db - 3.7 - 1e-9);
}

TEST_CASE("Link processing - one result per band, outage on silence")
{
    const FrequencyGrid g(6e9, 8e9, 401);
    const auto h = synthetic_tensor(g, 5);
    const auto bands = default_subbands(g);
    const auto r = process_link(h, campaign_links()[2], bands, PipelineOptions{});
    REQUIRE(r.bands.size() == bands.size());
    for (std::size_t i = 0; i < bands.size(); ++i)
        CHECK(r.bands[i].params.band == bands[i].label());

    const FrequencyScanTensor zero(g, grid_small, std::vector<cdouble>(grid_small.n_beams() * g.n_points()));
    CHECK_THROWS_AS(process_link(zero, campaign_links()[2], bands, PipelineOptions{}), OutageError);

    const LinkGeometry bad{"RxX", -1.0, LosClass::LoS};
    CHECK_THROWS_AS(process_link(h, bad, bands, PipelineOptions{}), ValidationError);
}

TEST_CASE("Fit tables - structure and skipped groups")
{
    std::vector<CondensedLinkParams> rows;
    for (const auto &l : campaign_links())
        for (const char *band : {"All Bands", "6-7 GHz"})
        {
            CondensedLinkParams p;
            p.rx_id = l.rx_id;
            p.distance_m = l.distance_m;
            p.band = band;
            p.pl_omni_db = 21.76 + 41.4 * std::log10(l.distance_m);
            p.pl_maxdir_db = p.pl_omni_db + 3.0;
            p.rmsds_omni_dbs = -80.0 - 0.1 * l.distance_m;
            p.rmsds_maxdir_dbs = -90.0;
            p.as_tx_az = 0.2;
            p.as_rx_az = 0.2 + 0.001 * l.distance_m;
            p.as_rx_el = 0.11;
            rows.push_back(p);
        }
    CondensedLinkParams lone;
    lone.band = "13-14 GHz";
    lone.distance_m = 10.0;
    rows.push_back(lone);

    const auto t = fit_tables(rows, DistanceWeighting{});
    CHECK(t.linear.size() == 14);
    CHECK(t.normal.size() == 10);
    CHECK(t.skipped.size() == 12);
    CHECK(t.linear[0].metric_id == "pl_omni");
    CHECK(t.linear[0].band == "All Bands");
    CHECK(t.linear[1].band == "6-7 GHz");
    CHECK(t.linear[0].alpha == Catch::Approx(21.76).epsilon(1e-12));
    CHECK(t.linear[0].beta == Catch::Approx(4.14).epsilon(1e-12));
    for (const auto &n : t.normal)
        CHECK(n.metric_id.rfind("pl_", 0) != 0);
}
