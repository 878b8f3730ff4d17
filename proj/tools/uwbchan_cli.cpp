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

// uwbchan command-line front end.

#include <uwbchan.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

using namespace uwbchan;

struct Flags
{
    std::string config;
    std::optional<std::string> input, output, bands, window, pl_window, weighting, gain_table, pattern, angle_grid;
    std::optional<std::size_t> oversample, n_taps, n_freq, n_links, trials;
    std::optional<double> gate_ns, threshold_db, bin_decades;
    std::optional<double> alpha, beta, sigma_shadow, rmsds_mu, rmsds_sigma, as_tx, as_rx, as_el;
    std::optional<double> hpbw_az, hpbw_el, f_start_ghz, f_stop_ghz;
    std::optional<std::uint64_t> seed;
    bool no_dumps = false;
    bool system_response = false;
};

void add_pipeline_flags(CLI::App *app, Flags &f)
{
    app->add_option("--config", f.config, "JSON run configuration (flags take precedence)");
    app->add_option("--input", f.input, "input measurement set directory (or result file)");
    app->add_option("--output", f.output, "output directory");
    app->add_option("--bands", f.bands, "sub-bands in GHz, e.g. 6-7,7-8,all");
    app->add_option("--window", f.window, "delay-spread window: hann|rect");
    app->add_option("--pl-window", f.pl_window, "path-loss / Max-Dir / DDAPS window: rect|hann");
    app->add_option("--oversample", f.oversample, "zero-padding factor");
    app->add_option("--gate-ns", f.gate_ns, "delay gate in ns");
    app->add_option("--threshold-db", f.threshold_db, "noise threshold below the peak in dB");
    app->add_option("--weighting", f.weighting, "distance weighting: uniform|logbins");
    app->add_option("--bin-decades", f.bin_decades, "log-distance bin width in decades");
    app->add_option("--gain-table", f.gain_table, "CSV freq_hz,correction_db");
    app->add_option("--seed", f.seed, "random seed");
    app->add_flag("--no-dumps", f.no_dumps, "skip per-link PDP/APS dumps");
}

void add_synth_flags(CLI::App *app, Flags &f)
{
    app->add_option("--alpha", f.alpha, "path-loss intercept in dB");
    app->add_option("--beta", f.beta, "path-loss exponent");
    app->add_option("--sigma-shadow", f.sigma_shadow, "shadowing standard deviation in dB");
    app->add_option("--rmsds-mu", f.rmsds_mu, "delay-spread mean in dB-seconds");
    app->add_option("--rmsds-sigma", f.rmsds_sigma, "delay-spread standard deviation in dB-seconds");
    app->add_option("--as-tx", f.as_tx, "Tx azimuth spread target");
    app->add_option("--as-rx", f.as_rx, "Rx azimuth spread target");
    app->add_option("--as-el", f.as_el, "Rx elevation spread target");
    app->add_option("--n-taps", f.n_taps, "taps per link");
    app->add_option("--pattern", f.pattern, "antenna pattern: gaussian|ideal");
    app->add_option("--hpbw-az", f.hpbw_az, "azimuth half-power beamwidth in degrees");
    app->add_option("--hpbw-el", f.hpbw_el, "elevation half-power beamwidth in degrees");
    app->add_option("--f-start-ghz", f.f_start_ghz, "first frequency in GHz");
    app->add_option("--f-stop-ghz", f.f_stop_ghz, "last frequency in GHz");
    app->add_option("--n-freq", f.n_freq, "number of frequency points");
    app->add_option("--angle-grid", f.angle_grid, "rotation grid: nominal|compact");
    app->add_option("--n-links", f.n_links, "use the first N links of the link list");
    app->add_flag("--system-response", f.system_response, "apply a non-flat system response and store it as OTA");
}

RunConfig build_config(const Flags &f)
{
    RunConfig c;
    if (!f.config.empty())
        load_config_file(c, f.config);
    if (f.input)
        c.input = *f.input;
    if (f.output)
        c.output = *f.output;
    if (f.bands)
        c.bands = *f.bands;
    if (f.window)
        c.pdp.window = parse_window(*f.window);
    if (f.pl_window)
        c.pl_window = parse_window(*f.pl_window);
    if (f.oversample)
        c.pdp.oversample_factor = *f.oversample;
    if (f.gate_ns)
        c.pdp.gate_delay_s = *f.gate_ns * 1e-9;
    if (f.threshold_db)
        c.pdp.threshold_below_peak_db = *f.threshold_db;
    if (f.weighting)
        c.weighting.scheme = parse_weighting(*f.weighting);
    if (f.bin_decades)
        c.weighting.bin_decades = *f.bin_decades;
    if (f.gain_table)
        c.gain_table = *f.gain_table;
    if (f.seed)
        c.seed = *f.seed;
    if (f.no_dumps)
        c.dumps = false;
    if (f.trials)
        c.trials = *f.trials;

    auto &s = c.synth;
    auto &m = s.model;
    if (f.alpha)
        m.alpha = *f.alpha;
    if (f.beta)
        m.beta = *f.beta;
    if (f.sigma_shadow)
        m.sigma_shadow_db = *f.sigma_shadow;
    if (f.rmsds_mu)
        m.rmsds_mu_dbs = *f.rmsds_mu;
    if (f.rmsds_sigma)
        m.rmsds_sigma_dbs = *f.rmsds_sigma;
    if (f.as_tx)
        m.as_targets.tx_az = *f.as_tx;
    if (f.as_rx)
        m.as_targets.rx_az = *f.as_rx;
    if (f.as_el)
        m.as_targets.rx_el = *f.as_el;
    if (f.n_taps)
        s.n_taps = *f.n_taps;
    if (f.pattern)
        s.pattern.kind = parse_pattern_kind(*f.pattern);
    if (f.hpbw_az)
        s.pattern.hpbw_az_deg = *f.hpbw_az;
    if (f.hpbw_el)
        s.pattern.hpbw_el_deg = *f.hpbw_el;
    if (f.f_start_ghz || f.f_stop_ghz || f.n_freq)
        s.grid = FrequencyGrid(f.f_start_ghz ? *f.f_start_ghz * 1e9 : s.grid.start_hz(),
                               f.f_stop_ghz ? *f.f_stop_ghz * 1e9 : s.grid.stop_hz(),
                               f.n_freq ? *f.n_freq : s.grid.n_points());
    if (f.angle_grid)
    {
        if (*f.angle_grid == "nominal")
            s.angles = AngularGrid::nominal();
        else if (*f.angle_grid == "compact")
            s.angles = compact_angular_grid();
        else
            throw ValidationError("--angle-grid must be nominal or compact");
    }
    if (f.n_links)
    {
        if (*f.n_links == 0 || *f.n_links > s.links.size())
            throw ValidationError("--n-links must lie in [1, " + std::to_string(s.links.size()) + "]");
        s.links.resize(*f.n_links);
    }
    if (f.system_response)
        s.system_response = true;
    return c;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"uwbchan: double-directional channel measurement processing"};
    app.require_subcommand(1);
    Flags f;

    auto *calibrate = app.add_subcommand("calibrate", "divide every beam by the OTA trace");
    auto *pdp = app.add_subcommand("pdp", "write per-link PDP and APS dumps");
    auto *condense = app.add_subcommand("condense", "write condensed per-(link, band) parameters");
    auto *fit = app.add_subcommand("fit", "fit per-band models to condensed.csv");
    auto *report = app.add_subcommand("report", "print the fit tables from fits.json");
    auto *process = app.add_subcommand("process", "calibrate, condense, fit and report in one run");
    auto *synth = app.add_subcommand("synth", "write a synthetic measurement set and truth.json");
    auto *roundtrip = app.add_subcommand("roundtrip", "synthesize, process and compare with the truth");
    for (auto *sub : {calibrate, pdp, condense, fit, report, process, synth, roundtrip})
        add_pipeline_flags(sub, f);
    for (auto *sub : {synth, roundtrip})
        add_synth_flags(sub, f);
    roundtrip->add_option("--trials", f.trials, "number of seeded meta-trials");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        report_error(std::cerr, "usage", exit_validation, e.what());
        return exit_validation;
    }

    return run_guarded([&]() -> int {
        const RunConfig cfg = build_config(f);
        if (calibrate->parsed())
            cmd_calibrate(cfg);
        else if (pdp->parsed())
            cmd_pdp(cfg);
        else if (condense->parsed())
            cmd_condense(cfg);
        else if (fit->parsed())
            cmd_fit(cfg);
        else if (report->parsed())
            cmd_report(cfg);
        else if (process->parsed())
            cmd_process(cfg);
        else if (synth->parsed())
            cmd_synth(cfg);
        else
            return cmd_roundtrip(cfg);
        return exit_ok;
    });
}
