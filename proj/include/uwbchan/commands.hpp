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

// Batch commands behind the command-line tool. Every command takes a RunConfig,
// writes its files below cfg.output, prints a short summary to `out` and
// signals failure by throwing; run_guarded() turns exceptions into exit codes
// and a JSON error report.

#ifndef UWBCHAN_COMMANDS_HPP
#define UWBCHAN_COMMANDS_HPP

#include "generator.hpp"
#include "measurement_io.hpp"
#include "pipeline.hpp"
#include "results_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

namespace uwbchan
{

namespace fs = std::filesystem;

inline constexpr const char *tool_version = "1.0.0";

enum ExitCode : int
{
    exit_ok = 0,
    exit_validation = 2,
    exit_numerical = 3,
    exit_tolerance = 4
};

// Tx -60:30:60, Rx 0:30:330, co-elevation -20:10:20; 300 beams.
inline AngularGrid compact_angular_grid()
{
    return {AngularGrid::range(-60.0, 60.0, 30.0), AngularGrid::range(0.0, 330.0, 30.0),
            AngularGrid::range(-20.0, 20.0, 10.0)};
}

struct SynthConfig
{
    ModelParams model;
    std::size_t n_taps = 8;
    HornPatternModel pattern;
    FrequencyGrid grid = FrequencyGrid::nominal();
    AngularGrid angles = AngularGrid::nominal();
    std::vector<LinkGeometry> links = campaign_links();
    bool system_response = false; // multiply every beam by a smooth non-flat response and store it as the OTA trace
};

struct RunConfig
{
    fs::path input;
    fs::path output;
    std::string bands; // empty: "All Bands" plus every whole 1-GHz band
    PdpOptions pdp;
    Window pl_window = Window::Rectangular;
    DistanceWeighting weighting;
    fs::path gain_table; // empty: built-in horn table
    std::uint64_t seed = 1;
    bool dumps = true;
    std::size_t trials = 1;
    SynthConfig synth;

    PipelineOptions pipeline_options() const
    {
        pdp.validate();
        weighting.validate();
        PipelineOptions o;
        o.pdp = pdp;
        o.pl_window = pl_window;
        if (!gain_table.empty())
        {
            if (!fs::exists(gain_table))
                throw ValidationError("gain table '" + gain_table.string() + "' does not exist");
            o.gains = read_gain_table_csv(gain_table);
        }
        return o;
    }
};

// ---- configuration file ------------------------------------------------------------------------

namespace detail
{

template <class T>
T config_value(const nlohmann::json &v, const std::string &key)
{
    try
    {
        return v.get<T>();
    }
    catch (const nlohmann::json::exception &)
    {
        throw ValidationError("config: field '" + key + "' has the wrong type");
    }
}

inline void apply_synth_json(SynthConfig &s, const nlohmann::json &j)
{
    auto &m = s.model;
    std::optional<double> f_start, f_stop;
    std::optional<std::size_t> f_n;
    for (const auto &[key, v] : j.items())
    {
        const std::string k = "synth." + key;
        if (key == "alpha")
            m.alpha = config_value<double>(v, k);
        else if (key == "beta")
            m.beta = config_value<double>(v, k);
        else if (key == "sigma_shadow_db")
            m.sigma_shadow_db = config_value<double>(v, k);
        else if (key == "rmsds_mu_dbs")
            m.rmsds_mu_dbs = config_value<double>(v, k);
        else if (key == "rmsds_sigma_dbs")
            m.rmsds_sigma_dbs = config_value<double>(v, k);
        else if (key == "as_targets")
        {
            for (const auto &[end, t] : v.items())
            {
                const std::optional<double> target =
                    t.is_null() ? std::nullopt : std::optional<double>(config_value<double>(t, k + "." + end));
                if (end == "tx_az")
                    m.as_targets.tx_az = target;
                else if (end == "rx_az")
                    m.as_targets.rx_az = target;
                else if (end == "rx_el")
                    m.as_targets.rx_el = target;
                else
                    throw ValidationError("config: unknown field '" + k + "." + end + "'");
            }
        }
        else if (key == "first_tap_delay_ns")
            m.first_tap_delay_s = config_value<double>(v, k) * 1e-9;
        else if (key == "max_excess_delay_ns")
            m.max_excess_delay_s = config_value<double>(v, k) * 1e-9;
        else if (key == "power_span_db")
            m.power_span_db = config_value<double>(v, k);
        else if (key == "spacing_growth")
            m.spacing_growth = config_value<double>(v, k);
        else if (key == "n_taps")
            s.n_taps = config_value<std::size_t>(v, k);
        else if (key == "pattern")
            s.pattern.kind = parse_pattern_kind(config_value<std::string>(v, k));
        else if (key == "hpbw_az_deg")
            s.pattern.hpbw_az_deg = config_value<double>(v, k);
        else if (key == "hpbw_el_deg")
            s.pattern.hpbw_el_deg = config_value<double>(v, k);
        else if (key == "peak_gain_db")
            s.pattern.peak_gain_db = config_value<double>(v, k);
        else if (key == "f_start_hz")
            f_start = config_value<double>(v, k);
        else if (key == "f_stop_hz")
            f_stop = config_value<double>(v, k);
        else if (key == "n_freq")
            f_n = config_value<std::size_t>(v, k);
        else if (key == "angle_grid")
        {
            const auto g = config_value<std::string>(v, k);
            if (g == "nominal")
                s.angles = AngularGrid::nominal();
            else if (g == "compact")
                s.angles = compact_angular_grid();
            else
                throw ValidationError("config: '" + k + "' must be nominal or compact");
        }
        else if (key == "angles")
            s.angles = AngularGrid(config_value<std::vector<double>>(v.at("tx_az_deg"), k + ".tx_az_deg"),
                                   config_value<std::vector<double>>(v.at("rx_az_deg"), k + ".rx_az_deg"),
                                   config_value<std::vector<double>>(v.at("rx_coel_deg"), k + ".rx_coel_deg"));
        else if (key == "links")
        {
            s.links.clear();
            for (const auto &l : v)
            {
                LinkGeometry g{config_value<std::string>(l.at("rx_id"), k + ".rx_id"),
                               config_value<double>(l.at("distance_m"), k + ".distance_m"),
                               parse_los_class(config_value<std::string>(l.at("los_class"), k + ".los_class"))};
                g.validate();
                s.links.push_back(std::move(g));
            }
        }
        else if (key == "system_response")
            s.system_response = config_value<bool>(v, k);
        else
            throw ValidationError("config: unknown field '" + k + "'");
    }
    if (f_start || f_stop || f_n)
        s.grid = FrequencyGrid(f_start.value_or(s.grid.start_hz()), f_stop.value_or(s.grid.stop_hz()),
                               f_n.value_or(s.grid.n_points()));
}

} // namespace detail

// Applies a JSON config document on top of `cfg`. Unknown fields are refused.
inline void apply_config_json(RunConfig &cfg, const nlohmann::json &j)
{
    using detail::config_value;
    if (!j.is_object())
        throw ValidationError("config: top level must be a JSON object");
    try
    {
        for (const auto &[key, v] : j.items())
        {
            if (key == "input")
                cfg.input = config_value<std::string>(v, key);
            else if (key == "output")
                cfg.output = config_value<std::string>(v, key);
            else if (key == "bands")
                cfg.bands = config_value<std::string>(v, key);
            else if (key == "window")
                cfg.pdp.window = parse_window(config_value<std::string>(v, key));
            else if (key == "pl_window")
                cfg.pl_window = parse_window(config_value<std::string>(v, key));
            else if (key == "oversample")
                cfg.pdp.oversample_factor = config_value<std::size_t>(v, key);
            else if (key == "gate_ns")
                cfg.pdp.gate_delay_s = config_value<double>(v, key) * 1e-9;
            else if (key == "threshold_db")
                cfg.pdp.threshold_below_peak_db = config_value<double>(v, key);
            else if (key == "weighting")
                cfg.weighting.scheme = parse_weighting(config_value<std::string>(v, key));
            else if (key == "bin_decades")
                cfg.weighting.bin_decades = config_value<double>(v, key);
            else if (key == "gain_table")
                cfg.gain_table = config_value<std::string>(v, key);
            else if (key == "seed")
                cfg.seed = config_value<std::uint64_t>(v, key);
            else if (key == "dumps")
                cfg.dumps = config_value<bool>(v, key);
            else if (key == "trials")
                cfg.trials = config_value<std::size_t>(v, key);
            else if (key == "synth")
                detail::apply_synth_json(cfg.synth, v);
            else
                throw ValidationError("config: unknown field '" + key + "'");
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

inline void load_config_file(RunConfig &cfg, const fs::path &path)
{
    if (!fs::exists(path))
        throw ValidationError("config file '" + path.string() + "' does not exist");
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(io::read_text_file(path));
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
    apply_config_json(cfg, j);
}

// ---- shared stages -----------------------------------------------------------------------------

inline std::vector<SubBand> resolve_bands(const RunConfig &cfg, const FrequencyGrid &grid)
{
    auto bands = cfg.bands.empty() ? default_subbands(grid) : parse_band_list(cfg.bands, grid);
    for (const auto &b : bands)
        subband_indices(grid, b); // throws when an edge is off the grid
    return bands;
}

inline void require_input(const RunConfig &cfg)
{
    if (cfg.input.empty())
        throw ValidationError("--input is required");
    if (!fs::exists(cfg.input))
        throw ValidationError("input '" + cfg.input.string() + "' does not exist");
}

inline void require_output(const RunConfig &cfg)
{
    if (cfg.output.empty())
        throw ValidationError("--output is required");
}

// Receiver ids become directory names; anything but [A-Za-z0-9._-] is replaced.
inline std::string path_component(const std::string &s)
{
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    if (out.empty() || out == "." || out == "..")
        out = "_" + out;
    return out;
}

inline void write_link_dumps(const fs::path &dir, const LinkResult &r)
{
    const fs::path base = dir / "dumps" / path_component(r.geometry.rx_id);
    for (const auto &b : r.bands)
    {
        const fs::path d = base / band_slug(b.band.label());
        io::write_file_atomic(d / "omni_pdp.csv", pdp_csv(b.omni_ds.pdp));
        io::write_file_atomic(d / "maxdir_pdp.csv", pdp_csv(b.maxdir_ds));
        for (auto end : {AngularEnd::TxAz, AngularEnd::RxAz, AngularEnd::RxEl})
            io::write_file_atomic(d / ("aps_" + to_string(end) + ".csv"),
                                  aps_csv(end_angles_deg(b.ddaps.angles, end), marginal_aps(b.ddaps, end)));
    }
}

// Calibrates and processes every link of the set in `dir`, one link in memory at a time.
inline std::vector<CondensedLinkParams> condense_set(const fs::path &dir, const RunConfig &cfg,
                                                     const std::function<void(const LinkResult &)> &on_link = {})
{
    const Manifest m = read_manifest(dir);
    if (m.links.empty())
        throw ValidationError((dir / "manifest.json").string() + ": no links");
    const auto bands = resolve_bands(cfg, m.grid);
    const auto opts = cfg.pipeline_options();
    for (const auto &b : bands)
        opts.gains.correction_db(b.center_hz());
    const CalibrationTrace ota = load_calibration(dir, m);

    std::vector<CondensedLinkParams> rows;
    for (std::size_t i = 0; i < m.links.size(); ++i)
    {
        const auto r = process_link(calibrate(load_link_tensor(dir, m, i), ota), m.links[i].geometry, bands, opts);
        for (const auto &b : r.bands)
            rows.push_back(b.params);
        if (on_link)
            on_link(r);
    }
    return rows;
}

inline nlohmann::ordered_json metadata_json(const RunConfig &cfg, const Manifest &m, std::span<const SubBand> bands)
{
    const auto opts = cfg.pipeline_options();
    nlohmann::ordered_json j;
    j["tool"] = "uwbchan";
    j["version"] = tool_version;
    j["processing"] = {{"path_loss_window", to_string(cfg.pl_window)},
                       {"delay_spread_window", to_string(cfg.pdp.window)},
                       {"oversample_factor", cfg.pdp.oversample_factor},
                       {"gate_delay_s", cfg.pdp.gate_delay_s},
                       {"threshold_below_peak_db", cfg.pdp.threshold_below_peak_db},
                       {"delay_step", "1 / (oversample_factor * n_points * spacing_hz)"},
                       {"gating", "bin kept if delay <= gate and power >= peak * 10^(-threshold/10)"},
                       {"maxdir_selection", "largest gated total under the path-loss window; ties go to the smallest "
                                            "(tx, rx, coel) index"},
                       {"maxdir_delay_spread", "delay-spread-window profile of the Max-Dir beam"},
                       {"omni", "per-bin maximum over azimuth pairs of co-elevation sums, divided by the gain "
                                "correction"},
                       {"gain_correction", "linear interpolation in dB at the band centre"},
                       {"all_bands", "full grid processed as one band"},
                       {"ddaps", "gated total per beam under the path-loss window"},
                       {"as_tx_az", "Tx azimuth marginal, summed over Rx azimuth and co-elevation"},
                       {"as_rx_az", "Rx azimuth marginal, summed over Tx azimuth and co-elevation"},
                       {"as_rx_el", "Rx co-elevation marginal, summed over both azimuths"}};
    nlohmann::ordered_json gains = nlohmann::ordered_json::array();
    for (const auto &e : opts.gains.entries())
        gains.push_back({{"freq_hz", e.freq_hz}, {"correction_db", e.correction_db}});
    j["gain_table"] = gains;
    j["fitting"] = {{"model", "value = alpha + 10 beta log10(d / 1 m) + eps"},
                    {"weighting", to_string(cfg.weighting.scheme)},
                    {"bin_decades", cfg.weighting.bin_decades},
                    {"effective_sample_size", "(sum w)^2 / sum w^2"},
                    {"intervals", "95 %, Student t and chi-square with n_eff - 2 degrees of freedom, sandwich "
                                  "coefficient variance"},
                    {"rmsds_unit", "dB-seconds"},
                    {"angular_spread_unit", "linear Fleury spread"}};
    j["input"] = {{"frequency", {{"start_hz", m.grid.start_hz()}, {"stop_hz", m.grid.stop_hz()},
                                 {"n_points", m.grid.n_points()}}},
                  {"n_beams", m.angles.n_beams()},
                  {"n_links", m.links.size()}};
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (const auto &b : bands)
        labels.push_back(b.label());
    j["bands"] = labels;
    return j;
}

inline FitTables read_fits_json(const fs::path &path)
{
    if (!fs::exists(path))
        throw ValidationError("'" + path.string() + "' does not exist");
    try
    {
        return fits_from_json(nlohmann::ordered_json::parse(io::read_text_file(path)));
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

// "All Bands" first, then by lower band edge.
inline double band_rank(const std::string &label)
{
    if (label == "All Bands")
        return -1.0;
    try
    {
        return std::stod(label);
    }
    catch (const std::logic_error &)
    {
        return 1e300;
    }
}

inline std::string format_report(const FitTables &tables)
{
    auto by_band = [](const auto &a, const auto &b) { return band_rank(a.band) < band_rank(b.band); };
    auto ci = [](double v, const ConfidenceInterval &c) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%9.3f [%9.3f, %9.3f]", v, c.lo, c.hi);
        return std::string(buf);
    };
    auto row = [](const std::string &band) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%-11s", band.c_str());
        return std::string(buf);
    };

    std::string out;
    for (const auto &m : fitted_metrics())
    {
        std::vector<PowerLawFit> lin;
        for (const auto &f : tables.linear)
            if (f.metric_id == m.id)
                lin.push_back(f);
        std::stable_sort(lin.begin(), lin.end(), by_band);
        out += std::string(m.id) + ": alpha + 10 beta log10(d)\n";
        out += "band       " "  alpha [95% CI]                " "  beta [95% CI]                 " "  sigma [95% CI]\n";
        for (const auto &f : lin)
            out += row(f.band) + ci(f.alpha, f.alpha_ci) + "  " + ci(f.beta, f.beta_ci) + "  " +
                   ci(f.sigma_shadow, f.sigma_ci) + "\n";
        out += "\n";
        if (!m.normal_fit)
            continue;
        std::vector<NormalFit> nor;
        for (const auto &f : tables.normal)
            if (f.metric_id == m.id)
                nor.push_back(f);
        std::stable_sort(nor.begin(), nor.end(), by_band);
        out += std::string(m.id) + ": normal\n";
        out += "band       " "  mu [95% CI]                   " "  sigma [95% CI]\n";
        for (const auto &f : nor)
            out += row(f.band) + ci(f.mu, f.mu_ci) + "  " + ci(f.sigma, f.sigma_ci) + "\n";
        out += "\n";
    }
    for (const auto &s : tables.skipped)
        out += "skipped " + s + "\n";
    return out;
}

// ---- commands ----------------------------------------------------------------------------------

// Writes the calibrated set (H / H_OTA) with a unit OTA trace.
inline void cmd_calibrate(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_input(cfg);
    require_output(cfg);
    const Manifest m = read_manifest(cfg.input);
    const CalibrationTrace ota = load_calibration(cfg.input, m);
    write_calibration(cfg.output, m, CalibrationTrace::identity(m.grid, m.ota_distance_m));
    for (std::size_t i = 0; i < m.links.size(); ++i)
        write_link_tensor(cfg.output, m, i, calibrate(load_link_tensor(cfg.input, m, i), ota));
    write_manifest(cfg.output, m);
    out << "calibrated " << m.links.size() << " links -> " << cfg.output.string() << "\n";
}

// Per-link PDP and APS dumps.
inline void cmd_pdp(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_input(cfg);
    require_output(cfg);
    const auto rows = condense_set(cfg.input, cfg, [&](const LinkResult &r) { write_link_dumps(cfg.output, r); });
    out << "wrote dumps for " << rows.size() << " (link, band) pairs -> " << (cfg.output / "dumps").string() << "\n";
}

inline void cmd_condense(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_input(cfg);
    require_output(cfg);
    const auto rows = condense_set(cfg.input, cfg);
    io::write_file_atomic(cfg.output / "condensed.csv", condensed_csv(rows));
    out << "wrote " << rows.size() << " rows -> " << (cfg.output / "condensed.csv").string() << "\n";
}

// Input: condensed.csv or a directory holding it.
inline void cmd_fit(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_input(cfg);
    require_output(cfg);
    const fs::path csv = fs::is_directory(cfg.input) ? cfg.input / "condensed.csv" : cfg.input;
    if (!fs::exists(csv))
        throw ValidationError("'" + csv.string() + "' does not exist");
    const auto rows = read_condensed_csv(csv);
    if (rows.empty())
        throw ValidationError(csv.string() + ": no links");
    const auto tables = fit_tables(rows, cfg.weighting);
    save_results(tables, cfg.output);
    out << "fitted " << tables.linear.size() << " power laws and " << tables.normal.size() << " normal models -> "
        << cfg.output.string() << "\n";
}

// Input: fits.json or a directory holding it. Writes report.txt and echoes it.
inline void cmd_report(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_input(cfg);
    const fs::path path = fs::is_directory(cfg.input) ? cfg.input / "fits.json" : cfg.input;
    const std::string text = format_report(read_fits_json(path));
    if (!cfg.output.empty())
        io::write_file_atomic(cfg.output / "report.txt", text);
    out << text;
}

inline void cmd_process(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_input(cfg);
    require_output(cfg);
    const Manifest m = read_manifest(cfg.input);
    const auto bands = resolve_bands(cfg, m.grid);
    const auto rows = condense_set(cfg.input, cfg, [&](const LinkResult &r) {
        if (cfg.dumps)
            write_link_dumps(cfg.output, r);
    });
    io::write_file_atomic(cfg.output / "condensed.csv", condensed_csv(rows));
    const auto tables = fit_tables(rows, cfg.weighting);
    save_results(tables, cfg.output);
    io::write_file_atomic(cfg.output / "report.txt", format_report(tables));
    io::write_file_atomic(cfg.output / "metadata.json", metadata_json(cfg, m, bands).dump(2) + "\n");
    out << "processed " << m.links.size() << " links x " << bands.size() << " bands -> " << cfg.output.string()
        << "\n";
}

// ---- synthetic sets ----------------------------------------------------------------------------

struct TruthLink
{
    LinkGeometry geometry;
    std::uint64_t stream_index = 0;
    double shadowing_db = 0.0;
    double path_loss_db = 0.0;
    double rmsds_target_dbs = 0.0;
    double rmsds_s = 0.0;
    std::vector<double> tap_delays_s;
    std::vector<double> tap_powers;
    double as_tx_az = 0.0; // realized Fleury spreads of the placement
    double as_rx_az = 0.0;
    double as_rx_el = 0.0;
    std::vector<SyntheticMpc> mpcs;
};

struct Truth
{
    ModelParams model;
    HornPatternModel pattern;
    std::size_t n_taps = 0;
    std::vector<TruthLink> links;
};

inline TruthLink truth_link(const LinkGeometry &g, std::uint64_t index, const LinkRealization &r)
{
    return {g,         index,          r.shadowing_db,         r.path_loss_db,         r.rmsds_target_dbs,
            r.rmsds_s, r.tap_delays_s, r.tap_powers,           r.tx_az.realized_sigma, r.rx_az.realized_sigma,
            r.rx_el.realized_sigma, r.mpcs};
}

inline nlohmann::ordered_json truth_to_json(const Truth &t)
{
    using detail::json_number;
    const auto &m = t.model;
    auto opt = [&](const std::optional<double> &v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["format"] = "uwbchan-truth";
    j["version"] = 1;
    j["model"] = {{"alpha", m.alpha},
                  {"beta", m.beta},
                  {"sigma_shadow_db", m.sigma_shadow_db},
                  {"rmsds_mu_dbs", m.rmsds_mu_dbs},
                  {"rmsds_sigma_dbs", m.rmsds_sigma_dbs},
                  {"as_targets", {{"tx_az", opt(m.as_targets.tx_az)}, {"rx_az", opt(m.as_targets.rx_az)},
                                  {"rx_el", opt(m.as_targets.rx_el)}}},
                  {"seed", m.seed},
                  {"first_tap_delay_s", m.first_tap_delay_s},
                  {"max_excess_delay_s", m.max_excess_delay_s},
                  {"power_span_db", m.power_span_db},
                  {"spacing_growth", m.spacing_growth}};
    j["pattern"] = {{"kind", to_string(t.pattern.kind)},
                    {"hpbw_az_deg", t.pattern.hpbw_az_deg},
                    {"hpbw_el_deg", t.pattern.hpbw_el_deg},
                    {"peak_gain_db", t.pattern.peak_gain_db}};
    j["n_taps"] = t.n_taps;
    j["links"] = nlohmann::ordered_json::array();
    for (const auto &l : t.links)
    {
        nlohmann::ordered_json mpcs = nlohmann::ordered_json::array();
        for (const auto &p : l.mpcs)
            mpcs.push_back({p.delay_s, p.power, p.tx_az_deg, p.rx_az_deg, p.rx_coel_deg, p.phase_rad});
        j["links"].push_back({{"rx_id", l.geometry.rx_id},
                              {"distance_m", l.geometry.distance_m},
                              {"los_class", to_string(l.geometry.los_class)},
                              {"stream_index", l.stream_index},
                              {"shadowing_db", l.shadowing_db},
                              {"path_loss_db", l.path_loss_db},
                              {"rmsds_target_dbs", json_number(l.rmsds_target_dbs)},
                              {"rmsds_s", l.rmsds_s},
                              {"tap_delays_s", l.tap_delays_s},
                              {"tap_powers", l.tap_powers},
                              {"as_realized", {{"tx_az", l.as_tx_az}, {"rx_az", l.as_rx_az}, {"rx_el", l.as_rx_el}}},
                              {"mpc_columns", "delay_s,power,tx_az_deg,rx_az_deg,rx_coel_deg,phase_rad"},
                              {"mpcs", mpcs}});
    }
    return j;
}

inline Truth read_truth(const fs::path &path)
{
    const std::string file = path.string();
    if (!fs::exists(path))
        throw ValidationError(file + ": missing truth file");
    try
    {
        const auto j = nlohmann::json::parse(io::read_text_file(path));
        if (j.at("format").get<std::string>() != "uwbchan-truth" || j.at("version").get<int>() != 1)
            throw ValidationError(file + ": not a version 1 truth file");
        Truth t;
        const auto &m = j.at("model");
        t.model.alpha = m.at("alpha").get<double>();
        t.model.beta = m.at("beta").get<double>();
        t.model.sigma_shadow_db = m.at("sigma_shadow_db").get<double>();
        t.model.rmsds_mu_dbs = m.at("rmsds_mu_dbs").get<double>();
        t.model.rmsds_sigma_dbs = m.at("rmsds_sigma_dbs").get<double>();
        auto opt = [](const nlohmann::json &v) {
            return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        };
        t.model.as_targets = {opt(m.at("as_targets").at("tx_az")), opt(m.at("as_targets").at("rx_az")),
                              opt(m.at("as_targets").at("rx_el"))};
        t.model.seed = m.at("seed").get<std::uint64_t>();
        t.model.first_tap_delay_s = m.at("first_tap_delay_s").get<double>();
        t.model.max_excess_delay_s = m.at("max_excess_delay_s").get<double>();
        t.model.power_span_db = m.at("power_span_db").get<double>();
        t.model.spacing_growth = m.at("spacing_growth").get<double>();
        const auto &p = j.at("pattern");
        t.pattern.kind = parse_pattern_kind(p.at("kind").get<std::string>());
        t.pattern.hpbw_az_deg = p.at("hpbw_az_deg").get<double>();
        t.pattern.hpbw_el_deg = p.at("hpbw_el_deg").get<double>();
        t.pattern.peak_gain_db = p.at("peak_gain_db").get<double>();
        t.n_taps = j.at("n_taps").get<std::size_t>();
        for (const auto &l : j.at("links"))
        {
            TruthLink tl;
            tl.geometry = {l.at("rx_id").get<std::string>(), l.at("distance_m").get<double>(),
                           parse_los_class(l.at("los_class").get<std::string>())};
            tl.stream_index = l.at("stream_index").get<std::uint64_t>();
            tl.shadowing_db = l.at("shadowing_db").get<double>();
            tl.path_loss_db = l.at("path_loss_db").get<double>();
            tl.rmsds_target_dbs = detail::number_from_json(l.at("rmsds_target_dbs"), file);
            tl.rmsds_s = l.at("rmsds_s").get<double>();
            tl.tap_delays_s = l.at("tap_delays_s").get<std::vector<double>>();
            tl.tap_powers = l.at("tap_powers").get<std::vector<double>>();
            if (tl.tap_delays_s.empty() || tl.tap_delays_s.size() != tl.tap_powers.size())
                throw ValidationError(file + ": link '" + tl.geometry.rx_id + "' has inconsistent tap lists");
            tl.as_tx_az = l.at("as_realized").at("tx_az").get<double>();
            tl.as_rx_az = l.at("as_realized").at("rx_az").get<double>();
            tl.as_rx_el = l.at("as_realized").at("rx_el").get<double>();
            for (const auto &row : l.at("mpcs"))
            {
                const auto v = row.get<std::vector<double>>();
                if (v.size() != 6)
                    throw ValidationError(file + ": MPC rows need 6 values");
                tl.mpcs.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
            }
            tl.geometry.validate();
            t.links.push_back(std::move(tl));
        }
        t.model.validate();
        return t;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ValidationError(file + ": cannot parse truth file: " + e.what());
    }
}

// Smooth stand-in for a sounder response: ripple plus a fixed cable delay.
inline std::vector<cdouble> synthetic_system_response(const FrequencyGrid &grid)
{
    std::vector<cdouble> r(grid.n_points());
    for (std::size_t i = 0; i < r.size(); ++i)
    {
        const double f = grid.frequency(i);
        const double mag = 0.5 * (1.0 + 0.25 * std::cos(2.0 * std::numbers::pi * (f - grid.start_hz()) / 1.7e9));
        const double cycles = f * 3.3e-9;
        r[i] = std::polar(mag, -2.0 * std::numbers::pi * (cycles - std::floor(cycles)));
    }
    return r;
}

struct SynthLink
{
    TruthLink truth;
    FrequencyScanTensor measured;
};

// Draws and renders link `index` of the synthetic set (not calibrated: the
// optional system response is applied).
inline SynthLink synth_link(const SynthConfig &s, const ModelParams &model, std::size_t index,
                            const std::vector<cdouble> *system_response)
{
    const auto r = sample_link(model, s.links[index], s.n_taps, s.angles, index);
    auto t = render_tensor(r.mpcs, s.grid, s.angles, s.pattern);
    if (system_response)
    {
        std::vector<cdouble> v = std::move(t).release_values();
        const std::size_t nf = s.grid.n_points();
        for (std::size_t off = 0; off < v.size(); off += nf)
            for (std::size_t i = 0; i < nf; ++i)
                v[off + i] *= (*system_response)[i];
        t = FrequencyScanTensor(s.grid, s.angles, std::move(v));
    }
    return {truth_link(s.links[index], index, r), std::move(t)};
}

inline void cmd_synth(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_output(cfg);
    const SynthConfig &s = cfg.synth;
    if (s.links.empty())
        throw ValidationError("synth: link list is empty");
    ModelParams model = s.model;
    model.seed = cfg.seed;
    model.validate();

    Manifest m{s.grid, s.angles, "ota.bin", 56.45, {}};
    for (const auto &g : s.links)
        m.links.push_back({g, path_component(g.rx_id) + ".bin"});
    const auto response = s.system_response ? synthetic_system_response(s.grid)
                                            : std::vector<cdouble>(s.grid.n_points(), cdouble(1.0, 0.0));
    write_calibration(cfg.output, m, CalibrationTrace(s.grid, response, m.ota_distance_m));

    Truth truth{model, s.pattern, s.n_taps, {}};
    for (std::size_t i = 0; i < s.links.size(); ++i)
    {
        auto link = synth_link(s, model, i, s.system_response ? &response : nullptr);
        write_link_tensor(cfg.output, m, i, link.measured);
        truth.links.push_back(std::move(link.truth));
    }
    write_manifest(cfg.output, m);
    io::write_file_atomic(cfg.output / "truth.json", truth_to_json(truth).dump(2) + "\n");
    out << "synthesized " << s.links.size() << " links (" << s.angles.n_beams() << " beams x " << s.grid.n_points()
        << " points) -> " << cfg.output.string() << "\n";
}

// ---- round trip --------------------------------------------------------------------------------

// Tolerances of the synthetic round trip.
struct RoundtripTolerances
{
    double path_loss_db = 0.01;
    double delay_bins = 1.0;
    double angular_spread = 0.02;
    double fit_line_db = 0.01;
    double coverage = 0.90;
    std::size_t min_trials_for_coverage = 50; // fewer trials: coverage is reported, not judged
    double resolvable_bins = 4.0;             // tap gaps below this many unpadded bins make per-tap checks informational
};

struct RoundtripCheck
{
    std::string name;
    std::string scope;
    double value = 0.0;
    double tolerance = 0.0;
    std::string status; // pass, fail, info

    bool failed() const { return status == "fail"; }
};

namespace detail
{

inline bool taps_resolvable(const TruthLink &t, const SubBand &band, double bins)
{
    auto d = t.tap_delays_s;
    std::sort(d.begin(), d.end());
    for (std::size_t i = 1; i < d.size(); ++i)
        if (d[i] - d[i - 1] < bins / band.width_hz())
            return false;
    return true;
}

inline double peak_delay(const PowerDelayProfile &pdp)
{
    std::size_t best = 0;
    double p = -1.0;
    for (std::size_t k = 0; k < pdp.size(); ++k)
        if (pdp.kept_power(k) > p)
        {
            p = pdp.kept_power(k);
            best = k;
        }
    return pdp.delay(best);
}

// Worst-case accumulator for one (check, band) line.
struct Worst
{
    double value = 0.0;
    bool judged = true;
    bool any = false;

    void add(double v, bool gating)
    {
        value = any ? std::max(value, v) : v;
        judged = any ? (judged && gating) : gating;
        any = true;
    }
};

} // namespace detail

struct RoundtripState
{
    std::vector<std::string> band_order;
    std::map<std::string, detail::Worst> link_checks; // key "name|band"
    std::map<std::string, std::size_t> covered;       // per band
    std::map<std::string, std::size_t> fitted;        // per band
    std::map<std::string, detail::Worst> fit_line;    // per band, noiseless only
};

inline void roundtrip_compare(const Truth &truth, std::span<const LinkResult> results, const RunConfig &cfg,
                              const RoundtripTolerances &tol, RoundtripState &st)
{
    const bool ideal = truth.pattern.kind == HornPatternModel::Kind::Ideal;
    std::map<std::string, std::vector<DistanceSample>> pl_by_band;
    for (std::size_t i = 0; i < results.size(); ++i)
    {
        const TruthLink &t = truth.links.at(i);
        if (!(t.geometry == results[i].geometry))
            throw ValidationError("truth file and measurement set list different links");
        for (const auto &b : results[i].bands)
        {
            const std::string band = b.band.label();
            if (std::find(st.band_order.begin(), st.band_order.end(), band) == st.band_order.end())
                st.band_order.push_back(band);
            const bool resolvable = detail::taps_resolvable(t, b.band, tol.resolvable_bins);
            st.link_checks["path_loss_db|" + band].add(std::abs(b.params.pl_total_db - t.path_loss_db), resolvable);

            const auto strongest = std::max_element(t.tap_powers.begin(), t.tap_powers.end()) - t.tap_powers.begin();
            const double err_bins =
                std::abs(detail::peak_delay(b.maxdir_pl) - t.tap_delays_s[strongest]) / b.maxdir_pl.delay_step_s;
            st.link_checks["delay_bins|" + band].add(err_bins, resolvable);

            const std::pair<double, double> as[] = {{b.params.as_tx_az, t.as_tx_az},
                                                    {b.params.as_rx_az, t.as_rx_az},
                                                    {b.params.as_rx_el, t.as_rx_el}};
            const char *names[] = {"as_tx_az", "as_rx_az", "as_rx_el"};
            for (int e = 0; e < 3; ++e)
                st.link_checks[std::string(names[e]) + "|" + band].add(std::abs(as[e].first - as[e].second), ideal);

            if (std::isfinite(t.rmsds_target_dbs))
                st.link_checks["rmsds_omni_dbs|" + band].add(std::abs(b.params.rmsds_omni_dbs - t.rmsds_target_dbs),
                                                             false);
            pl_by_band[band].push_back({t.geometry.distance_m, b.params.pl_total_db});
        }
    }

    const auto &m = truth.model;
    for (const auto &[band, samples] : pl_by_band)
    {
        PowerLawFit fit;
        try
        {
            fit = fit_power_law(samples, cfg.weighting);
        }
        catch (const ValidationError &)
        {
            continue;
        }
        ++st.fitted[band];
        if (fit.alpha_ci.contains(m.alpha) && fit.beta_ci.contains(m.beta))
            ++st.covered[band];
        if (m.sigma_shadow_db == 0.0)
        {
            double worst = 0.0;
            for (const auto &s : samples)
                worst = std::max(worst, std::abs(fit.predict(s.distance_m) -
                                                 (m.alpha + 10.0 * m.beta * std::log10(s.distance_m))));
            bool resolvable = true;
            for (const auto &r : results)
                for (const auto &b : r.bands)
                    if (b.band.label() == band)
                        for (const auto &t : truth.links)
                            if (t.geometry == r.geometry)
                                resolvable = resolvable && detail::taps_resolvable(t, b.band, tol.resolvable_bins);
            st.fit_line[band].add(worst, resolvable);
        }
    }
}

inline std::vector<RoundtripCheck> roundtrip_checks(const RoundtripState &st, const Truth &truth, std::size_t trials,
                                                    const RoundtripTolerances &tol)
{
    std::vector<RoundtripCheck> checks;
    auto status = [](bool judged, bool ok) { return judged ? (ok ? "pass" : "fail") : "info"; };
    const std::pair<const char *, double> link_defs[] = {{"path_loss_db", tol.path_loss_db},
                                                         {"delay_bins", tol.delay_bins},
                                                         {"as_tx_az", tol.angular_spread},
                                                         {"as_rx_az", tol.angular_spread},
                                                         {"as_rx_el", tol.angular_spread},
                                                         {"rmsds_omni_dbs", 0.0}};
    for (const auto &band : st.band_order)
    {
        for (const auto &[name, t] : link_defs)
        {
            const auto it = st.link_checks.find(std::string(name) + "|" + band);
            if (it == st.link_checks.end())
                continue;
            const bool judged = it->second.judged && t > 0.0;
            checks.push_back({name, band, it->second.value, t, status(judged, it->second.value <= t)});
        }
        if (const auto it = st.fit_line.find(band); it != st.fit_line.end())
            checks.push_back({"fit_line_db", band, it->second.value, tol.fit_line_db,
                              status(it->second.judged, it->second.value <= tol.fit_line_db)});
        if (truth.model.sigma_shadow_db > 0.0 && st.fitted.count(band))
        {
            const double cov = double(st.covered.count(band) ? st.covered.at(band) : 0) / double(st.fitted.at(band));
            checks.push_back({"ci_coverage", band, cov, tol.coverage,
                              status(trials >= tol.min_trials_for_coverage, cov >= tol.coverage)});
        }
    }
    return checks;
}

inline std::string format_checks(const std::vector<RoundtripCheck> &checks)
{
    std::string out = "check            band        value         tolerance     status\n";
    for (const auto &c : checks)
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-16s %-11s %-13.6g %-13.6g %s\n", c.name.c_str(), c.scope.c_str(), c.value,
                      c.tolerance, c.status.c_str());
        out += buf;
    }
    return out;
}

// Synthesizes a set, processes it and compares against the generating truth.
// With --input the existing set and its truth.json are used instead (one trial).
// Trial t uses seed + t; trial 0 goes through the files on disk, later trials
// stay in memory. Returns exit_tolerance when a judged check fails.
inline int cmd_roundtrip(const RunConfig &cfg, std::ostream &out = std::cout)
{
    require_output(cfg);
    const RoundtripTolerances tol;
    RoundtripState st;

    fs::path set_dir = cfg.input;
    const bool synthesize = cfg.input.empty();
    const std::size_t trials = synthesize ? std::max<std::size_t>(cfg.trials, 1) : 1;
    if (synthesize)
    {
        set_dir = cfg.output / "synth";
        RunConfig s = cfg;
        s.output = set_dir;
        cmd_synth(s, out);
    }
    else
        require_input(cfg);

    const Truth truth = read_truth(set_dir / "truth.json");
    std::vector<LinkResult> results;
    {
        RunConfig p = cfg;
        p.input = set_dir;
        p.output = cfg.output / "results";
        const Manifest m = read_manifest(set_dir);
        const auto bands = resolve_bands(p, m.grid);
        const auto rows = condense_set(set_dir, p, [&](const LinkResult &r) {
            if (p.dumps)
                write_link_dumps(p.output, r);
            results.push_back(r);
        });
        io::write_file_atomic(p.output / "condensed.csv", condensed_csv(rows));
        const auto tables = fit_tables(rows, p.weighting);
        save_results(tables, p.output);
        io::write_file_atomic(p.output / "report.txt", format_report(tables));
        io::write_file_atomic(p.output / "metadata.json", metadata_json(p, m, bands).dump(2) + "\n");
    }
    if (results.size() != truth.links.size())
        throw ValidationError("truth file lists " + std::to_string(truth.links.size()) + " links, the set holds " +
                              std::to_string(results.size()));
    roundtrip_compare(truth, results, cfg, tol, st);

    if (trials > 1)
    {
        const SynthConfig &s = cfg.synth;
        const auto bands = resolve_bands(cfg, s.grid);
        const auto opts = cfg.pipeline_options();
        const auto response = synthetic_system_response(s.grid);
        const CalibrationTrace ota(s.grid, response, 56.45);
        for (std::size_t trial = 1; trial < trials; ++trial)
        {
            ModelParams model = s.model;
            model.seed = cfg.seed + trial;
            Truth t{model, s.pattern, s.n_taps, {}};
            std::vector<LinkResult> rs;
            for (std::size_t i = 0; i < s.links.size(); ++i)
            {
                auto link = synth_link(s, model, i, s.system_response ? &response : nullptr);
                auto h = s.system_response ? calibrate(std::move(link.measured), ota) : std::move(link.measured);
                rs.push_back(process_link(h, s.links[i], bands, opts));
                t.links.push_back(std::move(link.truth));
            }
            roundtrip_compare(t, rs, cfg, tol, st);
        }
    }

    const auto checks = roundtrip_checks(st, truth, trials, tol);
    const std::string table = format_checks(checks);
    nlohmann::ordered_json j;
    j["trials"] = trials;
    j["checks"] = nlohmann::ordered_json::array();
    bool failed = false;
    for (const auto &c : checks)
    {
        j["checks"].push_back({{"check", c.name},
                               {"band", c.scope},
                               {"value", detail::json_number(c.value)},
                               {"tolerance", c.tolerance},
                               {"status", c.status}});
        failed = failed || c.failed();
    }
    j["result"] = failed ? "fail" : "pass";
    io::write_file_atomic(cfg.output / "roundtrip.json", j.dump(2) + "\n");
    io::write_file_atomic(cfg.output / "roundtrip.txt", table);
    out << table << (failed ? "roundtrip: FAIL\n" : "roundtrip: PASS\n");
    return failed ? exit_tolerance : exit_ok;
}

// ---- error reporting ---------------------------------------------------------------------------

inline void report_error(std::ostream &err, const char *kind, int code, const std::string &message)
{
    nlohmann::ordered_json j;
    j["error"] = {{"kind", kind}, {"exit_code", code}, {"message", message}};
    err << j.dump() << "\n";
}

// Runs `fn` and maps exceptions to exit codes: 2 validation, 3 numerical (outage included).
inline int run_guarded(const std::function<int()> &fn, std::ostream &err = std::cerr)
{
    try
    {
        return fn();
    }
    catch (const OutageError &e)
    {
        report_error(err, "outage", exit_numerical, e.what());
        return exit_numerical;
    }
    catch (const NumericalError &e)
    {
        report_error(err, "numerical", exit_numerical, e.what());
        return exit_numerical;
    }
    catch (const ValidationError &e)
    {
        report_error(err, "validation", exit_validation, e.what());
        return exit_validation;
    }
    catch (const fs::filesystem_error &e)
    {
        report_error(err, "io", exit_validation, e.what());
        return exit_validation;
    }
    catch (const std::exception &e)
    {
        report_error(err, "internal", 1, e.what());
        return 1;
    }
}

} // namespace uwbchan

#endif
