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

// Result files
// ------------
// <metric>_linear.csv     frequency,alpha_lo,alpha,alpha_hi,beta_lo,beta,beta_hi
// <metric>_shadowing.csv  frequency,sigma_lo,sigma,sigma_hi          (path-loss metrics)
// <metric>_normal.csv     frequency,mu_lo,mu,mu_hi,sigma_lo,sigma,sigma_hi
// fits.json               {"fits": {<metric>: {<band>: {"linear": {..}, "normal": {..}}}}}
// condensed.csv           one row per (link, band), columns in condensed_columns()
//
// Numbers are written in shortest round-trip form; non-finite values as nan / inf / -inf.

#ifndef UWBCHAN_RESULTS_IO_HPP
#define UWBCHAN_RESULTS_IO_HPP

#include "io_util.hpp"
#include "pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace uwbchan
{

inline const std::string power_law_csv_header = "frequency,alpha_lo,alpha,alpha_hi,beta_lo,beta,beta_hi";
inline const std::string shadowing_csv_header = "frequency,sigma_lo,sigma,sigma_hi";
inline const std::string normal_csv_header = "frequency,mu_lo,mu,mu_hi,sigma_lo,sigma,sigma_hi";

namespace detail
{

inline void append_row(std::string &out, const std::string &label, std::initializer_list<double> values)
{
    out += label;
    for (double v : values)
    {
        out += ',';
        io::append_double(out, v);
    }
    out += '\n';
}

inline nlohmann::ordered_json json_number(double v)
{
    if (std::isfinite(v))
        return v;
    return io::format_double(v);
}

inline double number_from_json(const nlohmann::ordered_json &j, const std::string &context)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string())
        return io::parse_double(j.get<std::string>(), context);
    throw ValidationError(context + ": expected a number");
}

inline void expect_header(const std::vector<std::vector<std::string>> &rows, const std::string &header,
                          const std::filesystem::path &path)
{
    if (rows.empty())
        throw ValidationError(path.string() + ": empty file");
    std::string got;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        got += (i ? "," : "") + rows[0][i];
    if (got != header)
        throw ValidationError(path.string() + ": unexpected header '" + got + "'");
}

} // namespace detail

inline std::string power_law_csv(std::span<const PowerLawFit> fits)
{
    std::string out = power_law_csv_header + "\n";
    for (const auto &f : fits)
        detail::append_row(out, f.band, {f.alpha_ci.lo, f.alpha, f.alpha_ci.hi, f.beta_ci.lo, f.beta, f.beta_ci.hi});
    return out;
}

inline std::string shadowing_csv(std::span<const PowerLawFit> fits)
{
    std::string out = shadowing_csv_header + "\n";
    for (const auto &f : fits)
        detail::append_row(out, f.band, {f.sigma_ci.lo, f.sigma_shadow, f.sigma_ci.hi});
    return out;
}

inline std::string normal_csv(std::span<const NormalFit> fits)
{
    std::string out = normal_csv_header + "\n";
    for (const auto &f : fits)
        detail::append_row(out, f.band, {f.mu_ci.lo, f.mu, f.mu_ci.hi, f.sigma_ci.lo, f.sigma, f.sigma_ci.hi});
    return out;
}

inline std::vector<PowerLawFit> read_power_law_csv(const std::filesystem::path &path)
{
    const auto rows = io::read_csv(path);
    detail::expect_header(rows, power_law_csv_header, path);
    std::vector<PowerLawFit> fits;
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        if (rows[r].size() != 7)
            throw ValidationError(path.string() + ": row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " columns");
        auto num = [&](std::size_t c) { return io::parse_double(rows[r][c], path.string()); };
        PowerLawFit f;
        f.band = rows[r][0];
        f.alpha_ci = {num(1), num(3)};
        f.alpha = num(2);
        f.beta_ci = {num(4), num(6)};
        f.beta = num(5);
        fits.push_back(std::move(f));
    }
    return fits;
}

inline std::vector<NormalFit> read_normal_csv(const std::filesystem::path &path)
{
    const auto rows = io::read_csv(path);
    detail::expect_header(rows, normal_csv_header, path);
    std::vector<NormalFit> fits;
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        if (rows[r].size() != 7)
            throw ValidationError(path.string() + ": row " + std::to_string(r) + " has the wrong column count");
        auto num = [&](std::size_t c) { return io::parse_double(rows[r][c], path.string()); };
        NormalFit f;
        f.band = rows[r][0];
        f.mu_ci = {num(1), num(3)};
        f.mu = num(2);
        f.sigma_ci = {num(4), num(6)};
        f.sigma = num(5);
        fits.push_back(std::move(f));
    }
    return fits;
}

inline nlohmann::ordered_json fits_to_json(const FitTables &tables)
{
    using detail::json_number;
    nlohmann::ordered_json j;
    j["fits"] = nlohmann::ordered_json::object();
    for (const auto &f : tables.linear)
        j["fits"][f.metric_id][f.band]["linear"] = {
            {"alpha", json_number(f.alpha)},
            {"alpha_ci", {json_number(f.alpha_ci.lo), json_number(f.alpha_ci.hi)}},
            {"beta", json_number(f.beta)},
            {"beta_ci", {json_number(f.beta_ci.lo), json_number(f.beta_ci.hi)}},
            {"sigma_shadow", json_number(f.sigma_shadow)},
            {"sigma_ci", {json_number(f.sigma_ci.lo), json_number(f.sigma_ci.hi)}},
            {"n_points", f.n_points},
            {"n_eff", json_number(f.n_eff)},
            {"weighting", to_string(f.weighting.scheme)},
            {"bin_decades", f.weighting.bin_decades}};
    for (const auto &f : tables.normal)
        j["fits"][f.metric_id][f.band]["normal"] = {{"mu", json_number(f.mu)},
                                                   {"mu_ci", {json_number(f.mu_ci.lo), json_number(f.mu_ci.hi)}},
                                                   {"sigma", json_number(f.sigma)},
                                                   {"sigma_ci", {json_number(f.sigma_ci.lo), json_number(f.sigma_ci.hi)}},
                                                   {"n", f.n}};
    j["skipped"] = tables.skipped;
    return j;
}

inline FitTables fits_from_json(const nlohmann::ordered_json &j)
{
    FitTables t;
    if (!j.contains("fits") || !j["fits"].is_object())
        throw ValidationError("fits document: missing 'fits' object");
    auto num = [](const nlohmann::ordered_json &v, const std::string &ctx) { return detail::number_from_json(v, ctx); };
    for (const auto &[metric, bands] : j["fits"].items())
        for (const auto &[band, kinds] : bands.items())
        {
            const std::string ctx = "fits/" + metric + "/" + band;
            if (kinds.contains("linear"))
            {
                const auto &l = kinds["linear"];
                PowerLawFit f;
                f.metric_id = metric;
                f.band = band;
                f.alpha = num(l.at("alpha"), ctx);
                f.alpha_ci = {num(l.at("alpha_ci")[0], ctx), num(l.at("alpha_ci")[1], ctx)};
                f.beta = num(l.at("beta"), ctx);
                f.beta_ci = {num(l.at("beta_ci")[0], ctx), num(l.at("beta_ci")[1], ctx)};
                f.sigma_shadow = num(l.at("sigma_shadow"), ctx);
                f.sigma_ci = {num(l.at("sigma_ci")[0], ctx), num(l.at("sigma_ci")[1], ctx)};
                f.n_points = l.at("n_points").get<std::size_t>();
                f.n_eff = num(l.at("n_eff"), ctx);
                t.linear.push_back(std::move(f));
            }
            if (kinds.contains("normal"))
            {
                const auto &n = kinds["normal"];
                NormalFit f;
                f.metric_id = metric;
                f.band = band;
                f.mu = num(n.at("mu"), ctx);
                f.mu_ci = {num(n.at("mu_ci")[0], ctx), num(n.at("mu_ci")[1], ctx)};
                f.sigma = num(n.at("sigma"), ctx);
                f.sigma_ci = {num(n.at("sigma_ci")[0], ctx), num(n.at("sigma_ci")[1], ctx)};
                f.n = n.at("n").get<std::size_t>();
                t.normal.push_back(std::move(f));
            }
        }
    return t;
}

// Writes one CSV per metric and kind plus fits.json. Every known metric gets
// its files, header-only when it has no rows.
inline void save_results(const FitTables &tables, const std::filesystem::path &dir)
{
    std::vector<std::string> metrics;
    for (const auto &m : fitted_metrics())
        metrics.emplace_back(m.id);
    for (const auto &f : tables.linear)
        if (std::find(metrics.begin(), metrics.end(), f.metric_id) == metrics.end())
            metrics.push_back(f.metric_id);
    for (const auto &f : tables.normal)
        if (std::find(metrics.begin(), metrics.end(), f.metric_id) == metrics.end())
            metrics.push_back(f.metric_id);

    for (const auto &metric : metrics)
    {
        std::vector<PowerLawFit> lin;
        std::vector<NormalFit> nor;
        for (const auto &f : tables.linear)
            if (f.metric_id == metric)
                lin.push_back(f);
        for (const auto &f : tables.normal)
            if (f.metric_id == metric)
                nor.push_back(f);
        io::write_file_atomic(dir / (metric + "_linear.csv"), power_law_csv(lin));
        if (metric.rfind("pl_", 0) == 0)
            io::write_file_atomic(dir / (metric + "_shadowing.csv"), shadowing_csv(lin));
        else
            io::write_file_atomic(dir / (metric + "_normal.csv"), normal_csv(nor));
    }
    io::write_file_atomic(dir / "fits.json", fits_to_json(tables).dump(2) + "\n");
}

// ---- condensed parameters ----------------------------------------------------------------------

inline const std::string condensed_csv_header =
    "rx_id,distance_m,los_class,band,pl_omni_db,pl_maxdir_db,pl_total_db,rmsds_omni_s,rmsds_omni_dbs,"
    "rmsds_maxdir_s,rmsds_maxdir_dbs,as_tx_az,as_rx_az,as_rx_el,maxdir_tx_az_deg,maxdir_rx_az_deg,"
    "maxdir_rx_coel_deg,omni_correction_db";

inline std::string condensed_csv(std::span<const CondensedLinkParams> rows)
{
    std::string out = condensed_csv_header + "\n";
    for (const auto &r : rows)
    {
        out += r.rx_id + ',';
        io::append_double(out, r.distance_m);
        out += ',' + to_string(r.los_class);
        detail::append_row(out, "," + r.band,
                           {r.pl_omni_db, r.pl_maxdir_db, r.pl_total_db, r.rmsds_omni_s, r.rmsds_omni_dbs,
                            r.rmsds_maxdir_s, r.rmsds_maxdir_dbs, r.as_tx_az, r.as_rx_az, r.as_rx_el,
                            r.maxdir_tx_az_deg, r.maxdir_rx_az_deg, r.maxdir_rx_coel_deg, r.omni_correction_db});
    }
    return out;
}

inline std::vector<CondensedLinkParams> read_condensed_csv(const std::filesystem::path &path)
{
    const auto rows = io::read_csv(path);
    detail::expect_header(rows, condensed_csv_header, path);
    std::vector<CondensedLinkParams> out;
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        const auto &c = rows[r];
        if (c.size() != 18)
            throw ValidationError(path.string() + ": row " + std::to_string(r) + " has " + std::to_string(c.size()) +
                                  " columns, expected 18");
        auto num = [&](std::size_t i) { return io::parse_double(c[i], path.string()); };
        CondensedLinkParams p;
        p.rx_id = c[0];
        p.distance_m = num(1);
        p.los_class = parse_los_class(c[2]);
        p.band = c[3];
        p.pl_omni_db = num(4);
        p.pl_maxdir_db = num(5);
        p.pl_total_db = num(6);
        p.rmsds_omni_s = num(7);
        p.rmsds_omni_dbs = num(8);
        p.rmsds_maxdir_s = num(9);
        p.rmsds_maxdir_dbs = num(10);
        p.as_tx_az = num(11);
        p.as_rx_az = num(12);
        p.as_rx_el = num(13);
        p.maxdir_tx_az_deg = num(14);
        p.maxdir_rx_az_deg = num(15);
        p.maxdir_rx_coel_deg = num(16);
        p.omni_correction_db = num(17);
        out.push_back(std::move(p));
    }
    return out;
}

// ---- plot dumps --------------------------------------------------------------------------------

// delay_s,power for every bin up to the last kept one; excluded bins are written as 0.
inline std::string pdp_csv(const PowerDelayProfile &pdp)
{
    std::size_t last = 0;
    for (std::size_t k = 0; k < pdp.size(); ++k)
        if (pdp.kept_mask[k])
            last = k + 1;
    std::string out = "delay_s,power\n";
    out.reserve(out.size() + last * 40);
    for (std::size_t k = 0; k < last; ++k)
    {
        io::append_double(out, pdp.delay(k));
        out += ',';
        io::append_double(out, pdp.kept_power(k));
        out += '\n';
    }
    return out;
}

inline std::string aps_csv(std::span<const double> angles_deg, std::span<const double> power)
{
    std::string out = "angle_deg,power\n";
    for (std::size_t i = 0; i < angles_deg.size(); ++i)
    {
        io::append_double(out, angles_deg[i]);
        out += ',';
        io::append_double(out, power[i]);
        out += '\n';
    }
    return out;
}

// "6-7 GHz" -> "6-7GHz", "All Bands" -> "AllBands"
inline std::string band_slug(const std::string &label)
{
    std::string s;
    for (char c : label)
        if (c != ' ')
            s += c;
    return s;
}

// freq_hz,correction_db
inline AntennaElevationGainTable read_gain_table_csv(const std::filesystem::path &path)
{
    const auto rows = io::read_csv(path);
    detail::expect_header(rows, "freq_hz,correction_db", path);
    std::vector<AntennaElevationGainTable::Entry> entries;
    for (std::size_t r = 1; r < rows.size(); ++r)
    {
        if (rows[r].size() != 2)
            throw ValidationError(path.string() + ": row " + std::to_string(r) + " needs 2 columns");
        entries.push_back({io::parse_double(rows[r][0], path.string()), io::parse_double(rows[r][1], path.string())});
    }
    try
    {
        return AntennaElevationGainTable(std::move(entries));
    }
    catch (const ValidationError &e)
    {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

} // namespace uwbchan

#endif
