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

#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace uwbchan;
namespace fs = std::filesystem;

namespace
{

const fs::path scratch_root = fs::temp_directory_path() / ("uwbchan_cli_" + std::to_string(::getpid()));

struct ScratchCleanup
{
    ~ScratchCleanup()
    {
        std::error_code ec;
        fs::remove_all(scratch_root, ec);
    }
} scratch_cleanup;

fs::path scratch(const std::string &name)
{
    const fs::path p = scratch_root / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) { return io::read_text_file(p); }

std::size_t count_lines(const fs::path &p)
{
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// 27 beams, 6-14 GHz at 1 MHz spacing, 3 links.
RunConfig small_config()
{
    RunConfig c;
    c.synth.angles = AngularGrid({-30.0, 0.0, 30.0}, {0.0, 120.0, 240.0}, {-10.0, 0.0, 10.0});
    c.synth.grid = FrequencyGrid::nominal();
    c.synth.links.resize(3);
    c.synth.n_taps = 3;
    c.seed = 7;
    return c;
}

fs::path synth_set(const std::string &name, RunConfig c = small_config())
{
    c.output = scratch(name);
    std::ostringstream log;
    cmd_synth(c, log);
    return c.output;
}

std::map<std::string, std::string> tree(const fs::path &root)
{
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

int run_cli(const std::string &args, const fs::path &stderr_file)
{
    const std::string cmd = std::string(UWBCHAN_CLI_PATH) + " " + args + " >/dev/null 2>" + stderr_file.string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("CLI - process writes every table with one row per band")
{
    const auto set = synth_set("process_set");
    RunConfig c = small_config();
    c.input = set;
    c.output = scratch("process_out");
    std::ostringstream log;
    cmd_process(c, log);

    CHECK(count_lines(c.output / "condensed.csv") == 1 + 3 * 9);
    for (const char *m : {"pl_omni", "pl_maxdir", "rmsds_omni", "rmsds_maxdir", "as_tx_az", "as_rx_az", "as_rx_el"})
    {
        const std::string id = m;
        CHECK(count_lines(c.output / (id + "_linear.csv")) == 10);
        const bool pl = id.rfind("pl_", 0) == 0;
        CHECK(count_lines(c.output / (id + (pl ? "_shadowing.csv" : "_normal.csv"))) == 10);
    }
    CHECK(slurp(c.output / "pl_omni_linear.csv").rfind(power_law_csv_header, 0) == 0);
    CHECK(fs::exists(c.output / "fits.json"));
    CHECK(fs::exists(c.output / "metadata.json"));
    CHECK(fs::exists(c.output / "dumps" / "Rx1" / "6-7GHz" / "omni_pdp.csv"));
    CHECK(fs::exists(c.output / "dumps" / "Rx3" / "AllBands" / "aps_rx_el.csv"));
    const auto report = slurp(c.output / "report.txt");
    CHECK(report.find("All Bands") != std::string::npos);
    CHECK(report.find("13-14 GHz") != std::string::npos);

    SECTION("staged run gives the same condensed table and fits")
    {
        RunConfig s = c;
        s.output = scratch("staged");
        s.dumps = false;
        cmd_condense(s, log);
        CHECK(slurp(s.output / "condensed.csv") == slurp(c.output / "condensed.csv"));
        s.input = s.output;
        cmd_fit(s, log);
        CHECK(slurp(s.output / "fits.json") == slurp(c.output / "fits.json"));
        cmd_report(s, log);
        CHECK(slurp(s.output / "report.txt") == report);
    }
    SECTION("a second run is byte-identical")
    {
        RunConfig again = c;
        again.output = scratch("process_again");
        cmd_process(again, log);
        CHECK(tree(again.output) == tree(c.output));
    }
    SECTION("the same seed gives the same synthetic set")
    {
        CHECK(tree(synth_set("process_set_2")) == tree(set));
    }
}

TEST_CASE("CLI - errors map to exit codes")
{
    const auto set = synth_set("err_set");
    std::ostringstream err;

    SECTION("empty link list")
    {
        auto j = nlohmann::json::parse(slurp(set / "manifest.json"));
        j["links"] = nlohmann::json::array();
        io::write_file_atomic(set / "manifest.json", j.dump(2));
        RunConfig c;
        c.input = set;
        c.output = scratch("err_out");
        CHECK(run_guarded([&] { cmd_condense(c, err); return 0; }, err) == exit_validation);
        CHECK(err.str().find("no links") != std::string::npos);
        CHECK(err.str().find("\"kind\":\"validation\"") != std::string::npos);
    }
    SECTION("corrupted truth file")
    {
        io::write_file_atomic(set / "truth.json", "{\"format\": \"uwbchan-truth\", \"links\": [");
        RunConfig c = small_config();
        c.input = set;
        c.output = scratch("err_rt");
        CHECK(run_guarded([&] { return cmd_roundtrip(c, err); }, err) == exit_validation);
        CHECK(err.str().find("cannot parse truth file") != std::string::npos);
    }
    SECTION("missing input")
    {
        RunConfig c;
        c.output = scratch("err_in");
        CHECK(run_guarded([&] { cmd_process(c, err); return 0; }, err) == exit_validation);
    }
    SECTION("all-zero link is a numerical failure")
    {
        const Manifest m = read_manifest(set);
        write_link_tensor(set, m, 0,
                          FrequencyScanTensor(m.grid, m.angles, std::vector<cdouble>(m.angles.n_beams() * m.grid.n_points())));
        RunConfig c;
        c.input = set;
        c.output = scratch("err_zero");
        CHECK(run_guarded([&] { cmd_condense(c, err); return 0; }, err) == exit_numerical);
        CHECK(err.str().find("\"kind\":\"outage\"") != std::string::npos);
    }
}

TEST_CASE("CLI - noiseless round trip passes")
{
    RunConfig c = small_config();
    c.synth.n_taps = 1;
    c.synth.pattern = HornPatternModel::ideal();
    c.synth.model.sigma_shadow_db = 0.0;
    c.synth.model.rmsds_sigma_dbs = 0.0;
    c.synth.system_response = true;
    c.pl_window = Window::Hann;
    c.dumps = false;
    c.bands = "6-7,all";
    c.output = scratch("roundtrip");
    std::ostringstream log;
    CHECK(cmd_roundtrip(c, log) == exit_ok);
    const auto j = nlohmann::json::parse(slurp(c.output / "roundtrip.json"));
    CHECK(j["result"] == "pass");
    CHECK(fs::exists(c.output / "results" / "fits.json"));
    CHECK(log.str().find("roundtrip: PASS") != std::string::npos);
}

TEST_CASE("CLI - configuration files")
{
    RunConfig c;
    apply_config_json(c, nlohmann::json::parse(R"({"oversample": 4, "threshold_db": 30, "window": "rect",
        "synth": {"n_taps": 2, "pattern": "ideal", "as_targets": {"tx_az": 0.1, "rx_az": 0.1, "rx_el": null}}})"));
    CHECK(c.pdp.oversample_factor == 4);
    CHECK(c.pdp.threshold_below_peak_db == 30.0);
    CHECK(c.pdp.window == Window::Rectangular);
    CHECK(c.synth.n_taps == 2);
    CHECK(!c.synth.model.as_targets.rx_el);
    CHECK_THROWS_WITH(apply_config_json(c, nlohmann::json::parse(R"({"oversampel": 4})")),
                      Catch::Matchers::ContainsSubstring("oversampel"));
    CHECK_THROWS_WITH(apply_config_json(c, nlohmann::json::parse(R"({"seed": "x"})")),
                      Catch::Matchers::ContainsSubstring("'seed'"));
    CHECK_THROWS_AS(apply_config_json(c, nlohmann::json::parse(R"({"synth": {"n_tap": 2}})")), ValidationError);
}

TEST_CASE("CLI binary - flags, config file and exit codes")
{
    const auto dir = scratch("binary");
    const auto err = dir / "stderr.txt";
    CHECK(run_cli("--help", err) == 0);
    CHECK(run_cli("", err) == exit_validation);
    CHECK(run_cli("frobnicate", err) == exit_validation);
    CHECK(run_cli("process --oversample x", err) == exit_validation);
    CHECK(run_cli("process --output " + (dir / "o").string(), err) == exit_validation);
    CHECK(slurp(err).find("--input is required") != std::string::npos);

    const auto set = dir / "set";
    REQUIRE(run_cli("synth --output " + set.string() +
                        " --angle-grid compact --f-start-ghz 6 --f-stop-ghz 8 --n-freq 201 --n-links 3 --seed 3",
                    err) == 0);
    REQUIRE(fs::exists(set / "truth.json"));

    std::ofstream(dir / "cfg.json") << R"({"threshold_db": 30, "oversample": 2, "bands": "6-7,all"})";
    const auto out = dir / "out";
    REQUIRE(run_cli("process --config " + (dir / "cfg.json").string() + " --threshold-db 25 --input " + set.string() +
                        " --output " + out.string(),
                    err) == 0);
    const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
    CHECK(meta["processing"]["threshold_below_peak_db"] == 25.0);
    CHECK(meta["processing"]["oversample_factor"] == 2);
    CHECK(meta["bands"].size() == 2);
    CHECK(count_lines(out / "condensed.csv") == 1 + 3 * 2);

    std::ofstream(dir / "bad.json") << "{ nope";
    CHECK(run_cli("process --config " + (dir / "bad.json").string() + " --input " + set.string() + " --output " +
                      out.string(),
                  err) == exit_validation);
    CHECK(slurp(err).find("malformed JSON") != std::string::npos);
}
