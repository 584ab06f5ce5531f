#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "teesim/cli.hpp"
#include "teesim/errors.hpp"

using namespace teesim;
namespace fs = std::filesystem;

namespace {

struct Out {
    int rc;
    std::string out, err;
};

Out cli(std::vector<std::string> args) {
    args.insert(args.begin(), "teesim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    int rc = cli_main(int(argv.size()), argv.data(), o, e);
    return {rc, o.str(), e.str()};
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("teesim_cli_" + name); }

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, RunPrintsReport) {
    auto r = cli({"run", "--model", "resnet50", "--gpus", "4"});
    ASSERT_EQ(r.rc, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["k"], 5);
    EXPECT_EQ(j["crypto_events"], 60);
    EXPECT_EQ(j["n"], 4);
}

TEST(Cli, SingleGpuHasNoCryptoEvents) {
    auto r = cli({"run", "--gpus", "1", "--cc", "on"});
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["crypto_events"], 0);
}

TEST(Cli, ReportIsByteIdentical) {
    auto a = cli({"run", "--model", "bert-base", "-n", "3", "--seed", "9"});
    auto b = cli({"run", "--model", "bert-base", "-n", "3", "--seed", "9"});
    ASSERT_EQ(a.rc, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, TamperExitsThreeAndNamesChunk) {
    auto r = cli({"run", "--model", "resnet50", "-n", "3", "--adversary", "flip:0:1:1:400"});
    EXPECT_EQ(r.rc, 3);
    EXPECT_NE(r.err.find("authentication failure (chunk "), std::string::npos) << r.err;
    auto rp = cli({"run", "--model", "resnet50", "-n", "3", "--adversary", "replay:2:0:0"});
    EXPECT_EQ(rp.rc, 3);
    EXPECT_NE(rp.err.find("replay detected"), std::string::npos) << rp.err;
}

TEST(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(cli({"run", "--cc", "maybe"}).rc, 2);
    EXPECT_EQ(cli({"run", "--model", "no-such-model"}).rc, 2);
    EXPECT_EQ(cli({"run", "--gpus", "0"}).rc, 2);
    EXPECT_EQ(cli({"run", "--algo", "fsdp", "--gpus", "1"}).rc, 2);
    EXPECT_EQ(cli({"run", "--adversary", "flip:1"}).rc, 2);
    EXPECT_EQ(cli({"run", "--adversary", "reorder:0:1:0"}).rc, 2);
    EXPECT_EQ(cli({"run", "--no-such-flag"}).rc, 2);
    EXPECT_EQ(cli({}).rc, 2);
    EXPECT_EQ(cli({"--help"}).rc, 0);
}

TEST(Cli, ConfigFileRejectsUnknownFields) {
    auto p = tmp("bad.json");
    write(p, R"({"model": "resnet50", "gpus": 2})");
    auto r = cli({"run", "--config", p.string()});
    EXPECT_EQ(r.rc, 2);
    EXPECT_NE(r.err.find("unknown field 'gpus'"), std::string::npos);
    write(p, R"({"timing": {"peer_bw": 1e9, "warp": 2}})");
    EXPECT_EQ(cli({"run", "--config", p.string()}).rc, 2);
    fs::remove(p);
}

TEST(Cli, FlagsOverrideConfigFile) {
    auto p = tmp("ok.json");
    write(p, R"({"model": "resnet50", "n_workers": 2, "cc": "off", "timing": {"auth_unit_s": 0.004}})");
    auto file_only = nlohmann::json::parse(cli({"run", "--config", p.string()}).out);
    EXPECT_EQ(file_only["n"], 2);
    EXPECT_EQ(file_only["cc"], false);
    auto over = nlohmann::json::parse(cli({"run", "--config", p.string(), "--gpus", "3", "--cc", "on"}).out);
    EXPECT_EQ(over["n"], 3);
    EXPECT_EQ(over["cc"], true);
    EXPECT_EQ(over["crypto_events"], 4 * 5 * 2);
    fs::remove(p);
}

TEST(ScenarioConfig, ParsesAllFields) {
    auto c = scenario_from_json_text(R"({"model": "gpt2-xl", "n_workers": 8, "cc": false, "algo": "tree",
        "cap_mb": 400, "caps_mb": [0, 400], "seed": 3, "scale_factor": 0.5, "tree_segments": 2,
        "adversary": "replay:0:1:2", "timing": {"host_bw": 1e9, "mode": "measured",
        "auth_curve": [[1, 1], [2, 3]]}})");
    EXPECT_EQ(c.model, "gpt2-xl");
    EXPECT_EQ(c.n_workers, 8);
    EXPECT_FALSE(c.cc);
    EXPECT_EQ(c.algo, Algo::tree);
    EXPECT_EQ(c.caps_mb, (std::vector<double>{0, 400}));
    EXPECT_EQ(c.timing.scale, 0.5);
    EXPECT_EQ(c.timing.host_link.bandwidth, 1e9);
    EXPECT_EQ(c.timing.mode, TimingMode::measured);
    EXPECT_EQ(c.timing.auth_curve.size(), 2u);
    c.validate();
    auto s = c.sim_config();
    EXPECT_EQ(s.cap_bytes, 400 * kMiB);
    EXPECT_EQ(s.adversary.mode, Adversary::Mode::replay);
    EXPECT_EQ(s.adversary.message, 2u);
    EXPECT_THROW(scenario_from_json_text("[]"), ConfigError);
    EXPECT_THROW(scenario_from_json_text(R"({"cc": "sometimes"})"), ConfigError);
    EXPECT_THROW(scenario_from_json_text(R"({"n_workers": "two"})"), ConfigError);
}

TEST(Cli, TraceDumpRecomputesReport) {
    auto trace = tmp("trace.csv"), report = tmp("report.json");
    auto r = cli({"run", "--model", "resnet50", "-n", "3", "--trace", trace.string(), "--report", report.string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    auto rep = nlohmann::json::parse(read(report));
    auto d = cli({"trace-dump", trace.string()});
    ASSERT_EQ(d.rc, 0) << d.err;
    auto at = d.out.find("figures: ");
    ASSERT_NE(at, std::string::npos);
    auto fig = nlohmann::json::parse(d.out.substr(at + 9));
    for (const char* k : {"crypto_events", "t_host_crypto_s", "t_pcie_s", "t_compute_s", "t_comm_exposed_s",
                          "t_crypto_s", "t_total_s"})
        EXPECT_EQ(fig[k], rep[k]) << k;
    auto js = cli({"trace-dump", trace.string(), "--json"});
    EXPECT_EQ(js.rc, 0);
    EXPECT_FALSE(nlohmann::json::parse(js.out)["events"].empty());
    EXPECT_EQ(cli({"trace-dump", "/nonexistent.csv"}).rc, 2);
    fs::remove(trace);
    fs::remove(report);
}

TEST(Cli, SweepSingleCandidate) {
    auto r = cli({"sweep", "--model", "resnet50", "--caps", "100"});
    ASSERT_EQ(r.rc, 0) << r.err;
    std::istringstream in(r.out);
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "cap_mb,k,crypto_events,t_total_s,ratio_vs_ccoff,picked");
    EXPECT_FALSE(std::getline(in, extra));
    EXPECT_EQ(row.substr(0, 4), "100,");
    EXPECT_EQ(row.back(), '1');
}

TEST(Cli, SweepMarksExactlyOnePick) {
    auto r = cli({"sweep", "--model", "bert-large", "-n", "2", "--caps", "0,50,100"});
    ASSERT_EQ(r.rc, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    int rows = 0, picks = 0;
    while (std::getline(in, line)) {
        ++rows;
        picks += line.back() == '1';
    }
    EXPECT_EQ(rows, 3);
    EXPECT_EQ(picks, 1);
    EXPECT_NE(r.err.find("picked cap"), std::string::npos);
}

TEST(Cli, SelftestPassesAndCatchesCorruption) {
    auto ok = cli({"selftest"});
    EXPECT_EQ(ok.rc, 0) << ok.out;
    EXPECT_NE(ok.out.find("selftest: PASS"), std::string::npos);

    std::string vectors = read(std::string(TEESIM_SOURCE_DIR) + "/data/gcm_aes256_iv96_tag128.rsp");
    auto at = vectors.find("Tag = ");
    ASSERT_NE(at, std::string::npos);
    char& c = vectors[at + 6];
    c = c == '0' ? '1' : '0';
    auto bad = tmp("bad.rsp");
    write(bad, vectors);
    auto r = cli({"selftest", "--vectors", bad.string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
    fs::remove(bad);
}
