#include "teesim/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "teesim/collective.hpp"
#include "teesim/cost_model.hpp"
#include "teesim/crypto/cavp.hpp"
#include "teesim/errors.hpp"

namespace teesim {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError(where + ": unknown field '" + key + "'");
}

bool parse_onoff(const json& v) {
    if (v.is_boolean()) return v.get<bool>();
    auto s = v.get<std::string>();
    if (s == "on") return true;
    if (s == "off") return false;
    throw ConfigError("cc must be on or off, got '" + s + "'");
}

void apply_timing(TimingModel& t, const json& j) {
    reject_unknown(j,
                   {"host_crypto_bw", "device_enc_peak_bw", "device_enc_half_bytes", "auth_unit_s", "auth_curve",
                    "peer_bw", "peer_latency_s", "host_bw", "host_latency_s", "reduce_bw", "mode", "scale_factor"},
                   "timing");
    auto num = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = j.at(k).get<double>();
    };
    num("host_crypto_bw", t.host_crypto_bw);
    num("device_enc_peak_bw", t.device_enc_peak_bw);
    num("device_enc_half_bytes", t.device_enc_half_bytes);
    num("auth_unit_s", t.auth_unit_s);
    num("peer_bw", t.peer_link.bandwidth);
    num("peer_latency_s", t.peer_link.latency);
    num("host_bw", t.host_link.bandwidth);
    num("host_latency_s", t.host_link.latency);
    num("reduce_bw", t.device_reduce_bw);
    num("scale_factor", t.scale);
    if (j.contains("auth_curve")) {
        t.auth_curve.clear();
        for (const auto& p : j.at("auth_curve")) t.auth_curve.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    if (j.contains("mode")) {
        auto m = j.at("mode").get<std::string>();
        if (m == "modeled")
            t.mode = TimingMode::modeled;
        else if (m == "measured")
            t.mode = TimingMode::measured;
        else
            throw ConfigError("timing.mode must be modeled or measured");
    }
}

std::uint64_t cap_bytes(double mb) { return std::uint64_t(std::llround(mb * double(kMiB))); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (model.empty()) throw ConfigError("model is required");
    if (n_workers < 1 || n_workers > 64) throw ConfigError("n_workers must be in [1, 64]");
    if (cap_mb < 0) throw ConfigError("cap_mb must be >= 0");
    if (caps_mb.empty()) throw ConfigError("caps_mb must not be empty");
    for (double c : caps_mb)
        if (c < 0) throw ConfigError("caps_mb entries must be >= 0");
    if (tree_segments < 0) throw ConfigError("tree_segments must be >= 0");
    if (algo == Algo::fsdp && n_workers < 2) throw ConfigError("fsdp needs at least two workers");
    timing.validate();
    if (timing.scale <= 0 || timing.scale > 1) throw ConfigError("scale_factor must be in (0, 1]");
    parse_adversary(adversary);
}

SimConfig ScenarioConfig::sim_config() const {
    SimConfig c;
    c.n_workers = n_workers;
    c.cc = cc;
    c.cap_bytes = cap_bytes(cap_mb);
    c.algo = algo;
    c.timing = timing;
    c.seed = seed;
    c.adversary = parse_adversary(adversary);
    c.tree_segments = tree_segments;
    return c;
}

Adversary parse_adversary(const std::string& spec) {
    if (spec.empty() || spec == "none") return {};
    std::vector<std::string> f;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) f.push_back(part);
    auto bad = [&] {
        return ConfigError("bad adversary '" + spec + "' (flip:FROM:TO:MSG[:BIT] | replay:FROM:TO:MSG)");
    };
    Adversary::Mode mode;
    if (f[0] == "flip")
        mode = Adversary::Mode::flip_bit;
    else if (f[0] == "replay")
        mode = Adversary::Mode::replay;
    else if (f[0] == "reorder")
        mode = Adversary::Mode::reorder;
    else
        throw bad();
    std::size_t want = mode == Adversary::Mode::flip_bit ? 5 : 4;
    if (f.size() != want && !(mode == Adversary::Mode::flip_bit && f.size() == 4)) throw bad();
    try {
        std::uint64_t bit = f.size() > 4 ? std::stoull(f[4]) : 0;
        return Adversary(mode, std::stoi(f[1]), std::stoi(f[2]), std::stoull(f[3]), bit);
    } catch (const std::logic_error&) {
        throw bad();
    }
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
    ScenarioConfig c;
    try {
        json j = json::parse(text);
        if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
        reject_unknown(j,
                       {"model", "n_workers", "cc", "algo", "cap_mb", "caps_mb", "timing", "adversary", "seed",
                        "scale_factor", "tree_segments", "calibration", "report", "trace", "sweep_csv"},
                       "scenario");
        if (j.contains("model")) c.model = j.at("model").get<std::string>();
        if (j.contains("n_workers")) c.n_workers = j.at("n_workers").get<int>();
        if (j.contains("cc")) c.cc = parse_onoff(j.at("cc"));
        if (j.contains("algo")) c.algo = parse_algo(j.at("algo").get<std::string>());
        if (j.contains("cap_mb")) c.cap_mb = j.at("cap_mb").get<double>();
        if (j.contains("caps_mb")) c.caps_mb = j.at("caps_mb").get<std::vector<double>>();
        if (j.contains("timing")) apply_timing(c.timing, j.at("timing"));
        if (j.contains("adversary")) c.adversary = j.at("adversary").get<std::string>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("scale_factor")) c.timing.scale = j.at("scale_factor").get<double>();
        if (j.contains("tree_segments")) c.tree_segments = j.at("tree_segments").get<int>();
        if (j.contains("calibration")) c.calibration = j.at("calibration").get<std::string>();
        if (j.contains("report")) c.report_path = j.at("report").get<std::string>();
        if (j.contains("trace")) c.trace_path = j.at("trace").get<std::string>();
        if (j.contains("sweep_csv")) c.sweep_path = j.at("sweep_csv").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return c;
}

namespace {

int cmd_run(const ScenarioConfig& sc, std::ostream& out, std::ostream& err) {
    sc.validate();
    ModelProfile model = load_model(sc.model);
    SimConfig cfg = sc.sim_config();
    cfg.keep_trace = !sc.trace_path.empty();
    IterationResult res;
    try {
        res = simulate(model, cfg);
    } catch (const CollectiveAbort& e) {
        err << "abort: " << e.what() << '\n';
        return 3;
    }
    std::string report = report_json(res.report) + "\n";
    if (sc.report_path.empty())
        out << report;
    else
        write_file(sc.report_path, report);
    if (!sc.trace_path.empty()) {
        std::ostringstream csv;
        write_trace_csv(csv, res.timeline.trace);
        write_file(sc.trace_path, csv.str());
    }
    return 0;
}

int cmd_sweep(const ScenarioConfig& sc, std::ostream& out, std::ostream& err) {
    sc.validate();
    if (sc.algo == Algo::fsdp) throw ConfigError("sweep varies bucket caps; fsdp has no buckets");
    ModelProfile model = load_model(sc.model);
    auto table = CalibrationTable::load(sc.calibration.empty() ? CalibrationTable::default_path() : sc.calibration);
    auto tune = tune_bucket(model, sc.n_workers, sc.caps_mb, table);

    std::ostringstream csv;
    csv << "cap_mb,k,crypto_events,t_total_s,ratio_vs_ccoff,picked\n";
    std::map<double, double> totals;
    for (double cap : sc.caps_mb) {
        ScenarioConfig one = sc;
        one.cap_mb = cap;
        SimConfig cfg = one.sim_config();
        cfg.keep_trace = false;
        cfg.compare_cc_off = false;
        IterationResult on;
        try {
            on = simulate(model, cfg);
        } catch (const CollectiveAbort& e) {
            err << "abort: " << e.what() << '\n';
            return 3;
        }
        double ratio = 1;
        if (sc.cc) {
            cfg.cc = false;
            cfg.adversary = {};
            ratio = on.report.t_total_s / simulate(model, cfg).report.t_total_s;
        }
        totals[cap] = on.report.t_total_s;
        csv << fmt(cap) << ',' << on.report.k << ',' << on.report.crypto_events << ','
            << std::setprecision(17) << on.report.t_total_s << ',' << std::setprecision(6) << ratio << ','
            << (cap == tune.best_cap_mb ? 1 : 0) << '\n';
    }
    if (sc.sweep_path.empty())
        out << csv.str();
    else
        write_file(sc.sweep_path, csv.str());
    err << "picked cap " << fmt(tune.best_cap_mb) << " MiB";
    if (totals.count(0) && totals.count(tune.best_cap_mb))
        err << ", runtime reduction " << fmt(totals[0] / totals[tune.best_cap_mb]) << "x vs default";
    err << '\n';
    return 0;
}

std::string default_vectors() { return std::string(TEESIM_SOURCE_DIR) + "/data/gcm_aes256_iv96_tag128.rsp"; }

// Brute-force check of every collective on small integer buffers.
int collective_selftest(std::ostream& out) {
    int cases = 0, failed = 0;
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> d(-1000, 1000);
    for (int n = 1; n <= 8; ++n)
        for (std::size_t len : {std::size_t(1), std::size_t(n), std::size_t(37)})
            for (int kind = 0; kind < 4; ++kind) {
                std::vector<std::vector<float>> bufs(static_cast<std::size_t>(n), std::vector<float>(len));
                for (auto& b : bufs)
                    for (auto& v : b) v = float(d(rng));
                std::vector<float> sum(len, 0.0f);
                for (const auto& b : bufs)
                    for (std::size_t i = 0; i < len; ++i) sum[i] += b[i];
                World w(n, true);
                bool ok = true;
                if (kind == 0 || kind == 1) {
                    auto got = bufs;
                    if (kind == 0)
                        ring_all_reduce(w, got);
                    else
                        tree_all_reduce(w, got, 2);
                    for (const auto& g : got) ok = ok && g == sum;
                } else if (kind == 2) {
                    auto shards = reduce_scatter(w, bufs);
                    auto parts = balanced_chunks(std::max(len, std::size_t(n)), n);
                    for (const auto& s : shards)
                        for (std::size_t i = 0; i < s.values.size(); ++i) {
                            std::size_t at = parts[s.chunk].begin + i;
                            ok = ok && s.values[i] == (at < len ? sum[at] : 0.0f);
                        }
                } else {
                    std::vector<float> whole;
                    for (const auto& b : bufs) whole.insert(whole.end(), b.begin(), b.end());
                    for (const auto& g : all_gather(w, bufs)) ok = ok && g == whole;
                }
                ++cases;
                if (!ok) {
                    ++failed;
                    out << "  FAIL collective kind " << kind << " n=" << n << " len=" << len << '\n';
                }
            }
    out << "collectives: " << cases - failed << "/" << cases << " cases equal the oracle\n";
    return failed;
}

int cmd_selftest(const std::string& vectors, std::ostream& out) {
    int bad = 0;
    try {
        auto rep = crypto::crypto_self_test(vectors);
        for (const auto& f : rep.failed) out << "  FAIL " << f.name << ": " << f.reason << '\n';
        out << "crypto: " << rep.passed.size() << "/" << rep.passed.size() + rep.failed.size()
            << " vectors passed\n";
        bad += int(rep.failed.size());
    } catch (const VectorFileError& e) {
        out << "crypto: vector file error: " << e.what() << '\n';
        ++bad;
    }
    bad += collective_selftest(out);
    out << "selftest: " << (bad ? "FAIL" : "PASS") << '\n';
    return bad ? 1 : 0;
}

int cmd_trace_dump(const std::string& in_path, bool as_json, std::ostream& out) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open " + in_path);
    CollectiveTrace t;
    try {
        t = read_trace_csv(in);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (as_json) {
        write_trace_json(out, t);
        return 0;
    }
    auto counts = count_crypto_ops(t, true);
    std::map<int, std::map<std::string, std::uint64_t>> kinds;
    for (const auto& e : t.events) ++kinds[e.worker][to_string(e.kind)];
    out << "events: " << t.events.size() << '\n';
    for (const auto& [w, m] : kinds) {
        out << (w < 0 ? std::string("host") : "worker " + std::to_string(w)) << ':';
        for (const auto& [k, c] : m) out << ' ' << k << '=' << c;
        if (w >= 0) out << " inter_worker_crypto=" << counts.total(w);
        out << '\n';
    }
    CostReport f = figures_from_trace(t);
    json j = json::object();
    j["crypto_events"] = f.crypto_events;
    j["t_host_crypto_s"] = f.t_host_crypto_s;
    j["t_pcie_s"] = f.t_pcie_s;
    j["t_compute_s"] = f.t_compute_s;
    j["t_comm_exposed_s"] = f.t_comm_exposed_s;
    j["t_crypto_s"] = f.t_crypto_s;
    j["t_total_s"] = f.t_total_s;
    out << "figures: " << j.dump() << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"TEE overhead simulator for data-parallel training"};
    app.require_subcommand(1);

    std::string config_path, model, cc, algo, adversary, report, trace, sweep_csv, calibration;
    int gpus = 0, segments = -1;
    double cap = -1, scale = 0;
    std::uint64_t seed = 0;
    std::vector<double> caps;

    auto scenario_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "scenario JSON; flags override it");
        sub->add_option("--model", model, "preset name or profile path");
        sub->add_option("--gpus,-n", gpus, "number of workers");
        sub->add_option("--cc", cc, "on|off");
        sub->add_option("--algo", algo, "ring|tree|fsdp");
        sub->add_option("--seed", seed);
        sub->add_option("--scale-factor", scale, "real bytes per modeled byte");
        sub->add_option("--tree-segments", segments);
        sub->add_option("--adversary", adversary, "flip:FROM:TO:MSG[:BIT] | replay:FROM:TO:MSG");
    };
    auto* run = app.add_subcommand("run", "simulate one training iteration and print its report");
    scenario_flags(run);
    run->add_option("--bucket-cap-mb", cap, "bucket cap in MiB (0: default)");
    run->add_option("--report", report, "write the report here instead of stdout");
    run->add_option("--trace", trace, "write the event trace CSV here");

    auto* sweep = app.add_subcommand("sweep", "simulate each bucket cap and mark the tuner's pick");
    scenario_flags(sweep);
    sweep->add_option("--caps", caps, "caps in MiB (0: default)")->delimiter(',');
    sweep->add_option("--calibration", calibration, "calibration table JSON");
    sweep->add_option("--out", sweep_csv, "write the CSV here instead of stdout");

    std::string vectors = default_vectors();
    auto* selftest = app.add_subcommand("selftest", "crypto vectors and collective oracle checks");
    selftest->add_option("--vectors", vectors, "CAVP response file");

    std::string trace_in;
    bool as_json = false;
    auto* dump = app.add_subcommand("trace-dump", "summarize a trace CSV and recompute report figures");
    dump->add_option("trace", trace_in, "trace CSV")->required();
    dump->add_flag("--json", as_json, "print the trace as JSON instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (selftest->parsed()) return cmd_selftest(vectors, out);
        if (dump->parsed()) return cmd_trace_dump(trace_in, as_json, out);

        ScenarioConfig sc;
        if (!config_path.empty()) sc = scenario_from_json_text(read_file(config_path));
        CLI::App* sub = run->parsed() ? run : sweep;
        if (sub->count("--model")) sc.model = model;
        if (sub->count("--gpus")) sc.n_workers = gpus;
        if (sub->count("--cc")) sc.cc = parse_onoff(json(cc));
        if (sub->count("--algo")) sc.algo = parse_algo(algo);
        if (sub->count("--seed")) sc.seed = seed;
        if (sub->count("--scale-factor")) sc.timing.scale = scale;
        if (sub->count("--tree-segments")) sc.tree_segments = segments;
        if (sub->count("--adversary")) sc.adversary = adversary;
        if (run->parsed()) {
            if (run->count("--bucket-cap-mb")) sc.cap_mb = cap;
            if (run->count("--report")) sc.report_path = report;
            if (run->count("--trace")) sc.trace_path = trace;
            return cmd_run(sc, out, err);
        }
        if (sweep->count("--caps")) sc.caps_mb = caps;
        if (sweep->count("--calibration")) sc.calibration = calibration;
        if (sweep->count("--out")) sc.sweep_path = sweep_csv;
        return cmd_sweep(sc, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CollectiveAbort& e) {
        err << "abort: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace teesim
