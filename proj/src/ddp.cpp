#include "teesim/ddp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include <json.hpp>

#include "teesim/collective.hpp"
#include "teesim/errors.hpp"

namespace teesim {

const char* to_string(Algo a) {
    switch (a) {
    case Algo::ring: return "ring";
    case Algo::tree: return "tree";
    case Algo::fsdp: return "fsdp";
    }
    return "?";
}

Algo parse_algo(const std::string& s) {
    if (s == "ring") return Algo::ring;
    if (s == "tree") return Algo::tree;
    if (s == "fsdp") return Algo::fsdp;
    throw ConfigError("unknown algo '" + s + "' (ring|tree|fsdp)");
}

TimingModel SimConfig::default_timing() {
    TimingModel t;
    t.scale = 1.0 / 64;
    return t;
}

std::string report_json(const CostReport& r) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["n"] = r.n;
    j["cc"] = r.cc;
    j["cap_mb"] = r.cap_mb;
    j["k"] = r.k;
    j["crypto_events"] = r.crypto_events;
    j["t_host_crypto_s"] = r.t_host_crypto_s;
    j["t_pcie_s"] = r.t_pcie_s;
    j["t_compute_s"] = r.t_compute_s;
    j["t_comm_exposed_s"] = r.t_comm_exposed_s;
    j["t_crypto_s"] = r.t_crypto_s;
    j["t_total_s"] = r.t_total_s;
    j["tee_share"] = r.tee_share;
    return j.dump(2);
}

namespace {

// Small integers keep every summation order exact, so ring, tree and cc-off
// runs can be compared bit for bit.
std::vector<float> fill(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::size_t n) {
    std::seed_seq ss{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(a), std::uint32_t(b)};
    std::mt19937 rng(ss);
    std::uniform_int_distribution<int> d(-64, 64);
    std::vector<float> v(n);
    for (auto& f : v) f = float(d(rng));
    return v;
}

void digest(std::uint64_t& h, std::span<const float> v) {
    // FNV-1a over the raw bytes
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    for (std::size_t i = 0; i < v.size_bytes(); ++i) h = (h ^ p[i]) * 0x100000001b3ull;
}

std::size_t scaled_floats(double logical_bytes, double scale, int n) {
    auto f = std::size_t(std::llround(logical_bytes * scale / 4));
    return std::max(f, std::size_t(n));
}

bool is_crypto(EventKind k) {
    return k == EventKind::encrypt || k == EventKind::mac || k == EventKind::decrypt || k == EventKind::verify;
}

struct Run {
    World world;
    IterationTimeline tl;
    std::vector<double> ready;  // per worker: input decrypted, compute may start

    Run(const SimConfig& cfg, bool cc)
        : world(cfg.n_workers, cc, cfg.timing, cfg.seed, cfg.chunk_size), ready(std::size_t(cfg.n_workers), 0.0) {
        world.exec = cfg.exec;
    }
};

void check_config(const ModelProfile& model, const SimConfig& cfg) {
    model.validate();
    if (cfg.n_workers < 1) throw ConfigError("n_workers must be >= 1");
    cfg.timing.validate();
}

// Host seals each worker's input batch, ships it over PCIe, the device opens it.
void host_phase(Run& r, const ModelProfile& model, const SimConfig& cfg) {
    World& w = r.world;
    const int n = w.n();
    double logical = double(model.per_device_batch) * double(model.input_bytes_per_sample);
    if (logical <= 0) return;
    std::size_t real = std::max<std::size_t>(1, std::size_t(std::llround(logical * cfg.timing.scale)));
    std::vector<Bytes> inputs(static_cast<std::size_t>(n));
    std::mt19937_64 rng(cfg.seed);
    for (auto& in : inputs) {
        in.resize(real);
        for (auto& b : in) b = std::uint8_t(rng());
    }
    std::vector<World::Transfer> tx;
    for (int i = 0; i < n; ++i) tx.push_back({kHost, i, inputs[std::size_t(i)], logical});
    w.exchange("input", 0, tx, [](std::size_t, Bytes&&) {});
    for (const auto& e : w.trace().events) {
        if (e.worker == kHost && e.kind == EventKind::encrypt)
            r.tl.segments.push_back({kHost, "host_encrypt", e.time, e.time + e.duration});
        if (e.worker == kHost && e.kind == EventKind::send)
            r.tl.segments.push_back({kHost, "pcie_transfer", e.time, e.time + e.duration});
        if (e.worker >= 0 && (e.kind == EventKind::verify || e.kind == EventKind::decrypt))
            r.tl.segments.push_back({e.worker, "device_decrypt", e.time, e.time + e.duration});
    }
    for (int i = 0; i < n; ++i) r.ready[std::size_t(i)] = w.clock(i);
}

void finish_report(Run& r, const ModelProfile& model, const SimConfig& cfg, CostReport& rep) {
    auto trace = r.world.trace();
    CostReport f = figures_from_trace(trace);
    rep.model = model.name;
    rep.n = r.world.n();
    rep.cc = r.world.cc();
    rep.crypto_events = f.crypto_events;
    rep.t_host_crypto_s = f.t_host_crypto_s;
    rep.t_pcie_s = f.t_pcie_s;
    rep.t_compute_s = f.t_compute_s;
    rep.t_comm_exposed_s = f.t_comm_exposed_s;
    rep.t_crypto_s = f.t_crypto_s;
    rep.t_total_s = f.t_total_s;
    if (cfg.keep_trace) r.tl.trace = std::move(trace);
}

IterationResult run_ddp(const ModelProfile& model, const SimConfig& cfg, bool cc) {
    Run r(cfg, cc);
    r.world.adversary = cfg.adversary;
    World& w = r.world;
    const int n = cfg.n_workers;
    host_phase(r, model, cfg);

    const double F = model.forward_time_s, B = model.backward_time_s;
    std::vector<double> bwd_start(static_cast<std::size_t>(n)), bwd_end(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = r.ready[std::size_t(i)];
        bwd_start[std::size_t(i)] = s + F;
        bwd_end[std::size_t(i)] = s + F + B;
        r.tl.segments.push_back({i, "forward", s, s + F});
        r.tl.segments.push_back({i, "backward_compute", s + F, s + F + B});
        w.log(i, EventKind::compute, s, F, 0, i);
        w.log(i, EventKind::compute, s + F, B, 0, i);
    }

    std::uint64_t cap = cfg.cap_bytes ? cfg.cap_bytes : model.bucket_cap_default_bytes;
    BucketPlan plan = bucketize(model, cap);
    const double total = double(model.gradient_bytes());
    double done = 0;
    std::uint64_t h = 0xcbf29ce484222325ull;
    int segments = cfg.tree_segments > 0 ? cfg.tree_segments : n;
    for (std::size_t b = 0; b < plan.k(); ++b) {
        const auto& bucket = plan.buckets[b];
        done += double(bucket.bytes);
        // the collective starts once every worker has produced the bucket;
        // gradients appear in proportion to bytes produced so far
        double start = 0;
        for (int i = 0; i < n; ++i) {
            double ready = bwd_start[std::size_t(i)] + B * done / total;
            w.clock(i) = std::max(w.clock(i), ready);
            start = std::max(start, w.clock(i));
        }
        std::size_t len = scaled_floats(double(bucket.bytes), cfg.timing.scale, n);
        std::vector<std::vector<float>> bufs;
        for (int i = 0; i < n; ++i) bufs.push_back(fill(cfg.seed, b, std::uint64_t(i), len));
        if (cfg.algo == Algo::tree)
            tree_all_reduce(w, bufs, segments);
        else
            ring_all_reduce(w, bufs);
        digest(h, bufs[0]);
        r.tl.collectives.push_back({"all_reduce", b, start, w.max_clock(), bucket.bytes});
    }
    r.tl.backward_end = *std::max_element(bwd_end.begin(), bwd_end.end());
    r.tl.result_digest = h;

    IterationResult out;
    out.report.cap_mb = double(cap) / double(kMiB);
    out.report.k = plan.k();
    finish_report(r, model, cfg, out.report);
    out.timeline = std::move(r.tl);
    return out;
}

IterationResult run_fsdp(const ModelProfile& model, const SimConfig& cfg, bool cc) {
    Run r(cfg, cc);
    r.world.adversary = cfg.adversary;
    World& w = r.world;
    const int n = cfg.n_workers;
    host_phase(r, model, cfg);

    std::size_t len = scaled_floats(double(model.gradient_bytes()), cfg.timing.scale, n);
    auto parts = balanced_chunks(len, n);
    std::uint64_t h = 0xcbf29ce484222325ull;
    std::size_t idx = 0;

    auto gather = [&]() {
        double start = w.max_clock();
        std::vector<std::vector<float>> shards;
        for (int i = 0; i < n; ++i) shards.push_back(fill(cfg.seed, 1000 + idx, std::uint64_t(i), parts[std::size_t(i)].size()));
        auto full = all_gather(w, shards);
        digest(h, full[0]);
        r.tl.collectives.push_back({"all_gather", idx++, start, w.max_clock(), model.gradient_bytes()});
    };
    auto scatter = [&]() {
        double start = w.max_clock();
        std::vector<std::vector<float>> grads;
        for (int i = 0; i < n; ++i) grads.push_back(fill(cfg.seed, 1000 + idx, std::uint64_t(i), len));
        auto shards = reduce_scatter(w, grads);
        for (const auto& s : shards) digest(h, s.values);
        r.tl.collectives.push_back({"reduce_scatter", idx++, start, w.max_clock(), model.gradient_bytes()});
    };
    auto compute = [&](const char* kind, double dur) {
        for (int i = 0; i < n; ++i) {
            double s = w.clock(i);
            r.tl.segments.push_back({i, kind, s, s + dur});
            w.log(i, EventKind::compute, s, dur, 0, i);
            w.clock(i) = s + dur;
        }
    };
    auto barrier = [&] { w.set_all_clocks(w.max_clock()); };

    barrier();
    gather();
    gather();
    compute("forward", model.forward_time_s);
    barrier();
    gather();
    compute("backward_compute", model.backward_time_s);
    r.tl.backward_end = w.max_clock();
    barrier();
    scatter();
    scatter();
    r.tl.result_digest = h;

    IterationResult out;
    out.report.k = r.tl.collectives.size();
    finish_report(r, model, cfg, out.report);
    out.timeline = std::move(r.tl);
    return out;
}

template <class F>
IterationResult with_share(const ModelProfile& model, const SimConfig& cfg, F run) {
    IterationResult res = run(model, cfg, cfg.cc);
    if (cfg.cc && cfg.compare_cc_off) {
        SimConfig off = cfg;
        off.keep_trace = false;
        off.adversary = {};
        IterationResult base = run(model, off, false);
        res.report.tee_share = 1.0 - base.report.t_total_s / res.report.t_total_s;
    }
    return res;
}

}  // namespace

CostReport figures_from_trace(const CollectiveTrace& t) {
    CostReport rep;
    std::map<int, double> crypto, compute, ready, end;
    for (const auto& e : t.events) {
        double stop = e.time + e.duration;
        if (e.worker == kHost) {
            if (e.kind == EventKind::encrypt || e.kind == EventKind::mac) rep.t_host_crypto_s += e.duration;
            if (e.kind == EventKind::send) rep.t_pcie_s = std::max(rep.t_pcie_s, e.duration);
            continue;
        }
        end[e.worker] = std::max(end[e.worker], stop);
        if (e.peer == kHost) ready[e.worker] = std::max(ready[e.worker], stop);
        if (is_crypto(e.kind)) crypto[e.worker] += e.duration;
        if (e.kind == EventKind::compute) compute[e.worker] += e.duration;
    }
    auto counts = count_crypto_ops(t, true);
    for (const auto& [w, stop] : end) {
        rep.t_total_s = std::max(rep.t_total_s, stop);
        rep.crypto_events = std::max(rep.crypto_events, counts.total(w));
        rep.t_crypto_s = std::max(rep.t_crypto_s, crypto[w]);
        rep.t_compute_s = std::max(rep.t_compute_s, compute[w]);
    }
    // Exposed communication: whatever the critical path spends beyond input
    // delivery and compute.
    double last_ready = 0;
    for (const auto& [w, r] : ready) last_ready = std::max(last_ready, r);
    rep.t_comm_exposed_s = std::max(0.0, rep.t_total_s - last_ready - rep.t_compute_s);
    return rep;
}

IterationResult simulate_iteration(const ModelProfile& model, const SimConfig& cfg) {
    check_config(model, cfg);
    if (cfg.algo == Algo::fsdp) throw ConfigError("simulate_iteration: use simulate_fsdp_iteration for fsdp");
    return with_share(model, cfg, run_ddp);
}

IterationResult simulate_fsdp_iteration(const ModelProfile& model, const SimConfig& cfg) {
    check_config(model, cfg);
    if (cfg.n_workers < 2) throw ConfigError("fsdp needs at least two workers");
    return with_share(model, cfg, run_fsdp);
}

IterationResult simulate(const ModelProfile& model, const SimConfig& cfg) {
    return cfg.algo == Algo::fsdp ? simulate_fsdp_iteration(model, cfg) : simulate_iteration(model, cfg);
}

}  // namespace teesim
