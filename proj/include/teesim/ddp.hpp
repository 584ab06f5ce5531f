#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teesim/channel.hpp"
#include "teesim/profile.hpp"
#include "teesim/timing.hpp"
#include "teesim/trace.hpp"

namespace teesim {

enum class Algo { ring, tree, fsdp };

const char* to_string(Algo a);
Algo parse_algo(const std::string& s);  // throws ConfigError

struct SimConfig {
    int n_workers = 2;
    bool cc = true;
    std::uint64_t cap_bytes = 0;  // 0: the profile's default
    Algo algo = Algo::ring;
    TimingModel timing = default_timing();
    std::uint64_t seed = 1;
    Adversary adversary;
    std::size_t chunk_size = crypto::kDefaultChunkSize;
    int tree_segments = 0;   // 0: n_workers (pipelined at ring-chunk granularity)
    bool keep_trace = true;  // copy the event trace into the result
    bool compare_cc_off = true;  // rerun with cc off to fill tee_share
    Exec exec = Exec::parallel;

    // The shipped calibration at 1/64 byte scale.
    static TimingModel default_timing();
};

// Field names and order are the report's JSON schema.
struct CostReport {
    std::string model;
    int n = 0;
    bool cc = false;
    double cap_mb = 0;
    std::uint64_t k = 0;
    std::uint64_t crypto_events = 0;  // inter-worker seals + opens, per worker (max)
    double t_host_crypto_s = 0;
    double t_pcie_s = 0;
    double t_compute_s = 0;
    double t_comm_exposed_s = 0;
    double t_crypto_s = 0;  // device crypto on the busiest worker
    double t_total_s = 0;
    double tee_share = 0;   // 1 - t_total(cc off) / t_total(cc on)
};

std::string report_json(const CostReport& r);  // deterministic bytes

struct Segment {
    int worker;
    std::string kind;  // host_encrypt, pcie_transfer, device_decrypt, forward, backward_compute
    double start, end;
};

struct CollectiveSpan {
    std::string kind;  // all_reduce, all_gather, reduce_scatter
    std::size_t index;
    double start, end;
    std::uint64_t bytes;  // logical payload of the collective
};

struct IterationTimeline {
    std::vector<Segment> segments;
    std::vector<CollectiveSpan> collectives;
    CollectiveTrace trace;
    double backward_end = 0;
    std::uint64_t result_digest = 0;  // hash of the reduced values; cc must not change it
};

struct IterationResult {
    IterationTimeline timeline;
    CostReport report;
};

IterationResult simulate_iteration(const ModelProfile& model, const SimConfig& cfg);
IterationResult simulate_fsdp_iteration(const ModelProfile& model, const SimConfig& cfg);

// Recomputes the trace-backed report fields (crypto_events and the t_* times)
// from an event trace alone.
CostReport figures_from_trace(const CollectiveTrace& t);

// Dispatches on cfg.algo.
IterationResult simulate(const ModelProfile& model, const SimConfig& cfg);

}  // namespace teesim
