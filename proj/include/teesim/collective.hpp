#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "teesim/channel.hpp"
#include "teesim/timing.hpp"
#include "teesim/trace.hpp"

namespace teesim {

// Workers, their channels and simulated clocks. Collectives run in lock-step
// exchanges; within one exchange senders (then receivers) run in parallel.
class World {
public:
    World(int n_workers, bool cc, TimingModel timing = {}, std::uint64_t seed = 1,
          std::size_t chunk_size = crypto::kDefaultChunkSize);

    int n() const { return n_; }
    bool cc() const { return cc_; }
    const TimingModel& timing() const { return timing_; }
    ChannelMesh& mesh() { return mesh_; }

    double& clock(int worker) { return clocks_[std::size_t(worker + 1)]; }
    double max_clock() const;  // over workers, excluding the host
    void set_all_clocks(double t);

    Adversary adversary;
    Exec exec = Exec::parallel;
    bool record_trace = true;

    struct Transfer {
        int from, to;
        ByteView payload;
        double logical_bytes = 0;  // 0: payload size / scale
    };
    using Deliver = std::function<void(std::size_t transfer, Bytes&& plaintext)>;

    // Sends every transfer, passes it through the adversary, receives it, and
    // hands the plaintext to `deliver` on the receiver's thread. Channel errors
    // become CollectiveAbort naming the lowest failing receiver.
    void exchange(const std::string& collective, int step, std::span<const Transfer> transfers,
                  const Deliver& deliver);

    // Device-side reduction / copy with its modeled time, logged on `worker`.
    void reduce(int worker, std::span<float> dst, std::span<const float> src);
    void copy(int worker, std::span<float> dst, std::span<const float> src);

    void log(int worker, EventKind kind, double time, double duration, double logical_bytes, int peer);

    // All events, ordered by (time, worker, per-worker sequence).
    CollectiveTrace trace() const;
    void clear_trace();

private:
    int n_;
    bool cc_;
    TimingModel timing_;
    ChannelMesh mesh_;
    std::vector<double> clocks_;                  // host first
    std::vector<std::vector<TraceEvent>> logs_;   // host first
    std::uint64_t next_context_ = 1;
};

struct ChunkRange {
    std::size_t begin = 0, end = 0;
    std::size_t size() const { return end - begin; }
};

// First len % parts ranges get one extra element.
std::vector<ChunkRange> balanced_chunks(std::size_t len, int parts);

struct RingStep {
    enum class Phase { scatter_reduce, all_gather };
    Phase phase;
    int index;                      // within the phase
    std::vector<int> send_chunk;    // per worker; worker i sends to (i + 1) % n
    std::vector<int> recv_chunk;    // per worker; from (i - 1) % n
};

struct RingPlan {
    int n = 1;
    std::vector<ChunkRange> chunks;
    std::vector<RingStep> steps;
};

RingPlan make_ring_plan(int n, std::size_t len);

struct CollectiveResult {
    int steps = 0;  // lock-step exchanges (rounds for the tree)
};

// buffers[i] is worker i's gradient; reduced in place. Equal lengths required.
CollectiveResult ring_all_reduce(World& w, std::vector<std::vector<float>>& buffers);

struct Shard {
    std::size_t chunk = 0;  // index into balanced_chunks(len, n)
    std::vector<float> values;
};

// Scatter-reduce phase alone. Worker i ends with chunk (i + 1) % n of the sum.
std::vector<Shard> reduce_scatter(World& w, const std::vector<std::vector<float>>& buffers,
                                  CollectiveResult* result = nullptr);

// Every worker ends with shards[0] ++ shards[1] ++ ... ++ shards[n-1].
std::vector<std::vector<float>> all_gather(World& w, const std::vector<std::vector<float>>& shards,
                                           CollectiveResult* result = nullptr);

// Binary heap tree: reduce towards worker 0, then broadcast. `segments` > 1
// pipelines the buffer in that many pieces.
CollectiveResult tree_all_reduce(World& w, std::vector<std::vector<float>>& buffers, int segments = 1);

int tree_depth(int n);

}  // namespace teesim
