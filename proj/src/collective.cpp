#include "teesim/collective.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>

#include "teesim/errors.hpp"
#include "teesim/kernels.hpp"

namespace teesim {

World::World(int n_workers, bool cc, TimingModel timing, std::uint64_t seed, std::size_t chunk_size)
    : n_(n_workers), cc_(cc), timing_(std::move(timing)),
      mesh_(n_workers, seed, cc, timing_.peer_link, timing_.host_link, chunk_size),
      clocks_(std::size_t(n_workers) + 1, 0.0), logs_(std::size_t(n_workers) + 1) {
    timing_.validate();
}

double World::max_clock() const { return *std::max_element(clocks_.begin() + 1, clocks_.end()); }

void World::set_all_clocks(double t) { std::fill(clocks_.begin(), clocks_.end(), t); }

void World::log(int worker, EventKind kind, double time, double duration, double logical_bytes, int peer) {
    if (!record_trace) return;
    logs_[std::size_t(worker + 1)].push_back(
        {time, worker, peer, kind, std::uint64_t(std::llround(logical_bytes)), duration});
}

CollectiveTrace World::trace() const {
    CollectiveTrace t;
    for (const auto& l : logs_) t.events.insert(t.events.end(), l.begin(), l.end());
    // per-worker logs are already in program order; stable sort keeps it
    std::stable_sort(t.events.begin(), t.events.end(), [](const TraceEvent& a, const TraceEvent& b) {
        return a.time < b.time || (a.time == b.time && a.worker < b.worker);
    });
    return t;
}

void World::clear_trace() {
    for (auto& l : logs_) l.clear();
}

void World::reduce(int worker, std::span<float> dst, std::span<const float> src) {
    reduce_add(dst, src, exec);
    double bytes = double(src.size_bytes()) / timing_.scale;
    double& c = clock(worker);
    double d = timing_.reduce_time(bytes);
    log(worker, EventKind::reduce, c, d, bytes, worker);
    c += d;
}

void World::copy(int worker, std::span<float> dst, std::span<const float> src) {
    std::copy(src.begin(), src.end(), dst.begin());
    double bytes = double(src.size_bytes()) / timing_.scale;
    double& c = clock(worker);
    double d = timing_.reduce_time(bytes);
    log(worker, EventKind::copy, c, d, bytes, worker);
    c += d;
}

namespace {

// Runs fn(k) for k in [0, count) and rethrows the error of the lowest k.
template <class F>
void for_each_rethrow(std::size_t count, Exec exec, F&& fn, std::vector<std::exception_ptr>& errs) {
    errs.assign(count, nullptr);
    const std::int64_t n = std::int64_t(count);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel && n > 1)
    for (std::int64_t k = 0; k < n; ++k) {
        try {
            fn(std::size_t(k));
        } catch (...) {
            errs[std::size_t(k)] = std::current_exception();
        }
    }
}

}  // namespace

void World::exchange(const std::string& collective, int step, std::span<const Transfer> transfers,
                     const Deliver& deliver) {
    if (adversary.mode == Adversary::Mode::reorder)
        throw ConfigError("reorder adversary is only supported on bare channels");
    std::uint64_t context = next_context_++;

    std::map<int, std::vector<std::size_t>> by_sender, by_receiver;
    for (std::size_t k = 0; k < transfers.size(); ++k) {
        mesh_.get(transfers[k].from, transfers[k].to);  // create lazily here, not in the parallel part
        by_sender[transfers[k].from].push_back(k);
        by_receiver[transfers[k].to].push_back(k);
    }
    std::vector<std::pair<int, std::vector<std::size_t>>> senders(by_sender.begin(), by_sender.end());
    std::vector<std::pair<int, std::vector<std::size_t>>> receivers(by_receiver.begin(), by_receiver.end());

    std::vector<DeliveredMessage> sent(transfers.size());
    std::vector<std::exception_ptr> errs;
    for_each_rethrow(senders.size(), exec, [&](std::size_t s) {
        int from = senders[s].first;
        for (std::size_t k : senders[s].second) {
            const Transfer& t = transfers[k];
            double& c = clock(from);
            auto [msg, tr] = mesh_.get(from, t.to).send(t.payload, c, timing_, context, Exec::serial, t.logical_bytes);
            double bytes = t.logical_bytes > 0 ? t.logical_bytes : double(t.payload.size()) / timing_.scale;
            if (cc_) {
                log(from, EventKind::encrypt, tr.start, tr.enc_s, bytes, t.to);
                log(from, EventKind::mac, tr.start + tr.enc_s, tr.auth_s, bytes, t.to);
            }
            log(from, EventKind::send, tr.end, tr.link_s, bytes, t.to);
            c = tr.end;
            sent[k] = std::move(msg);
        }
    }, errs);
    for (std::size_t s = 0; s < errs.size(); ++s)
        if (errs[s]) {
            try {
                std::rethrow_exception(errs[s]);
            } catch (const std::exception& e) {
                throw CollectiveAbort(collective, step, senders[s].first, e.what());
            }
        }

    // The adversary sees link traffic in a fixed order, so runs are reproducible.
    std::vector<std::vector<DeliveredMessage>> arrived(transfers.size());
    for (std::size_t k = 0; k < transfers.size(); ++k) arrived[k] = adversary.transmit(std::move(sent[k]));

    for_each_rethrow(receivers.size(), exec, [&](std::size_t r) {
        int to = receivers[r].first;
        for (std::size_t k : receivers[r].second) {
            if (arrived[k].empty()) throw Error("message withheld on link");
            for (std::size_t copy = 0; copy < arrived[k].size(); ++copy) {
                const DeliveredMessage& m = arrived[k][copy];
                double& c = clock(to);
                auto [pt, tr] = mesh_.get(m.from, to).recv(m, c, timing_, Exec::serial);
                double bytes = double(pt.size()) / timing_.scale;
                log(to, EventKind::recv, tr.start, 0, bytes, m.from);
                if (cc_) {
                    log(to, EventKind::verify, tr.start, tr.auth_s, bytes, m.from);
                    log(to, EventKind::decrypt, tr.start + tr.auth_s, tr.enc_s, bytes, m.from);
                }
                c = tr.end;
                deliver(k, std::move(pt));
            }
        }
    }, errs);
    for (std::size_t r = 0; r < errs.size(); ++r)
        if (errs[r]) {
            try {
                std::rethrow_exception(errs[r]);
            } catch (const CollectiveAbort&) {
                throw;
            } catch (const std::exception& e) {
                throw CollectiveAbort(collective, step, receivers[r].first, e.what());
            }
        }
}

std::vector<ChunkRange> balanced_chunks(std::size_t len, int parts) {
    std::vector<ChunkRange> out(static_cast<std::size_t>(parts));
    std::size_t base = len / std::size_t(parts), extra = len % std::size_t(parts), at = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t sz = base + (i < extra ? 1 : 0);
        out[i] = {at, at + sz};
        at += sz;
    }
    return out;
}

RingPlan make_ring_plan(int n, std::size_t len) {
    if (n < 1) throw std::invalid_argument("ring needs n >= 1");
    RingPlan p;
    p.n = n;
    p.chunks = balanced_chunks(len, n);
    auto mod = [n](int v) { return ((v % n) + n) % n; };
    for (int s = 0; s < n - 1; ++s) {
        RingStep st{RingStep::Phase::scatter_reduce, s, {}, {}};
        for (int i = 0; i < n; ++i) {
            st.send_chunk.push_back(mod(i - s));
            st.recv_chunk.push_back(mod(i - 1 - s));
        }
        p.steps.push_back(std::move(st));
    }
    for (int s = 0; s < n - 1; ++s) {
        RingStep st{RingStep::Phase::all_gather, s, {}, {}};
        for (int i = 0; i < n; ++i) {
            st.send_chunk.push_back(mod(i + 1 - s));
            st.recv_chunk.push_back(mod(i - s));
        }
        p.steps.push_back(std::move(st));
    }
    return p;
}

namespace {

void check_equal_lengths(const std::vector<std::vector<float>>& b, int n) {
    if (int(b.size()) != n) throw std::invalid_argument("need one buffer per worker");
    for (const auto& v : b)
        if (v.size() != b[0].size()) throw std::invalid_argument("worker buffers differ in length");
}

// Pads to at least n elements so every chunk is non-empty.
std::size_t pad_to_workers(std::vector<std::vector<float>>& b, int n) {
    std::size_t len = b[0].size();
    if (len < std::size_t(n))
        for (auto& v : b) v.resize(std::size_t(n), 0.0f);
    return len;
}

void run_ring_steps(World& w, const std::string& name, const RingPlan& plan,
                    std::vector<std::vector<float>>& buf, RingStep::Phase phase, int& step_no) {
    const int n = plan.n;
    for (const auto& st : plan.steps) {
        if (st.phase != phase) continue;
        std::vector<Bytes> payloads(static_cast<std::size_t>(n));
        std::vector<World::Transfer> tx;
        for (int i = 0; i < n; ++i) {
            const auto& r = plan.chunks[std::size_t(st.send_chunk[std::size_t(i)])];
            payloads[std::size_t(i)] = encode_floats(std::span<const float>(buf[std::size_t(i)]).subspan(r.begin, r.size()));
        }
        for (int i = 0; i < n; ++i) tx.push_back({i, (i + 1) % n, payloads[std::size_t(i)]});
        w.exchange(name, step_no++, tx, [&](std::size_t k, Bytes&& pt) {
            int to = tx[k].to;
            const auto& r = plan.chunks[std::size_t(st.recv_chunk[std::size_t(to)])];
            auto vals = decode_floats(pt);
            if (vals.size() != r.size()) throw Error("chunk length mismatch");
            std::span<float> dst(buf[std::size_t(to)].data() + r.begin, r.size());
            if (phase == RingStep::Phase::scatter_reduce)
                w.reduce(to, dst, vals);
            else
                w.copy(to, dst, vals);
        });
    }
}

}  // namespace

CollectiveResult ring_all_reduce(World& w, std::vector<std::vector<float>>& buffers) {
    const int n = w.n();
    check_equal_lengths(buffers, n);
    CollectiveResult res;
    if (n == 1) return res;
    std::size_t len = pad_to_workers(buffers, n);
    RingPlan plan = make_ring_plan(n, buffers[0].size());
    run_ring_steps(w, "ring_all_reduce", plan, buffers, RingStep::Phase::scatter_reduce, res.steps);
    run_ring_steps(w, "ring_all_reduce", plan, buffers, RingStep::Phase::all_gather, res.steps);
    for (auto& v : buffers) v.resize(len);
    return res;
}

std::vector<Shard> reduce_scatter(World& w, const std::vector<std::vector<float>>& buffers,
                                  CollectiveResult* result) {
    const int n = w.n();
    check_equal_lengths(buffers, n);
    auto buf = buffers;
    std::size_t len = pad_to_workers(buf, n);
    RingPlan plan = make_ring_plan(n, buf[0].size());
    int steps = 0;
    run_ring_steps(w, "reduce_scatter", plan, buf, RingStep::Phase::scatter_reduce, steps);
    if (result) result->steps = steps;
    std::vector<Shard> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::size_t c = std::size_t((i + 1) % n);
        const auto& r = plan.chunks[c];
        // without padding this is r.size(); with it, chunks past len are empty
        std::size_t keep = std::min(r.size(), len > r.begin ? len - r.begin : 0);
        out[std::size_t(i)] = {c, std::vector<float>(buf[std::size_t(i)].begin() + long(r.begin),
                                                     buf[std::size_t(i)].begin() + long(r.begin + keep))};
    }
    return out;
}

std::vector<std::vector<float>> all_gather(World& w, const std::vector<std::vector<float>>& shards,
                                           CollectiveResult* result) {
    const int n = w.n();
    if (int(shards.size()) != n) throw std::invalid_argument("need one shard per worker");
    std::vector<std::size_t> off(std::size_t(n) + 1, 0);
    for (int i = 0; i < n; ++i) off[std::size_t(i) + 1] = off[std::size_t(i)] + shards[std::size_t(i)].size();
    std::vector<std::vector<float>> full(std::size_t(n), std::vector<float>(off.back()));
    for (int i = 0; i < n; ++i)
        std::copy(shards[std::size_t(i)].begin(), shards[std::size_t(i)].end(), full[std::size_t(i)].begin() + long(off[std::size_t(i)]));
    auto mod = [n](int v) { return ((v % n) + n) % n; };
    int steps = 0;
    for (int s = 0; s < n - 1; ++s) {
        std::vector<Bytes> payloads(static_cast<std::size_t>(n));
        std::vector<World::Transfer> tx;
        for (int i = 0; i < n; ++i) {
            std::size_t c = std::size_t(mod(i - s));
            if (shards[c].empty()) throw std::invalid_argument("all_gather: empty shard");
            payloads[std::size_t(i)] = encode_floats(std::span<const float>(full[std::size_t(i)]).subspan(off[c], shards[c].size()));
            tx.push_back({i, (i + 1) % n, payloads[std::size_t(i)]});
        }
        w.exchange("all_gather", steps++, tx, [&](std::size_t k, Bytes&& pt) {
            int to = tx[k].to;
            std::size_t c = std::size_t(mod(to - 1 - s));
            auto vals = decode_floats(pt);
            if (vals.size() != shards[c].size()) throw Error("shard length mismatch");
            w.copy(to, std::span<float>(full[std::size_t(to)].data() + off[c], vals.size()), vals);
        });
    }
    if (result) result->steps = steps;
    return full;
}

int tree_depth(int n) {
    int d = 0;
    while ((2 << d) - 1 < n) ++d;  // levels 0..d hold up to 2^(d+1) - 1 nodes
    return d;
}

CollectiveResult tree_all_reduce(World& w, std::vector<std::vector<float>>& buffers, int segments) {
    const int n = w.n();
    check_equal_lengths(buffers, n);
    CollectiveResult res;
    if (n == 1) return res;
    std::size_t len = pad_to_workers(buffers, n);
    segments = std::max(1, std::min<int>(segments, int(buffers[0].size())));
    auto segs = balanced_chunks(buffers[0].size(), segments);
    const int depth = tree_depth(n);
    auto level = [](int v) {
        int l = 0;
        while ((2 << l) - 1 <= v) ++l;
        return l;
    };

    for (const auto& seg : segs) {
        for (int l = depth; l >= 1; --l) {
            std::vector<Bytes> payloads;
            std::vector<World::Transfer> tx;
            std::vector<int> senders;
            for (int v = 0; v < n; ++v)
                if (level(v) == l) senders.push_back(v);
            payloads.reserve(senders.size());
            for (int v : senders) {
                payloads.push_back(encode_floats(std::span<const float>(buffers[std::size_t(v)]).subspan(seg.begin, seg.size())));
                tx.push_back({v, (v - 1) / 2, payloads.back()});
            }
            // transfers are ordered by child id, so the left child is added first
            w.exchange("tree_all_reduce", res.steps++, tx, [&](std::size_t k, Bytes&& pt) {
                int to = tx[k].to;
                auto vals = decode_floats(pt);
                w.reduce(to, std::span<float>(buffers[std::size_t(to)].data() + seg.begin, seg.size()), vals);
            });
        }
    }
    for (const auto& seg : segs) {
        for (int l = 0; l < depth; ++l) {
            std::vector<Bytes> payloads;
            std::vector<World::Transfer> tx;
            std::vector<int> senders;
            for (int v = 0; v < n; ++v)
                if (level(v) == l && 2 * v + 1 < n) senders.push_back(v);
            payloads.reserve(senders.size());
            for (int v : senders) {
                payloads.push_back(encode_floats(std::span<const float>(buffers[std::size_t(v)]).subspan(seg.begin, seg.size())));
                for (int c = 2 * v + 1; c <= 2 * v + 2 && c < n; ++c) tx.push_back({v, c, payloads.back()});
            }
            w.exchange("tree_all_reduce", res.steps++, tx, [&](std::size_t k, Bytes&& pt) {
                int to = tx[k].to;
                auto vals = decode_floats(pt);
                w.copy(to, std::span<float>(buffers[std::size_t(to)].data() + seg.begin, seg.size()), vals);
            });
        }
    }
    for (auto& v : buffers) v.resize(len);
    return res;
}

}  // namespace teesim
