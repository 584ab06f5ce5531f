#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <vector>

namespace teesim {

enum class EventKind { encrypt, mac, send, recv, decrypt, verify, reduce, copy, compute };

const char* to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);  // throws std::invalid_argument

// time is the event's start in simulated seconds; duration is how long the
// worker (or the link, for send) was busy. bytes are logical bytes.
struct TraceEvent {
    double time = 0;
    int worker = 0;  // -1 is the host
    int peer = 0;    // other end of a link event; == worker for local work
    EventKind kind = EventKind::send;
    std::uint64_t bytes = 0;
    double duration = 0;
};

struct CollectiveTrace {
    std::vector<TraceEvent> events;
};

// CSV columns: time_s,worker,peer,kind,bytes,dur_s
void write_trace_csv(std::ostream& out, const CollectiveTrace& t);
CollectiveTrace read_trace_csv(std::istream& in);  // throws std::invalid_argument
void write_trace_json(std::ostream& out, const CollectiveTrace& t);

struct CryptoCounts {
    std::uint64_t seals = 0, opens = 0;
    std::map<int, std::pair<std::uint64_t, std::uint64_t>> per_worker;  // worker -> (seals, opens)

    std::uint64_t total(int worker) const;
};

// A seal is one encrypt event, an open one decrypt event. With
// inter_worker_only, traffic to or from the host is skipped.
CryptoCounts count_crypto_ops(const CollectiveTrace& t, bool inter_worker_only = false);

}  // namespace teesim
