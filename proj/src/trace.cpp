#include "teesim/trace.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace teesim {

namespace {
constexpr const char* kNames[] = {"encrypt", "mac", "send", "recv", "decrypt", "verify", "reduce", "copy", "compute"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

const char* to_string(EventKind k) { return kNames[int(k)]; }

EventKind parse_event_kind(std::string_view s) {
    for (int i = 0; i < 9; ++i)
        if (s == kNames[i]) return EventKind(i);
    throw std::invalid_argument("unknown event kind '" + std::string(s) + "'");
}

void write_trace_csv(std::ostream& out, const CollectiveTrace& t) {
    out << "time_s,worker,peer,kind,bytes,dur_s\n";
    for (const auto& e : t.events)
        out << num(e.time) << ',' << e.worker << ',' << e.peer << ',' << to_string(e.kind) << ',' << e.bytes << ','
            << num(e.duration) << '\n';
}

CollectiveTrace read_trace_csv(std::istream& in) {
    CollectiveTrace t;
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,worker,peer,kind,bytes,dur_s", 0) != 0)
        throw std::invalid_argument("trace CSV: missing header");
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f[6];
        int nf = 0;
        while (nf < 6 && std::getline(ss, f[nf], ',')) ++nf;
        if (nf < 6) throw std::invalid_argument("trace CSV: short row " + std::to_string(row));
        TraceEvent e;
        try {
            e.time = std::stod(f[0]);
            e.worker = std::stoi(f[1]);
            e.peer = std::stoi(f[2]);
            e.kind = parse_event_kind(f[3]);
            e.bytes = std::stoull(f[4]);
            e.duration = std::stod(f[5]);
        } catch (const std::logic_error& ex) {
            throw std::invalid_argument("trace CSV row " + std::to_string(row) + ": " + ex.what());
        }
        t.events.push_back(e);
    }
    return t;
}

void write_trace_json(std::ostream& out, const CollectiveTrace& t) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : t.events)
        j.push_back({{"time_s", e.time}, {"worker", e.worker}, {"peer", e.peer}, {"kind", to_string(e.kind)},
                     {"bytes", e.bytes}, {"dur_s", e.duration}});
    out << nlohmann::json{{"events", j}}.dump(1) << '\n';
}

std::uint64_t CryptoCounts::total(int worker) const {
    auto it = per_worker.find(worker);
    return it == per_worker.end() ? 0 : it->second.first + it->second.second;
}

CryptoCounts count_crypto_ops(const CollectiveTrace& t, bool inter_worker_only) {
    CryptoCounts c;
    for (const auto& e : t.events) {
        if (inter_worker_only && (e.worker < 0 || e.peer < 0)) continue;
        if (e.kind == EventKind::encrypt) {
            ++c.seals;
            ++c.per_worker[e.worker].first;
        } else if (e.kind == EventKind::decrypt) {
            ++c.opens;
            ++c.per_worker[e.worker].second;
        }
    }
    return c;
}

}  // namespace teesim
