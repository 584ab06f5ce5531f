#include "teesim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "teesim/errors.hpp"
#include "teesim/timing.hpp"

namespace teesim {

void CalibrationTable::validate() const {
    if (rows.size() < 2) throw ConfigError("calibration table needs at least two rows");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].cap_mb <= rows[i - 1].cap_mb) throw ConfigError("calibration: caps must increase");
        if (rows[i].num_transfers >= rows[i - 1].num_transfers)
            throw ConfigError("calibration: num_transfers must strictly decrease in cap");
        if (rows[i].mean_reduction_mb <= rows[i - 1].mean_reduction_mb)
            throw ConfigError("calibration: mean_reduction_mb must increase");
        if (rows[i].per_transfer_cost < rows[i - 1].per_transfer_cost)
            throw ConfigError("calibration: per_transfer_cost must be non-decreasing");
    }
}

double CalibrationTable::per_transfer_cost(double mb) const {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) pts.emplace_back(r.mean_reduction_mb, r.per_transfer_cost);
    return piecewise_linear(pts, mb);
}

const CalibrationRow* CalibrationTable::row_for_cap(double cap_mb) const {
    for (const auto& r : rows)
        if (r.cap_mb == cap_mb) return &r;
    return nullptr;
}

CalibrationTable CalibrationTable::from_json_text(const std::string& text) {
    CalibrationTable t;
    try {
        auto j = nlohmann::json::parse(text);
        for (const auto& r : j.at("rows"))
            t.rows.push_back({r.at("cap_mb").get<double>(), r.at("mean_reduction_mb").get<double>(),
                              r.at("num_transfers").get<std::uint64_t>(), r.at("per_transfer_cost").get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("calibration table: ") + e.what());
    }
    t.validate();
    return t;
}

CalibrationTable CalibrationTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open calibration table " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string CalibrationTable::default_path() { return std::string(TEESIM_SOURCE_DIR) + "/data/bucket_calibration.json"; }

double predict_cc_cost(int n, std::span<const double> sizes_mb, const std::function<double(double)>& cost) {
    if (n < 2) return 0;
    double sum = 0;
    for (double s : sizes_mb) sum += cost(s);
    return sum * 2.0 * (n - 1) * 2.0;
}

double predict_cc_cost(int n, std::uint64_t k) { return n < 2 ? 0 : 4.0 * double(k) * (n - 1); }

TuneResult tune_bucket(const ModelProfile& model, int n, std::span<const double> caps_mb,
                       const CalibrationTable& table, const TuneOptions& opt) {
    if (caps_mb.empty()) throw ConfigError("tune_bucket: no candidate caps");
    TuneResult res;
    const double compute = model.forward_time_s + model.backward_time_s;
    for (double cap : caps_mb) {
        TuneCandidate c;
        c.cap_mb = cap;
        const CalibrationRow* row = opt.prefer_table_rows ? table.row_for_cap(cap) : nullptr;
        if (row) {
            c.k = row->num_transfers;
            std::vector<double> sizes(c.k, row->mean_reduction_mb);
            c.cc_cost = predict_cc_cost(n, sizes, [&](double) { return row->per_transfer_cost; });
        } else {
            auto bytes = cap > 0 ? std::uint64_t(std::llround(cap * double(kMiB))) : model.bucket_cap_default_bytes;
            auto plan = bucketize(model, bytes);
            c.k = plan.k();
            std::vector<double> sizes;
            for (const auto& b : plan.buckets) sizes.push_back(double(b.bytes) / double(kMiB));
            c.cc_cost = predict_cc_cost(n, sizes, [&](double mb) { return table.per_transfer_cost(mb); });
        }
        c.total_cost = compute + c.cc_cost * opt.cost_unit_s;
        res.candidates.push_back(c);
    }
    // ties go to the smaller cap; 0 (default) sorts as the smallest
    const TuneCandidate* best = nullptr;
    for (const auto& c : res.candidates)
        if (!best || c.total_cost < best->total_cost || (c.total_cost == best->total_cost && c.cap_mb < best->cap_mb))
            best = &c;
    res.best_cap_mb = best->cap_mb;
    for (const auto& c : res.candidates)
        if (c.cap_mb == 0 && best->cc_cost > 0) res.cost_reduction_vs_default = c.cc_cost / best->cc_cost;
    return res;
}

std::vector<SlowdownRow> predict_slowdown(const ModelProfile& model, std::span<const int> ns,
                                          std::span<const double> caps_mb, const SimConfig& base) {
    std::vector<SlowdownRow> out;
    for (int n : ns)
        for (double cap : caps_mb) {
            SimConfig cfg = base;
            cfg.n_workers = n;
            cfg.cap_bytes = std::uint64_t(std::llround(cap * double(kMiB)));
            cfg.keep_trace = false;
            cfg.cc = true;
            cfg.compare_cc_off = false;
            auto on = simulate(model, cfg).report;
            cfg.cc = false;
            auto off = simulate(model, cfg).report;
            out.push_back({n, cap, on.t_total_s, off.t_total_s, on.t_total_s / off.t_total_s,
                           1.0 - off.t_total_s / on.t_total_s});
        }
    return out;
}

}  // namespace teesim
