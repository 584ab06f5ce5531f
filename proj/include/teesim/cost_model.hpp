#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "teesim/ddp.hpp"
#include "teesim/profile.hpp"

namespace teesim {

struct CalibrationRow {
    double cap_mb = 0;  // 0: the framework default cap
    double mean_reduction_mb = 0;
    std::uint64_t num_transfers = 0;
    double per_transfer_cost = 0;  // relative
};

struct CalibrationTable {
    std::vector<CalibrationRow> rows;  // ascending cap

    void validate() const;  // throws ConfigError
    // Linear between rows, end-segment slope outside them.
    double per_transfer_cost(double mean_reduction_mb) const;
    const CalibrationRow* row_for_cap(double cap_mb) const;

    static CalibrationTable from_json_text(const std::string& text);
    static CalibrationTable load(const std::string& path);
    static std::string default_path();  // data/bucket_calibration.json in the source tree
};

// sum over buckets of cost(size) * 2(n-1) steps * 2 (seal + open).
double predict_cc_cost(int n, std::span<const double> sizes_mb, const std::function<double(double)>& cost);
// Unit cost: 4k(n-1).
double predict_cc_cost(int n, std::uint64_t k);

struct TuneCandidate {
    double cap_mb = 0;  // 0: default
    std::uint64_t k = 0;
    double cc_cost = 0;     // relative, as predict_cc_cost
    double total_cost = 0;  // compute seconds + cc_cost * cost_unit_s
};

struct TuneResult {
    double best_cap_mb = 0;
    std::vector<TuneCandidate> candidates;
    double cost_reduction_vs_default = 1;  // cc cost at default / cc cost at best; 1 without a default candidate
};

struct TuneOptions {
    double cost_unit_s = 8e-3;  // seconds for one relative unit of seal or open
    // When set, candidates found in the table use its measured transfer
    // counts and costs instead of bucketizing the profile.
    bool prefer_table_rows = true;
};

TuneResult tune_bucket(const ModelProfile& model, int n, std::span<const double> caps_mb,
                       const CalibrationTable& table, const TuneOptions& opt = {});

struct SlowdownRow {
    int n = 0;
    double cap_mb = 0;
    double t_on_s = 0, t_off_s = 0;
    double ratio = 0;
    double tee_share = 0;
};

// Runs the simulator cc on and off for each (n, cap).
std::vector<SlowdownRow> predict_slowdown(const ModelProfile& model, std::span<const int> ns,
                                          std::span<const double> caps_mb, const SimConfig& base);

}  // namespace teesim
