#include "teesim/timing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "teesim/errors.hpp"

namespace teesim {

void LinkSpec::validate() const {
    if (!(bandwidth > 0) || !std::isfinite(bandwidth)) throw ConfigError("link bandwidth must be > 0");
    if (!(latency >= 0) || !std::isfinite(latency)) throw ConfigError("link latency must be >= 0");
}

double piecewise_linear(const std::vector<std::pair<double, double>>& pts, double x) {
    if (pts.empty()) return 0;
    if (pts.size() == 1) return pts[0].second;
    std::size_t i = 1;
    while (i + 1 < pts.size() && x > pts[i].first) ++i;
    auto [x0, y0] = pts[i - 1];
    auto [x1, y1] = pts[i];
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

// Per-message authentication cost relative to a 22 MiB message. The x values
// are the calibration table's mean reductions halved: a two-worker ring moves
// half the bucket per step. Sub-linear until ~200 MiB, then the knee.
std::vector<std::pair<double, double>> TimingModel::default_auth_curve() {
    return {{22.0, 1.00}, {61.5, 1.08}, {122.95, 1.24}, {215.2, 1.60}, {430.35, 2.69}};
}

double TimingModel::enc_time(double bytes) const {
    return bytes <= 0 ? 0 : (bytes + device_enc_half_bytes) / device_enc_peak_bw;
}

double TimingModel::auth_time(double bytes) const {
    if (bytes <= 0) return 0;
    return auth_unit_s * std::max(0.0, piecewise_linear(auth_curve, bytes / double(1 << 20)));
}

void TimingModel::validate() const {
    auto pos = [](double v, const char* what) {
        if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be > 0");
    };
    pos(host_crypto_bw, "host_crypto_bw");
    pos(device_enc_peak_bw, "device_enc_peak_bw");
    pos(auth_unit_s, "auth_unit_s");
    pos(device_reduce_bw, "device_reduce_bw");
    pos(scale, "scale");
    if (!(device_enc_half_bytes >= 0)) throw ConfigError("device_enc_half_bytes must be >= 0");
    if (auth_curve.size() < 2) throw ConfigError("auth_curve needs at least two points");
    for (std::size_t i = 1; i < auth_curve.size(); ++i) {
        if (!(auth_curve[i].first > auth_curve[i - 1].first))
            throw ConfigError("auth_curve sizes must increase");
        if (auth_curve[i].second < auth_curve[i - 1].second)
            throw ConfigError("auth_curve must be non-decreasing");
    }
    if (auth_curve.front().second <= 0) throw ConfigError("auth_curve costs must be > 0");
    peer_link.validate();
    host_link.validate();
}

}  // namespace teesim
