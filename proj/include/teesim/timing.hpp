#pragma once

#include <utility>
#include <vector>

namespace teesim {

struct LinkSpec {
    enum class Kind { host_link, peer_link };
    Kind kind = Kind::peer_link;
    double bandwidth = 100e9;  // bytes/s
    double latency = 2e-6;     // s

    double transfer_time(double bytes) const { return latency + bytes / bandwidth; }
    void validate() const;  // throws ConfigError
};

enum class TimingMode { modeled, measured };

// Piecewise-linear relative cost through (x, y) points, extrapolated past both
// ends with the end segments' slopes.
double piecewise_linear(const std::vector<std::pair<double, double>>& pts, double x);

// All sizes are logical bytes (the full-scale sizes being modeled); the
// simulator divides real buffer sizes by `scale` before asking.
struct TimingModel {
    double host_crypto_bw = 1.82e9;
    double device_enc_peak_bw = 300e9;
    double device_enc_half_bytes = 1 << 20;
    // Seconds for one unit of relative authentication cost.
    double auth_unit_s = 8e-3;
    // (message MiB, relative cost)
    std::vector<std::pair<double, double>> auth_curve = default_auth_curve();
    LinkSpec peer_link{LinkSpec::Kind::peer_link, 100e9, 2e-6};
    LinkSpec host_link{LinkSpec::Kind::host_link, 25e9, 2e-6};
    double device_reduce_bw = 1e12;
    TimingMode mode = TimingMode::modeled;
    // real bytes / logical bytes
    double scale = 1.0;

    double enc_time(double bytes) const;
    double auth_time(double bytes) const;
    double seal_time(double bytes) const { return enc_time(bytes) + auth_time(bytes); }
    double open_time(double bytes) const { return enc_time(bytes) + auth_time(bytes); }
    double host_seal_time(double bytes) const { return bytes / host_crypto_bw; }
    double reduce_time(double bytes) const { return bytes / device_reduce_bw; }

    void validate() const;  // throws ConfigError

    static std::vector<std::pair<double, double>> default_auth_curve();
};

}  // namespace teesim
