#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "teesim/ddp.hpp"

namespace teesim {

// Everything a run or sweep needs. JSON keys match the field names; sizes are
// MiB. Unknown keys are rejected.
struct ScenarioConfig {
    std::string model = "resnet50";  // preset name or profile path
    int n_workers = 2;
    bool cc = true;
    Algo algo = Algo::ring;
    double cap_mb = 0;  // 0: the profile's default
    std::vector<double> caps_mb{0, 100, 200, 400, 800};  // sweep candidates
    TimingModel timing = SimConfig::default_timing();
    std::string adversary;  // "" | flip:FROM:TO:MSG[:BIT] | replay:FROM:TO:MSG
    std::uint64_t seed = 1;
    int tree_segments = 0;
    std::string calibration;  // calibration table path, "" for the bundled one
    std::string report_path, trace_path, sweep_path;

    void validate() const;  // throws ConfigError
    SimConfig sim_config() const;
};

ScenarioConfig scenario_from_json_text(const std::string& text);  // throws ConfigError
Adversary parse_adversary(const std::string& spec);                // throws ConfigError

// Exit codes: 0 ok, 1 self-test failure, 2 bad config, 3 aborted simulation.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace teesim
