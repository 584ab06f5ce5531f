#pragma once

#include <istream>
#include <string>
#include <vector>

#include "teesim/bytes.hpp"

namespace teesim::crypto {

// One encrypt record from a CAVP GCM response file. `error` is set when the
// record could not be parsed; such records are reported failed, not skipped.
struct GcmVector {
    std::string name;
    Bytes key, iv, pt, aad, ct, tag;
    std::string error;
};

std::vector<GcmVector> parse_cavp(std::istream& in);
std::vector<GcmVector> load_cavp(const std::string& path);  // throws VectorFileError

struct SelfTestFailure {
    std::string name;
    std::string expected_tag, actual_tag;
    std::string reason;
};

struct SelfTestReport {
    std::vector<std::string> passed;
    std::vector<SelfTestFailure> failed;
    bool ok() const { return failed.empty(); }
};

SelfTestReport run_vectors(const std::vector<GcmVector>& vectors);
SelfTestReport crypto_self_test(const std::string& path);

}  // namespace teesim::crypto
