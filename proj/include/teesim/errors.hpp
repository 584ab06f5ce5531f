#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace teesim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct CryptoError : Error {
    using Error::Error;
};

struct NonceExhausted : CryptoError {
    NonceExhausted() : CryptoError("nonce space exhausted") {}
};

struct ChunkingOverflow : CryptoError {
    explicit ChunkingOverflow(std::size_t chunks)
        : CryptoError("chunking overflow (" + std::to_string(chunks) + " chunks > 65536)") {}
};

// chunk < 0 means the frame itself was malformed (bad tag count, truncated).
struct AuthenticationFailure : CryptoError {
    explicit AuthenticationFailure(long chunk)
        : CryptoError(chunk < 0 ? std::string("authentication failure (malformed frame)")
                                : "authentication failure (chunk " + std::to_string(chunk) + ")"),
          chunk(chunk) {}
    long chunk;
};

struct ReplayDetected : Error {
    ReplayDetected(unsigned long counter, unsigned long high_water)
        : Error("replay detected (counter " + std::to_string(counter) + " <= " +
                std::to_string(high_water) + ")"),
          counter(counter), high_water(high_water) {}
    unsigned long counter, high_water;
};

struct VectorFileError : Error {
    using Error::Error;
};

// Raised by a collective when a channel error stops it. step counts from 0 over
// the whole collective; worker is the receiver that detected the problem.
struct CollectiveAbort : Error {
    CollectiveAbort(std::string collective, int step, int worker, const std::string& cause)
        : Error(collective + " aborted at step " + std::to_string(step) + ", worker " +
                std::to_string(worker) + ": " + cause),
          collective(std::move(collective)), step(step), worker(worker), cause(cause) {}
    std::string collective;
    int step, worker;
    std::string cause;
};

}  // namespace teesim
