#pragma once

#include <cstddef>
#include <cstdint>

#include "teesim/bytes.hpp"
#include "teesim/crypto/aes.hpp"

namespace teesim::crypto {

// Precomputed multiplication key for GHASH over GF(2^128) with
// x^128 + x^7 + x^2 + x + 1 in the GCM bit order.
class GhashKey {
public:
    explicit GhashKey(const std::uint8_t h[16], Backend backend = Backend::automatic);

    // x <- (...((x ^ b1)·H ^ b2)·H ...) over nblocks full blocks.
    void update(std::uint8_t x[16], const std::uint8_t* blocks, std::size_t nblocks) const;

    // As update(), zero-padding a trailing partial block.
    void update_padded(std::uint8_t x[16], ByteView data) const;

    void update_lengths(std::uint8_t x[16], std::uint64_t aad_bytes, std::uint64_t data_bytes) const;

    bool uses_hardware() const { return hw_; }

private:
    std::uint64_t thi_[16], tlo_[16];
    alignas(16) std::uint8_t pow_[4][16];  // H^1..H^4, byte-reversed
    bool hw_;
};

// Bit-at-a-time product straight from the GCM definition; slow, test oracle only.
void gf128_mul_reference(const std::uint8_t x[16], const std::uint8_t y[16], std::uint8_t out[16]);

namespace detail {
void clmul_powers(const std::uint8_t h[16], std::uint8_t pow[4][16]);
void clmul_update(const std::uint8_t pow[4][16], std::uint8_t x[16], const std::uint8_t* blocks,
                  std::size_t nblocks);
}  // namespace detail

}  // namespace teesim::crypto
