#pragma once

#include <cstddef>
#include <cstdint>

namespace teesim::crypto {

// automatic picks AES-NI/PCLMUL when the CPU has them.
enum class Backend { automatic, portable, hardware };

bool hardware_available();

class Aes256 {
public:
    explicit Aes256(const std::uint8_t key[32], Backend backend = Backend::automatic);

    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

    // out = in XOR E(ctr0), E(ctr0 + 1), ...; the increment is on the low 32
    // bits, big-endian. Callers are responsible for counter-space checks.
    void ctr_xor(const std::uint8_t ctr0[16], const std::uint8_t* in, std::uint8_t* out,
                 std::size_t len) const;

    bool uses_hardware() const { return hw_; }

private:
    alignas(16) std::uint8_t rk_[15][16];
    std::uint32_t ek_[60];
    bool hw_;
};

namespace detail {
void aesni_encrypt_block(const std::uint8_t rk[15][16], const std::uint8_t in[16],
                         std::uint8_t out[16]);
void aesni_ctr_xor(const std::uint8_t rk[15][16], const std::uint8_t ctr0[16],
                   const std::uint8_t* in, std::uint8_t* out, std::size_t len);
}  // namespace detail

}  // namespace teesim::crypto
