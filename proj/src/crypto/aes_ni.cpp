#include <immintrin.h>

#include <cstring>

#include "teesim/bytes.hpp"
#include "teesim/crypto/aes.hpp"

namespace teesim::crypto::detail {

#define TEESIM_AESNI __attribute__((target("aes,sse4.1")))

namespace {

TEESIM_AESNI inline __m128i enc(const __m128i* k, __m128i b) {
    b = _mm_xor_si128(b, k[0]);
    for (int r = 1; r < 14; ++r) b = _mm_aesenc_si128(b, k[r]);
    return _mm_aesenclast_si128(b, k[14]);
}

TEESIM_AESNI void load_keys(const std::uint8_t rk[15][16], __m128i k[15]) {
    for (int r = 0; r < 15; ++r) k[r] = _mm_loadu_si128(reinterpret_cast<const __m128i*>(rk[r]));
}

}  // namespace

TEESIM_AESNI void aesni_encrypt_block(const std::uint8_t rk[15][16], const std::uint8_t in[16],
                                      std::uint8_t out[16]) {
    __m128i k[15];
    load_keys(rk, k);
    __m128i b = enc(k, _mm_loadu_si128(reinterpret_cast<const __m128i*>(in)));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out), b);
}

TEESIM_AESNI void aesni_ctr_xor(const std::uint8_t rk[15][16], const std::uint8_t ctr0[16],
                                const std::uint8_t* in, std::uint8_t* out, std::size_t len) {
    __m128i k[15];
    load_keys(rk, k);
    alignas(16) std::uint8_t ctr[8][16];
    for (auto& c : ctr) std::memcpy(c, ctr0, 12);
    std::uint32_t c = load_be32(ctr0 + 12);
    std::size_t off = 0;
    for (; off + 128 <= len; off += 128) {
        __m128i b[8];
        for (int j = 0; j < 8; ++j) {
            store_be32(ctr[j] + 12, c++);
            b[j] = _mm_xor_si128(_mm_load_si128(reinterpret_cast<const __m128i*>(ctr[j])), k[0]);
        }
        for (int r = 1; r < 14; ++r)
            for (int j = 0; j < 8; ++j) b[j] = _mm_aesenc_si128(b[j], k[r]);
        for (int j = 0; j < 8; ++j) {
            b[j] = _mm_aesenclast_si128(b[j], k[14]);
            __m128i p = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in + off + 16 * j));
            _mm_storeu_si128(reinterpret_cast<__m128i*>(out + off + 16 * j), _mm_xor_si128(p, b[j]));
        }
    }
    for (; off < len; off += 16) {
        store_be32(ctr[0] + 12, c++);
        alignas(16) std::uint8_t ks[16];
        _mm_store_si128(reinterpret_cast<__m128i*>(ks),
                        enc(k, _mm_load_si128(reinterpret_cast<const __m128i*>(ctr[0]))));
        std::size_t n = len - off < 16 ? len - off : 16;
        for (std::size_t i = 0; i < n; ++i) out[off + i] = in[off + i] ^ ks[i];
    }
}

}  // namespace teesim::crypto::detail
