#include <immintrin.h>

#include "teesim/crypto/ghash.hpp"

// Carry-less multiply GHASH on byte-reversed operands, after Gueron and
// Kounavis' gfmul. Four blocks share one reduction.

namespace teesim::crypto::detail {

#define TEESIM_CLMUL __attribute__((target("pclmul,sse4.1,ssse3")))

namespace {

TEESIM_CLMUL inline __m128i bswap(__m128i v) {
    const __m128i m = _mm_set_epi8(0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15);
    return _mm_shuffle_epi8(v, m);
}

TEESIM_CLMUL inline void mul(__m128i a, __m128i b, __m128i& lo, __m128i& hi) {
    __m128i t0 = _mm_clmulepi64_si128(a, b, 0x00);
    __m128i t1 = _mm_xor_si128(_mm_clmulepi64_si128(a, b, 0x10), _mm_clmulepi64_si128(a, b, 0x01));
    __m128i t2 = _mm_clmulepi64_si128(a, b, 0x11);
    lo = _mm_xor_si128(t0, _mm_slli_si128(t1, 8));
    hi = _mm_xor_si128(t2, _mm_srli_si128(t1, 8));
}

TEESIM_CLMUL inline __m128i reduce(__m128i lo, __m128i hi) {
    // shift the 256-bit product left by one (bit-reflected domain)
    __m128i c_lo = _mm_srli_epi32(lo, 31), c_hi = _mm_srli_epi32(hi, 31);
    lo = _mm_slli_epi32(lo, 1);
    hi = _mm_slli_epi32(hi, 1);
    __m128i carry = _mm_srli_si128(c_lo, 12);
    c_hi = _mm_slli_si128(c_hi, 4);
    c_lo = _mm_slli_si128(c_lo, 4);
    lo = _mm_or_si128(lo, c_lo);
    hi = _mm_or_si128(_mm_or_si128(hi, c_hi), carry);
    __m128i a = _mm_xor_si128(_mm_xor_si128(_mm_slli_epi32(lo, 31), _mm_slli_epi32(lo, 30)),
                              _mm_slli_epi32(lo, 25));
    __m128i b = _mm_srli_si128(a, 4);
    lo = _mm_xor_si128(lo, _mm_slli_si128(a, 12));
    __m128i c = _mm_xor_si128(_mm_xor_si128(_mm_srli_epi32(lo, 1), _mm_srli_epi32(lo, 2)),
                              _mm_srli_epi32(lo, 7));
    c = _mm_xor_si128(c, b);
    lo = _mm_xor_si128(lo, c);
    return _mm_xor_si128(hi, lo);
}

TEESIM_CLMUL inline __m128i gfmul(__m128i a, __m128i b) {
    __m128i lo, hi;
    mul(a, b, lo, hi);
    return reduce(lo, hi);
}

TEESIM_CLMUL inline __m128i load(const std::uint8_t* p) {
    return bswap(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

}  // namespace

TEESIM_CLMUL void clmul_powers(const std::uint8_t h[16], std::uint8_t pow[4][16]) {
    __m128i h1 = load(h), p = h1;
    for (int i = 0; i < 4; ++i) {
        _mm_storeu_si128(reinterpret_cast<__m128i*>(pow[i]), p);
        p = gfmul(p, h1);
    }
}

TEESIM_CLMUL void clmul_update(const std::uint8_t pow[4][16], std::uint8_t x[16],
                               const std::uint8_t* blocks, std::size_t nblocks) {
    __m128i hp[4];
    for (int i = 0; i < 4; ++i) hp[i] = _mm_loadu_si128(reinterpret_cast<const __m128i*>(pow[i]));
    __m128i acc = load(x);
    std::size_t b = 0;
    for (; b + 4 <= nblocks; b += 4) {
        const std::uint8_t* p = blocks + 16 * b;
        __m128i lo, hi, l, h;
        mul(_mm_xor_si128(acc, load(p)), hp[3], lo, hi);
        for (int j = 1; j < 4; ++j) {
            mul(load(p + 16 * j), hp[3 - j], l, h);
            lo = _mm_xor_si128(lo, l);
            hi = _mm_xor_si128(hi, h);
        }
        acc = reduce(lo, hi);
    }
    for (; b < nblocks; ++b) acc = gfmul(_mm_xor_si128(acc, load(blocks + 16 * b)), hp[0]);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(x), bswap(acc));
}

}  // namespace teesim::crypto::detail
