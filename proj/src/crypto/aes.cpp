#include "teesim/crypto/aes.hpp"

#include <array>
#include <cstring>

#include "teesim/bytes.hpp"

namespace teesim::crypto {
namespace {

constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

constexpr std::uint32_t rotr(std::uint32_t v, int n) { return n == 0 ? v : v >> n | v << (32 - n); }

constexpr std::uint8_t xtime(std::uint8_t b) { return std::uint8_t(b << 1 ^ (b & 0x80 ? 0x1b : 0)); }

struct Tables {
    std::uint32_t te[4][256];
};

constexpr Tables make_tables() {
    Tables t{};
    for (int x = 0; x < 256; ++x) {
        std::uint8_t s = kSbox[x], s2 = xtime(s), s3 = std::uint8_t(s2 ^ s);
        std::uint32_t w = std::uint32_t(s2) << 24 | std::uint32_t(s) << 16 | std::uint32_t(s) << 8 | s3;
        for (int k = 0; k < 4; ++k) t.te[k][x] = rotr(w, 8 * k);
    }
    return t;
}

constexpr Tables kT = make_tables();

std::uint32_t sub_word(std::uint32_t w) {
    return std::uint32_t(kSbox[w >> 24]) << 24 | std::uint32_t(kSbox[(w >> 16) & 0xff]) << 16 |
           std::uint32_t(kSbox[(w >> 8) & 0xff]) << 8 | kSbox[w & 0xff];
}

void encrypt_portable(const std::uint32_t ek[60], const std::uint8_t in[16], std::uint8_t out[16]) {
    const auto& T = kT.te;
    std::uint32_t s0 = load_be32(in) ^ ek[0], s1 = load_be32(in + 4) ^ ek[1];
    std::uint32_t s2 = load_be32(in + 8) ^ ek[2], s3 = load_be32(in + 12) ^ ek[3];
    for (int r = 1; r < 14; ++r) {
        const std::uint32_t* k = ek + 4 * r;
        std::uint32_t t0 = T[0][s0 >> 24] ^ T[1][(s1 >> 16) & 0xff] ^ T[2][(s2 >> 8) & 0xff] ^ T[3][s3 & 0xff] ^ k[0];
        std::uint32_t t1 = T[0][s1 >> 24] ^ T[1][(s2 >> 16) & 0xff] ^ T[2][(s3 >> 8) & 0xff] ^ T[3][s0 & 0xff] ^ k[1];
        std::uint32_t t2 = T[0][s2 >> 24] ^ T[1][(s3 >> 16) & 0xff] ^ T[2][(s0 >> 8) & 0xff] ^ T[3][s1 & 0xff] ^ k[2];
        std::uint32_t t3 = T[0][s3 >> 24] ^ T[1][(s0 >> 16) & 0xff] ^ T[2][(s1 >> 8) & 0xff] ^ T[3][s2 & 0xff] ^ k[3];
        s0 = t0, s1 = t1, s2 = t2, s3 = t3;
    }
    auto last = [](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
        return std::uint32_t(kSbox[a >> 24]) << 24 | std::uint32_t(kSbox[(b >> 16) & 0xff]) << 16 |
               std::uint32_t(kSbox[(c >> 8) & 0xff]) << 8 | kSbox[d & 0xff];
    };
    store_be32(out, last(s0, s1, s2, s3) ^ ek[56]);
    store_be32(out + 4, last(s1, s2, s3, s0) ^ ek[57]);
    store_be32(out + 8, last(s2, s3, s0, s1) ^ ek[58]);
    store_be32(out + 12, last(s3, s0, s1, s2) ^ ek[59]);
}

}  // namespace

bool hardware_available() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool ok = __builtin_cpu_supports("aes") && __builtin_cpu_supports("pclmul") &&
                           __builtin_cpu_supports("sse4.1");
    return ok;
#else
    return false;
#endif
}

Aes256::Aes256(const std::uint8_t key[32], Backend backend) {
    static constexpr std::uint8_t rcon[8] = {0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80};
    for (int i = 0; i < 8; ++i) ek_[i] = load_be32(key + 4 * i);
    for (int i = 8; i < 60; ++i) {
        std::uint32_t t = ek_[i - 1];
        if (i % 8 == 0)
            t = sub_word(t << 8 | t >> 24) ^ std::uint32_t(rcon[i / 8 - 1]) << 24;
        else if (i % 8 == 4)
            t = sub_word(t);
        ek_[i] = ek_[i - 8] ^ t;
    }
    for (int r = 0; r < 15; ++r)
        for (int j = 0; j < 4; ++j) store_be32(rk_[r] + 4 * j, ek_[4 * r + j]);
    hw_ = backend == Backend::portable ? false : hardware_available();
}

void Aes256::encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const {
    if (hw_)
        detail::aesni_encrypt_block(rk_, in, out);
    else
        encrypt_portable(ek_, in, out);
}

void Aes256::ctr_xor(const std::uint8_t ctr0[16], const std::uint8_t* in, std::uint8_t* out,
                     std::size_t len) const {
    if (hw_) {
        detail::aesni_ctr_xor(rk_, ctr0, in, out, len);
        return;
    }
    std::uint8_t ctr[16], ks[16];
    std::memcpy(ctr, ctr0, 16);
    std::uint32_t c = load_be32(ctr0 + 12);
    for (std::size_t off = 0; off < len; off += 16) {
        store_be32(ctr + 12, c++);
        encrypt_portable(ek_, ctr, ks);
        std::size_t n = len - off < 16 ? len - off : 16;
        for (std::size_t i = 0; i < n; ++i) out[off + i] = in[off + i] ^ ks[i];
    }
}

}  // namespace teesim::crypto
