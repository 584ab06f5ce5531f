#include "teesim/crypto/ghash.hpp"

#include <cstring>

namespace teesim::crypto {
namespace {

constexpr std::uint64_t kRem4[16] = {
    0x0000ull << 48, 0x1C20ull << 48, 0x3840ull << 48, 0x2460ull << 48,
    0x7080ull << 48, 0x6CA0ull << 48, 0x48C0ull << 48, 0x54E0ull << 48,
    0xE100ull << 48, 0xFD20ull << 48, 0xD940ull << 48, 0xC560ull << 48,
    0x9180ull << 48, 0x8DA0ull << 48, 0xA9C0ull << 48, 0xB5E0ull << 48,
};

// One multiply by H using the 4-bit table (Shoup's method).
void gmult_4bit(const std::uint64_t* thi, const std::uint64_t* tlo, std::uint8_t x[16]) {
    int cnt = 15;
    std::uint8_t nlo = x[15], nhi = nlo >> 4;
    nlo &= 0xf;
    std::uint64_t zh = thi[nlo], zl = tlo[nlo];
    for (;;) {
        std::uint64_t rem = zl & 0xf;
        zl = zh << 60 | zl >> 4;
        zh = (zh >> 4) ^ kRem4[rem];
        zh ^= thi[nhi];
        zl ^= tlo[nhi];
        if (--cnt < 0) break;
        nlo = x[cnt];
        nhi = nlo >> 4;
        nlo &= 0xf;
        rem = zl & 0xf;
        zl = zh << 60 | zl >> 4;
        zh = (zh >> 4) ^ kRem4[rem];
        zh ^= thi[nlo];
        zl ^= tlo[nlo];
    }
    store_be64(x, zh);
    store_be64(x + 8, zl);
}

}  // namespace

GhashKey::GhashKey(const std::uint8_t h[16], Backend backend) {
    hw_ = backend == Backend::portable ? false : hardware_available();
    std::uint64_t vh = load_be64(h), vl = load_be64(h + 8);
    thi_[0] = tlo_[0] = 0;
    thi_[8] = vh, tlo_[8] = vl;
    for (int i = 4; i > 0; i >>= 1) {
        std::uint64_t t = 0xe100000000000000ull & (0 - (vl & 1));
        vl = vh << 63 | vl >> 1;
        vh = (vh >> 1) ^ t;
        thi_[i] = vh, tlo_[i] = vl;
    }
    for (int i = 2; i < 16; i <<= 1)
        for (int j = 1; j < i; ++j) thi_[i + j] = thi_[i] ^ thi_[j], tlo_[i + j] = tlo_[i] ^ tlo_[j];
    if (hw_)
        detail::clmul_powers(h, pow_);
    else
        std::memset(pow_, 0, sizeof pow_);
}

void GhashKey::update(std::uint8_t x[16], const std::uint8_t* blocks, std::size_t nblocks) const {
    if (hw_) {
        detail::clmul_update(pow_, x, blocks, nblocks);
        return;
    }
    for (std::size_t b = 0; b < nblocks; ++b) {
        for (int i = 0; i < 16; ++i) x[i] ^= blocks[16 * b + i];
        gmult_4bit(thi_, tlo_, x);
    }
}

void GhashKey::update_padded(std::uint8_t x[16], ByteView data) const {
    std::size_t full = data.size() / 16;
    update(x, data.data(), full);
    if (std::size_t rest = data.size() % 16) {
        std::uint8_t last[16] = {};
        std::memcpy(last, data.data() + 16 * full, rest);
        update(x, last, 1);
    }
}

void GhashKey::update_lengths(std::uint8_t x[16], std::uint64_t aad_bytes,
                              std::uint64_t data_bytes) const {
    std::uint8_t len[16];
    store_be64(len, aad_bytes * 8);
    store_be64(len + 8, data_bytes * 8);
    update(x, len, 1);
}

void gf128_mul_reference(const std::uint8_t x[16], const std::uint8_t y[16], std::uint8_t out[16]) {
    std::uint8_t z[16] = {}, v[16];
    std::memcpy(v, y, 16);
    for (int i = 0; i < 128; ++i) {
        if (x[i / 8] >> (7 - i % 8) & 1)
            for (int j = 0; j < 16; ++j) z[j] ^= v[j];
        bool lsb = v[15] & 1;
        for (int j = 15; j > 0; --j) v[j] = std::uint8_t(v[j] >> 1 | v[j - 1] << 7);
        v[0] >>= 1;
        if (lsb) v[0] ^= 0xe1;
    }
    std::memcpy(out, z, 16);
}

}  // namespace teesim::crypto
