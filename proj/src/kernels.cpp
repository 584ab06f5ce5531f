#include "teesim/kernels.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace teesim {

void reduce_add(std::span<float> dst, std::span<const float> src, Exec exec) {
    if (dst.size() != src.size()) throw std::invalid_argument("reduce_add: length mismatch");
    const std::int64_t n = std::int64_t(dst.size());
    float* d = dst.data();
    const float* s = src.data();
    if (exec == Exec::serial) {
        for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
        return;
    }
#pragma omp parallel for simd schedule(static) if (n > (1 << 16))
    for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

Bytes encode_floats(std::span<const float> v) {
    Bytes out(v.size() * 4);
    if constexpr (std::endian::native == std::endian::little) {
        if (!v.empty()) std::memcpy(out.data(), v.data(), out.size());
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto u = std::bit_cast<std::uint32_t>(v[i]);
            for (int b = 0; b < 4; ++b) out[4 * i + b] = std::uint8_t(u >> (8 * b));
        }
    }
    return out;
}

std::vector<float> decode_floats(ByteView b) {
    if (b.size() % 4) throw std::invalid_argument("float payload not a multiple of 4 bytes");
    std::vector<float> out(b.size() / 4);
    if constexpr (std::endian::native == std::endian::little) {
        if (!out.empty()) std::memcpy(out.data(), b.data(), b.size());
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::uint32_t u = 0;
            for (int k = 0; k < 4; ++k) u |= std::uint32_t(b[4 * i + k]) << (8 * k);
            out[i] = std::bit_cast<float>(u);
        }
    }
    return out;
}

}  // namespace teesim
