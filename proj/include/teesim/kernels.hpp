#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "teesim/bytes.hpp"
#include "teesim/exec.hpp"

namespace teesim {

// dst[i] += src[i]
void reduce_add(std::span<float> dst, std::span<const float> src, Exec exec = Exec::parallel);

// Little-endian IEEE-754 binary32, independent of host byte order.
Bytes encode_floats(std::span<const float> v);
std::vector<float> decode_floats(ByteView b);  // throws std::invalid_argument if size % 4

}  // namespace teesim
