#pragma once

namespace teesim {

// Kernels that have an OpenMP path keep the serial one as the reference.
enum class Exec { serial, parallel };

}  // namespace teesim
