#pragma once

#include <array>
#include <cstdint>

namespace nilflow {

// Philox-4x32-10 counter-based generator (Salmon et al., SC'11). Pure
// function of (key, counter): decisions indexed by n parallelize with no
// shared state and reproduce bit-for-bit under any evaluation order.
struct Philox {
  static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                            std::uint64_t ctr_hi,
                                            std::uint64_t ctr_lo);

  // uniform double in [0,1) with 53 random bits, stream-separated
  static double u01(std::uint64_t key, std::uint64_t index, std::uint32_t stream = 0);

  static std::uint64_t u64(std::uint64_t key, std::uint64_t index,
                           std::uint32_t stream = 0);
};

}  // namespace nilflow
