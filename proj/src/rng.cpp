#include "latfield/rng.hpp"

namespace latfield {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replicate, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32), purpose};
  return std::mt19937_64(seq);
}

}  // namespace latfield
