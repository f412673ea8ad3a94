#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace latfield {

/// Name recorded in output metadata. Streams are std::mt19937_64 seeded through
/// std::seed_seq from (seed, replicate, stream tag); normals use the Marsaglia polar
/// method on 53-bit uniforms. Every piece is fully specified, so outputs are identical
/// across platforms and standard libraries.
inline constexpr std::string_view kGeneratorTag = "mt19937_64/seed_seq/polar-normal";

/// Independent substream for one (seed, replicate, purpose) tuple.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replicate, std::uint32_t purpose = 0);

class StandardNormal {
 public:
  double operator()(std::mt19937_64& gen) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform(gen) - 1.0;
      v = 2.0 * uniform(gen) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  static double uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace latfield
