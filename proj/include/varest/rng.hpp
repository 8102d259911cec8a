#pragma once

#include <cstdint>
#include <random>

namespace varest {

/// Independent Mersenne-Twister stream that is a pure function of (seed, stream, domain).
/// `domain` separates uses that share a seed (data generation vs bootstrap, ...).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream,
                                   std::uint32_t domain = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      domain};
    return std::mt19937_64(seq);
}

}  // namespace varest
