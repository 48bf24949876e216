#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace safetune {

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, tags...). Two calls with the same
// arguments produce generators in the same state.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {})
{
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * tags.size());
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (auto t : tags) {
        words.push_back(static_cast<std::uint32_t>(t));
        words.push_back(static_cast<std::uint32_t>(t >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

// Stream tags used across the library so that unrelated consumers never share
// random numbers.
namespace stream {
inline constexpr std::uint64_t init = 0x1001;
inline constexpr std::uint64_t line = 0x1002;
inline constexpr std::uint64_t thompson = 0x1003;
inline constexpr std::uint64_t truth = 0x2001;
inline constexpr std::uint64_t oracle = 0x2002;
inline constexpr std::uint64_t disturbance = 0x3001;
inline constexpr std::uint64_t scenario = 0x3002;
inline constexpr std::uint64_t lipschitz = 0x3003;
inline constexpr std::uint64_t rollout = 0x3004;
}  // namespace stream

}  // namespace safetune
