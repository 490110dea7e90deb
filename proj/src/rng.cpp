#include "rwlt/rng.hpp"

namespace rwlt {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(tag), lo(index), hi(index)};
    return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index)
    : engine_(seeded_engine(seed, tag, index)) {}

}  // namespace rwlt
