#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <random>

namespace rwlt {

/// Purpose tags keep streams of different experiments disjoint for one seed.
enum class StreamTag : std::uint32_t {
    identity = 1,
    offspring = 2,
    generations = 3,
    local_time = 4,
    limit = 5,
    euler = 6,
    excursion_dump = 7,
};

/// Reproducible random stream keyed by (seed, tag, index). Results of every
/// experiment are a function of the keys only, never of thread scheduling.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index);

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

template <class G>
concept UniformSource = requires(G& g) {
    { g.uniform() } -> std::convertible_to<double>;
};

template <class G>
concept NormalSource = requires(G& g) {
    { g.normal() } -> std::convertible_to<double>;
};

}  // namespace rwlt
