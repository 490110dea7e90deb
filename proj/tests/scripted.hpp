#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

// Replays a fixed list of uniforms; running out is a test bug.
struct ScriptedUniform {
    std::vector<double> values;
    std::size_t next = 0;

    double uniform() {
        if (next >= values.size()) throw std::logic_error("scripted uniforms exhausted");
        return values[next++];
    }
};

// Step draws for q=0.6, p=(0.2,0.2): thresholds 0.6 / 0.8.
inline constexpr double kDown = 0.0;
inline constexpr double kUp1 = 0.7;
inline constexpr double kUp2 = 0.9;

// Offspring trials at the same parameters: stop / type 1 / type 2.
inline constexpr double kStop = 0.0;
inline constexpr double kChild1 = 0.7;
inline constexpr double kChild2 = 0.9;
