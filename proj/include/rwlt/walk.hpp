#pragma once

#include "rwlt/error.hpp"
#include "rwlt/model.hpp"
#include "rwlt/rng.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rwlt {

inline constexpr std::uint64_t kDefaultExcursionCap = 100'000'000;

/// Inverse-CDF step draw. One uniform per step; outcomes ordered -1, +1, ..., +L.
class StepSampler {
public:
    explicit StepSampler(const ModelParams& params);

    int max_jump() const noexcept { return static_cast<int>(cumulative_.size()) - 1; }

    template <UniformSource G>
    int draw(G& g) const {
        const double u = g.uniform();
        if (u < cumulative_[0]) return -1;
        const std::size_t last = cumulative_.size() - 1;
        for (std::size_t l = 1; l < last; ++l)
            if (u < cumulative_[l]) return static_cast<int>(l);
        return static_cast<int>(last);
    }

private:
    std::vector<double> cumulative_;  // q, q + p1, ..., q + p1 + ... + pL
};

struct ExcursionOutcome {
    bool complete = false;
    std::uint64_t length = 0;  // steps taken (tau when complete)
    std::int64_t max_height = 0;
};

/// Runs one excursion from 0 and calls on_step(from, to) for every step. The
/// first step 0 -> 1 is deterministic and consumes no randomness. Stops without
/// completing once `cap` steps have been taken and the walk is not back at 0.
template <UniformSource G, class OnStep>
ExcursionOutcome run_excursion(const StepSampler& sampler, G& g, std::uint64_t cap, OnStep&& on_step) {
    ExcursionOutcome out;
    if (cap == 0) return out;
    on_step(std::int64_t{0}, std::int64_t{1});
    std::int64_t pos = 1;
    out.length = 1;
    out.max_height = 1;
    while (pos != 0) {
        if (out.length >= cap) return out;
        const std::int64_t next = pos + sampler.draw(g);
        on_step(pos, next);
        pos = next;
        ++out.length;
        if (pos > out.max_height) out.max_height = pos;
    }
    out.complete = true;
    return out;
}

/// One excursion X_0 = 0, X_1 = 1, ..., X_tau = 0.
struct ExcursionRecord {
    std::vector<std::int64_t> steps;
    std::uint64_t length = 0;
    std::int64_t max_height = 0;
};

/// Throws ExcursionTooLong (carrying the partial length) when tau would exceed cap.
template <UniformSource G>
ExcursionRecord simulate_excursion(const StepSampler& sampler, G& g, std::uint64_t cap = kDefaultExcursionCap) {
    ExcursionRecord rec;
    rec.steps.push_back(0);
    auto out = run_excursion(sampler, g, cap, [&](std::int64_t, std::int64_t to) { rec.steps.push_back(to); });
    if (!out.complete) throw ExcursionTooLong(out.length);
    rec.length = out.length;
    rec.max_height = out.max_height;
    return rec;
}

template <UniformSource G>
ExcursionRecord simulate_excursion(const ModelParams& params, G& g, std::uint64_t cap = kDefaultExcursionCap) {
    return simulate_excursion(StepSampler(params), g, cap);
}

/// Builds a record from an explicit path, checking the excursion invariants.
ExcursionRecord excursion_from_path(std::vector<std::int64_t> path, int max_jump);

struct LocalTimeProfile {
    std::vector<std::uint64_t> counts;  // counts[j] = L(j; tau_N)
    std::uint64_t n_excursions = 0;

    std::uint64_t at(std::int64_t j) const noexcept {
        return j >= 0 && static_cast<std::size_t>(j) < counts.size() ? counts[static_cast<std::size_t>(j)] : 0;
    }
};

/// Local times of the concatenated path. The shared boundary visits give
/// L(0; tau_N) = N + 1.
LocalTimeProfile local_time_profile(std::span<const ExcursionRecord> excursions);

std::uint64_t local_time(std::span<const ExcursionRecord> excursions, std::int64_t j);

/// (U1(n), U2(n)) for n = 0 .. max_height - 1; zero beyond.
struct BranchingExtract {
    std::vector<std::array<std::uint64_t, 2>> U;

    std::array<std::uint64_t, 2> at(std::int64_t n) const noexcept {
        return n >= 0 && static_cast<std::size_t>(n) < U.size() ? U[static_cast<std::size_t>(n)]
                                                                  : std::array<std::uint64_t, 2>{0, 0};
    }
};

BranchingExtract extract_branching(const ExcursionRecord& excursion);

/// L(j; tau_1) == U1(j-1) + U1(j) + U2(j) for j >= 1.
bool verify_identity(const ExcursionRecord& excursion, std::int64_t j);

/// floor(N x) with grid points within 1e-9 relative snapped to the integer.
std::int64_t grid_level(std::uint64_t N, double x);

/// l_N(x) = L(floor(N x); tau_N) / N, or 2/sigma^2 when N x < 1. N is the number
/// of excursions supplied.
double scaled_local_time(std::span<const ExcursionRecord> excursions, double x, const ModelParams& params);

/// Per-excursion accumulator of local times and of the branching counts U,
/// driven by run_excursion's step callback. Storage is reused across excursions.
class ExcursionTally {
public:
    void reset() noexcept;

    void on_step(std::int64_t from, std::int64_t to) {
        const auto t = static_cast<std::size_t>(to);
        grow(t + 1);
        ++local_[t];
        if (to > from) {
            ++u1_[t - 1];
            if (to - from >= 2) ++u2_[t - 2];
            if (to - from > 2) wide_jump_ = true;
        }
        if (t + 1 > used_) used_ = t + 1;
    }

    std::uint64_t local(std::int64_t j) const noexcept { return get(local_, j); }
    std::uint64_t u1(std::int64_t n) const noexcept { return get(u1_, n); }
    std::uint64_t u2(std::int64_t n) const noexcept { return get(u2_, n); }
    bool saw_wide_jump() const noexcept { return wide_jump_; }

    /// Number of levels touched (max height + 1).
    std::size_t levels() const noexcept { return used_; }

private:
    void grow(std::size_t n);
    static std::uint64_t get(const std::vector<std::uint64_t>& v, std::int64_t i) noexcept {
        return i >= 0 && static_cast<std::size_t>(i) < v.size() ? v[static_cast<std::size_t>(i)] : 0;
    }

    std::vector<std::uint64_t> local_{1}, u1_{0}, u2_{0};
    std::size_t used_ = 1;
    bool wide_jump_ = false;
};

/// Local times L(j; tau_N), j = 0..top, of N excursions without storing paths.
///
/// Levels above `top` are never entered: every down-step is -1, so a walk that
/// jumps above `top` first comes back down exactly at `top`. The sampler books
/// that return visit immediately and continues from `top`, which leaves the
/// joint law of (L(0), ..., L(top)) unchanged while skipping the time spent
/// above `top`. The step cap applies to these collapsed steps; an excursion
/// exceeding it is discarded and replaced, and counted in `discarded`.
struct LevelLocalTimes {
    std::vector<std::uint64_t> counts;  // size top + 1
    std::uint64_t excursions = 0;
    std::uint64_t discarded = 0;
    std::uint64_t steps = 0;
};

template <UniformSource G>
LevelLocalTimes sample_level_local_times(const StepSampler& sampler, std::uint64_t n_excursions,
                                         std::int64_t top, G& g, std::uint64_t cap = kDefaultExcursionCap) {
    if (top < 1) throw Error(ErrorKind::InvalidArgument, "top level must be >= 1");
    const auto size = static_cast<std::size_t>(top) + 1;
    LevelLocalTimes res;
    res.counts.assign(size, 0);
    res.counts[0] = 1;  // X_0 = 0
    std::vector<std::uint64_t> current(size, 0);

    while (res.excursions < n_excursions) {
        std::int64_t pos = 1;
        std::int64_t high = 1;
        std::uint64_t length = 1;
        current[1] = 1;
        bool complete = true;
        while (pos != 0) {
            if (length >= cap) {
                complete = false;
                break;
            }
            std::int64_t next = pos + sampler.draw(g);
            if (next > top) next = top;
            ++current[static_cast<std::size_t>(next)];
            if (next > high) high = next;
            pos = next;
            ++length;
        }
        res.steps += length;
        const auto hi = static_cast<std::size_t>(high);
        if (complete) {
            for (std::size_t j = 0; j <= hi; ++j) res.counts[j] += current[j];
            ++res.excursions;
        } else {
            ++res.discarded;
            if (res.discarded > n_excursions + 1000)
                throw ExcursionTooLong(length);
        }
        std::fill(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(hi + 1), 0);
    }
    return res;
}

}  // namespace rwlt
