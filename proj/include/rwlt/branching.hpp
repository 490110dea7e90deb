#pragma once

#include "rwlt/error.hpp"
#include "rwlt/linalg.hpp"
#include "rwlt/model.hpp"
#include "rwlt/rng.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace rwlt {

enum class ParticleType : int { first = 1, second = 2 };

inline constexpr std::uint64_t kDefaultPopulationCap = 10'000'000;

/// Offspring law of the two-type process: a parent runs independent trials
/// (type-1 child w.p. p1, type-2 child w.p. p2, stop w.p. q) until the first
/// stop; a type-2 parent additionally has one type-1 child.
struct OffspringLaw {
    double p1 = 0.0, p2 = 0.0, q = 0.0;

    static OffspringLaw from(const ModelParams& params);
};

/// P(offspring = (u1, u2) | parent type). (u1, u2) is the outcome, so a
/// type-2 parent puts no mass on u1 = 0.
double offspring_pmf(ParticleType parent, std::uint64_t u1, std::uint64_t u2, const OffspringLaw& law);
double offspring_pmf(ParticleType parent, std::uint64_t u1, std::uint64_t u2, const ModelParams& params);

using Counts2 = std::array<std::uint64_t, 2>;

template <UniformSource G>
Counts2 sample_offspring(ParticleType parent, const OffspringLaw& law, G& g) {
    Counts2 kids{parent == ParticleType::second ? 1u : 0u, 0u};
    const double first_cut = law.q + law.p1;
    for (;;) {
        const double u = g.uniform();
        if (u < law.q) return kids;
        ++kids[u < first_cut ? 0 : 1];
    }
}

struct GenerationState {
    std::uint64_t u1 = 1;
    std::uint64_t u2 = 0;
    std::uint64_t n = 0;

    friend bool operator==(const GenerationState&, const GenerationState&) = default;
};

class PopulationCapExceeded : public Error {
public:
    PopulationCapExceeded(std::uint64_t generation, std::uint64_t population)
        : Error(ErrorKind::PopulationCapExceeded,
                "population " + std::to_string(population) + " at generation " + std::to_string(generation)),
          generation_(generation) {}

    std::uint64_t generation() const noexcept { return generation_; }

private:
    std::uint64_t generation_;
};

/// Generations 0..n_max, every particle reproducing independently. Extinct
/// populations stay at (0,0).
template <UniformSource G>
std::vector<GenerationState> simulate_generations(std::uint64_t n_max, const OffspringLaw& law, G& g,
                                                  std::uint64_t population_cap = kDefaultPopulationCap,
                                                  GenerationState start = {}) {
    std::vector<GenerationState> path;
    path.reserve(n_max + 1);
    start.n = 0;
    path.push_back(start);
    GenerationState cur = start;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        GenerationState next{0, 0, n};
        for (std::uint64_t i = 0; i < cur.u1; ++i) {
            const auto k = sample_offspring(ParticleType::first, law, g);
            next.u1 += k[0];
            next.u2 += k[1];
        }
        for (std::uint64_t i = 0; i < cur.u2; ++i) {
            const auto k = sample_offspring(ParticleType::second, law, g);
            next.u1 += k[0];
            next.u2 += k[1];
        }
        if (next.u1 + next.u2 > population_cap) throw PopulationCapExceeded(n, next.u1 + next.u2);
        path.push_back(next);
        cur = next;
    }
    return path;
}

/// Same law as simulate_generations, sampled per generation: k parents run k
/// independent trial sequences, so the total child count is negative binomial
/// (k stops) and each child is type 1 with probability p1 / (p1 + p2).
template <class URBG>
std::vector<GenerationState> simulate_generations_batched(std::uint64_t n_max, const OffspringLaw& law, URBG& g,
                                                          std::uint64_t population_cap = kDefaultPopulationCap,
                                                          GenerationState start = {}) {
    std::vector<GenerationState> path;
    path.reserve(n_max + 1);
    start.n = 0;
    path.push_back(start);
    GenerationState cur = start;
    const double type1_share = law.p1 / (law.p1 + law.p2);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        GenerationState next{cur.u2, 0, n};
        const std::uint64_t parents = cur.u1 + cur.u2;
        if (parents > 0) {
            std::negative_binomial_distribution<std::uint64_t> kids(parents, law.q);
            const std::uint64_t total = kids(g);
            std::binomial_distribution<std::uint64_t> split(total, type1_share);
            const std::uint64_t ones = split(g);
            next.u1 += ones;
            next.u2 = total - ones;
        }
        if (next.u1 + next.u2 > population_cap) throw PopulationCapExceeded(n, next.u1 + next.u2);
        path.push_back(next);
        cur = next;
    }
    return path;
}

/// One-generation generating functions g^(1), g^(2).
double gf_g(ParticleType parent, double s1, double s2, const OffspringLaw& law);

struct GFState {
    double a = 0.0;
    double b = 0.0;
    std::uint64_t n = 0;
};

/// (a_0, b_0) = (0, 0), (a_n, b_n) = (a_{n-1}, b_{n-1}) M + (rho1, rho2).
std::vector<GFState> gf_recursion(std::uint64_t n, const ModelConstants& k);

/// (a_n, b_n) = rho T diag(n, 1 + alpha + ... + alpha^{n-1}) T^{-1}.
GFState gf_closed_form(std::uint64_t n, const ModelConstants& k);

/// E[s1^U1(n) s2^U2(n) | U_0 = e_start].
double gf_fn(ParticleType start, std::uint64_t n, double s1, double s2, const ModelConstants& k);

/// Joint pmf of U_n on the box [0, side)^2, computed by forward convolution of
/// the offspring law generation by generation.
struct TruncatedPmf {
    std::size_t side = 0;
    std::vector<double> prob;     // prob[u1 * side + u2]
    double captured_mass = 0.0;   // compensated sum of prob
    double truncation_bound = 0.0;  // uncaptured mass plus accumulated rounding

    double at(std::uint64_t u1, std::uint64_t u2) const noexcept {
        return u1 < side && u2 < side ? prob[u1 * side + u2] : 0.0;
    }
    double pgf(double s1, double s2) const;
    Vec2 mean() const;
    Mat2 covariance() const;
};

inline constexpr double kDefaultMassTarget = 1.0 - 1e-9;

/// Grows the box (doubling from 16) until captured mass >= mass_target; throws
/// TruncationBudgetExceeded beyond max_side.
TruncatedPmf enumerate_pmf(ParticleType start, std::uint64_t n, const OffspringLaw& law,
                           double mass_target = kDefaultMassTarget, std::size_t max_side = 512);

}  // namespace rwlt
