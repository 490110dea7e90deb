#include "rwlt/branching.hpp"

#include "rwlt/numeric.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace rwlt {

OffspringLaw OffspringLaw::from(const ModelParams& params) {
    if (params.max_jump() != 2)
        throw Error(ErrorKind::UnsupportedL, "the two-type branching structure needs L=2");
    return {params.up(1), params.up(2), params.down()};
}

double offspring_pmf(ParticleType parent, std::uint64_t u1, std::uint64_t u2, const OffspringLaw& law) {
    if (parent == ParticleType::second) {
        if (u1 == 0) return 0.0;
        --u1;
    }
    const std::uint64_t n = u1 + u2;
    if (n <= 60) {
        // (u1 + u2)! / (u1! u2!) built incrementally; exact in double for n <= 60.
        double coef = 1.0;
        const std::uint64_t k = u1 < u2 ? u1 : u2;
        for (std::uint64_t i = 1; i <= k; ++i) coef = coef * static_cast<double>(n - k + i) / static_cast<double>(i);
        return coef * std::pow(law.p1, static_cast<double>(u1)) * std::pow(law.p2, static_cast<double>(u2)) * law.q;
    }
    const double d1 = static_cast<double>(u1), d2 = static_cast<double>(u2);
    const double log_p = std::lgamma(d1 + d2 + 1.0) - std::lgamma(d1 + 1.0) - std::lgamma(d2 + 1.0) +
                         d1 * std::log(law.p1) + d2 * std::log(law.p2) + std::log(law.q);
    return std::exp(log_p);
}

double offspring_pmf(ParticleType parent, std::uint64_t u1, std::uint64_t u2, const ModelParams& params) {
    return offspring_pmf(parent, u1, u2, OffspringLaw::from(params));
}

double gf_g(ParticleType parent, double s1, double s2, const OffspringLaw& law) {
    const double base = law.q / (1.0 - law.p1 * s1 - law.p2 * s2);
    return parent == ParticleType::first ? base : s1 * base;
}

std::vector<GFState> gf_recursion(std::uint64_t n, const ModelConstants& k) {
    std::vector<GFState> seq;
    seq.reserve(n + 1);
    Vec2 ab{0.0, 0.0};
    seq.push_back({0.0, 0.0, 0});
    for (std::uint64_t i = 1; i <= n; ++i) {
        const Vec2 next = row_mul(ab, k.M);
        ab = {next[0] + k.rho[0], next[1] + k.rho[1]};
        seq.push_back({ab[0], ab[1], i});
    }
    return seq;
}

GFState gf_closed_form(std::uint64_t n, const ModelConstants& k) {
    const double geo = n == 0 ? 0.0 : (1.0 - std::pow(k.alpha, static_cast<double>(n))) / (1.0 - k.alpha);
    const Mat2 S = mat_mul(mat_mul(k.T, diag2(static_cast<double>(n), geo)), k.T_inv);
    const Vec2 ab = row_mul(k.rho, S);
    return {ab[0], ab[1], n};
}

double gf_fn(ParticleType start, std::uint64_t n, double s1, double s2, const ModelConstants& k) {
    if (n == 0) return start == ParticleType::first ? s1 : s2;
    if (start == ParticleType::second && n == 1) return gf_g(ParticleType::second, s1, s2, {k.p1, k.p2, k.q});
    const auto ab = gf_recursion(n, k);
    const auto D = [&](std::uint64_t i) { return 1.0 + (1.0 - s1) * ab[i].a + (1.0 - s2) * ab[i].b; };
    return start == ParticleType::first ? D(n - 1) / D(n) : D(n - 2) / D(n);
}

double TruncatedPmf::pgf(double s1, double s2) const {
    CompensatedSum sum;
    double pow1 = 1.0;
    for (std::size_t i = 0; i < side; ++i) {
        double pow2 = 1.0;
        for (std::size_t j = 0; j < side; ++j) {
            sum.add(prob[i * side + j] * pow1 * pow2);
            pow2 *= s2;
        }
        pow1 *= s1;
    }
    return sum.value();
}

Vec2 TruncatedPmf::mean() const {
    CompensatedSum m1, m2;
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            const double p = prob[i * side + j];
            m1.add(p * static_cast<double>(i));
            m2.add(p * static_cast<double>(j));
        }
    return {m1.value(), m2.value()};
}

Mat2 TruncatedPmf::covariance() const {
    const Vec2 m = mean();
    CompensatedSum s11, s12, s22;
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            const double p = prob[i * side + j];
            const double d1 = static_cast<double>(i) - m[0], d2 = static_cast<double>(j) - m[1];
            s11.add(p * d1 * d1);
            s12.add(p * d1 * d2);
            s22.add(p * d2 * d2);
        }
    return {{{s11.value(), s12.value()}, {s12.value(), s22.value()}}};
}

namespace {

constexpr double kUnderflow = 1e-300;

// In place: g <- g * P1 on the box, where P1 is the type-1 offspring pmf.
// Uses P1 = q delta_0 + p1 shift_1(P1) + p2 shift_2(P1), which turns the
// convolution into a forward recurrence over the lattice.
void convolve_offspring(std::vector<double>& g, std::size_t side, const OffspringLaw& law) {
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            double v = law.q * g[i * side + j];
            if (i > 0) v += law.p1 * g[(i - 1) * side + j];
            if (j > 0) v += law.p2 * g[i * side + j - 1];
            g[i * side + j] = v;
        }
    }
}

TruncatedPmf enumerate_on_box(ParticleType start, std::uint64_t n, const OffspringLaw& law, std::size_t side) {
    std::vector<double> cur(side * side, 0.0);
    if (start == ParticleType::first)
        cur[1 * side + 0] = 1.0;
    else
        cur[0 * side + 1] = 1.0;

    std::vector<double> next(side * side);
    for (std::uint64_t gen = 0; gen < n; ++gen) {
        std::size_t k_max = 0;
        for (std::size_t i = 0; i < side; ++i)
            for (std::size_t j = 0; j < side; ++j)
                if (cur[i * side + j] != 0.0) k_max = std::max(k_max, i + j);

        // Children of k parents = sum of k independent P1 draws, shifted by one
        // type-1 child per type-2 parent. Horner over k: R <- R * P1 + F_k.
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t kk = k_max + 1; kk-- > 0;) {
            convolve_offspring(next, side, law);
            const std::size_t z2_lo = kk >= side ? kk - side + 1 : 0;
            const std::size_t z2_hi = std::min(kk, side - 1);
            for (std::size_t z2 = z2_lo; z2 <= z2_hi; ++z2) {
                const std::size_t z1 = kk - z2;
                next[z2 * side + 0] += cur[z1 * side + z2];
            }
        }
        for (double& v : next)
            if (v < kUnderflow) v = 0.0;
        std::swap(cur, next);
    }

    TruncatedPmf pmf;
    pmf.side = side;
    pmf.prob = std::move(cur);
    CompensatedSum mass;
    for (double v : pmf.prob) mass.add(v);
    pmf.captured_mass = mass.value();
    const double rounding = 8.0 * static_cast<double>(n + 1) * static_cast<double>(side) * DBL_EPSILON;
    pmf.truncation_bound = std::max(0.0, 1.0 - pmf.captured_mass) + rounding;
    return pmf;
}

}  // namespace

TruncatedPmf enumerate_pmf(ParticleType start, std::uint64_t n, const OffspringLaw& law, double mass_target,
                           std::size_t max_side) {
    if (!(mass_target < 1.0)) throw Error(ErrorKind::InvalidArgument, "mass target must be < 1");
    for (std::size_t side = 16; side <= max_side; side *= 2) {
        auto pmf = enumerate_on_box(start, n, law, side);
        if (pmf.captured_mass >= mass_target) return pmf;
    }
    throw Error(ErrorKind::TruncationBudgetExceeded,
                "could not capture mass " + std::to_string(mass_target) + " within side " + std::to_string(max_side));
}

}  // namespace rwlt
