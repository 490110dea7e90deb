#pragma once

#include "rwlt/error.hpp"
#include "rwlt/model.hpp"
#include "rwlt/rng.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rwlt {

/// Feller diffusion dH = sqrt(2c H^+) dB started at h0, with c = 2/sigma^2.
/// The letter x is the spatial level of the local time, used as time here.
struct LimitLaw {
    double c = 0.0;
    double h0 = 0.0;

    static LimitLaw from(const ModelParams& params);
};

/// psi(t, lambda) = lambda / (1 + c lambda t); tends to 1/(c t) as lambda grows.
inline double psi(double t, double lambda, double c) noexcept { return lambda / (1.0 + c * lambda * t); }

/// E[exp(-lambda H(t)) | H(0) = x0] = exp(-x0 psi(t, lambda)).
double transition_lt(double x0, double t, double lambda, const LimitLaw& law);

/// E[exp(-lambda H(x))] from the law's start value.
double phi(double x, double lambda, const LimitLaw& law);

/// Exact draw of H(t) given H(0) = x0: n ~ Poisson(x0 / (c t)), then
/// Gamma(n, scale c t), or 0 when n = 0. Its Laplace transform is
/// E[(1 + c lambda t)^-n] = exp(-x0 lambda / (1 + c lambda t)).
template <class URBG>
double sample_transition(double x0, double t, const LimitLaw& law, URBG& g) {
    if (x0 < 0.0 || t < 0.0) throw Error(ErrorKind::InvalidArgument, "x0 and t must be non-negative");
    if (x0 == 0.0) return 0.0;
    if (t == 0.0) return x0;
    const double scale = law.c * t;
    std::poisson_distribution<std::uint64_t> count(x0 / scale);
    const std::uint64_t n = count(g);
    if (n == 0) return 0.0;
    if (n <= 16) {
        std::exponential_distribution<double> expo(1.0);
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) sum += expo(g);
        return scale * sum;
    }
    std::gamma_distribution<double> gamma(static_cast<double>(n), scale);
    return gamma(g);
}

/// H on a non-decreasing grid of levels >= 0, chaining exact transitions from
/// H(0) = h0. No discretisation error at grid points.
template <class URBG>
std::vector<double> sample_path(std::span<const double> grid, const LimitLaw& law, URBG& g) {
    std::vector<double> out;
    out.reserve(grid.size());
    double t_prev = 0.0;
    double h = law.h0;
    for (double t : grid) {
        if (t < t_prev) throw Error(ErrorKind::InvalidArgument, "grid must be non-decreasing and >= 0");
        h = sample_transition(h, t - t_prev, law, g);
        out.push_back(h);
        t_prev = t;
    }
    return out;
}

/// E[exp(-sum_i lambda_i H(x_i))] by folding conditional transforms backwards.
double finite_dim_lt(std::span<const double> xs, std::span<const double> lambdas, const LimitLaw& law);

/// Euler-Maruyama for dH = (2/sigma) sqrt(H^+) dB with step h; returns H at
/// 0, h, 2h, ..., horizon. Negative values are allowed to persist (the
/// coefficient vanishes there). Only a cross-check for the exact sampler.
template <NormalSource G>
std::vector<double> euler_sde(double step, double horizon, const LimitLaw& law, G& g) {
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
    const auto n = static_cast<std::uint64_t>(std::llround(horizon / step));
    const double coef = std::sqrt(2.0 * law.c);  // = 2 / sigma
    const double sq = std::sqrt(step);
    std::vector<double> path;
    path.reserve(n + 1);
    double h = law.h0;
    path.push_back(h);
    for (std::uint64_t i = 0; i < n; ++i) {
        h += coef * std::sqrt(std::fmax(h, 0.0)) * sq * g.normal();
        path.push_back(h);
    }
    return path;
}

}  // namespace rwlt
