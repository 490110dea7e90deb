#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rwlt {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Mean and standard error of a sample (se = 0 for a single value).
Estimate mean_estimate(std::span<const double> samples);

/// Monte Carlo estimate of E[exp(-lambda X)].
Estimate empirical_lt(std::span<const double> samples, double lambda);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|; ties handled by
/// comparing the empirical CDFs only after each distinct value.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Asymptotic two-sample critical value sqrt(-ln(alpha/2)/2) sqrt((n+m)/(n m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    std::size_t bins = 0;
};

/// Goodness of fit of counts in `observed` (one per cell) against cell
/// probabilities `probs`; mass outside the listed cells forms a remainder cell.
/// Cells with expected count below `min_expected` are pooled with the
/// remainder. With fewer than two bins the test is vacuous (dof 0, p = 1).
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               std::uint64_t total, double min_expected = 5.0);

/// Half the L1 distance between empirical frequencies and `probs` over the
/// listed cells plus the remainder cell.
double total_variation(std::span<const std::uint64_t> observed, std::span<const double> probs, std::uint64_t total);

/// Ordinary least-squares slope of ys on xs.
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

/// Weights w with slope = sum_i w_i ys_i for the given xs.
std::vector<double> least_squares_slope_weights(std::span<const double> xs);

}  // namespace rwlt
