#pragma once

#include "rwlt/branching.hpp"
#include "rwlt/limit.hpp"
#include "rwlt/model.hpp"
#include "rwlt/statistics.hpp"
#include "rwlt/walk.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace rwlt {

// ---------------------------------------------------------------------------
// Generating-function side

/// A_N(x) = (a_{n-1}, b_{n-1}) v', B_N(x) = (a_n, b_n) v' with n = floor(N x)
/// and v = (1 - e^{-2 lambda/N}, 1 - e^{-lambda/N}).
struct LimitDiagnostics {
    double A = 0.0;
    double B = 0.0;
    double scaled_gap = 0.0;    // N (B - A), from the recursion increments
    double direct_gap = 0.0;    // B - A = rho M^{n-1} v' through T diag(1, alpha^{n-1}) T^{-1}
    double recursion_gap = 0.0; // B - A as the difference of the two inner products
};

LimitDiagnostics limit_diagnostics(std::uint64_t N, double x, double lambda, const ModelConstants& k);

struct FNResult {
    double value = 1.0;
    double log_value = 0.0;
    std::optional<LimitDiagnostics> diagnostics;  // absent when floor(N x) = 0
};

/// Laplace transform of 2 U_{N,1}(x) + U_{N,2}(x) for N i.i.d. copies started
/// from e_start: f^{(start)}_{floor(Nx)}(e^{-2 lambda/N}, e^{-lambda/N})^N,
/// raised in log space. For floor(N x) = 0 returns exp(-lambda 2/sigma^2).
FNResult analytic_FN(ParticleType start, std::uint64_t N, double x, double lambda, const ModelConstants& k);

/// Exact Laplace transform of l_N(x) itself, i.e. of
/// (U1(n-1) + U1(n) + U2(n)) / N summed over N excursions, n = floor(N x):
/// f_{n-1}(s g1(s, s), g2(s, s))^N with s = e^{-lambda/N}.
double local_time_lt(std::uint64_t N, double x, double lambda, const ModelConstants& k);

/// E[(w . U_n)^2 | U_0 = e1] from the exact second-moment recursion
/// S_{n+1} = M' S_n M + sum_i m_{n,i} B^(i).
double exact_second_moment(const ModelConstants& k, std::uint64_t n, Vec2 weights = {2.0, 1.0});

// ---------------------------------------------------------------------------
// Walk side

/// Counts of U(1) outcomes (u1, u2) with u1 + u2 <= max_total, in the order
/// of offspring_cells(max_total), plus the total number of observations.
struct OffspringHistogram {
    std::size_t max_total = 12;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    void add(std::uint64_t u1, std::uint64_t u2);
    void merge(const OffspringHistogram& other);
};

std::vector<std::pair<std::uint64_t, std::uint64_t>> offspring_cells(std::size_t max_total);
OffspringHistogram make_offspring_histogram(std::size_t max_total);

struct IdentityReport {
    std::uint64_t excursions = 0;  // completed
    std::uint64_t discarded = 0;   // exceeded the step cap
    std::uint64_t checks = 0;
    std::uint64_t failures = 0;
    std::uint64_t longest = 0;
    std::int64_t highest = 0;
    std::uint64_t steps = 0;
    OffspringHistogram first_generation;  // U(1) of every completed excursion
};

/// Simulates full excursions and checks L(j; tau_1) = U1(j-1) + U1(j) + U2(j)
/// at every level 1 <= j <= max height.
IdentityReport identity_suite(const ModelParams& params, std::uint64_t n_excursions, std::uint64_t seed,
                              unsigned workers = 1, std::uint64_t cap = kDefaultExcursionCap);

/// Runs the identity check on explicit excursions.
IdentityReport identity_suite(std::span<const ExcursionRecord> excursions);

struct OffspringCheck {
    ChiSquareResult chi2;
    double tv = 0.0;
};

OffspringCheck check_offspring_histogram(const OffspringHistogram& hist, const OffspringLaw& law);

/// Histogram of n type-1 offspring draws from sample_offspring.
OffspringHistogram sample_offspring_histogram(const OffspringLaw& law, std::uint64_t n, std::uint64_t seed,
                                              unsigned workers = 1, std::size_t max_total = 12);

/// values[i][r] = l_N(xs[i]) in run r; every run simulates N excursions.
struct ScaledLocalTimeSamples {
    std::uint64_t N = 0;
    std::vector<double> xs;
    std::vector<std::vector<double>> values;
    std::uint64_t discarded = 0;
    std::uint64_t steps = 0;
};

ScaledLocalTimeSamples sample_scaled_local_times(const ModelParams& params, std::uint64_t N,
                                                 std::span<const double> xs, std::uint64_t runs, std::uint64_t seed,
                                                 unsigned workers = 1, std::uint64_t cap = kDefaultExcursionCap);

// ---------------------------------------------------------------------------
// Limit side

/// values[i][r] = H(grid[i]) on path r, exact transitions.
std::vector<std::vector<double>> sample_limit_paths(const LimitLaw& law, std::span<const double> grid,
                                                    std::uint64_t n_paths, std::uint64_t seed, unsigned workers = 1);

/// Estimate of E[exp(-sum_i lambdas[i] values[columns[i]][r])].
Estimate empirical_joint_lt(const std::vector<std::vector<double>>& values, std::span<const std::size_t> columns,
                            std::span<const double> lambdas);

// ---------------------------------------------------------------------------
// Second-moment growth

struct MomentRow {
    std::uint64_t n = 0;
    Estimate second_moment;  // Monte Carlo E[(2 U1(n) + U2(n))^2]
    double exact = 0.0;      // exact_second_moment
};

struct MomentReport {
    std::vector<MomentRow> rows;
    std::vector<std::uint64_t> fit_ns;  // top half of the schedule (at least two)
    Estimate slope;
    double exact_slope = 0.0;  // same fit through the exact moments
    double target = 0.0;       // K1 mu1 Q2[mu]
    double ratio = 0.0;        // slope / target
    std::uint64_t replicates = 0;
    std::uint64_t capped = 0;  // replicates dropped by the population cap
    bool increasing = false;
};

MomentReport second_moment_check(const ModelParams& params, std::span<const std::uint64_t> schedule,
                                 std::uint64_t replicates, std::uint64_t seed, unsigned workers = 1,
                                 std::uint64_t population_cap = kDefaultPopulationCap);

}  // namespace rwlt
