#include <doctest.h>

#include "rwlt/error.hpp"
#include "rwlt/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace rwlt;
using doctest::Approx;

TEST_CASE("mean and Laplace estimates") {
    const std::vector<double> zeros(10, 0.0);
    auto e = empirical_lt(zeros, 2.0);
    CHECK(e.value == 1.0);
    CHECK(e.se == 0.0);
    const std::vector<double> xs{0.1, 0.5, 2.0};
    e = empirical_lt(xs, 0.0);
    CHECK(e.value == 1.0);
    CHECK(e.se == 0.0);
    const auto m = mean_estimate(std::vector<double>{1, 2, 3, 4});
    CHECK(m.value == Approx(2.5));
    CHECK(m.se == Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(mean_estimate(std::vector<double>{7}).se == 0.0);
    try {
        mean_estimate(std::vector<double>{});
        FAIL("expected EmptySample");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::EmptySample);
    }
    CHECK_THROWS_AS(empirical_lt(std::vector<double>{}, 1.0), Error);
}

TEST_CASE("two-sample KS") {
    std::vector<double> a{0.3, 1.2, 0.0, 0.0, 5.0, 2.2, 0.7};
    CHECK(ks_distance(a, a) == 0.0);
    auto b = a;
    std::mt19937_64 rng(1);
    std::shuffle(b.begin(), b.end(), rng);
    CHECK(ks_distance(a, b) == 0.0);
    CHECK(ks_distance(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) == 1.0);
    CHECK(ks_distance(std::vector<double>{1, 2}, std::vector<double>{1, 3}) == Approx(0.5));
    // atoms: both samples half zeros
    CHECK(ks_distance(std::vector<double>{0, 0, 1, 2}, std::vector<double>{0, 0, 3, 4}) == Approx(0.5));
    CHECK(ks_distance(std::vector<double>{0, 0, 1, 1}, std::vector<double>{0, 1}) == 0.0);
    CHECK(ks_critical_value(10'000, 10'000, 0.01) == Approx(1.627624 * std::sqrt(2.0 / 10'000)).epsilon(1e-6));
    CHECK_THROWS_AS(ks_distance(std::vector<double>{}, a), Error);
}

TEST_CASE("chi-square goodness of fit") {
    const std::vector<double> probs{0.5, 0.3};
    const std::vector<std::uint64_t> exact{500, 300};
    auto r = chi_square_gof(exact, probs, 1000);
    CHECK(r.statistic == Approx(0.0));
    CHECK(r.dof == 2);
    CHECK(r.p_value == Approx(1.0));

    // one degree of freedom: p = erfc(sqrt(stat / 2))
    r = chi_square_gof(std::vector<std::uint64_t>{521}, std::vector<double>{0.5}, 1000);
    CHECK(r.dof == 1);
    CHECK(r.statistic == Approx(2 * 21.0 * 21.0 / 500.0));
    CHECK(r.p_value == Approx(std::erfc(std::sqrt(r.statistic / 2))).epsilon(1e-10));
    CHECK_THROWS_AS(chi_square_gof(exact, probs, 0), Error);

    // small cells are pooled into the remainder; a single bin is vacuous
    const std::vector<double> tiny{1e-6, 1e-6};
    r = chi_square_gof(std::vector<std::uint64_t>{0, 0}, tiny, 10);
    CHECK(r.dof == 0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("total variation") {
    const std::vector<double> probs{0.5, 0.3};
    CHECK(total_variation(std::vector<std::uint64_t>{50, 30}, probs, 100) == Approx(0.0));
    CHECK(total_variation(std::vector<std::uint64_t>{60, 30}, probs, 100) == Approx(0.1));
    CHECK(total_variation(std::vector<std::uint64_t>{100, 0}, probs, 100) == Approx(0.5));
}

TEST_CASE("least-squares slope") {
    const std::vector<double> x{25, 50, 100, 200};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v - 7.0);
    CHECK(least_squares_slope(x, y) == Approx(3.0));
    const auto w = least_squares_slope_weights(x);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(std::abs(s) < 1e-15);
    CHECK_THROWS_AS(least_squares_slope_weights(std::vector<double>{1.0}), Error);
    CHECK_THROWS_AS(least_squares_slope_weights(std::vector<double>{2.0, 2.0}), Error);
}
