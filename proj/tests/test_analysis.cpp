#include <doctest.h>

#include "rwlt/analysis.hpp"

#include <cmath>
#include <vector>

using namespace rwlt;
using doctest::Approx;

namespace {

const ModelParams kParams = params_from_q(0.6);
const ModelConstants kK = derive_constants(kParams);
const LimitLaw kLaw = LimitLaw::from(kParams);

}  // namespace

TEST_CASE("analytic_FN values") {
    const auto one = analytic_FN(ParticleType::first, 1, 1.0, 1.0, kK);
    CHECK(one.value == Approx(0.6 / (1 - 0.2 * std::exp(-2.0) - 0.2 * std::exp(-1.0))).epsilon(1e-13));
    CHECK(one.value == Approx(0.66714).epsilon(1e-5));
    CHECK(one.log_value == Approx(std::log(one.value)));

    for (std::uint64_t N : {1u, 10u, 1000u})
        for (double x : {0.0, 0.3, 1.0}) {
            CHECK(analytic_FN(ParticleType::first, N, x, 0.0, kK).value == 1.0);
            CHECK(analytic_FN(ParticleType::second, N, x, 0.0, kK).value == 1.0);
        }

    const auto boundary = analytic_FN(ParticleType::first, 100, 0.005, 0.8, kK);
    CHECK(boundary.value == Approx(std::exp(-0.8 * kK.c)));
    CHECK_FALSE(boundary.diagnostics.has_value());

    const double target = phi(1.0, 1.0, kLaw);
    CHECK(target == Approx(0.57375).epsilon(1e-5));
    CHECK(std::abs(analytic_FN(ParticleType::first, 10'000, 1.0, 1.0, kK).value - target) < 1e-2);
    CHECK_THROWS_AS(analytic_FN(ParticleType::first, 0, 1.0, 1.0, kK), Error);
}

TEST_CASE("analytic_FN is the N-th power of gf_fn") {
    for (std::uint64_t N : {1u, 3u, 20u, 500u}) {
        const double s1 = std::exp(-2.0 * 0.7 / N), s2 = std::exp(-0.7 / N);
        const auto n = static_cast<std::uint64_t>(grid_level(N, 0.6));
        if (n == 0) continue;
        for (auto type : {ParticleType::first, ParticleType::second}) {
            const double direct = std::pow(gf_fn(type, n, s1, s2, kK), static_cast<double>(N));
            CHECK(analytic_FN(type, N, 0.6, 0.7, kK).value == Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("convergence along N") {
    const double target = phi(1.0, 1.0, kLaw);
    double prev1 = INFINITY, prev2 = INFINITY;
    for (std::uint64_t N : {10u, 100u, 1000u, 10000u}) {
        const double f1 = analytic_FN(ParticleType::first, N, 1.0, 1.0, kK).value;
        const double f2 = analytic_FN(ParticleType::second, N, 1.0, 1.0, kK).value;
        const double g1 = std::abs(f1 - target), g2 = std::abs(f2 - target * target);
        CHECK(g1 < prev1);
        CHECK(g2 < prev2);
        prev1 = g1;
        prev2 = g2;
    }
    CHECK(prev1 < 1e-4);
    CHECK(prev2 < 1e-4);
}

TEST_CASE("limit diagnostics") {
    const double lxc = kK.c, lc = kK.c;
    double pa = INFINITY, pb = INFINITY, ps = INFINITY;
    for (std::uint64_t N : {100u, 1000u, 10000u}) {
        const auto d = limit_diagnostics(N, 1.0, 1.0, kK);
        CHECK(std::abs(d.A - lxc) < pa);
        CHECK(std::abs(d.B - lxc) < pb);
        CHECK(std::abs(d.scaled_gap - lc) < ps);
        pa = std::abs(d.A - lxc);
        pb = std::abs(d.B - lxc);
        ps = std::abs(d.scaled_gap - lc);
        CHECK(std::abs(d.direct_gap - d.recursion_gap) < 1e-12);
        CHECK(d.scaled_gap == Approx(N * d.direct_gap).epsilon(1e-10));
    }
    CHECK(pa < 1e-2);
    CHECK(pb < 1e-2);
    CHECK(ps < 1e-2);

    const auto first = limit_diagnostics(10, 0.1, 1.0, kK);
    CHECK(first.A == 0.0);
    CHECK_THROWS_AS(limit_diagnostics(10, 0.05, 1.0, kK), Error);

    for (double q : {0.52, 0.58, 0.64}) {
        const auto kq = derive_constants(params_from_q(q));
        const auto d = limit_diagnostics(777, 0.9, 1.7, kq);
        CHECK(std::abs(d.direct_gap - d.recursion_gap) < 1e-12);
    }
}

TEST_CASE("exact Laplace transform of the scaled local time") {
    // N = 1, level 1: L(1) = U1(0) + U1(1) + U2(1) = 1 + U(1) . (1,1)
    const double s = std::exp(-0.9);
    const double want = s * gf_g(ParticleType::first, s, s, OffspringLaw::from(kParams));
    CHECK(local_time_lt(1, 1.0, 0.9, kK) == Approx(want).epsilon(1e-13));
    CHECK(local_time_lt(50, 0.01, 0.9, kK) == Approx(std::exp(-0.9 * kK.c)));
    for (std::uint64_t N : {10u, 100u, 1000u, 10000u}) {
        const double gap = std::abs(local_time_lt(N, 1.0, 1.0, kK) - analytic_FN(ParticleType::first, N, 1.0, 1.0, kK).value);
        CHECK(gap < 1.0 / static_cast<double>(N));
    }
}

TEST_CASE("walk simulation matches the exact transform") {
    const double xs[] = {0.6, 1.0};
    const auto sim = sample_scaled_local_times(kParams, 5, xs, 200'000, 31, 2);
    REQUIRE(sim.values.size() == 2);
    REQUIRE(sim.values[0].size() == 200'000);
    CHECK(sim.discarded == 0);
    for (std::size_t i = 0; i < 2; ++i)
        for (double lambda : {0.5, 1.0, 3.0}) {
            const auto e = empirical_lt(sim.values[i], lambda);
            CHECK(std::abs(e.value - local_time_lt(5, xs[i], lambda, kK)) < 4 * e.se);
        }
    // values are multiples of 1/N
    for (double v : sim.values[1]) REQUIRE(std::abs(v * 5 - std::round(v * 5)) < 1e-9);

    const double below[] = {0.1};
    const auto b = sample_scaled_local_times(kParams, 5, below, 10, 31, 1);
    for (double v : b.values[0]) CHECK(v == Approx(kK.c));
}

TEST_CASE("exact second moments") {
    CHECK(exact_second_moment(kK, 0) == 4.0);
    CHECK(exact_second_moment(kK, 1) == Approx(33.0 / 9.0));
    const auto law = OffspringLaw::from(kParams);
    for (std::uint64_t n : {2u, 3u}) {
        const auto pmf = enumerate_pmf(ParticleType::first, n, law, 1.0 - 1e-14);
        double m2 = 0.0;
        for (std::uint64_t i = 0; i < pmf.side; ++i)
            for (std::uint64_t j = 0; j < pmf.side; ++j) {
                const double w = 2.0 * i + j;
                m2 += pmf.at(i, j) * w * w;
            }
        CHECK(exact_second_moment(kK, n) == Approx(m2).epsilon(1e-8));
    }
    const double slope = (exact_second_moment(kK, 200) - exact_second_moment(kK, 100)) / 100.0;
    CHECK(slope == Approx(kK.moment_slope()).epsilon(1e-9));
    CHECK(kK.moment_slope() == Approx(3.125));
}

TEST_CASE("second moment check, small scale") {
    const std::uint64_t sched[] = {5, 10, 20, 40};
    const auto rep = second_moment_check(kParams, sched, 20'000, 8, 1);
    CHECK(rep.rows.size() == 4);
    CHECK(rep.fit_ns == std::vector<std::uint64_t>{20, 40});
    CHECK(rep.replicates == 20'000);
    CHECK(rep.capped == 0);
    for (const auto& row : rep.rows) CHECK(std::abs(row.second_moment.value - row.exact) < 4 * row.second_moment.se);
    CHECK(rep.exact_slope == Approx((rep.rows[3].exact - rep.rows[2].exact) / 20.0));
    CHECK(rep.increasing);
    CHECK(std::abs(rep.slope.value - rep.exact_slope) < 4 * rep.slope.se);

    const auto again = second_moment_check(kParams, sched, 20'000, 8, 3);
    CHECK(again.slope.value == rep.slope.value);

    const std::uint64_t one[] = {1};
    CHECK_THROWS_AS(second_moment_check(kParams, one, 100, 1), Error);
    const std::uint64_t down[] = {10, 5};
    CHECK_THROWS_AS(second_moment_check(kParams, down, 100, 1), Error);
    CHECK_THROWS_AS(second_moment_check(kParams, sched, 0, 1), Error);

    const auto capped = second_moment_check(kParams, sched, 2000, 9, 1, 3);
    CHECK(capped.capped > 0);
    CHECK(capped.capped + capped.replicates == 2000);
}

TEST_CASE("identity suite") {
    const std::vector<ExcursionRecord> one{excursion_from_path({0, 1, 0}, 2)};
    const auto r = identity_suite(one);
    CHECK(r.checks == 1);
    CHECK(r.failures == 0);

    const auto a = identity_suite(kParams, 3000, 5, 1, 1'000'000);
    const auto b = identity_suite(kParams, 3000, 5, 3, 1'000'000);
    CHECK(a.failures == 0);
    CHECK(a.excursions + a.discarded == 3000);
    CHECK(a.checks > a.excursions);
    CHECK(a.excursions == b.excursions);
    CHECK(a.checks == b.checks);
    CHECK(a.steps == b.steps);
    CHECK(a.longest == b.longest);
    CHECK(a.first_generation.counts == b.first_generation.counts);
    CHECK(a.first_generation.total == a.excursions);
}

TEST_CASE("offspring histogram cells") {
    const auto cells = offspring_cells(2);
    REQUIRE(cells.size() == 6);
    CHECK(cells[0] == std::pair<std::uint64_t, std::uint64_t>{0, 0});
    CHECK(cells[1] == std::pair<std::uint64_t, std::uint64_t>{0, 1});
    CHECK(cells[2] == std::pair<std::uint64_t, std::uint64_t>{1, 0});
    auto h = make_offspring_histogram(2);
    h.add(1, 0);
    h.add(5, 5);
    h.add(0, 2);
    CHECK(h.total == 3);
    CHECK(h.counts[2] == 1);
    auto h2 = make_offspring_histogram(2);
    h2.add(1, 0);
    h.merge(h2);
    CHECK(h.counts[2] == 2);
    CHECK(h.total == 4);
}

TEST_CASE("limit paths and joint transforms") {
    const double grid[] = {0.25, 0.5, 1.0};
    const auto a = sample_limit_paths(kLaw, grid, 25'000, 4, 1);
    const auto b = sample_limit_paths(kLaw, grid, 25'000, 4, 4);
    CHECK(a == b);
    const std::size_t cols[] = {1, 2};
    const double ls[] = {1.0, 1.0};
    const auto e = empirical_joint_lt(a, cols, ls);
    const double xs[] = {0.5, 1.0};
    CHECK(std::abs(e.value - finite_dim_lt(xs, ls, kLaw)) < 4 * e.se);
    const std::size_t single[] = {2};
    const double l1[] = {2.0};
    CHECK(empirical_joint_lt(a, single, l1).value == Approx(empirical_lt(a[2], 2.0).value));
}
