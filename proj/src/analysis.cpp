#include "rwlt/analysis.hpp"

#include "rwlt/numeric.hpp"
#include "rwlt/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace rwlt {

namespace {

constexpr std::uint64_t kExcursionBlock = 1000;
constexpr std::uint64_t kDrawBlock = 100'000;
constexpr std::uint64_t kPathBlock = 10'000;
constexpr std::uint64_t kReplicateBlock = 1000;

std::uint64_t blocks_for(std::uint64_t n, std::uint64_t block) { return (n + block - 1) / block; }

Vec2 exp_weights(std::uint64_t N, double lambda) {
    const double h = lambda / static_cast<double>(N);
    return {-std::expm1(-2.0 * h), -std::expm1(-h)};
}

// rho M^{i-1} for i = 1..n, i.e. (a_i - a_{i-1}, b_i - b_{i-1}).
std::vector<Vec2> gf_increments(std::uint64_t n, const ModelConstants& k) {
    std::vector<Vec2> inc;
    inc.reserve(n + 1);
    inc.push_back({0.0, 0.0});
    Vec2 d = k.rho;
    for (std::uint64_t i = 1; i <= n; ++i) {
        inc.push_back(d);
        d = row_mul(d, k.M);
    }
    return inc;
}

}  // namespace

LimitDiagnostics limit_diagnostics(std::uint64_t N, double x, double lambda, const ModelConstants& k) {
    const std::int64_t level = grid_level(N, x);
    if (level < 1) throw Error(ErrorKind::InvalidArgument, "diagnostics need floor(N x) >= 1");
    const auto n = static_cast<std::uint64_t>(level);
    const Vec2 v = exp_weights(N, lambda);
    const auto ab = gf_recursion(n, k);
    const auto inc = gf_increments(n, k);

    LimitDiagnostics d;
    d.A = ab[n - 1].a * v[0] + ab[n - 1].b * v[1];
    d.B = ab[n].a * v[0] + ab[n].b * v[1];
    d.recursion_gap = d.B - d.A;
    d.scaled_gap = static_cast<double>(N) * dot(inc[n], v);
    const Mat2 power = mat_mul(mat_mul(k.T, diag2(1.0, std::pow(k.alpha, static_cast<double>(n - 1)))), k.T_inv);
    d.direct_gap = dot(row_mul(k.rho, power), v);
    return d;
}

FNResult analytic_FN(ParticleType start, std::uint64_t N, double x, double lambda, const ModelConstants& k) {
    if (N == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
    if (lambda < 0.0 || x < 0.0) throw Error(ErrorKind::InvalidArgument, "x and lambda must be >= 0");
    FNResult r;
    const std::int64_t level = grid_level(N, x);
    if (level < 1) {
        r.log_value = -lambda * k.c;
        r.value = std::exp(r.log_value);
        return r;
    }
    const auto n = static_cast<std::uint64_t>(level);
    const Vec2 v = exp_weights(N, lambda);
    const auto inc = gf_increments(n, k);
    Vec2 ab{0.0, 0.0};
    for (std::uint64_t i = 1; i <= n; ++i) ab = {ab[0] + inc[i][0], ab[1] + inc[i][1]};
    const double D_n = 1.0 + dot(ab, v);
    double log_f = 0.0;
    if (start == ParticleType::first) {
        log_f = std::log1p(-dot(inc[n], v) / D_n);
    } else if (n == 1) {
        // g2 = s1 g1 with g1 = 1 / (1 + rho . v)
        log_f = -2.0 * lambda / static_cast<double>(N) - std::log1p(dot(k.rho, v));
    } else {
        const Vec2 two{inc[n][0] + inc[n - 1][0], inc[n][1] + inc[n - 1][1]};
        log_f = std::log1p(-dot(two, v) / D_n);
    }
    r.log_value = static_cast<double>(N) * log_f;
    r.value = std::exp(r.log_value);
    if (start == ParticleType::first) r.diagnostics = limit_diagnostics(N, x, lambda, k);
    return r;
}

double local_time_lt(std::uint64_t N, double x, double lambda, const ModelConstants& k) {
    if (N == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
    const std::int64_t level = grid_level(N, x);
    if (level < 1) return std::exp(-lambda * k.c);
    const auto n = static_cast<std::uint64_t>(level);
    const double h = lambda / static_cast<double>(N);
    // Both arguments equal t = s g1(s, s), g1(s, s) = 1 / (1 + (1 - s)(rho1 + rho2)).
    const double log_t = -h - std::log1p(-std::expm1(-h) * (k.rho[0] + k.rho[1]));
    double log_f = log_t;
    if (n >= 2) {
        const double w = -std::expm1(log_t);
        const auto inc = gf_increments(n - 1, k);
        double total = 0.0;
        for (std::uint64_t i = 1; i <= n - 1; ++i) total += inc[i][0] + inc[i][1];
        const double D = 1.0 + w * total;
        log_f = std::log1p(-w * (inc[n - 1][0] + inc[n - 1][1]) / D);
    }
    return std::exp(static_cast<double>(N) * log_f);
}

double exact_second_moment(const ModelConstants& k, std::uint64_t n, Vec2 weights) {
    Mat2 S{{{1.0, 0.0}, {0.0, 0.0}}};
    Vec2 m{1.0, 0.0};
    const Mat2 Mt = transpose(k.M);
    for (std::uint64_t i = 0; i < n; ++i) {
        Mat2 next = mat_mul(mat_mul(Mt, S), k.M);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) next[a][b] += m[0] * k.b_cov[0][a][b] + m[1] * k.b_cov[1][a][b];
        S = next;
        m = row_mul(m, k.M);
    }
    return dot(weights, col_mul(S, weights));
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::uint64_t, std::uint64_t>> offspring_cells(std::size_t max_total) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cells;
    for (std::uint64_t t = 0; t <= max_total; ++t)
        for (std::uint64_t u1 = 0; u1 <= t; ++u1) cells.emplace_back(u1, t - u1);
    return cells;
}

OffspringHistogram make_offspring_histogram(std::size_t max_total) {
    OffspringHistogram h;
    h.max_total = max_total;
    h.counts.assign((max_total + 1) * (max_total + 2) / 2, 0);
    return h;
}

void OffspringHistogram::add(std::uint64_t u1, std::uint64_t u2) {
    ++total;
    const std::uint64_t t = u1 + u2;
    if (t > max_total) return;
    ++counts[t * (t + 1) / 2 + u1];
}

void OffspringHistogram::merge(const OffspringHistogram& other) {
    if (other.max_total != max_total) throw Error(ErrorKind::InvalidArgument, "histogram supports differ");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
}

namespace {

void merge_report(IdentityReport& into, const IdentityReport& part) {
    into.excursions += part.excursions;
    into.discarded += part.discarded;
    into.checks += part.checks;
    into.failures += part.failures;
    into.longest = std::max(into.longest, part.longest);
    into.highest = std::max(into.highest, part.highest);
    into.steps += part.steps;
    into.first_generation.merge(part.first_generation);
}

}  // namespace

IdentityReport identity_suite(const ModelParams& params, std::uint64_t n_excursions, std::uint64_t seed,
                              unsigned workers, std::uint64_t cap) {
    (void)OffspringLaw::from(params);  // L = 2 only
    const StepSampler sampler(params);
    const std::uint64_t n_blocks = blocks_for(n_excursions, kExcursionBlock);
    std::vector<IdentityReport> parts(n_blocks);

    parallel_for(n_blocks, workers, [&](std::size_t b) {
        RandomStream g(seed, StreamTag::identity, b);
        IdentityReport& rep = parts[b];
        rep.first_generation = make_offspring_histogram(12);
        ExcursionTally tally;
        const std::uint64_t count = std::min(kExcursionBlock, n_excursions - b * kExcursionBlock);
        for (std::uint64_t e = 0; e < count; ++e) {
            tally.reset();
            const auto out =
                run_excursion(sampler, g, cap, [&](std::int64_t from, std::int64_t to) { tally.on_step(from, to); });
            rep.steps += out.length;
            if (!out.complete) {
                ++rep.discarded;
                continue;
            }
            ++rep.excursions;
            rep.longest = std::max(rep.longest, out.length);
            rep.highest = std::max(rep.highest, out.max_height);
            for (std::int64_t j = 1; j <= out.max_height; ++j) {
                ++rep.checks;
                if (tally.local(j) != tally.u1(j - 1) + tally.u1(j) + tally.u2(j)) ++rep.failures;
            }
            rep.first_generation.add(tally.u1(1), tally.u2(1));
        }
    });

    IdentityReport total;
    total.first_generation = make_offspring_histogram(12);
    for (const auto& p : parts) merge_report(total, p);
    return total;
}

IdentityReport identity_suite(std::span<const ExcursionRecord> excursions) {
    IdentityReport rep;
    rep.first_generation = make_offspring_histogram(12);
    for (const auto& ex : excursions) {
        ++rep.excursions;
        rep.longest = std::max(rep.longest, ex.length);
        rep.highest = std::max(rep.highest, ex.max_height);
        rep.steps += ex.length;
        for (std::int64_t j = 1; j <= ex.max_height; ++j) {
            ++rep.checks;
            if (!verify_identity(ex, j)) ++rep.failures;
        }
        const auto U = extract_branching(ex);
        rep.first_generation.add(U.at(1)[0], U.at(1)[1]);
    }
    return rep;
}

OffspringCheck check_offspring_histogram(const OffspringHistogram& hist, const OffspringLaw& law) {
    std::vector<double> probs;
    for (auto [u1, u2] : offspring_cells(hist.max_total))
        probs.push_back(offspring_pmf(ParticleType::first, u1, u2, law));
    OffspringCheck c;
    c.chi2 = chi_square_gof(hist.counts, probs, hist.total);
    c.tv = total_variation(hist.counts, probs, hist.total);
    return c;
}

OffspringHistogram sample_offspring_histogram(const OffspringLaw& law, std::uint64_t n, std::uint64_t seed,
                                              unsigned workers, std::size_t max_total) {
    const std::uint64_t n_blocks = blocks_for(n, kDrawBlock);
    std::vector<OffspringHistogram> parts(n_blocks, make_offspring_histogram(max_total));
    parallel_for(n_blocks, workers, [&](std::size_t b) {
        RandomStream g(seed, StreamTag::offspring, b);
        const std::uint64_t count = std::min(kDrawBlock, n - b * kDrawBlock);
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto kids = sample_offspring(ParticleType::first, law, g);
            parts[b].add(kids[0], kids[1]);
        }
    });
    auto hist = make_offspring_histogram(max_total);
    for (const auto& p : parts) hist.merge(p);
    return hist;
}

ScaledLocalTimeSamples sample_scaled_local_times(const ModelParams& params, std::uint64_t N,
                                                 std::span<const double> xs, std::uint64_t runs, std::uint64_t seed,
                                                 unsigned workers, std::uint64_t cap) {
    if (N == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
    const StepSampler sampler(params);
    const double boundary = 2.0 / params.sigma2();
    std::vector<std::int64_t> levels;
    std::int64_t top = 1;
    for (double x : xs) {
        if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "x must be >= 0");
        levels.push_back(grid_level(N, x));
        top = std::max(top, levels.back());
    }

    ScaledLocalTimeSamples out;
    out.N = N;
    out.xs.assign(xs.begin(), xs.end());
    out.values.assign(xs.size(), std::vector<double>(runs, 0.0));
    std::vector<std::uint64_t> discarded(runs, 0), steps(runs, 0);
    const double dN = static_cast<double>(N);

    parallel_for(runs, workers, [&](std::size_t r) {
        RandomStream g(seed, StreamTag::local_time, r);
        const auto lt = sample_level_local_times(sampler, N, top, g, cap);
        for (std::size_t i = 0; i < levels.size(); ++i)
            out.values[i][r] =
                levels[i] < 1 ? boundary : static_cast<double>(lt.counts[static_cast<std::size_t>(levels[i])]) / dN;
        discarded[r] = lt.discarded;
        steps[r] = lt.steps;
    });
    for (std::size_t r = 0; r < runs; ++r) {
        out.discarded += discarded[r];
        out.steps += steps[r];
    }
    return out;
}

std::vector<std::vector<double>> sample_limit_paths(const LimitLaw& law, std::span<const double> grid,
                                                    std::uint64_t n_paths, std::uint64_t seed, unsigned workers) {
    std::vector<std::vector<double>> values(grid.size(), std::vector<double>(n_paths, 0.0));
    const std::uint64_t n_blocks = blocks_for(n_paths, kPathBlock);
    parallel_for(n_blocks, workers, [&](std::size_t b) {
        RandomStream g(seed, StreamTag::limit, b);
        const std::uint64_t first = b * kPathBlock;
        const std::uint64_t last = std::min(n_paths, first + kPathBlock);
        for (std::uint64_t r = first; r < last; ++r) {
            const auto path = sample_path(grid, law, g);
            for (std::size_t i = 0; i < grid.size(); ++i) values[i][r] = path[i];
        }
    });
    return values;
}

Estimate empirical_joint_lt(const std::vector<std::vector<double>>& values, std::span<const std::size_t> columns,
                            std::span<const double> lambdas) {
    if (columns.size() != lambdas.size()) throw Error(ErrorKind::InvalidArgument, "columns/lambdas size mismatch");
    if (columns.empty() || values.empty() || values[columns[0]].empty())
        throw Error(ErrorKind::EmptySample, "no samples");
    const std::size_t n = values[columns[0]].size();
    std::vector<double> e(n);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < columns.size(); ++i) s += lambdas[i] * values[columns[i]][r];
        e[r] = std::exp(-s);
    }
    return mean_estimate(e);
}

// ---------------------------------------------------------------------------

namespace {

struct MomentPartial {
    std::vector<CompensatedSum> sum, sumsq;
    CompensatedSum fit_sum, fit_sumsq;
    std::uint64_t used = 0, capped = 0;
};

Estimate estimate_from_sums(double sum, double sumsq, std::uint64_t n) {
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    if (n < 2) return {mean, 0.0};
    const double var = std::max(0.0, (sumsq - sum * mean) / (dn - 1.0));
    return {mean, std::sqrt(var / dn)};
}

}  // namespace

MomentReport second_moment_check(const ModelParams& params, std::span<const std::uint64_t> schedule,
                                 std::uint64_t replicates, std::uint64_t seed, unsigned workers,
                                 std::uint64_t population_cap) {
    const ModelConstants k = derive_constants(params);
    const OffspringLaw law = OffspringLaw::from(params);
    if (replicates == 0) throw Error(ErrorKind::InvalidArgument, "replicates must be >= 1");
    if (schedule.size() < 2) throw Error(ErrorKind::InvalidArgument, "slope needs at least two schedule points");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw Error(ErrorKind::InvalidArgument, "schedule must be increasing");

    MomentReport rep;
    const std::size_t n_fit = std::max<std::size_t>(2, (schedule.size() + 1) / 2);
    const std::size_t fit_first = schedule.size() - n_fit;
    std::vector<double> fit_x;
    for (std::size_t i = fit_first; i < schedule.size(); ++i) {
        rep.fit_ns.push_back(schedule[i]);
        fit_x.push_back(static_cast<double>(schedule[i]));
    }
    const auto w = least_squares_slope_weights(fit_x);
    const std::uint64_t n_max = schedule.back();

    const std::uint64_t n_blocks = blocks_for(replicates, kReplicateBlock);
    std::vector<MomentPartial> parts(n_blocks);
    parallel_for(n_blocks, workers, [&](std::size_t b) {
        RandomStream g(seed, StreamTag::generations, b);
        MomentPartial& part = parts[b];
        part.sum.resize(schedule.size());
        part.sumsq.resize(schedule.size());
        const std::uint64_t count = std::min(kReplicateBlock, replicates - b * kReplicateBlock);
        for (std::uint64_t r = 0; r < count; ++r) {
            std::vector<GenerationState> path;
            try {
                path = simulate_generations(n_max, law, g, population_cap);
            } catch (const PopulationCapExceeded&) {
                ++part.capped;
                continue;
            }
            ++part.used;
            double fit = 0.0;
            for (std::size_t i = 0; i < schedule.size(); ++i) {
                const auto& s = path[schedule[i]];
                const double y = 2.0 * static_cast<double>(s.u1) + static_cast<double>(s.u2);
                const double y2 = y * y;
                part.sum[i].add(y2);
                part.sumsq[i].add(y2 * y2);
                if (i >= fit_first) fit += w[i - fit_first] * y2;
            }
            part.fit_sum.add(fit);
            part.fit_sumsq.add(fit * fit);
        }
    });

    std::vector<CompensatedSum> sum(schedule.size()), sumsq(schedule.size());
    CompensatedSum fit_sum, fit_sumsq;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            sum[i].add(p.sum[i].value());
            sumsq[i].add(p.sumsq[i].value());
        }
        fit_sum.add(p.fit_sum.value());
        fit_sumsq.add(p.fit_sumsq.value());
        rep.replicates += p.used;
        rep.capped += p.capped;
    }
    if (rep.replicates == 0) throw PopulationCapExceeded(0, population_cap);

    std::vector<double> exact_fit;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        MomentRow row;
        row.n = schedule[i];
        row.second_moment = estimate_from_sums(sum[i].value(), sumsq[i].value(), rep.replicates);
        row.exact = exact_second_moment(k, schedule[i]);
        if (i >= fit_first) exact_fit.push_back(row.exact);
        rep.rows.push_back(row);
    }
    rep.slope = estimate_from_sums(fit_sum.value(), fit_sumsq.value(), rep.replicates);
    rep.exact_slope = least_squares_slope(fit_x, exact_fit);
    rep.target = k.moment_slope();
    rep.ratio = rep.slope.value / rep.target;
    rep.increasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].second_moment.value > rep.rows[i - 1].second_moment.value)) rep.increasing = false;
    return rep;
}

}  // namespace rwlt
