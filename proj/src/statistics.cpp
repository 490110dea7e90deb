#include "rwlt/statistics.hpp"

#include "rwlt/error.hpp"
#include "rwlt/numeric.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>

namespace rwlt {

Estimate mean_estimate(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorKind::EmptySample, "no samples");
    const double n = static_cast<double>(samples.size());
    CompensatedSum s;
    for (double x : samples) s.add(x);
    const double mean = s.value() / n;
    if (samples.size() == 1) return {mean, 0.0};
    CompensatedSum ss;
    for (double x : samples) ss.add((x - mean) * (x - mean));
    return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
}

Estimate empirical_lt(std::span<const double> samples, double lambda) {
    if (samples.empty()) throw Error(ErrorKind::EmptySample, "no samples");
    std::vector<double> e(samples.size());
    std::transform(samples.begin(), samples.end(), e.begin(), [&](double x) { return std::exp(-lambda * x); });
    return mean_estimate(e);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySample, "KS needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return std::sqrt(-std::log(alpha / 2.0) / 2.0) * std::sqrt((dn + dm) / (dn * dm));
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               std::uint64_t total, double min_expected) {
    if (observed.size() != probs.size()) throw Error(ErrorKind::InvalidArgument, "observed/probs size mismatch");
    if (total == 0) throw Error(ErrorKind::EmptySample, "no observations");
    const double N = static_cast<double>(total);

    std::vector<std::pair<double, double>> bins;  // (observed, expected)
    double pooled_obs = 0.0, pooled_exp = 0.0;
    double listed_obs = 0.0, listed_prob = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double o = static_cast<double>(observed[i]);
        const double e = probs[i] * N;
        listed_obs += o;
        listed_prob += probs[i];
        if (e >= min_expected) {
            bins.emplace_back(o, e);
        } else {
            pooled_obs += o;
            pooled_exp += e;
        }
    }
    pooled_obs += N - listed_obs;
    pooled_exp += std::max(0.0, 1.0 - listed_prob) * N;
    if (pooled_exp > 0.0) bins.emplace_back(pooled_obs, pooled_exp);

    ChiSquareResult r;
    r.bins = bins.size();
    if (bins.size() < 2) return r;
    for (auto [o, e] : bins) r.statistic += (o - e) * (o - e) / e;
    r.dof = static_cast<int>(bins.size()) - 1;
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

double total_variation(std::span<const std::uint64_t> observed, std::span<const double> probs, std::uint64_t total) {
    if (observed.size() != probs.size()) throw Error(ErrorKind::InvalidArgument, "observed/probs size mismatch");
    if (total == 0) throw Error(ErrorKind::EmptySample, "no observations");
    const double N = static_cast<double>(total);
    double l1 = 0.0, obs_sum = 0.0, prob_sum = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double f = static_cast<double>(observed[i]) / N;
        l1 += std::fabs(f - probs[i]);
        obs_sum += f;
        prob_sum += probs[i];
    }
    l1 += std::fabs((1.0 - obs_sum) - (1.0 - prob_sum));
    return 0.5 * l1;
}

std::vector<double> least_squares_slope_weights(std::span<const double> xs) {
    if (xs.size() < 2) throw Error(ErrorKind::InvalidArgument, "slope needs at least two points");
    double mx = 0.0;
    for (double x : xs) mx += x;
    mx /= static_cast<double>(xs.size());
    double sxx = 0.0;
    for (double x : xs) sxx += (x - mx) * (x - mx);
    if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "slope needs distinct x values");
    std::vector<double> w;
    for (double x : xs) w.push_back((x - mx) / sxx);
    return w;
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::InvalidArgument, "xs/ys size mismatch");
    const auto w = least_squares_slope_weights(xs);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * ys[i];
    return s;
}

}  // namespace rwlt
