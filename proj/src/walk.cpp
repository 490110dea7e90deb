#include "rwlt/walk.hpp"

#include <cmath>

namespace rwlt {

StepSampler::StepSampler(const ModelParams& params) {
    double acc = params.down();
    cumulative_.push_back(acc);
    for (double p : params.up_probs()) {
        acc += p;
        cumulative_.push_back(acc);
    }
}

ExcursionRecord excursion_from_path(std::vector<std::int64_t> path, int max_jump) {
    if (path.size() < 3 || path.front() != 0 || path.back() != 0 || path[1] != 1)
        throw Error(ErrorKind::InvalidArgument, "an excursion starts 0, 1 and ends at 0");
    ExcursionRecord rec;
    for (std::size_t r = 1; r < path.size(); ++r) {
        const std::int64_t inc = path[r] - path[r - 1];
        if (r + 1 < path.size() && path[r] < 1)
            throw Error(ErrorKind::InvalidArgument, "excursion touches 0 before its end");
        if (r > 1 && (inc == 0 || inc < -1 || inc > max_jump))
            throw Error(ErrorKind::InvalidArgument, "increment " + std::to_string(inc) + " not allowed");
        rec.max_height = std::max(rec.max_height, path[r]);
    }
    rec.length = path.size() - 1;
    rec.steps = std::move(path);
    return rec;
}

LocalTimeProfile local_time_profile(std::span<const ExcursionRecord> excursions) {
    LocalTimeProfile prof;
    prof.n_excursions = excursions.size();
    prof.counts.assign(1, 1);  // X_0 = 0
    for (const auto& ex : excursions) {
        if (prof.counts.size() < static_cast<std::size_t>(ex.max_height) + 1)
            prof.counts.resize(static_cast<std::size_t>(ex.max_height) + 1, 0);
        // steps[0] is the shared boundary point already counted.
        for (std::size_t r = 1; r < ex.steps.size(); ++r) ++prof.counts[static_cast<std::size_t>(ex.steps[r])];
    }
    return prof;
}

std::uint64_t local_time(std::span<const ExcursionRecord> excursions, std::int64_t j) {
    if (j < 0) return 0;
    std::uint64_t count = j == 0 ? 1 : 0;
    for (const auto& ex : excursions) {
        if (j > ex.max_height) continue;
        for (std::size_t r = 1; r < ex.steps.size(); ++r)
            if (ex.steps[r] == j) ++count;
    }
    return count;
}

BranchingExtract extract_branching(const ExcursionRecord& excursion) {
    BranchingExtract out;
    out.U.assign(static_cast<std::size_t>(excursion.max_height), {0, 0});
    const auto& x = excursion.steps;
    for (std::size_t r = 0; r + 1 < x.size(); ++r) {
        const std::int64_t from = x[r], to = x[r + 1];
        if (to <= from) continue;
        if (to - from > 2)
            throw Error(ErrorKind::UnsupportedL, "branching extraction needs jumps of at most +2");
        ++out.U[static_cast<std::size_t>(to - 1)][0];
        if (to - from == 2) ++out.U[static_cast<std::size_t>(to - 2)][1];
    }
    return out;
}

bool verify_identity(const ExcursionRecord& excursion, std::int64_t j) {
    if (j < 1) throw Error(ErrorKind::InvalidArgument, "identity holds for levels j >= 1");
    const std::span<const ExcursionRecord> one(&excursion, 1);
    const auto U = extract_branching(excursion);
    return local_time(one, j) == U.at(j - 1)[0] + U.at(j)[0] + U.at(j)[1];
}

std::int64_t grid_level(std::uint64_t N, double x) {
    const double nx = static_cast<double>(N) * x;
    const double r = std::round(nx);
    if (std::fabs(nx - r) <= 1e-9 * std::fmax(1.0, std::fabs(nx))) return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(nx));
}

double scaled_local_time(std::span<const ExcursionRecord> excursions, double x, const ModelParams& params) {
    if (excursions.empty()) throw Error(ErrorKind::EmptySample, "l_N needs at least one excursion");
    if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "x must be >= 0");
    const std::uint64_t N = excursions.size();
    const std::int64_t j = grid_level(N, x);
    if (j < 1) return 2.0 / params.sigma2();
    return static_cast<double>(local_time(excursions, j)) / static_cast<double>(N);
}

void ExcursionTally::reset() noexcept {
    std::fill(local_.begin(), local_.begin() + static_cast<std::ptrdiff_t>(used_), 0);
    std::fill(u1_.begin(), u1_.begin() + static_cast<std::ptrdiff_t>(used_), 0);
    std::fill(u2_.begin(), u2_.begin() + static_cast<std::ptrdiff_t>(used_), 0);
    local_[0] = 1;
    used_ = 1;
    wide_jump_ = false;
}

void ExcursionTally::grow(std::size_t n) {
    if (n <= local_.size()) return;
    const std::size_t size = std::max(n, 2 * local_.size());
    local_.resize(size, 0);
    u1_.resize(size, 0);
    u2_.resize(size, 0);
}

}  // namespace rwlt
