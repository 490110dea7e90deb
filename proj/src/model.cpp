#include "rwlt/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace rwlt {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NotAProbabilityVector: return "NotAProbabilityVector";
        case ErrorKind::NotMeanZero: return "NotMeanZero";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::UnsupportedL: return "UnsupportedL";
        case ErrorKind::ExcursionTooLong: return "ExcursionTooLong";
        case ErrorKind::PopulationCapExceeded: return "PopulationCapExceeded";
        case ErrorKind::TruncationBudgetExceeded: return "TruncationBudgetExceeded";
        case ErrorKind::EmptySample: return "EmptySample";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw Error(ErrorKind::InvalidArgument, "cannot parse '" + text + "' for key " + key);
    return v;
}

}  // namespace

double ModelParams::sigma2() const noexcept {
    double s = q_;
    for (std::size_t l = 1; l <= up_.size(); ++l) s += static_cast<double>(l * l) * up_[l - 1];
    return s;
}

std::map<std::string, std::string> ModelParams::to_key_values() const {
    std::map<std::string, std::string> kv;
    kv["L"] = std::to_string(up_.size());
    for (std::size_t l = 1; l <= up_.size(); ++l) kv["p" + std::to_string(l)] = format_double(up_[l - 1]);
    kv["q"] = format_double(q_);
    return kv;
}

ModelParams validate_params(int max_jump, std::span<const double> up, double down) {
    if (max_jump < 1)
        throw Error(ErrorKind::InvalidArgument, "L must be a positive integer");
    if (up.size() != static_cast<std::size_t>(max_jump))
        throw Error(ErrorKind::NotAProbabilityVector,
                    "expected " + std::to_string(max_jump) + " up-probabilities, got " + std::to_string(up.size()));
    double total = down;
    double drift = -down;
    if (!open_unit(down)) throw Error(ErrorKind::NotAProbabilityVector, "q must lie in (0,1)");
    for (std::size_t l = 1; l <= up.size(); ++l) {
        const double p = up[l - 1];
        if (!open_unit(p))
            throw Error(ErrorKind::NotAProbabilityVector, "p" + std::to_string(l) + " must lie in (0,1)");
        total += p;
        drift += static_cast<double>(l) * p;
    }
    if (std::fabs(total - 1.0) > kParamTolerance) {
        std::ostringstream os;
        os << "probabilities sum to " << total << ", not 1";
        throw Error(ErrorKind::NotAProbabilityVector, os.str());
    }
    if (std::fabs(drift) > kParamTolerance) {
        std::ostringstream os;
        os << "mean step is " << drift << ", not 0";
        throw Error(ErrorKind::NotMeanZero, os.str());
    }
    return ModelParams(std::vector<double>(up.begin(), up.end()), down);
}

ModelParams params_from_q(double q) {
    if (!(q > 0.5 && q < 2.0 / 3.0))
        throw Error(ErrorKind::OutOfRange, "q = " + format_double(q) + " is outside (1/2, 2/3)");
    const std::array<double, 2> p{2.0 - 3.0 * q, 2.0 * q - 1.0};
    return validate_params(2, p, q);
}

ModelParams params_from_key_values(const std::map<std::string, std::string>& kv) {
    auto q_it = kv.find("q");
    if (q_it == kv.end()) throw Error(ErrorKind::InvalidArgument, "missing key q");
    const double q = parse_double("q", q_it->second);

    auto L_it = kv.find("L");
    const bool has_p = kv.count("p1") > 0;
    if (L_it == kv.end() && !has_p) return params_from_q(q);

    int L = 0;
    if (L_it != kv.end()) {
        L = static_cast<int>(parse_double("L", L_it->second));
    } else {
        while (kv.count("p" + std::to_string(L + 1))) ++L;
    }
    if (L < 1) throw Error(ErrorKind::InvalidArgument, "L must be a positive integer");
    std::vector<double> p;
    for (int l = 1; l <= L; ++l) {
        const std::string key = "p" + std::to_string(l);
        auto it = kv.find(key);
        if (it == kv.end()) throw Error(ErrorKind::InvalidArgument, "missing key " + key);
        p.push_back(parse_double(key, it->second));
    }
    return validate_params(L, p, q);
}

ModelConstants derive_constants(const ModelParams& params) {
    if (params.max_jump() != 2)
        throw Error(ErrorKind::UnsupportedL,
                    "branching constants are defined for L=2 only (got L=" + std::to_string(params.max_jump()) + ")");
    ModelConstants k;
    k.q = params.down();
    k.p1 = params.up(1);
    k.p2 = params.up(2);
    k.sigma2 = params.sigma2();
    k.c = 2.0 / k.sigma2;
    k.rho = {k.p1 / k.q, k.p2 / k.q};
    const double r1 = k.rho[0], r2 = k.rho[1];
    k.M = {{{r1, r2}, {1.0 + r1, r2}}};

    const double q = k.q;
    k.alpha = (1.0 - 2.0 * q) / q;
    k.T = {{{1.0, 1.0 - 2.0 * q}, {2.0, 1.0 - q}}};
    const double s = 1.0 / (3.0 * q - 1.0);
    k.T_inv = {{{s * (1.0 - q), s * (2.0 * q - 1.0)}, {-2.0 * s, s}}};

    // (M - I) mu = 0 gives mu ~ (r2, 1 - r1); nu (M - I) = 0 gives nu ~ (1 + r1, 1 - r1).
    Vec2 mu{r2, 1.0 - r1};
    const double mu_sum = mu[0] + mu[1];
    k.mu = {mu[0] / mu_sum, mu[1] / mu_sum};
    Vec2 nu{1.0 + r1, 1.0 - r1};
    const double nu_dot = dot(nu, k.mu);
    k.nu = {nu[0] / nu_dot, nu[1] / nu_dot};

    k.K1 = std::pow(2.0 * k.nu[0] + k.nu[1], 2);

    // Offspring of either parent type is a negative multinomial with one stop;
    // the type-2 extra child is deterministic and does not change the covariance.
    Mat2 b{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) b[i][j] = k.rho[i] * k.rho[j] + (i == j ? k.rho[i] : 0.0);
    k.b_cov = {b, b};

    double q2 = 0.0;
    for (int i = 0; i < 2; ++i) q2 += k.nu[i] * dot(k.mu, col_mul(k.b_cov[i], k.mu));
    k.Q2mu = q2;
    return k;
}

}  // namespace rwlt
