#include "rwlt/limit.hpp"

namespace rwlt {

LimitLaw LimitLaw::from(const ModelParams& params) {
    const double c = 2.0 / params.sigma2();
    return {c, c};
}

double transition_lt(double x0, double t, double lambda, const LimitLaw& law) {
    return std::exp(-x0 * psi(t, lambda, law.c));
}

double phi(double x, double lambda, const LimitLaw& law) { return transition_lt(law.h0, x, lambda, law); }

double finite_dim_lt(std::span<const double> xs, std::span<const double> lambdas, const LimitLaw& law) {
    if (xs.size() != lambdas.size()) throw Error(ErrorKind::InvalidArgument, "xs and lambdas differ in length");
    if (xs.empty()) return 1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (lambdas[i] < 0.0) throw Error(ErrorKind::InvalidArgument, "lambdas must be >= 0");
        if (xs[i] < 0.0 || (i > 0 && xs[i] < xs[i - 1]))
            throw Error(ErrorKind::InvalidArgument, "xs must be non-decreasing and >= 0");
    }
    double folded = lambdas.back();
    for (std::size_t i = xs.size() - 1; i-- > 0;) folded = lambdas[i] + psi(xs[i + 1] - xs[i], folded, law.c);
    return std::exp(-law.h0 * psi(xs.front(), folded, law.c));
}

}  // namespace rwlt
