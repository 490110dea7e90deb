#pragma once

#include "rwlt/error.hpp"
#include "rwlt/linalg.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rwlt {

// Absolute tolerance for the probability-sum and mean-zero checks.
inline constexpr double kParamTolerance = 1e-12;

/// Step law of the reflected (1,L) walk: +l with probability p_l (l = 1..L),
/// -1 with probability q. Away from 0 the step has mean zero.
///
/// Only obtainable through validate_params / params_from_q, so every instance
/// satisfies the probability-vector and mean-zero invariants.
class ModelParams {
public:
    int max_jump() const noexcept { return static_cast<int>(up_.size()); }

    /// p_l for 1 <= l <= L.
    double up(int l) const { return up_.at(static_cast<std::size_t>(l - 1)); }
    std::span<const double> up_probs() const noexcept { return up_; }
    double down() const noexcept { return q_; }

    /// Variance of one step away from the boundary: sum l^2 p_l + q.
    double sigma2() const noexcept;

    /// Flat key-value form: L, p1..pL, q.
    std::map<std::string, std::string> to_key_values() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    friend ModelParams validate_params(int max_jump, std::span<const double> up, double down);
    ModelParams(std::vector<double> up, double down) : up_(std::move(up)), q_(down) {}

    std::vector<double> up_;
    double q_;
};

ModelParams validate_params(int max_jump, std::span<const double> up, double down);

/// The L=2 family has one free parameter: p1 = 2 - 3q, p2 = 2q - 1, q in (1/2, 2/3).
ModelParams params_from_q(double q);

/// Accepts either {q} alone (L=2 family) or {L, p1..pL, q}.
ModelParams params_from_key_values(const std::map<std::string, std::string>& kv);

/// Derived quantities of the L=2 two-type branching structure.
struct ModelConstants {
    double q = 0.0, p1 = 0.0, p2 = 0.0;
    double sigma2 = 0.0;
    double c = 0.0;  // 2 / sigma2
    Vec2 rho{};      // (p1/q, p2/q)
    Mat2 M{};        // mean offspring matrix, M[i][j] = E[type j children | type i parent]
    double alpha = 0.0;
    Mat2 T{}, T_inv{};
    Vec2 mu{};  // right eigenvector of M for eigenvalue 1, mu1 + mu2 = 1
    Vec2 nu{};  // left eigenvector of M for eigenvalue 1, nu . mu = 1
    double K1 = 0.0;
    double Q2mu = 0.0;
    std::array<Mat2, 2> b_cov{};  // offspring covariance for parent type 1 and 2

    /// Asymptotic slope of E[(2 U1(n) + U2(n))^2] in n, started from e1.
    double moment_slope() const noexcept { return K1 * mu[0] * Q2mu; }
};

ModelConstants derive_constants(const ModelParams& params);

}  // namespace rwlt
