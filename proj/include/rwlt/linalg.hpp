#pragma once

#include <array>
#include <cmath>

// Fixed 2x2 algebra for the two-type machinery. Vectors are used both as rows
// (left multiplication, v*M) and as columns (M*v); the call site says which.
namespace rwlt {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;  // row-major: m[i][j]

inline constexpr Mat2 identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

inline constexpr double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

// Row vector times matrix.
inline constexpr Vec2 row_mul(const Vec2& v, const Mat2& m) {
    return {v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]};
}

// Matrix times column vector.
inline constexpr Vec2 col_mul(const Mat2& m, const Vec2& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

inline constexpr Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

inline constexpr Mat2 transpose(const Mat2& m) { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

inline constexpr Mat2 diag2(double a, double b) { return {{{a, 0.0}, {0.0, b}}}; }

inline constexpr double trace(const Mat2& m) { return m[0][0] + m[1][1]; }

inline constexpr double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

inline Mat2 mat_pow(Mat2 base, unsigned long long e) {
    Mat2 r = identity2();
    while (e) {
        if (e & 1ULL) r = mat_mul(r, base);
        base = mat_mul(base, base);
        e >>= 1ULL;
    }
    return r;
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    double d = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) d = std::fmax(d, std::fabs(a[i][j] - b[i][j]));
    return d;
}

}  // namespace rwlt
