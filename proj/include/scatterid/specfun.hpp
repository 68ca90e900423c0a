#pragma once

// Integer-order Bessel and Hankel functions of real argument and the
// cylindrical waves C_m(x) = J_m(omega |x|) exp(i m theta_x).
//
// J_n is obtained for all orders at once by Miller's downward recurrence,
// normalized with 1 = J_0 + 2 sum J_2k. Y_0 and Y_1 follow from the Neumann
// series in even-order J's, and higher Y_n from the (stable) upward recurrence.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scatterid/error.hpp"

namespace scatterid {

using cplx = std::complex<double>;
using Point = Eigen::Vector2d;

inline constexpr int kMaxOrder = 64;
inline constexpr double kMaxArgument = 200.0;

namespace specfun {

namespace detail {

inline void check_order(int m) {
    scatterid::detail::require_domain(std::abs(m) <= kMaxOrder,
                                      "bessel order |m| > 64: " + std::to_string(m));
}

inline void check_arg(double x, bool strictly_positive) {
    const bool ok = strictly_positive ? (x > 0.0) : (x >= 0.0);
    scatterid::detail::require_domain(ok && std::isfinite(x),
                                      "bessel argument out of domain: " + std::to_string(x));
    scatterid::detail::require_domain(x <= kMaxArgument,
                                      "bessel argument > 200: " + std::to_string(x));
}

inline double reflect_sign(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

/// Normalized J_0..J_top(x) for x > 0, where top is chosen well above both
/// the requested order and x so that the recurrence has converged.
inline std::vector<double> miller(int nmax, double x) {
    const double lead = std::max(static_cast<double>(nmax), std::ceil(x));
    int top = static_cast<int>(lead + 30.0 + 4.0 * std::ceil(std::sqrt(lead)));
    if (top % 2) ++top;

    std::vector<double> j(static_cast<std::size_t>(top) + 2, 0.0);
    const double two_over_x = 2.0 / x;
    double jp1 = 0.0;
    double jk = 1e-30;
    double norm = 0.0;
    j[static_cast<std::size_t>(top)] = jk;
    for (int k = top; k > 0; --k) {
        const double jm1 = k * two_over_x * jk - jp1;
        jp1 = jk;
        jk = jm1;
        j[static_cast<std::size_t>(k - 1)] = jk;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * jk;
        if (std::abs(jk) > 1e250) {
            for (int q = k - 1; q <= top; ++q) j[static_cast<std::size_t>(q)] *= 1e-250;
            jk *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j[0];
    for (auto& v : j) v /= norm;
    return j;
}

struct Y01 {
    double y0;
    double y1;
};

/// Y_0, Y_1 from the Neumann series over a converged J table.
inline Y01 neumann_y01(const std::vector<double>& j, double x) {
    const double lg = std::log(0.5 * x) + std::numbers::egamma;
    const std::size_t top = j.size() - 2;
    double s0 = 0.0;
    double s1 = 0.0;
    double sign = -1.0;
    for (std::size_t k = 1; 2 * k + 1 <= top; ++k) {
        s0 += sign * j[2 * k] / static_cast<double>(k);
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / static_cast<double>(k);
        sign = -sign;
    }
    const double c = 2.0 / std::numbers::pi;
    return {c * (lg * j[0] - 2.0 * s0), c * (lg * j[1] - j[0] / x + s1)};
}

}  // namespace detail

/// J_0(x) .. J_nmax(x) for x >= 0.
inline std::vector<double> bessel_j_table(int nmax, double x) {
    scatterid::detail::require(nmax >= 0, "bessel_j_table: nmax < 0");
    if (x == 0.0) {
        std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
        out[0] = 1.0;
        return out;
    }
    auto j = detail::miller(nmax, x);
    j.resize(static_cast<std::size_t>(nmax) + 1);
    return j;
}

/// H^(1)_0(x) .. H^(1)_nmax(x) for x > 0.
inline std::vector<cplx> hankel1_table(int nmax, double x) {
    scatterid::detail::require(nmax >= 0, "hankel1_table: nmax < 0");
    const auto j = detail::miller(std::max(nmax, 1), x);
    const auto [y0, y1] = detail::neumann_y01(j, x);
    std::vector<cplx> out(static_cast<std::size_t>(nmax) + 1);
    double ym1 = y0;
    double yk = y1;
    out[0] = {j[0], y0};
    if (nmax >= 1) out[1] = {j[1], y1};
    for (int k = 1; k < nmax; ++k) {
        const double yp1 = 2.0 * k / x * yk - ym1;
        ym1 = yk;
        yk = yp1;
        out[static_cast<std::size_t>(k) + 1] = {j[static_cast<std::size_t>(k) + 1], yk};
    }
    return out;
}

/// J_m(x), x >= 0, |m| <= 64, x <= 200.
inline double bessel_j(int m, double x) {
    detail::check_order(m);
    detail::check_arg(x, false);
    const int am = std::abs(m);
    const double v = bessel_j_table(am, x)[static_cast<std::size_t>(am)];
    return m < 0 ? detail::reflect_sign(am) * v : v;
}

/// Y_m(x), 0 < x <= 200, |m| <= 64.
inline double bessel_y(int m, double x) {
    detail::check_order(m);
    detail::check_arg(x, true);
    const int am = std::abs(m);
    const double v = hankel1_table(am, x)[static_cast<std::size_t>(am)].imag();
    if (!std::isfinite(v)) throw DomainError("bessel_y overflow at order " + std::to_string(m));
    return m < 0 ? detail::reflect_sign(am) * v : v;
}

/// H^(1)_m(x) = J_m(x) + i Y_m(x).
inline cplx hankel1(int m, double x) {
    detail::check_order(m);
    detail::check_arg(x, true);
    const int am = std::abs(m);
    const cplx v = hankel1_table(am, x)[static_cast<std::size_t>(am)];
    if (!std::isfinite(v.imag())) throw DomainError("hankel1 overflow at order " + std::to_string(m));
    return m < 0 ? detail::reflect_sign(am) * v : v;
}

/// H^(1)_0 and H^(1)_1 together. This is the kernel hot path of the boundary
/// integral assembly and goes through the C library's j0/j1/y0/y1.
struct Hankel01 {
    cplx h0;
    cplx h1;
};

inline Hankel01 hankel1_01(double x) {
    return {{::j0(x), ::y0(x)}, {::j1(x), ::y1(x)}};
}

/// C_m(p) = J_m(omega |p|) e^{i m theta_p}; equals delta_{m0} at the origin.
inline cplx cyl_wave(int m, double omega, const Point& p) {
    scatterid::detail::require_domain(omega > 0.0, "cyl_wave: omega must be positive");
    detail::check_order(m);
    const double r = p.norm();
    if (r == 0.0) return m == 0 ? 1.0 : 0.0;
    const double theta = std::atan2(p.y(), p.x());
    return bessel_j(m, omega * r) * std::polar(1.0, m * theta);
}

/// Cartesian gradient of C_m at p. Finite everywhere, including the origin.
inline std::pair<cplx, cplx> cyl_wave_grad(int m, double omega, const Point& p) {
    scatterid::detail::require_domain(omega > 0.0, "cyl_wave_grad: omega must be positive");
    detail::check_order(m);
    const double r = p.norm();
    const cplx i(0.0, 1.0);
    if (r == 0.0) {
        if (m == 1) return {0.5 * omega, 0.5 * omega * i};
        if (m == -1) return {-0.5 * omega, 0.5 * omega * i};
        return {0.0, 0.0};
    }
    const int am = std::abs(m);
    const double x = omega * r;
    const auto j = bessel_j_table(am + 1, x);
    const double jm = j[static_cast<std::size_t>(am)];
    const double jprev = am == 0 ? -j[1] : j[static_cast<std::size_t>(am) - 1];
    const double djm = 0.5 * (jprev - j[static_cast<std::size_t>(am) + 1]);
    const double sgn = m < 0 ? detail::reflect_sign(am) : 1.0;
    const double theta = std::atan2(p.y(), p.x());
    const cplx phase = std::polar(1.0, m * theta);
    const double c = std::cos(theta), s = std::sin(theta);
    // radial and angular parts of the gradient
    const cplx dr = sgn * omega * djm * phase;
    const cplx dth = sgn * i * static_cast<double>(m) * jm / r * phase;
    return {dr * c - dth * s, dr * s + dth * c};
}

/// All cylindrical waves of orders -K..K and their gradients at one point.
/// Index m is stored at m + K.
struct CylWaves {
    std::vector<cplx> value;
    std::vector<cplx> dx;
    std::vector<cplx> dy;
};

inline CylWaves cyl_waves(int K, double omega, const Point& p) {
    scatterid::detail::require(K >= 0, "cyl_waves: K < 0");
    const std::size_t size = 2 * static_cast<std::size_t>(K) + 1;
    CylWaves out{std::vector<cplx>(size), std::vector<cplx>(size), std::vector<cplx>(size)};
    const double r = p.norm();
    if (r == 0.0) {
        for (int m = -K; m <= K; ++m) {
            const auto idx = static_cast<std::size_t>(m + K);
            out.value[idx] = m == 0 ? 1.0 : 0.0;
            if (std::abs(m) == 1) {
                const auto [gx, gy] = cyl_wave_grad(m, omega, p);
                out.dx[idx] = gx;
                out.dy[idx] = gy;
            }
        }
        return out;
    }
    const double x = omega * r;
    const auto j = bessel_j_table(K + 1, x);
    const double theta = std::atan2(p.y(), p.x());
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx i(0.0, 1.0);
    const cplx step = std::polar(1.0, theta);
    cplx phase = 1.0;
    for (int am = 0; am <= K; ++am) {
        const double jm = j[static_cast<std::size_t>(am)];
        const double jprev = am == 0 ? -j[1] : j[static_cast<std::size_t>(am) - 1];
        const double djm = 0.5 * (jprev - j[static_cast<std::size_t>(am) + 1]);
        for (int sg : {1, -1}) {
            if (am == 0 && sg == -1) continue;
            const int m = sg * am;
            const double sgn = (m < 0 && am % 2) ? -1.0 : 1.0;
            const cplx ph = sg > 0 ? phase : std::conj(phase);
            const cplx dr = sgn * omega * djm * ph;
            const cplx dth = sgn * i * static_cast<double>(m) * jm / r * ph;
            const auto idx = static_cast<std::size_t>(m + K);
            out.value[idx] = sgn * jm * ph;
            out.dx[idx] = dr * c - dth * s;
            out.dy[idx] = dr * s + dth * c;
        }
        phase *= step;
    }
    return out;
}

}  // namespace specfun
}  // namespace scatterid
