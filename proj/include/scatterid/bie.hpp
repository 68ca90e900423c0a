#pragma once

// Nystrom discretization of the single-layer transmission systems.
//
// Fields are represented as
//   background:  u = C_m + S^{k0}_{Be}[phi]
//   shell:       u = S^{ke}_{Be}[gamma] + sum_i S^{ke}_{Bi}[eta_i]
//   inclusion i: u = S^{ki}_{Bi}[psi_i]
// and matched through continuity of u and (1/sigma) du/dnu on every curve.
// Self blocks use Kress' product quadrature for the logarithmic part of the
// kernels; interactions between distinct curves use the trapezoidal rule.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "scatterid/error.hpp"
#include "scatterid/geometry.hpp"
#include "scatterid/specfun.hpp"

namespace scatterid {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

inline constexpr double kMinRcond = 1e-14;

struct Wavenumbers {
    double k0 = 0.0;
    double ke = 0.0;
    std::vector<double> k_inc;

    static Wavenumbers of(const TargetConfig& cfg, double omega) {
        Wavenumbers k{cfg.background.contrast_wavenumber(omega), cfg.shell.contrast_wavenumber(omega), {}};
        for (const auto& in : cfg.inclusions) k.k_inc.push_back(in.material.contrast_wavenumber(omega));
        return k;
    }
};

/// Single-layer and normal-derivative (K*) matrices of one source/target pair.
struct LayerBlocks {
    MatrixXc S;
    MatrixXc Kstar;
};

namespace detail {

inline bool same_curve(const DiscretizedBoundary& a, const DiscretizedBoundary& b) {
    if (&a == &b) return true;
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a.nodes[j] != b.nodes[j]) return false;
    return true;
}

/// Kress weights R[d] for t_i - t_j = 2 pi d / n.
inline std::vector<double> kress_weights(int n) {
    const int N = n / 2;
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        double s = 0.0;
        for (int m = 1; m < N; ++m) s += std::cos(kTwoPi * m * d / n) / m;
        r[static_cast<std::size_t>(d)] = -(2.0 * std::numbers::pi / N) * s -
                                         (std::numbers::pi / (double(N) * N)) * ((d % 2) ? -1.0 : 1.0);
    }
    return r;
}

inline LayerBlocks self_blocks(const DiscretizedBoundary& b, double k, bool want_s, bool want_k) {
    const int n = static_cast<int>(b.size());
    const auto R = kress_weights(n);
    std::vector<double> logsin(static_cast<std::size_t>(n), 0.0);
    for (int d = 1; d < n; ++d) {
        const double s = std::sin(std::numbers::pi * d / n);
        logsin[static_cast<std::size_t>(d)] = std::log(4.0 * s * s);
    }
    const double h = kTwoPi / n;
    const cplx I(0.0, 1.0);
    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    LayerBlocks out;
    if (want_s) out.S.resize(n, n);
    if (want_k) out.Kstar.resize(n, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Point& x = b.nodes[ui];
        const Point& nu = b.normals[ui];
        for (int j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const auto d = static_cast<std::size_t>((i - j + n) % n);
            const double sp = b.speed[uj];
            if (i == j) {
                if (want_s) {
                    const double s1 = inv4pi * sp;
                    const cplx s2 =
                        (-0.25 * I + (std::log(0.5 * k) + std::numbers::egamma + std::log(sp)) /
                                         (2.0 * std::numbers::pi)) * sp;
                    out.S(i, j) = R[0] * s1 + h * s2;
                }
                if (want_k) out.Kstar(i, j) = h * b.curvature[ui] * sp * inv4pi;
                continue;
            }
            const Point diff = x - b.nodes[uj];
            const double r = diff.norm();
            const auto H = specfun::hankel1_01(k * r);
            if (want_s) {
                const cplx full = -0.25 * I * H.h0 * sp;
                const double s1 = inv4pi * H.h0.real() * sp;
                out.S(i, j) = R[d] * s1 + h * (full - s1 * logsin[d]);
            }
            if (want_k) {
                const double c = diff.dot(nu) / r * sp;
                const cplx full = 0.25 * I * k * H.h1 * c;
                const double l1 = -k * inv4pi * H.h1.real() * c;
                out.Kstar(i, j) = R[d] * l1 + h * (full - l1 * logsin[d]);
            }
        }
    }
    return out;
}

inline LayerBlocks cross_blocks(const DiscretizedBoundary& src, const DiscretizedBoundary& tgt, double k,
                                bool want_s, bool want_k) {
    const auto nt = static_cast<int>(tgt.size());
    const auto ns = static_cast<int>(src.size());
    const double touch = 0.25 * std::min(src.max_spacing(), tgt.max_spacing());
    const cplx I(0.0, 1.0);
    LayerBlocks out;
    if (want_s) out.S.resize(nt, ns);
    if (want_k) out.Kstar.resize(nt, ns);
    // crossing curves leave src nodes on both sides of tgt
    std::size_t inside = 0;
    for (const auto& p : src.nodes) inside += winding_number(tgt.nodes, p) != 0 ? 1 : 0;
    bool hit = inside != 0 && inside != src.size();
#pragma omp parallel for schedule(static) reduction(|| : hit)
    for (int i = 0; i < nt; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Point& x = tgt.nodes[ui];
        for (int j = 0; j < ns; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const Point diff = x - src.nodes[uj];
            const double r = diff.norm();
            if (r < touch) {
                hit = true;
                continue;
            }
            const auto H = specfun::hankel1_01(k * r);
            const double w = src.weights[uj];
            if (want_s) out.S(i, j) = -0.25 * I * H.h0 * w;
            if (want_k) out.Kstar(i, j) = 0.25 * I * k * H.h1 * (diff.dot(tgt.normals[ui]) / r) * w;
        }
    }
    if (hit) throw NumericError("boundary curves intersect");
    return out;
}

inline LayerBlocks layer_blocks(const DiscretizedBoundary& src, const DiscretizedBoundary& tgt, double k,
                                bool want_s, bool want_k) {
    scatterid::detail::require(k > 0.0, "wavenumber must be positive");
    if (same_curve(src, tgt)) return self_blocks(tgt, k, want_s, want_k);
    return cross_blocks(src, tgt, k, want_s, want_k);
}

}  // namespace detail

/// Matrix of S_k from densities on `src` to values at the nodes of `tgt`.
inline MatrixXc single_layer(const DiscretizedBoundary& src, const DiscretizedBoundary& tgt, double k) {
    return detail::layer_blocks(src, tgt, k, true, false).S;
}

/// Matrix of the normal derivative (along tgt normals) of S_k. On a single
/// curve this is the principal value K*; add +1/2 or -1/2 for the exterior or
/// interior trace.
inline MatrixXc kstar(const DiscretizedBoundary& src, const DiscretizedBoundary& tgt, double k) {
    return detail::layer_blocks(src, tgt, k, false, true).Kstar;
}

/// Dense transmission system. Unknown blocks, each of length n:
///   0: phi on Be (k0), 1: gamma on Be (ke), then per inclusion i
///   2+2i: eta_i on Bi (ke), 3+2i: psi_i on Bi (ki).
/// Row blocks: Dirichlet then weighted Neumann matching on Be, then on each Bi.
struct BlockSystem {
    TargetConfig cfg;
    double omega = 0.0;
    Wavenumbers k;
    std::vector<DiscretizedBoundary> curves;  // Be, B1, B2
    MatrixXc A;
    int n = 0;

    Eigen::Index dim() const { return A.rows(); }
    int blocks() const { return static_cast<int>(2 * curves.size()); }
};

inline BlockSystem assemble(const TargetConfig& cfg, double omega, int n_nodes) {
    detail::require(omega > 0.0, "omega must be positive");
    cfg.validate();
    BlockSystem sys;
    sys.cfg = cfg;
    sys.omega = omega;
    sys.k = Wavenumbers::of(cfg, omega);
    sys.n = n_nodes;
    sys.curves.push_back(discretize(cfg.exterior, n_nodes));
    for (const auto& in : cfg.inclusions) sys.curves.push_back(discretize(in.shape, n_nodes));

    const int n = n_nodes;
    const int nb = sys.blocks();
    sys.A = MatrixXc::Zero(static_cast<Eigen::Index>(nb) * n, static_cast<Eigen::Index>(nb) * n);
    auto blk = [&](int r, int c) { return sys.A.block(r * n, c * n, n, n); };
    const MatrixXc id = MatrixXc::Identity(n, n);
    const double s0 = cfg.background.sigma, se = cfg.shell.sigma;
    const auto& Be = sys.curves[0];
    const std::size_t ninc = cfg.inclusions.size();

    const auto ext0 = detail::layer_blocks(Be, Be, sys.k.k0, true, true);
    const auto exte = detail::layer_blocks(Be, Be, sys.k.ke, true, true);
    blk(0, 0) = -ext0.S;
    blk(0, 1) = exte.S;
    blk(1, 0) = -(0.5 * id + ext0.Kstar) / s0;
    blk(1, 1) = (-0.5 * id + exte.Kstar) / se;

    for (std::size_t i = 0; i < ninc; ++i) {
        const int ci = 2 + 2 * static_cast<int>(i);
        const auto& Bi = sys.curves[i + 1];
        const double si = cfg.inclusions[i].material.sigma;
        // eta_i seen from Be, gamma seen from Bi
        const auto i_to_e = detail::layer_blocks(Bi, Be, sys.k.ke, true, true);
        const auto e_to_i = detail::layer_blocks(Be, Bi, sys.k.ke, true, true);
        blk(0, ci) = i_to_e.S;
        blk(1, ci) = i_to_e.Kstar / se;
        blk(ci, 1) = e_to_i.S;
        blk(ci + 1, 1) = e_to_i.Kstar / se;
        for (std::size_t j = 0; j < ninc; ++j) {
            const int cj = 2 + 2 * static_cast<int>(j);
            const auto& Bj = sys.curves[j + 1];
            const auto lb = detail::layer_blocks(Bj, Bi, sys.k.ke, true, true);
            blk(ci, cj) = lb.S;
            blk(ci + 1, cj) = (i == j ? MatrixXc(0.5 * id + lb.Kstar) : lb.Kstar) / se;
        }
        const auto inner = detail::layer_blocks(Bi, Bi, sys.k.k_inc[i], true, true);
        blk(ci, ci + 1) = -inner.S;
        blk(ci + 1, ci + 1) = -(-0.5 * id + inner.Kstar) / si;
    }
    if (!sys.A.allFinite()) throw NumericError("non-finite entries in the boundary-integral system");
    return sys;
}

/// Right-hand sides for sources C_m, m = -K..K (column m + K).
inline MatrixXc source_rhs(const BlockSystem& sys, int K) {
    const int n = sys.n;
    const auto& Be = sys.curves[0];
    MatrixXc b = MatrixXc::Zero(sys.dim(), 2 * K + 1);
    const double s0 = sys.cfg.background.sigma;
    for (int j = 0; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const auto cw = specfun::cyl_waves(K, sys.k.k0, Be.nodes[uj]);
        const Point& nu = Be.normals[uj];
        for (int c = 0; c < 2 * K + 1; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            b(j, c) = cw.value[uc];
            b(n + j, c) = (cw.dx[uc] * nu.x() + cw.dy[uc] * nu.y()) / s0;
        }
    }
    return b;
}

/// Densities for all source orders; column m + K of x holds the full unknown
/// vector for C_m.
struct DensitySet {
    int K = 0;
    int n = 0;
    MatrixXc x;

    auto block(int b, int m) const { return x.col(m + K).segment(static_cast<Eigen::Index>(b) * n, n); }
    auto phi(int m) const { return block(0, m); }
    auto phi_all() const { return x.topRows(n); }
};

inline DensitySet solve_rhs(const BlockSystem& sys, const MatrixXc& b, int K) {
    Eigen::PartialPivLU<MatrixXc> lu(sys.A);
    const double rc = lu.rcond();
    if (!(rc >= kMinRcond))
        throw NumericError("boundary-integral system is singular (rcond=" + std::to_string(rc) +
                           "); resonant or intersecting configuration");
    DensitySet d;
    d.K = K;
    d.n = sys.n;
    d.x = lu.solve(b);
    if (!d.x.allFinite()) throw NumericError("non-finite densities");
    return d;
}

/// max over sources of ||A x_m - b_m|| / ||b_m||.
inline double residual(const BlockSystem& sys, const DensitySet& d) {
    const MatrixXc b = source_rhs(sys, d.K);
    const MatrixXc res = sys.A * d.x - b;
    double worst = 0.0;
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        const double nb = b.col(c).norm();
        if (nb > 0.0) worst = std::max(worst, res.col(c).norm() / nb);
    }
    return worst;
}

/// One LU factorization shared by all 2K+1 sources.
inline DensitySet solve_densities(const BlockSystem& sys, int K) {
    detail::require(K >= 0 && K <= kMaxOrder, "source order K out of range");
    return solve_rhs(sys, source_rhs(sys, K), K);
}

/// G[r, j] = -(i/4) H0(k0 |p_r - y_j|) w_j over the exterior curve, so that
/// G * phi is the scattered field at the points.
inline MatrixXc exterior_potential_matrix(const BlockSystem& sys, const std::vector<Point>& pts) {
    const auto& Be = sys.curves[0];
    const auto np = static_cast<Eigen::Index>(pts.size());
    MatrixXc G(np, sys.n);
    const cplx I(0.0, 1.0);
    for (Eigen::Index r = 0; r < np; ++r)
        for (int j = 0; j < sys.n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const double d = (pts[static_cast<std::size_t>(r)] - Be.nodes[uj]).norm();
            G(r, j) = -0.25 * I * specfun::hankel1_01(sys.k.k0 * d).h0 * Be.weights[uj];
        }
    return G;
}

enum class Region { Background, Shell, Inclusion };

struct Location {
    Region region;
    int inclusion = -1;
};

namespace detail {

inline double distance_to(const DiscretizedBoundary& b, const Point& p) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : b.nodes) d = std::min(d, (p - q).norm());
    return d;
}

inline cplx potential(const DiscretizedBoundary& b, double k, const VectorXc& dens, const Point& p) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j)
        s += specfun::hankel1_01(k * (p - b.nodes[j]).norm()).h0 * b.weights[j] * dens(static_cast<Eigen::Index>(j));
    return cplx(0.0, -0.25) * s;
}

}  // namespace detail

/// Region containing p; throws when p is within two node spacings of a curve.
inline Location locate(const BlockSystem& sys, const Point& p) {
    for (const auto& c : sys.curves)
        if (detail::distance_to(c, p) < 2.0 * c.max_spacing())
            throw std::invalid_argument("evaluation point too close to a boundary curve");
    if (winding_number(sys.curves[0].nodes, p) == 0) return {Region::Background};
    for (std::size_t i = 1; i < sys.curves.size(); ++i)
        if (winding_number(sys.curves[i].nodes, p) != 0) return {Region::Inclusion, static_cast<int>(i) - 1};
    return {Region::Shell};
}

/// Scattered field u_m - C_m outside Be; the total field u_m inside.
inline cplx eval_scattered(const BlockSystem& sys, const DensitySet& d, int m, const Point& p) {
    detail::require(std::abs(m) <= d.K, "source order outside the density set");
    const Location loc = locate(sys, p);
    switch (loc.region) {
        case Region::Background: return detail::potential(sys.curves[0], sys.k.k0, d.block(0, m), p);
        case Region::Shell: {
            cplx u = detail::potential(sys.curves[0], sys.k.ke, d.block(1, m), p);
            for (std::size_t i = 0; i + 1 < sys.curves.size(); ++i)
                u += detail::potential(sys.curves[i + 1], sys.k.ke, d.block(2 + 2 * static_cast<int>(i), m), p);
            return u;
        }
        case Region::Inclusion: {
            const auto i = static_cast<std::size_t>(loc.inclusion);
            return detail::potential(sys.curves[i + 1], sys.k.k_inc[i], d.block(3 + 2 * loc.inclusion, m), p);
        }
    }
    return 0.0;
}

}  // namespace scatterid
