#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "scatterid/bie.hpp"

namespace scatterid {

inline constexpr int kMinTranslationMargin = 4;

/// W[n, m] for |n|, |m| <= K, stored at (n + K, m + K).
struct ScatteringMatrix {
    int K = 0;
    double omega = 0.0;
    std::string provenance = "computed";  // computed | reconstructed | transformed
    std::string target_id;
    MatrixXc w;

    cplx operator()(int n, int m) const { return w(n + K, m + K); }
    cplx& operator()(int n, int m) { return w(n + K, m + K); }
    int size() const { return 2 * K + 1; }

    static ScatteringMatrix zero(int K, double omega) {
        ScatteringMatrix s;
        s.K = K;
        s.omega = omega;
        s.w = MatrixXc::Zero(2 * K + 1, 2 * K + 1);
        return s;
    }

    /// Central block of order K_out <= K.
    ScatteringMatrix truncated(int K_out) const {
        detail::require(K_out >= 0 && K_out <= K, "truncation order exceeds K");
        ScatteringMatrix s = *this;
        s.K = K_out;
        s.w = w.block(K - K_out, K - K_out, 2 * K_out + 1, 2 * K_out + 1);
        return s;
    }
};

/// Values of C_n (n = -K..K, column n + K) at the exterior nodes.
inline MatrixXc cyl_wave_matrix(const DiscretizedBoundary& b, int K, double k) {
    MatrixXc C(static_cast<Eigen::Index>(b.size()), 2 * K + 1);
    for (std::size_t j = 0; j < b.size(); ++j) {
        const auto cw = specfun::cyl_waves(K, k, b.nodes[j]);
        for (int c = 0; c < 2 * K + 1; ++c) C(static_cast<Eigen::Index>(j), c) = cw.value[static_cast<std::size_t>(c)];
    }
    return C;
}

/// W[n, m] = sum_j conj(C_n(y_j)) phi_m(y_j) w_j over the exterior curve.
inline ScatteringMatrix scattering_matrix(const BlockSystem& sys, const DensitySet& d, int K) {
    detail::require(K <= d.K, "requested order exceeds the density set");
    const auto& Be = sys.curves[0];
    const MatrixXc C = cyl_wave_matrix(Be, K, sys.k.k0);
    Eigen::VectorXd wts(static_cast<Eigen::Index>(Be.size()));
    for (std::size_t j = 0; j < Be.size(); ++j) wts(static_cast<Eigen::Index>(j)) = Be.weights[j];
    ScatteringMatrix s;
    s.K = K;
    s.omega = sys.omega;
    s.target_id = sys.cfg.id;
    s.w = C.adjoint() * wts.asDiagonal() * d.phi_all().middleCols(d.K - K, 2 * K + 1);
    return s;
}

inline ScatteringMatrix scattering_matrix(const TargetConfig& cfg, double omega, int K, int n_nodes) {
    const BlockSystem sys = assemble(cfg, omega, n_nodes);
    return scattering_matrix(sys, solve_densities(sys, K), K);
}

/// Coefficients of the target translated by z, at order K_out. The double sum
/// is truncated at |a|, |b| <= w.K - K_out.
inline ScatteringMatrix translate_w(const ScatteringMatrix& w, const Point& z, int K_out) {
    const int margin = w.K - K_out;
    if (margin < kMinTranslationMargin)
        throw std::invalid_argument("translate_w: truncation margin " + std::to_string(margin) + " < 4");
    std::vector<cplx> c(2 * static_cast<std::size_t>(margin) + 1);
    for (int a = -margin; a <= margin; ++a) c[static_cast<std::size_t>(a + margin)] = specfun::cyl_wave(a, w.omega, z);
    // W' = T^H W T restricted, with T[p, m] = C_{m-p}(z)
    const int Kin = w.K;
    MatrixXc T = MatrixXc::Zero(2 * Kin + 1, 2 * K_out + 1);
    for (int m = -K_out; m <= K_out; ++m)
        for (int b = -margin; b <= margin; ++b) T(m - b + Kin, m + K_out) = c[static_cast<std::size_t>(b + margin)];
    ScatteringMatrix out;
    out.K = K_out;
    out.omega = w.omega;
    out.provenance = "transformed";
    out.target_id = w.target_id;
    out.w = T.adjoint() * w.w * T;
    return out;
}

/// W'[n, m] = e^{i(m - n) theta} W[n, m].
inline ScatteringMatrix rotate_w(const ScatteringMatrix& w, double theta) {
    ScatteringMatrix out = w;
    out.provenance = "transformed";
    for (int n = -w.K; n <= w.K; ++n)
        for (int m = -w.K; m <= w.K; ++m) out(n, m) *= std::polar(1.0, (m - n) * theta);
    return out;
}

/// (W of the target scaled by s at omega, W of the original target at s omega).
inline std::pair<ScatteringMatrix, ScatteringMatrix> scale_check(const TargetConfig& cfg, double s, double omega,
                                                                 int K, int n_nodes) {
    detail::require(s > 0.0, "scale must be positive");
    const TargetConfig scaled = apply_motion(cfg, RigidMotion{{0.0, 0.0}, s, 0.0});
    return {scattering_matrix(scaled, omega, K, n_nodes), scattering_matrix(cfg, s * omega, K, n_nodes)};
}

/// Entry l: max |W[n, m]| over max(|n|, |m|) = l.
inline std::vector<std::pair<int, double>> decay_profile(const ScatteringMatrix& w) {
    std::vector<std::pair<int, double>> out;
    for (int l = 0; l <= w.K; ++l) {
        double mx = 0.0;
        for (int n = -l; n <= l; ++n)
            for (int m = -l; m <= l; ++m)
                if (std::max(std::abs(n), std::abs(m)) == l) mx = std::max(mx, std::abs(w(n, m)));
        out.emplace_back(l, mx);
    }
    return out;
}

/// ||a - b||_F / ||b||_F.
inline double rel_error(const ScatteringMatrix& a, const ScatteringMatrix& b) {
    detail::require(a.K == b.K, "rel_error: orders differ");
    const double nb = b.w.norm();
    if (nb == 0.0) throw std::domain_error("rel_error: reference matrix is zero");
    return (a.w - b.w).norm() / nb;
}

}  // namespace scatterid
