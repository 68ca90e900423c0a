#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "scatterid/coefficients.hpp"

namespace scatterid {

inline constexpr double kPinvCutoff = 1e-12;

/// Receivers z0 + R (cos theta_r, sin theta_r), theta_r = 2 pi r / Nr, and
/// plane-wave directions theta_s = 2 pi s / Ns.
struct AcquisitionGeometry {
    double R = 3.0;
    int Ns = 91;
    int Nr = 91;
    Point z0{0.0, 0.0};

    double receiver_angle(int r) const { return kTwoPi * r / Nr; }
    double source_angle(int s) const { return kTwoPi * s / Ns; }
    std::vector<Point> receivers() const {
        std::vector<Point> out;
        for (int r = 0; r < Nr; ++r) {
            const double t = receiver_angle(r);
            out.push_back(z0 + R * Point(std::cos(t), std::sin(t)));
        }
        return out;
    }
    void validate() const {
        detail::require(R > 0.0 && Ns > 0 && Nr > 0, "acquisition geometry must have R > 0 and positive counts");
    }
};

struct MSRMatrix {
    MatrixXc entries;  // Nr x Ns
    AcquisitionGeometry geom;
    double omega = 0.0;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

/// Jacobi-Anger truncation order for plane waves over a target of
/// circumradius rho.
inline int source_order(double omega, double rho) {
    return static_cast<int>(std::ceil(omega * rho)) + 20;
}

/// R[s, m] = e^{i m (pi/2 - theta_s)}, m = -K..K at column m + K.
inline MatrixXc plane_wave_weights(const AcquisitionGeometry& g, int K) {
    MatrixXc Rm(g.Ns, 2 * K + 1);
    for (int s = 0; s < g.Ns; ++s)
        for (int m = -K; m <= K; ++m)
            Rm(s, m + K) = std::polar(1.0, m * (std::numbers::pi / 2 - g.source_angle(s)));
    return Rm;
}

inline void check_receivers(const TargetConfig& cfg, const AcquisitionGeometry& g) {
    const auto outline = cfg.exterior.sample(1024);
    for (const auto& x : g.receivers())
        detail::require(winding_number(outline, x) == 0, "a receiver lies inside the target");
    detail::require(cfg.exterior.circumradius(g.z0) < g.R, "receiver circle does not enclose the target");
}

/// MSR from an already solved system: G Phi R^T.
inline MSRMatrix msr_from_densities(const BlockSystem& sys, const DensitySet& d, const AcquisitionGeometry& g) {
    MSRMatrix out;
    out.geom = g;
    out.omega = sys.omega;
    const MatrixXc G = exterior_potential_matrix(sys, g.receivers());
    out.entries = G * d.phi_all() * plane_wave_weights(g, d.K).transpose();
    return out;
}

/// Simulated multistatic response (u_s - U_s)(x_r). K_src < 0 selects the
/// automatic Jacobi-Anger order.
inline MSRMatrix msr_simulate(const TargetConfig& cfg, const AcquisitionGeometry& g, double omega, int K_src,
                              int n_nodes) {
    g.validate();
    check_receivers(cfg, g);
    if (K_src < 0) K_src = std::min(kMaxOrder, source_order(omega, cfg.exterior.circumradius()));
    const BlockSystem sys = assemble(cfg, omega, n_nodes);
    return msr_from_densities(sys, solve_densities(sys, K_src), g);
}

/// splitmix64 finalizer; independent per-trial streams from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// entry += sigma0 * tau * (g1 + i g2) / sqrt(2), tau = mean |clean entry|.
inline MSRMatrix add_noise(const MSRMatrix& msr, double sigma0, std::uint64_t seed) {
    detail::require(sigma0 >= 0.0, "noise level must be nonnegative");
    MSRMatrix out = msr;
    out.noise_level = sigma0;
    out.seed = seed;
    if (sigma0 == 0.0) return out;
    const double tau = msr.entries.cwiseAbs().mean();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double amp = sigma0 * tau / std::sqrt(2.0);
    for (Eigen::Index c = 0; c < out.entries.cols(); ++c)
        for (Eigen::Index r = 0; r < out.entries.rows(); ++r) {
            const double g1 = gauss(rng);
            const double g2 = gauss(rng);
            out.entries(r, c) += amp * cplx(g1, g2);
        }
    return out;
}

/// Truncated-SVD pseudoinverse after column equilibration.
inline MatrixXc pinv(const MatrixXc& A, double cutoff = kPinvCutoff) {
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < scale.size(); ++c)
        if (scale(c) == 0.0) scale(c) = 1.0;
    const MatrixXc B = A * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<MatrixXc> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cutoff * s(0)) inv(k) = 1.0 / s(k);
    return scale.cwiseInverse().asDiagonal() * (svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint());
}

/// Least-squares estimator of W from MSR ~ L W R^T, with
/// L[r, n] = -(i/4) H_n(omega |x_r - z0|) e^{i n theta_r}. The pseudoinverses
/// depend only on geometry, omega and K and are reused across trials.
class Reconstructor {
public:
    Reconstructor(const AcquisitionGeometry& g, double omega, int K) : geom_(g), omega_(omega), K_(K) {
        g.validate();
        if (2 * K + 1 > std::min(g.Nr, g.Ns))
            throw std::invalid_argument("reconstruction order K = " + std::to_string(K) + " exceeds (min(Nr, Ns) - 1)/2");
        MatrixXc L(g.Nr, 2 * K + 1);
        const auto H = specfun::hankel1_table(K, omega * g.R);
        for (int r = 0; r < g.Nr; ++r)
            for (int n = -K; n <= K; ++n) {
                const cplx h = n < 0 ? specfun::detail::reflect_sign(-n) * H[static_cast<std::size_t>(-n)]
                                     : H[static_cast<std::size_t>(n)];
                L(r, n + K) = cplx(0.0, -0.25) * h * std::polar(1.0, n * g.receiver_angle(r));
            }
        if (!L.allFinite()) throw NumericError("Hankel overflow in the reconstruction operator");
        left_ = pinv(L);
        right_ = pinv(plane_wave_weights(g, K)).transpose();
    }

    ScatteringMatrix operator()(const MSRMatrix& msr) const {
        detail::require(msr.entries.rows() == geom_.Nr && msr.entries.cols() == geom_.Ns,
                        "MSR shape does not match the acquisition geometry");
        ScatteringMatrix w;
        w.K = K_;
        w.omega = omega_;
        w.provenance = "reconstructed";
        w.w = left_ * msr.entries * right_;
        return w;
    }

    int order() const { return K_; }

private:
    AcquisitionGeometry geom_;
    double omega_;
    int K_;
    MatrixXc left_;
    MatrixXc right_;
};

inline ScatteringMatrix reconstruct_w(const MSRMatrix& msr, int K) {
    return Reconstructor(msr.geom, msr.omega, K)(msr);
}

}  // namespace scatterid
