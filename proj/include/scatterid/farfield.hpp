#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

#include "scatterid/coefficients.hpp"

namespace scatterid {

/// A[theta_xi_i, theta_x_j] on the uniform N x N torus grid, row-major
/// (row i = incidence angle 2 pi i / N, column j = observation angle).
struct FarFieldGrid {
    int n_v = 0;
    double omega = 0.0;
    std::vector<cplx> values;

    cplx operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * n_v + static_cast<std::size_t>(j)]; }
};

/// S[v1, v2] on the N x N grid of shifts (row-major); quadrature weight
/// (2 pi / N)^2 included.
struct DescriptorGrid {
    int n_v = 0;
    double omega = 0.0;
    std::string target_id;
    std::vector<double> values;

    double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * n_v + static_cast<std::size_t>(j)]; }
    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
};

namespace detail {

/// FFTW's planner is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> fftw_array(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) throw std::bad_alloc();
    return std::unique_ptr<T[], FftwFree>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : p_(p) {
        if (!p_) throw std::runtime_error("FFTW planning failed");
    }
    ~Plan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() const { fftw_execute(p_); }

private:
    fftw_plan p_;
};

}  // namespace detail

/// A(theta_xi, theta_x) = sum_{n,m} e^{i m (pi/2 - theta_xi)} e^{i n (theta_x - pi/2)} W[n, m],
/// evaluated with one 2D inverse transform.
inline FarFieldGrid far_field(const ScatteringMatrix& w, int n_v) {
    if (n_v < 2 * w.K + 2)
        throw std::invalid_argument("far_field: n_v = " + std::to_string(n_v) + " aliases order K = " +
                                    std::to_string(w.K));
    const auto N = static_cast<std::size_t>(n_v);
    auto buf = detail::fftw_array<fftw_complex>(N * N);
    std::fill_n(&buf[0][0], 2 * N * N, 0.0);
    // i^m (-i)^n = i^(m - n)
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int n = -w.K; n <= w.K; ++n)
        for (int m = -w.K; m <= w.K; ++m) {
            const cplx v = w(n, m) * ipow[((m - n) % 4 + 4) % 4];
            const std::size_t p = static_cast<std::size_t>((-m % n_v + n_v) % n_v);
            const std::size_t q = static_cast<std::size_t>((n % n_v + n_v) % n_v);
            buf[p * N + q][0] = v.real();
            buf[p * N + q][1] = v.imag();
        }
    std::unique_ptr<detail::Plan> plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan = std::make_unique<detail::Plan>(
            fftw_plan_dft_2d(n_v, n_v, buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    }
    plan->run();
    FarFieldGrid a;
    a.n_v = n_v;
    a.omega = w.omega;
    a.values.resize(N * N);
    for (std::size_t k = 0; k < N * N; ++k) a.values[k] = {buf[k][0], buf[k][1]};
    return a;
}

/// S[v] = (2 pi / N)^2 sum_eta |A(eta)| |A(eta - v)|, the periodic
/// autocorrelation of |A|, via real transforms.
inline DescriptorGrid descriptor(const FarFieldGrid& a) {
    const int n_v = a.n_v;
    const auto N = static_cast<std::size_t>(n_v);
    const std::size_t nh = N / 2 + 1;
    auto re = detail::fftw_array<double>(N * N);
    auto sp = detail::fftw_array<fftw_complex>(N * nh);
    std::unique_ptr<detail::Plan> fwd, bwd;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd = std::make_unique<detail::Plan>(fftw_plan_dft_r2c_2d(n_v, n_v, re.get(), sp.get(), FFTW_ESTIMATE));
        bwd = std::make_unique<detail::Plan>(fftw_plan_dft_c2r_2d(n_v, n_v, sp.get(), re.get(), FFTW_ESTIMATE));
    }
    for (std::size_t k = 0; k < N * N; ++k) re[k] = std::abs(a.values[k]);
    fwd->run();
    for (std::size_t k = 0; k < N * nh; ++k) {
        sp[k][0] = sp[k][0] * sp[k][0] + sp[k][1] * sp[k][1];
        sp[k][1] = 0.0;
    }
    bwd->run();
    const double h = kTwoPi / n_v;
    const double scale = h * h / (static_cast<double>(N) * static_cast<double>(N));
    DescriptorGrid s;
    s.n_v = n_v;
    s.omega = a.omega;
    s.values.resize(N * N);
    for (std::size_t k = 0; k < N * N; ++k) s.values[k] = std::max(0.0, re[k] * scale);
    return s;
}

inline DescriptorGrid descriptor(const ScatteringMatrix& w, int n_v) {
    DescriptorGrid s = descriptor(far_field(w, n_v));
    s.target_id = w.target_id;
    return s;
}

/// max_v |S_moved(v; omega) - S_base(v; s omega)| / max_v S_base.
inline double invariance_gap(const TargetConfig& cfg, const RigidMotion& motion, double omega, int K, int n_v,
                             int n_nodes = 256) {
    const auto moved = scattering_matrix(apply_motion(cfg, motion), omega, K, n_nodes);
    const auto base = scattering_matrix(cfg, motion.s * omega, K, n_nodes);
    const auto a = descriptor(moved, n_v);
    const auto b = descriptor(base, n_v);
    double diff = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        diff = std::max(diff, std::abs(a.values[k] - b.values[k]));
        ref = std::max(ref, b.values[k]);
    }
    return ref > 0.0 ? diff / ref : diff;
}

}  // namespace scatterid
