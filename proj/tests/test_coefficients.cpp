#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "scatterid/coefficients.hpp"

using namespace scatterid;

namespace {

const double kPi = std::numbers::pi;
const double kOmega = 0.75 * kPi;

const TargetConfig& target(const std::string& id) {
    static const auto cat = catalog();
    return find_target(cat, id);
}

double offdiag_max(const ScatteringMatrix& w) {
    double mx = 0.0;
    for (int n = -w.K; n <= w.K; ++n)
        for (int m = -w.K; m <= w.K; ++m)
            if (n != m) mx = std::max(mx, std::abs(w(n, m)));
    return mx;
}

}  // namespace

TEST(ScatteringMatrix, VacuumIsZero) {
    TargetConfig t = target("disk_circle");
    t.shell = {1.0, 1.0};
    t.inclusions[0].material = {1.0, 1.0};
    const auto w = scattering_matrix(t, kOmega, 8, 256);
    EXPECT_LT(w.w.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ScatteringMatrix, ConcentricDisksMatchSeparationOfVariables) {
    const auto w = scattering_matrix(target("disk_circle"), kOmega, 12, 256);
    EXPECT_LT(offdiag_max(w), 1e-8);
    for (int m = -12; m <= 12; ++m) {
        const cplx ref = oracle::sov_disk(m, kOmega, {{0.5, 3.0, 3.0}, {0.2, 6.0, 6.0}});
        EXPECT_LT(std::abs(w(m, m) - ref), 1e-7 * std::max(std::abs(ref), 1e-12)) << m;
    }
}

TEST(ScatteringMatrix, HomogeneousDiskMatchesSeparationOfVariables) {
    for (double omega : {0.5 * kPi, kPi}) {
        const auto w = scattering_matrix(target("disk"), omega, 12, 256);
        EXPECT_LT(offdiag_max(w), 1e-8);
        for (int m = -12; m <= 12; ++m) {
            const cplx ref = oracle::sov_disk(m, omega, {{0.5, 3.0, 3.0}});
            EXPECT_LT(std::abs(w(m, m) - ref), 1e-7 * std::max(std::abs(ref), 1e-12)) << m;
        }
    }
}

TEST(ScatteringMatrix, GridSelfConvergence) {
    for (const auto& t : catalog()) {
        const auto a = scattering_matrix(t, kOmega, 10, 256);
        const auto b = scattering_matrix(t, kOmega, 10, 512);
        EXPECT_LT(rel_error(a, b), 1e-6) << t.id;
    }
}

TEST(ScatteringMatrix, MirrorSymmetry) {
    // reflection about the x-axis gives W[-n,-m] = (-1)^{n+m} W[n,m]
    for (const char* id : {"ellipse", "rectangle", "disk_rectangle", "disk_circle_ellipse"}) {
        const auto w = scattering_matrix(target(id), kOmega, 10, 256);
        const double scale = w.w.norm();
        for (int n = -10; n <= 10; ++n)
            for (int m = -10; m <= 10; ++m) {
                const double sign = ((n + m) % 2) ? -1.0 : 1.0;
                EXPECT_LT(std::abs(w(-n, -m) - sign * w(n, m)), 1e-7 * scale) << id << " " << n << "," << m;
            }
    }
}

TEST(ScatteringMatrix, TruncationAndIndexing) {
    const auto w = scattering_matrix(target("square"), kOmega, 8, 128);
    const auto t = w.truncated(3);
    EXPECT_EQ(t.K, 3);
    EXPECT_EQ(t(-3, 2), w(-3, 2));
    EXPECT_EQ(w(-8, 8), w.w(0, 16));
    EXPECT_THROW(w.truncated(9), std::invalid_argument);
}

TEST(Rotate, DiagonalUnchangedAndFullTurn) {
    const auto w = scattering_matrix(target("letter_a"), kOmega, 8, 256);
    const auto r = rotate_w(w, 0.83);
    for (int n = -8; n <= 8; ++n) EXPECT_EQ(r(n, n), w(n, n));
    EXPECT_LT(rel_error(rotate_w(w, 2 * kPi), w), 1e-13);
    EXPECT_EQ(r.provenance, "transformed");
}

TEST(Rotate, MatchesRotatedGeometry) {
    for (const auto& t : catalog()) {
        const auto w = scattering_matrix(t, kOmega, 10, 256);
        for (double theta : {kPi / 6, kPi / 3, 1.0}) {
            const auto direct = scattering_matrix(apply_motion(t, RigidMotion{{0, 0}, 1.0, theta}), kOmega, 10, 256);
            EXPECT_LT(rel_error(rotate_w(w, theta), direct), 1e-6) << t.id << " theta=" << theta;
        }
    }
}

TEST(Translate, ZeroShiftIsIdentity) {
    const auto w = scattering_matrix(target("disk_triangle"), kOmega, 14, 256);
    const auto t = translate_w(w, Point(0, 0), 10);
    EXPECT_LT(rel_error(t, w.truncated(10)), 1e-15);
}

TEST(Translate, MarginEnforced) {
    const auto w = ScatteringMatrix::zero(10, kOmega);
    EXPECT_THROW(translate_w(w, Point(0.1, 0), 7), std::invalid_argument);
    EXPECT_NO_THROW(translate_w(w, Point(0.1, 0), 6));
}

TEST(Translate, RoundTrip) {
    const Point z(-0.5, 0.5);
    const auto w = scattering_matrix(target("disk_square"), kOmega, 30, 256);
    const auto there = translate_w(w, z, 20);
    const auto back = translate_w(there, -z, 10);
    EXPECT_LT(rel_error(back, w.truncated(10)), 1e-8);
}

TEST(Translate, MatchesTranslatedGeometry) {
    const Point z(-0.5, 0.5);
    const int K_out = 10;
    const int K_in = K_out + std::max(8, static_cast<int>(std::ceil(std::exp(1.0) * kOmega * z.norm() / 2)));
    for (const char* id : {"disk_circle", "triangle", "disk_two_ellipses"}) {
        const auto w = scattering_matrix(target(id), kOmega, K_in, 256);
        const auto direct = scattering_matrix(apply_motion(target(id), RigidMotion{z, 1.0, 0.0}), kOmega, K_out, 256);
        EXPECT_LT(rel_error(translate_w(w, z, K_out), direct), 1e-6) << id;
    }
}

TEST(Scale, IdentityAtOne) {
    const auto [a, b] = scale_check(target("ellipse"), 1.0, kOmega, 6, 128);
    EXPECT_EQ(rel_error(a, b), 0.0);
}

TEST(Scale, ScalingIdentity) {
    for (const auto& [id, s] : std::vector<std::pair<std::string, double>>{
             {"disk_circle", 1.2}, {"ellipse", 0.5}, {"disk_ellipse", 0.8}, {"letter_a", 1.2}}) {
        const auto [a, b] = scale_check(target(id), s, kOmega, 10, 256);
        EXPECT_LT(rel_error(a, b), 1e-6) << id << " s=" << s;
    }
}

TEST(Decay, ZeroMatrixProfile) {
    for (const auto& [l, v] : decay_profile(ScatteringMatrix::zero(5, 1.0))) EXPECT_EQ(v, 0.0) << l;
}

TEST(Decay, ConcentricDisksStrictlyDecreasing) {
    const auto p = decay_profile(scattering_matrix(target("disk_circle"), kOmega, 20, 256));
    for (std::size_t l = 4; l < p.size(); ++l) {
        if (p[l - 1].second < 1e-13) break;  // solver floor
        EXPECT_LT(p[l].second, p[l - 1].second) << l;
    }
}

TEST(Decay, FactorialBoundShape) {
    // |W[n,m]| <= c^{|n|+|m|} / (|n|^|n| |m|^|m|); over the shell max(|n|,|m|) = l
    // this is (c / l)^l up to a constant. Fit c on l = 5..7, then require the
    // bound on the rest of the resolved range.
    for (const char* id : {"disk_circle", "square", "disk_two_circles"}) {
        const auto p = decay_profile(scattering_matrix(target(id), kOmega, 20, 256));
        double c = 0.0;
        for (int l = 5; l <= 7; ++l) c = std::max(c, l * std::pow(p[static_cast<std::size_t>(l)].second, 1.0 / l));
        EXPECT_GT(c, 0.0);
        EXPECT_LT(c, 20.0) << id;
        for (int l = 8; l <= 20; ++l) {
            const double v = p[static_cast<std::size_t>(l)].second;
            if (v < 1e-13) break;
            EXPECT_LE(v, 10.0 * std::pow(c / l, l)) << id << " l=" << l;
        }
    }
}

TEST(RelError, ZeroReferenceRejected) {
    const auto z = ScatteringMatrix::zero(2, 1.0);
    EXPECT_THROW(rel_error(z, z), std::domain_error);
}
