#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "scatterid/farfield.hpp"

using namespace scatterid;

namespace {

const double kPi = std::numbers::pi;
const double kOmega = 0.75 * kPi;

const TargetConfig& target(const std::string& id) {
    static const auto cat = catalog();
    return find_target(cat, id);
}

ScatteringMatrix random_w(int K, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto w = ScatteringMatrix::zero(K, 1.0);
    for (int n = -K; n <= K; ++n)
        for (int m = -K; m <= K; ++m) w(n, m) = {g(rng), g(rng)};
    return w;
}

double sup_rel(const DescriptorGrid& a, const DescriptorGrid& b) {
    double d = 0.0, r = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        d = std::max(d, std::abs(a.values[k] - b.values[k]));
        r = std::max(r, b.values[k]);
    }
    return d / r;
}

}  // namespace

TEST(FarField, ZeroAndUnitCoefficient) {
    const auto z = far_field(ScatteringMatrix::zero(3, 1.0), 16);
    for (const auto& v : z.values) EXPECT_EQ(v, cplx(0.0));
    auto w = ScatteringMatrix::zero(3, 1.0);
    w(0, 0) = 1.0;
    for (const auto& v : far_field(w, 16).values) EXPECT_LT(std::abs(v - 1.0), 1e-15);
}

TEST(FarField, MatchesDirectSummation) {
    const auto w = scattering_matrix(target("disk_circle"), kOmega, 8, 256);
    const int N = 24;
    const auto a = far_field(w, N);
    const auto ref = oracle::far_field_naive(w, N);
    double scale = 0.0;
    for (const auto& v : ref) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_LT(std::abs(a.values[k] - ref[k]), 1e-10 * scale);
}

TEST(FarField, MatchesDirectSummationGeneric) {
    const auto w = random_w(5, 17);
    const auto a = far_field(w, 12);
    const auto ref = oracle::far_field_naive(w, 12);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_LT(std::abs(a.values[k] - ref[k]), 1e-12);
}

TEST(FarField, AliasingRejected) {
    EXPECT_THROW(far_field(ScatteringMatrix::zero(10, 1.0), 21), std::invalid_argument);
    EXPECT_NO_THROW(far_field(ScatteringMatrix::zero(10, 1.0), 22));
}

TEST(Descriptor, OriginIsSquaredMass) {
    const auto a = far_field(random_w(6, 3), 32);
    const auto s = descriptor(a);
    double mass = 0.0;
    for (const auto& v : a.values) mass += std::norm(v);
    const double h = kTwoPi / 32;
    EXPECT_NEAR(s(0, 0), h * h * mass, 1e-12 * h * h * mass);
}

TEST(Descriptor, ConstantModulus) {
    FarFieldGrid a;
    a.n_v = 16;
    a.omega = 1.0;
    for (int k = 0; k < 256; ++k) a.values.push_back(std::polar(1.0, 0.37 * k));
    for (double v : descriptor(a).values) EXPECT_NEAR(v, 4 * kPi * kPi, 1e-12);
}

TEST(Descriptor, MatchesNaiveAutocorrelation) {
    const auto a = far_field(scattering_matrix(target("letter_a"), kOmega, 10, 256), 32);
    const auto s = descriptor(a);
    const auto ref = oracle::autocorrelation_naive(a.values, 32);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_LT(std::abs(s.values[k] - ref[k]), 1e-12 * ref[0]);
}

TEST(Descriptor, NonnegativeAndCentrallySymmetric) {
    const int N = 64;
    const auto s = descriptor(scattering_matrix(target("disk_triangle"), kOmega, 12, 256), N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            EXPECT_GE(s(i, j), 0.0);
            EXPECT_LT(std::abs(s(i, j) - s((N - i) % N, (N - j) % N)), 1e-10 * s(0, 0));
        }
}

TEST(Descriptor, RotationInvariance) {
    const auto w = scattering_matrix(target("letter_a"), kOmega, 12, 256);
    EXPECT_LT(sup_rel(descriptor(rotate_w(w, kPi / 3), 64), descriptor(w, 64)), 1e-8);
}

TEST(Descriptor, TranslationInvariance) {
    const auto w = scattering_matrix(target("disk_rectangle"), kOmega, 28, 256);
    const auto t = translate_w(w, Point(-0.5, 0.5), 20);
    EXPECT_LT(sup_rel(descriptor(t, 64), descriptor(w.truncated(20), 64)), 1e-5);
}

TEST(InvarianceGap, Identity) {
    EXPECT_LT(invariance_gap(target("square"), RigidMotion{}, kOmega, 12, 64), 1e-10);
}

TEST(InvarianceGap, PureRotation) {
    EXPECT_LT(invariance_gap(target("disk_triangle"), RigidMotion{{0, 0}, 1.0, kPi / 3}, kOmega, 12, 64), 1e-6);
}

TEST(InvarianceGap, ExperimentMotion) {
    // |A| has kinks at far-field zeros, so an off-grid rotation costs O(h^2)
    // in the torus sum; N_v = 64 sits at ~4e-5 for the two-ellipse target
    const RigidMotion m{{-0.5, 0.5}, 1.2, kPi / 3};
    for (const char* id : {"disk_circle", "letter_a", "disk_two_ellipses"})
        EXPECT_LT(invariance_gap(target(id), m, kOmega, 20, 128), 1e-4) << id;
}
