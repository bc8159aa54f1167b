#include "doctest.h"

#include <cmath>

#include "vpflow/rng.hpp"
#include "vpflow/tensor.hpp"

using namespace vpflow;

namespace {

double entry_max_diff(const Mat3& a, const Mat3& b) {
    double m = 0.0;
    for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

}  // namespace

TEST_CASE("dev_sym_project basics") {
    CHECK(dev_sym_project(Mat3::identity()).norm() == doctest::Approx(0.0).epsilon(1e-15));

    Mat3 anti{};
    anti(0, 1) = 3.0;
    anti(1, 0) = -3.0;
    anti(1, 2) = -0.5;
    anti(2, 1) = 0.5;
    CHECK(dev_sym_project(anti).norm() == doctest::Approx(0.0).epsilon(1e-15));

    const Mat3 m = dev_sym_project(Mat3::diag(2, 0, 0)).to_mat3();
    CHECK(m(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(m(1, 1) == doctest::Approx(-2.0 / 3.0));
    CHECK(m(2, 2) == doctest::Approx(-2.0 / 3.0));
    CHECK(m(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("dev_sym_project idempotent and contractive") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const Mat3 m = rng.mat3(3.0);
        const DevTensor d = dev_sym_project(m);
        const DevTensor dd = dev_sym_project(d.to_mat3());
        CHECK((dd - d).norm() <= 1e-13 * (1.0 + d.norm()));
        CHECK(d.norm() <= frobenius_norm(m) * (1.0 + 1e-14));
    }
}

TEST_CASE("strain rate and spin decompose the gradient") {
    Mat3 g{};
    g(0, 1) = 1.0;
    const Mat3 d = strain_rate(g);
    const Mat3 w = spin(g);
    CHECK(d(0, 1) == doctest::Approx(0.5));
    CHECK(d(1, 0) == doctest::Approx(0.5));
    CHECK(w(0, 1) == doctest::Approx(0.5));
    CHECK(w(1, 0) == doctest::Approx(-0.5));

    Rng rng(11);
    const Mat3 anti = rng.antisymmetric(2.0);
    CHECK(frobenius_norm(strain_rate(anti)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(entry_max_diff(spin(anti), anti) == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(entry_max_diff(strain_rate(Mat3::identity()), Mat3::identity()) == doctest::Approx(0.0));
    CHECK(frobenius_norm(spin(Mat3::identity())) == doctest::Approx(0.0));

    for (int trial = 0; trial < 100; ++trial) {
        const Mat3 grad = rng.mat3(2.0);
        CHECK(entry_max_diff(strain_rate(grad) + spin(grad), grad) <= 1e-14 * (1.0 + frobenius_norm(grad)));
    }
}

TEST_CASE("jaumann commutator") {
    const DevTensor s = DevTensor::diag(1, -1, 0);

    CHECK(jaumann_commutator(s, Mat3::zero()).norm() == doctest::Approx(0.0));

    const double omega = 0.75;
    Mat3 w{};
    w(0, 1) = omega;
    w(1, 0) = -omega;
    const Mat3 r = jaumann_commutator(s, w).to_mat3();
    CHECK(r(0, 1) == doctest::Approx(2.0 * omega));
    CHECK(r(1, 0) == doctest::Approx(2.0 * omega));
    CHECK(r(0, 0) == doctest::Approx(0.0));
    CHECK(r(1, 1) == doctest::Approx(0.0));
    CHECK(r(2, 2) == doctest::Approx(0.0));

    Mat3 notanti{};
    notanti(0, 1) = 1.0;
    CHECK_THROWS_AS(jaumann_commutator(s, notanti), std::invalid_argument);
}

TEST_CASE("jaumann commutator is exactly representable and energy neutral") {
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const DevTensor s = rng.dev_tensor(4.0);
        const Mat3 w = rng.antisymmetric(4.0);
        const Mat3 sm = s.to_mat3();
        const Mat3 raw = sm * w - w * sm;
        // symmetry defect and trace of the raw product stay at rounding level
        CHECK(std::abs(raw.trace()) <= 1e-13 * (1.0 + frobenius_norm(raw)));
        CHECK(entry_max_diff(raw, raw.transposed()) <= 1e-13 * (1.0 + frobenius_norm(raw)));
        const DevTensor c = jaumann_commutator(s, w);
        CHECK(entry_max_diff(c.to_mat3(), raw) <= 1e-13 * (1.0 + frobenius_norm(raw)));
        // pointwise root of the corotational energy identity
        CHECK(std::abs(frobenius(c, s)) <= 1e-12 * s.norm2() * (1.0 + frobenius_norm(w)));
    }
}

TEST_CASE("cofactor and determinant") {
    const DevTensor s1 = DevTensor::diag(1, -1, 0);
    const Mat3 c1 = cofactor(s1);
    CHECK(entry_max_diff(c1, Mat3::diag(0, 0, -1)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(det3(s1) == doctest::Approx(0.0));
    CHECK(c1.trace() == doctest::Approx(-0.5 * s1.norm2()));

    const DevTensor s2 = DevTensor::diag(2, -1, -1);
    CHECK(entry_max_diff(cofactor(s2), Mat3::diag(1, -2, -2)) <= 1e-14);
    CHECK(det3(s2) == doctest::Approx(2.0));
    CHECK(cofactor(s2).trace() == doctest::Approx(-3.0));

    CHECK(frobenius_norm(cofactor(DevTensor::zero())) == doctest::Approx(0.0));
    CHECK(det3(DevTensor::zero()) == doctest::Approx(0.0));

    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const DevTensor s = rng.dev_tensor(3.0);
        CHECK(std::abs(cofactor(s).trace() + 0.5 * s.norm2()) <= 1e-12 * (1.0 + s.norm2()));
    }
}

TEST_CASE("frobenius products") {
    CHECK(frobenius(Mat3::identity(), Mat3::identity()) == doctest::Approx(3.0));
    const DevTensor d = DevTensor::diag(1, -1, 0);
    CHECK(frobenius(d, d) == doctest::Approx(2.0));

    Rng rng(47);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat3 sym = strain_rate(rng.mat3(2.0));
        const Mat3 anti = rng.antisymmetric(2.0);
        CHECK(std::abs(frobenius(sym, anti)) <= 1e-13 * (1.0 + frobenius_norm(sym) * frobenius_norm(anti)));
        // DevTensor inner product agrees with the full-matrix contraction
        const DevTensor a = rng.dev_tensor(2.0);
        const DevTensor b = rng.dev_tensor(2.0);
        CHECK(frobenius(a, b) == doctest::Approx(frobenius(a.to_mat3(), b.to_mat3())).epsilon(1e-12));
    }
}
