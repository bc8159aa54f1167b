#include "doctest.h"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "vpflow/potential.hpp"
#include "vpflow/rng.hpp"

using namespace vpflow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent 1-D oracle for radial proximal maps: scan the radial objective
// on a coarse grid, then refine the winning bracket down to 1e-6 resolution.
double radial_prox_scan(const std::function<double(double)>& p, double m, double lambda, double rmax) {
    auto obj = [&](double r) { return (r - m) * (r - m) / (2.0 * lambda) + p(r); };
    double best_r = 0.0;
    double best = obj(0.0);
    const double coarse = 1e-3;
    for (double r = coarse; r <= rmax + 0.5 * coarse; r += coarse) {
        const double v = obj(r);
        if (v < best) {
            best = v;
            best_r = r;
        }
    }
    const double lo = std::max(0.0, best_r - 2.0 * coarse);
    const double hi = std::min(rmax, best_r + 2.0 * coarse);
    for (double r = lo; r <= hi + 0.5e-6; r += 1e-6) {
        const double v = obj(r);
        if (v < best) {
            best = v;
            best_r = r;
        }
    }
    return best_r;
}

DevTensor fd_gradient(const PotentialSpec& pot, const DevTensor& s, double h) {
    DevTensor g;
    for (int i = 0; i < 5; ++i) {
        DevTensor p = s, m = s;
        p[i] += h;
        m[i] -= h;
        g[i] = (pot.value(p) - pot.value(m)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("potential values") {
    const auto quad = PotentialSpec::quadratic(1.0);
    CHECK(quad.value(DevTensor::diag(1, -1, 0)) == doctest::Approx(1.0));
    CHECK(quad.value(DevTensor::zero()) == doctest::Approx(0.0));

    const auto ball = PotentialSpec::yield_ball(1.0, 1.0);
    DevTensor big = DevTensor::diag(2, -2, 0);
    big *= 2.0 / big.norm();
    CHECK(ball.value(big) == kInf);
    CHECK(ball.value(0.5 * (1.0 / DevTensor::diag(1, -1, 0).norm()) * DevTensor::diag(1, -1, 0)) ==
          doctest::Approx(0.125));

    const auto pd = PotentialSpec::poly_det(0, 0, 3, 1);
    CHECK(pd.value(DevTensor::diag(2, -1, -1)) == doctest::Approx(110.0));
    CHECK(pd.value(DevTensor::zero()) == doctest::Approx(0.0));

    CHECK_THROWS_AS(PotentialSpec::poly_det(1, 0, 1, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(PotentialSpec::quadratic(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(PotentialSpec::yield_ball(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("smooth subgradients") {
    const auto linear_case = PotentialSpec::poly_det(1, 0, 0, 0);
    Rng rng(3);
    const DevTensor s = rng.dev_tensor(2.0);
    CHECK((linear_case.smooth_subgradient(s) - s).norm() <= 1e-14 * s.norm());

    const auto pd = PotentialSpec::poly_det(0, 0, 3, 1);
    const DevTensor d = DevTensor::diag(2, -1, -1);
    const DevTensor g = pd.smooth_subgradient(d);
    CHECK((g - 110.0 * d).norm() <= 1e-10 * g.norm());

    const auto rad = PotentialSpec::radial(RadialProfile::quadratic(1.0));
    const DevTensor x = rng.dev_tensor(1.5);
    CHECK((rad.smooth_subgradient(x) - x).norm() <= 1e-13 * (1.0 + x.norm()));

    const auto ball = PotentialSpec::yield_ball(1.0, 1.0);
    DevTensor unit = rng.dev_tensor(1.0);
    unit *= 1.0 / unit.norm();
    CHECK_THROWS_AS(ball.smooth_subgradient(unit), NonsmoothPoint);
    CHECK_THROWS_AS(ball.smooth_subgradient(2.0 * unit), NonsmoothPoint);
    CHECK((ball.smooth_subgradient(0.5 * unit) - 0.5 * unit).norm() <= 1e-14);
}

TEST_CASE("poly-det gradient matches central finite differences") {
    Rng rng(5);
    const auto pd = PotentialSpec::poly_det(0.7, 0.3, 3.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const DevTensor s = rng.dev_tensor(1.5);
        const DevTensor g = pd.smooth_subgradient(s);
        const DevTensor fd = fd_gradient(pd, s, 1e-5);
        CHECK((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
    }
}

TEST_CASE("prox closed forms") {
    const auto quad = PotentialSpec::quadratic(1.0);
    const DevTensor x = DevTensor::diag(2, -2, 0);
    CHECK((quad.prox(x, 1.0) - DevTensor::diag(1, -1, 0)).norm() <= 1e-14);

    const auto ball = PotentialSpec::yield_ball(1.0, 1.0);
    Rng rng(17);
    DevTensor e = rng.dev_tensor(1.0);
    e *= 1.0 / e.norm();
    const DevTensor x4 = 4.0 * e;
    CHECK((ball.prox(x4, 1.0) - e).norm() <= 1e-12);
    const double scan = radial_prox_scan([&](double r) { return r <= 1.0 ? 0.5 * r * r : kInf; }, 4.0, 1.0, 1.0);
    CHECK(ball.prox(x4, 1.0).norm() == doctest::Approx(scan).epsilon(1e-5));

    // lambda -> 0 recovers the identity on the domain
    for (const auto* pot : {&quad, &ball}) {
        const DevTensor y = 0.7 * e;
        const DevTensor p = pot->prox(y, 1e-8);
        CHECK((p - y).norm() <= 1e-6 * (1.0 + pot->smooth_subgradient(y).norm()));
    }
}

TEST_CASE("radial prox agrees with dense scan") {
    // piecewise profile with a kink and a cap
    const RadialProfile prof({0.0, 0.8}, {1.0, 3.0}, 0.2, {0.5}, 2.5);
    const auto pot = PotentialSpec::radial(prof);
    auto p1d = [&](double r) { return prof.value(r); };
    Rng rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const double m = rng.uniform(0.0, 4.0);
        const double lam = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
        const double mine = prof.prox(m, lam);
        const double scan = radial_prox_scan(p1d, m, lam, 2.5);
        CHECK(std::abs(mine - scan) <= 2e-6);
        // tensor version preserves direction
        DevTensor dir = rng.dev_tensor(1.0);
        dir *= 1.0 / dir.norm();
        const DevTensor px = pot.prox(m * dir, lam);
        CHECK((px - mine * dir).norm() <= 2e-6 * (1.0 + m));
    }
    CHECK(pot.prox(DevTensor::zero(), 0.3).norm() == 0.0);
}

TEST_CASE("poly-det prox solves the stationarity system") {
    const auto pd = PotentialSpec::poly_det(0.5, 0.2, 3.0, 1.0);
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const DevTensor x = rng.dev_tensor(2.0);
        const double lam = std::exp(rng.uniform(std::log(0.01), std::log(10.0)));
        const DevTensor p = pd.prox(x, lam);
        const DevTensor resid = (1.0 / lam) * (p - x) + pd.smooth_subgradient(p);
        CHECK(resid.norm() <= 1e-10 * (1.0 + x.norm() / lam));
    }
}

TEST_CASE("moreau envelope values and gradients") {
    const auto quad = PotentialSpec::quadratic(1.0);
    Rng rng(53);
    DevTensor e = rng.dev_tensor(1.0);
    e *= 1.0 / e.norm();
    CHECK(quad.moreau_value(2.0 * e, 1.0) == doctest::Approx(1.0));
    CHECK(quad.moreau_value(DevTensor::zero(), 0.37) == doctest::Approx(0.0));
    CHECK((quad.moreau_grad(DevTensor::diag(2, -2, 0), 1.0) - DevTensor::diag(1, -1, 0)).norm() <= 1e-14);

    const auto proj = PotentialSpec::yield_ball(0.0, 1.0);
    CHECK(proj.moreau_value(3.0 * e, 1.0) == doctest::Approx(2.0));

    const auto ball = PotentialSpec::yield_ball(1.0, 1.0);
    const DevTensor g = ball.moreau_grad(4.0 * e, 1.0);
    CHECK((g - 3.0 * e).norm() <= 1e-12);
    CHECK(g.norm() <= 4.0 + 1e-12);
    CHECK(ball.moreau_grad(DevTensor::zero(), 0.5).norm() == 0.0);

    CHECK_THROWS_AS(quad.moreau_value(e, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quad.moreau_grad(e, -1.0), std::invalid_argument);
}

TEST_CASE("moreau envelope cross-checked by coordinate grid search") {
    // crude 5-D grid around the prox point confirms the inf-convolution value
    const auto quad = PotentialSpec::quadratic(1.0);
    Rng rng(59);
    const DevTensor x = rng.dev_tensor(1.0);
    const double eps = 0.8;
    const double env = quad.moreau_value(x, eps);
    double best = kInf;
    const DevTensor center = quad.prox(x, eps);
    const double h = 0.02;
    for (int i0 = -2; i0 <= 2; ++i0)
        for (int i1 = -2; i1 <= 2; ++i1)
            for (int i2 = -2; i2 <= 2; ++i2)
                for (int i3 = -2; i3 <= 2; ++i3)
                    for (int i4 = -2; i4 <= 2; ++i4) {
                        DevTensor s = center;
                        s[0] += h * i0;
                        s[1] += h * i1;
                        s[2] += h * i2;
                        s[3] += h * i3;
                        s[4] += h * i4;
                        const DevTensor r = x - s;
                        best = std::min(best, 0.5 * r.norm2() / eps + quad.value(s));
                    }
    CHECK(env <= best + 1e-12);
    CHECK(env == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("envelope ordering and pointwise convergence") {
    Rng rng(61);
    std::vector<PotentialSpec> pots;
    pots.push_back(PotentialSpec::quadratic(0.8));
    pots.push_back(PotentialSpec::yield_ball(1.0, 1.2));
    pots.push_back(PotentialSpec::poly_det(0.5, 0.1, 1.0, -2.0));
    pots.push_back(PotentialSpec::radial(RadialProfile({0.0, 1.0}, {1.0, 2.0}, 0.0, {0.3})));
    for (const auto& pot : pots) {
        for (int trial = 0; trial < 100; ++trial) {
            DevTensor x = rng.dev_tensor(1.0);
            if (pot.kind() == PotentialKind::YieldBall && x.norm() > 1.2) x *= 1.1 / x.norm();
            const double v = pot.value(x);
            double prev = -kInf;
            for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
                const double env = pot.moreau_value(x, eps);
                CHECK(env >= prev - 1e-12 * (1.0 + std::abs(env)));
                CHECK(env <= v + 1e-12 * (1.0 + std::abs(v)));
                prev = env;
            }
            CHECK(prev == doctest::Approx(v).epsilon(1e-3));
        }
    }
}

TEST_CASE("prox nonexpansiveness and gradient monotonicity") {
    Rng rng(67);
    std::vector<PotentialSpec> pots;
    pots.push_back(PotentialSpec::quadratic(1.3));
    pots.push_back(PotentialSpec::yield_ball(0.7, 0.9));
    pots.push_back(PotentialSpec::poly_det(0.4, 0.3, 2.0, 3.5));
    for (const auto& pot : pots) {
        for (int trial = 0; trial < 200; ++trial) {
            const DevTensor x1 = rng.dev_tensor(2.0);
            const DevTensor x2 = rng.dev_tensor(2.0);
            const double lam = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
            const DevTensor p1 = pot.prox(x1, lam);
            const DevTensor p2 = pot.prox(x2, lam);
            const double lhs = (p1 - p2).norm2();
            CHECK(lhs <= frobenius(p1 - p2, x1 - x2) + 1e-10 * (1.0 + lhs));
            CHECK((p1 - p2).norm() <= (x1 - x2).norm() * (1.0 + 1e-12) + 1e-12);
            // monotone envelope gradient
            const double eps = 0.1;
            const DevTensor g1 = pot.moreau_grad(x1, eps);
            const DevTensor g2 = pot.moreau_grad(x2, eps);
            const double scale = 1.0 + x1.norm() + x2.norm();
            CHECK(frobenius(g1 - g2, x1 - x2) >= -1e-10 * scale * scale * scale * scale);
        }
    }
}

TEST_CASE("subgradient bounds") {
    Rng rng(71);
    const auto pd = PotentialSpec::poly_det(0.4, 0.3, 2.0, -3.0);
    const auto quad = PotentialSpec::quadratic(2.0);
    for (int trial = 0; trial < 300; ++trial) {
        const DevTensor x = rng.dev_tensor(2.0);
        for (double eps : {1.0, 0.1, 0.01}) {
            CHECK(pd.moreau_grad(x, eps).norm() <= x.norm() / eps * (1.0 + 1e-12));
            CHECK(quad.moreau_grad(x, eps).norm() <= x.norm() / eps * (1.0 + 1e-12));
        }
        // dP(S):S >= P(S) for the smooth branches
        CHECK(frobenius(pd.smooth_subgradient(x), x) >= pd.value(x) - 1e-10 * (1.0 + std::abs(pd.value(x))));
        CHECK(frobenius(quad.smooth_subgradient(x), x) >= quad.value(x) - 1e-12);
    }
}
