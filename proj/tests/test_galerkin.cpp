#include "doctest.h"

#include <cmath>

#include "vpflow/galerkin.hpp"
#include "vpflow/rng.hpp"

using namespace vpflow;

namespace {

SimConfig torus_config() {
    SimConfig c;
    c.grid.n = {16, 16, 16};
    const double h = 2.0 * M_PI / 16.0;
    c.grid.h = {h, h, h};
    c.grid.topo = {Topology::Periodic, Topology::Periodic, Topology::Periodic};
    c.mu = 0.05;
    c.gamma = 0.08;
    c.eta = 0.4;
    c.eps = 1e-2;
    c.potential.kind = PotentialKind::Quadratic;
    c.potential.a = 1.0;
    c.oracle_max_wavenumber = 1;
    c.oracle_step = 1e-3;
    c.t_end = 0.2;
    return c;
}

}  // namespace

TEST_CASE("basis enumeration and orthonormality") {
    const GalerkinBases b1 = build_bases(1);
    // 13 sign-reduced wavevectors with |k|_inf = 1, two polarizations and parities
    CHECK(b1.velocity.size() == 52);
    // 5 constant modes + 13 k's, 5 frame elements, 2 parities
    CHECK(b1.tensor.size() == 135);
    CHECK(orthonormality_defect(b1, 4) <= 1e-12);

    for (const auto& m : b1.velocity) {
        const double ke = m.k[0] * m.e[0] + m.k[1] * m.e[1] + m.k[2] * m.e[2];
        CHECK(std::abs(ke) <= 1e-14);  // divergence-free
        const double en = m.e[0] * m.e[0] + m.e[1] * m.e[1] + m.e[2] * m.e[2];
        CHECK(en == doctest::Approx(1.0));
    }
}

TEST_CASE("oracle requires a Lipschitz envelope") {
    SimConfig c = torus_config();
    c.eps = 0.0;
    CHECK_THROWS_AS(GalerkinOracle{c}, std::invalid_argument);
}

TEST_CASE("zero data stays at the origin") {
    SimConfig c = torus_config();
    c.t_end = 0.05;
    GalerkinOracle oracle(c);
    const auto traj = oracle.integrate();
    for (const auto& y : traj.states)
        for (double v : y) CHECK(v == 0.0);
    const auto rep = oracle.energy_report(traj);
    CHECK(rep.max_residual_v == 0.0);
    CHECK(rep.max_residual_s == 0.0);
}

TEST_CASE("single velocity mode decays viscously") {
    SimConfig c = torus_config();
    c.eta = 0.0;
    c.initial_v.kind = VectorProfile::Kind::TaylorGreen;
    c.initial_v.amplitude = 0.1;
    c.t_end = 1.0;
    GalerkinOracle oracle(c);

    // rhs reduces to the viscous term on the initial coefficients
    const auto y0 = oracle.initial_state();
    std::vector<double> dy;
    oracle.rhs(0.0, y0, dy);
    for (int l = 0; l < oracle.n_velocity(); ++l) {
        const auto& m = oracle.bases().velocity[static_cast<std::size_t>(l)];
        const double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2];
        CHECK(std::abs(dy[static_cast<std::size_t>(l)] + c.mu * k2 * y0[static_cast<std::size_t>(l)]) <=
              1e-12 * (1.0 + std::abs(y0[static_cast<std::size_t>(l)])));
    }

    const auto traj = oracle.integrate();
    const double e0 = oracle.kinetic(traj.states.front());
    const double eT = oracle.kinetic(traj.states.back());
    // Taylor-Green with |k|^2 = 2: energy decays as exp(-4 mu t)
    CHECK(eT == doctest::Approx(e0 * std::exp(-4.0 * c.mu * 1.0)).epsilon(1e-8));
}

TEST_CASE("constant tensor mode relaxes through the envelope gradient") {
    SimConfig c = torus_config();
    c.eta = 0.0;
    c.initial_s.kind = TensorProfile::Kind::Constant;
    c.initial_s.coords = {0.3, 0.0, 0.0, 0.0, 0.0};
    GalerkinOracle oracle(c);
    const auto y0 = oracle.initial_state();
    std::vector<double> dy;
    oracle.rhs(0.0, y0, dy);
    const double rate = c.potential.a / (1.0 + c.eps * c.potential.a);
    const std::size_t nv = static_cast<std::size_t>(oracle.n_velocity());
    for (int l = 0; l < oracle.n_tensor(); ++l) {
        const double beta = y0[nv + static_cast<std::size_t>(l)];
        CHECK(std::abs(dy[nv + static_cast<std::size_t>(l)] + rate * beta) <= 1e-12 * (1.0 + std::abs(beta)));
    }
}

TEST_CASE("assembled tables are energy neutral") {
    SimConfig c = torus_config();
    GalerkinOracle oracle(c);
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y(static_cast<std::size_t>(oracle.n_velocity() + oracle.n_tensor()));
        for (double& v : y) v = rng.normal();
        // discrete roots of the convection, transport and rotation identities
        CHECK(std::abs(oracle.convection_energy_defect(y)) <= 1e-12 * 100.0);
        CHECK(std::abs(oracle.transport_energy_defect(y)) <= 1e-12 * 100.0);
        CHECK(std::abs(oracle.rotation_energy_defect(y)) <= 1e-12 * 100.0);
    }
}

TEST_CASE("parseval identity for the reconstructed field") {
    SimConfig c = torus_config();
    c.initial_v.kind = VectorProfile::Kind::TaylorGreen;
    c.initial_v.amplitude = 0.2;
    GalerkinOracle oracle(c);
    const auto y0 = oracle.initial_state();
    const double coef = 2.0 * oracle.kinetic(y0);
    const double field = oracle.field_velocity_norm2(y0);
    CHECK(field == doctest::Approx(coef).epsilon(1e-10));
}

TEST_CASE("energy equalities hold along a coupled run") {
    SimConfig c = torus_config();
    c.initial_v.kind = VectorProfile::Kind::TaylorGreen;
    c.initial_v.amplitude = 0.2;
    c.initial_s.kind = TensorProfile::Kind::FourierMode;
    c.initial_s.coords = {0.1, 0.05, 0.0, 0.1, 0.0};
    c.initial_s.wave = {1, 0, 0};
    c.t_end = 0.2;
    GalerkinOracle oracle(c);
    const auto traj = oracle.integrate();
    const auto rep = oracle.energy_report(traj);
    const double tol = 1e-6 * (1.0 + rep.initial_energy);
    CHECK(rep.max_residual_v <= tol);
    CHECK(rep.max_residual_s <= tol);
    CHECK(rep.apriori_measured <= rep.apriori_bound);

    // a forced run exercises the work terms
    SimConfig cf = c;
    cf.forcing.f0.kind = VectorProfile::Kind::FourierMode;
    cf.forcing.f0.direction = {0.0, 0.0, 0.1};
    cf.forcing.f0.wave = {1, 1, 0};
    cf.forcing.f0_time = TimeProfile::exp_decay(1.0, 0.5);
    GalerkinOracle of(cf);
    const auto tf = of.integrate();
    const auto rf = of.energy_report(tf);
    CHECK(rf.max_residual_v <= 1e-6 * (1.0 + rf.initial_energy));
    CHECK(rf.max_residual_s <= 1e-6 * (1.0 + rf.initial_energy));
    CHECK(rf.apriori_measured <= rf.apriori_bound);
}

TEST_CASE("blow-up guard trips on unstable steps") {
    SimConfig c = torus_config();
    c.initial_v.kind = VectorProfile::Kind::TaylorGreen;
    c.initial_v.amplitude = 0.2;
    c.oracle_step = 1e3;  // absurd step: linear terms explode
    c.t_end = 2e4;
    GalerkinOracle oracle(c);
    CHECK_THROWS_AS(oracle.integrate(), BlowUp);
}
