#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "vpflow/config.hpp"
#include "vpflow/rng.hpp"
#include "vpflow/snapshot.hpp"

using namespace vpflow;

TEST_CASE("minimal document and defaults") {
    const SimConfig c = parse_config("# empty run description\n");
    CHECK(c.grid.n[0] == 16);
    CHECK(c.mu > 0.0);
    CHECK(c.eps == 1e-2);
    // defaults round-trip through serialization
    const SimConfig again = parse_config(serialize_config(c));
    CHECK(again == c);
}

TEST_CASE("config round-trip is exact") {
    const std::string text = R"(
        grid.nx = 24
        grid.ny = 12
        grid.nz = 1
        domain.lx = 6.283185307179586
        domain.ly = 3.1
        domain.topology_y = wall
        time.dt = 0.0005
        time.t_end = 1.5
        physics.mu = 0.07
        physics.gamma = 0.11
        physics.eta = 0.9
        potential.type = yield_ball
        potential.a = 1.25
        potential.sigma_yield = 0.375
        moreau.eps = 0
        boundary.yhigh.kind = lid_tangential
        boundary.yhigh.direction = 0.1 0 0
        boundary.yhigh.power = 2
        boundary.yhigh.time = exp_decay
        boundary.yhigh.time_a0 = 1
        boundary.yhigh.time_rate = 0.25
        initial.v.kind = taylor_green
        initial.v.amplitude = 0.05
        initial.s.kind = fourier_mode
        initial.s.coords = 0.01 0 0.02 0 0
        initial.s.wave = 1 0 0
        rng.seed = 42
    )";
    const SimConfig c = parse_config(text);
    CHECK(c.grid.topo[1] == Topology::Wall);
    CHECK(c.boundary.walls[3].kind == WallProfile::Kind::LidTangential);
    const SimConfig c2 = parse_config(serialize_config(c));
    CHECK(c2 == c);
    const SimConfig c3 = parse_config(serialize_config(c2));
    CHECK(c3 == c);
}

TEST_CASE("validation errors name the key") {
    CHECK_THROWS_AS(parse_config("physics.mu = -1\n"), ValidationError);
    try {
        parse_config("physics.mu = -1\n");
    } catch (const ValidationError& e) {
        CHECK(e.key == "physics.mu");
        CHECK(std::string(e.what()).find("> 0") != std::string::npos);
    }
    try {
        parse_config("potential.type = poly_det\npotential.b = 5\n");
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(e.key == "potential.b");
    }
    CHECK_THROWS_AS(parse_config("no equals sign here\n"), ParseError);
    CHECK_THROWS_AS(parse_config("unknown.key = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("moreau.eps = 2\n"), ValidationError);
    // explicit envelope step needs dt below eps
    CHECK_THROWS_AS(parse_config("moreau.eps = 1e-4\ntime.dt = 1e-3\n"), ValidationError);
}

TEST_CASE("snapshot io round-trips bit-exactly") {
    Grid g;
    g.n = {8, 6, 1};
    g.h = {0.25, 0.5, 1.0};
    g.topo = {Topology::Periodic, Topology::Wall, Topology::Periodic};
    SimState st(g);
    st.t = 0.625;
    Rng rng(9);
    for (auto& c : st.V.comp)
        for (auto& x : c.v) x = rng.normal();
    for (auto& c : st.S.coord)
        for (auto& x : c.v) x = rng.normal();
    for (auto& x : st.P.a.v) x = rng.normal();

    const std::string path = (std::filesystem::temp_directory_path() / "vpflow_snap_test.vpf").string();
    write_snapshot(path, st);
    const SimState rd = read_snapshot(path);
    CHECK(rd.t == st.t);
    CHECK(rd.V.grid.n == g.n);
    CHECK(rd.V.grid.h == g.h);
    for (int c = 0; c < 3; ++c) CHECK(rd.V.comp[c].v == st.V.comp[c].v);
    for (int c = 0; c < 5; ++c)
        CHECK(rd.S.coord[static_cast<std::size_t>(c)].v == st.S.coord[static_cast<std::size_t>(c)].v);
    CHECK(rd.P.a.v == st.P.a.v);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_snapshot("/nonexistent/vpflow.vpf"), std::runtime_error);
}
