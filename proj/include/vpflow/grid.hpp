#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vpflow/profiles.hpp"
#include "vpflow/tensor.hpp"

namespace vpflow {

/// 3-D array with an optional ghost halo; index -halo .. n+halo-1 per axis,
/// i fastest. Halos are filled by the padding helpers in grid.cpp.
struct Array3 {
    int n0 = 0, n1 = 0, n2 = 0, halo = 0;
    std::vector<double> v;

    Array3() = default;
    Array3(int a, int b, int c, int h = 0) { resize(a, b, c, h); }

    void resize(int a, int b, int c, int h = 0) {
        n0 = a;
        n1 = b;
        n2 = c;
        halo = h;
        v.assign(static_cast<std::size_t>(a + 2 * h) * (b + 2 * h) * (c + 2 * h), 0.0);
    }

    std::size_t idx(int i, int j, int k) const {
        const int s0 = n0 + 2 * halo, s1 = n1 + 2 * halo;
        return (static_cast<std::size_t>(k + halo) * s1 + (j + halo)) * s0 + (i + halo);
    }
    double& operator()(int i, int j, int k) { return v[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v[idx(i, j, k)]; }

    std::size_t interior_count() const {
        return static_cast<std::size_t>(n0) * n1 * n2;
    }
};

enum class Topology { Periodic, Wall };

struct Grid {
    // defaults describe a 16x16 slab of the 2*pi torus (2.5-D)
    std::array<int, 3> n{16, 16, 1};
    std::array<double, 3> h{0.39269908169872414, 0.39269908169872414, 6.283185307179586};
    std::array<Topology, 3> topo{Topology::Periodic, Topology::Periodic, Topology::Periodic};

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (n[a] < 1 || (n[a] < 4 && !(a == 2 && n[a] == 1 && topo[a] == Topology::Periodic)))
                throw std::invalid_argument("grid: need at least 4 cells per axis (n_z = 1 allowed for periodic z)");
            if (!(h[a] > 0.0)) throw std::invalid_argument("grid: cell sizes must be positive");
            if (n[2] == 1 && topo[2] != Topology::Periodic)
                throw std::invalid_argument("grid: n_z = 1 requires periodic z");
        }
    }

    bool periodic(int axis) const { return topo[static_cast<std::size_t>(axis)] == Topology::Periodic; }
    double length(int axis) const { return n[static_cast<std::size_t>(axis)] * h[static_cast<std::size_t>(axis)]; }
    std::array<double, 3> box() const { return {length(0), length(1), length(2)}; }
    int faces(int axis) const { return periodic(axis) ? n[static_cast<std::size_t>(axis)] : n[static_cast<std::size_t>(axis)] + 1; }
    std::size_t cells() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
    double cell_volume() const { return h[0] * h[1] * h[2]; }

    double center(int axis, int i) const { return (i + 0.5) * h[static_cast<std::size_t>(axis)]; }
    double face(int axis, int i) const { return i * h[static_cast<std::size_t>(axis)]; }

    bool operator==(const Grid&) const = default;
};

/// MAC staggered velocity: component a lives on the faces orthogonal to axis a.
struct VelocityField {
    Grid grid;
    Array3 comp[3];

    VelocityField() = default;
    explicit VelocityField(const Grid& g) : grid(g) {
        comp[0].resize(g.faces(0), g.n[1], g.n[2]);
        comp[1].resize(g.n[0], g.faces(1), g.n[2]);
        comp[2].resize(g.n[0], g.n[1], g.faces(2));
    }

    Array3& u() { return comp[0]; }
    Array3& v() { return comp[1]; }
    Array3& w() { return comp[2]; }
    const Array3& u() const { return comp[0]; }
    const Array3& v() const { return comp[1]; }
    const Array3& w() const { return comp[2]; }
};

/// Cell-centered deviatoric tensor field, stored per frame coordinate.
struct DevTensorField {
    Grid grid;
    std::array<Array3, 5> coord;

    DevTensorField() = default;
    explicit DevTensorField(const Grid& g) : grid(g) {
        for (auto& c : coord) c.resize(g.n[0], g.n[1], g.n[2]);
    }

    DevTensor at(int i, int j, int k) const {
        DevTensor d;
        for (int c = 0; c < 5; ++c) d[c] = coord[static_cast<std::size_t>(c)](i, j, k);
        return d;
    }
    void set(int i, int j, int k, const DevTensor& d) {
        for (int c = 0; c < 5; ++c) coord[static_cast<std::size_t>(c)](i, j, k) = d[c];
    }
};

struct ScalarField {
    Grid grid;
    Array3 a;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), a(g.n[0], g.n[1], g.n[2]) {}
};

struct SimState {
    double t = 0.0;
    VelocityField V;
    DevTensorField S;
    ScalarField P;

    SimState() = default;
    explicit SimState(const Grid& g) : V(g), S(g), P(g) {}
};

/// Tangential velocity data on the axis-aligned walls. Wall index is
/// 2*axis + side with side 0 the low face and 1 the high face. Profiles on
/// periodic axes must be zero.
struct BoundaryData {
    std::array<WallProfile, 6> walls;

    static int wall_index(int axis, int side) { return 2 * axis + side; }

    bool any_nonzero() const {
        for (const auto& w : walls)
            if (w.kind != WallProfile::Kind::Zero) return true;
        return false;
    }

    /// g(t, x) on the given wall (zero normal component by construction).
    std::array<double, 3> g_at(int wall, const std::array<double, 3>& x, const std::array<double, 3>& box,
                               double t) const {
        const auto& p = walls[static_cast<std::size_t>(wall)];
        auto s = p.shape(x, box, wall / 2);
        const double amp = p.time.value(t);
        return {s[0] * amp, s[1] * amp, s[2] * amp};
    }

    /// Time derivative of g at fixed x.
    std::array<double, 3> dgdt_at(int wall, const std::array<double, 3>& x, const std::array<double, 3>& box,
                                  double t) const {
        const auto& p = walls[static_cast<std::size_t>(wall)];
        auto s = p.shape(x, box, wall / 2);
        const double amp = p.time.derivative(t);
        return {s[0] * amp, s[1] * amp, s[2] * amp};
    }

    bool operator==(const BoundaryData&) const = default;

    void validate(const Grid& g) const {
        for (int wall = 0; wall < 6; ++wall) {
            const auto& p = walls[static_cast<std::size_t>(wall)];
            if (p.kind == WallProfile::Kind::Zero) continue;
            const int axis = wall / 2;
            if (g.periodic(axis)) throw std::invalid_argument("boundary: wall profile on a periodic axis");
            if (p.direction[static_cast<std::size_t>(axis)] != 0.0)
                throw std::invalid_argument("boundary: g must satisfy g.n = 0 (normal component rejected)");
        }
    }
};

// ---- shared discrete operators (definitions in grid.cpp) ----

/// Ghost-padded copies. Velocity padding needs boundary data for the
/// tangential Dirichlet ghosts; tensor and scalar padding mirror (Neumann).
void pad_velocity(const VelocityField& V, const BoundaryData& bc, double t, Array3 out[3]);
void pad_velocity_component(const Array3& src, const Grid& g, int comp, const BoundaryData& bc, double t,
                            Array3& out);
void pad_tensor_coord(const Array3& c, const Grid& g, int halo, Array3& out);
void pad_tensor(const DevTensorField& S, int halo, std::array<Array3, 5>& out);

/// Discrete divergence per cell.
void divergence(const VelocityField& V, ScalarField& out);
double max_abs_divergence(const VelocityField& V);
double max_abs_velocity(const VelocityField& V);

/// L2 norms (midpoint quadrature; each stored face carries one cell volume).
double l2_norm2(const VelocityField& V);
double l2_norm2(const DevTensorField& S);

/// Squared L2 norm of the velocity gradient, via the MAC difference stencils.
double grad_norm2(const VelocityField& V, const BoundaryData& bc, double t);

/// Squared L2 norm of the tensor gradient (Neumann ghosts at walls).
double grad_norm2(const DevTensorField& S);

/// L2 inner product of two tensor gradients over the same edge set.
double grad_dot(const DevTensorField& A, const DevTensorField& B);

/// Velocity gradient (d comp_i / d x_j) at a cell center from padded arrays.
Mat3 velocity_gradient_at(const Array3 pad[3], const Grid& g, int i, int j, int k);

/// Cell-centered velocity vector from padded arrays.
std::array<double, 3> velocity_at_center(const Array3 pad[3], const Grid& g, int i, int j, int k);

/// Max over cells of |S| (coordinate norm).
double max_norm(const DevTensorField& S);

/// a += s*b for velocity fields on the same grid.
void axpy(VelocityField& a, double s, const VelocityField& b);
void axpy(DevTensorField& a, double s, const DevTensorField& b);

}  // namespace vpflow
