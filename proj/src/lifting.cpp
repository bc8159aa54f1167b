#include <cmath>

#include "vpflow/parallel.hpp"
#include "vpflow/rng.hpp"
#include "vpflow/solver.hpp"

namespace vpflow {

namespace {

// Layer profile: H(0) = 0, H'(0) = 1, H' supported on [0, delta].
double layer_integral(double d, double delta) {
    if (d >= delta) return delta / 3.0;
    const double s = 1.0 - d / delta;
    return delta * (1.0 - s * s * s) / 3.0;
}

struct EdgeArrays {
    Array3 ax, ay, az;
};

// Vector potential assembled per wall: for a wall with normal axis a and
// tangential data G, the two tangential components are carried by the edge
// potentials so that w = curl A reproduces G on the wall and vanishes beyond
// the layer. sigma is dd/dx_a (+1 on the low side, -1 on the high side); the
// prefactor -1/sigma makes the tangential curl component equal G at d = 0.
void accumulate_wall(EdgeArrays& A, const Grid& g, const BoundaryData& bc, int wall, double delta, double t,
                     bool time_derivative) {
    const auto& wp = bc.walls[static_cast<std::size_t>(wall)];
    if (wp.kind == WallProfile::Kind::Zero) return;
    const int axis = wall / 2;
    const int side = wall % 2;
    const double sigma = side == 0 ? 1.0 : -1.0;
    const auto box = g.box();
    const double amp = time_derivative ? wp.time.derivative(t) : wp.time.value(t);
    if (amp == 0.0) return;

    // distance to this wall from physical coordinate x_a
    auto dist = [&](double xa) { return side == 0 ? xa : g.length(axis) - xa; };

    // contribution to edge component e (carrying tangential direction tdir):
    //   A_e += -(1/sigma) * G_tdir(x) * H(dist)   with (e, tdir, axis) a right-handed triple
    // derived from w_tdir = (curl A)_tdir = -sigma * dA_e/dd * (orientation sign)
    for (int e = 0; e < 3; ++e) {
        if (e == axis) continue;
        const int tdir = 3 - e - axis;  // the remaining axis
        if (wp.direction[static_cast<std::size_t>(tdir)] == 0.0) continue;
        // orientation: (curl A)_tdir includes eps_{tdir,axis,e} * d_axis A_e
        const double eps = ((tdir + 1) % 3 == axis) ? 1.0 : -1.0;  // eps_{tdir,axis,e}
        Array3& arr = e == 0 ? A.ax : e == 1 ? A.ay : A.az;
        for (int k = 0; k < arr.n2; ++k)
            for (int j = 0; j < arr.n1; ++j)
                for (int i = 0; i < arr.n0; ++i) {
                    const int idx[3] = {i, j, k};
                    std::array<double, 3> x{};
                    for (int ax2 = 0; ax2 < 3; ++ax2)
                        x[static_cast<std::size_t>(ax2)] =
                            ax2 == e ? g.center(ax2, idx[ax2]) : g.face(ax2, idx[ax2]);
                    auto shape = wp.shape(x, box, axis);
                    const double gt = shape[static_cast<std::size_t>(tdir)] * amp;
                    if (gt == 0.0) continue;
                    arr(i, j, k) += eps * sigma * gt * layer_integral(dist(x[static_cast<std::size_t>(axis)]), delta);
                }
    }
}

VelocityField build_extension(const BoundaryData& bc, double delta, const Grid& g, double t, bool time_derivative) {
    for (int wall = 0; wall < 6; ++wall) {
        const auto& wp = bc.walls[static_cast<std::size_t>(wall)];
        if (wp.kind == WallProfile::Kind::Zero) continue;
        if (g.periodic(wall / 2)) throw UnsupportedGeometry("lifting: wall data on a periodic axis");
    }
    for (int a = 0; a < 3; ++a)
        if (!g.periodic(a) && !(delta < 0.5 * g.length(a)))
            throw UnsupportedGeometry("lifting: delta_bl must be below half the box width");

    EdgeArrays A;
    A.ax.resize(g.n[0], g.faces(1), g.faces(2));
    A.ay.resize(g.faces(0), g.n[1], g.faces(2));
    A.az.resize(g.faces(0), g.faces(1), g.n[2]);
    for (int wall = 0; wall < 6; ++wall) accumulate_wall(A, g, bc, wall, delta, t, time_derivative);

    VelocityField w(g);
    auto node = [&](const Array3& arr, int axis, int i, int j, int k) {
        int idx[3] = {i, j, k};
        if (g.periodic(axis)) {
            const int n = axis == 0 ? arr.n0 : axis == 1 ? arr.n1 : arr.n2;
            idx[axis] = idx[axis] % n;
        }
        return arr(idx[0], idx[1], idx[2]);
    };
    // u = dAz/dy - dAy/dz on x-faces
    for (int k = 0; k < w.u().n2; ++k)
        for (int j = 0; j < w.u().n1; ++j)
            for (int i = 0; i < w.u().n0; ++i)
                w.u()(i, j, k) = (node(A.az, 1, i, j + 1, k) - A.az(i, j, k)) / g.h[1] -
                                 (node(A.ay, 2, i, j, k + 1) - A.ay(i, j, k)) / g.h[2];
    // v = dAx/dz - dAz/dx on y-faces
    for (int k = 0; k < w.v().n2; ++k)
        for (int j = 0; j < w.v().n1; ++j)
            for (int i = 0; i < w.v().n0; ++i)
                w.v()(i, j, k) = (node(A.ax, 2, i, j, k + 1) - A.ax(i, j, k)) / g.h[2] -
                                 (node(A.az, 0, i + 1, j, k) - A.az(i, j, k)) / g.h[0];
    // w = dAy/dx - dAx/dy on z-faces
    for (int k = 0; k < w.w().n2; ++k)
        for (int j = 0; j < w.w().n1; ++j)
            for (int i = 0; i < w.w().n0; ++i)
                w.w()(i, j, k) = (node(A.ay, 0, i + 1, j, k) - A.ay(i, j, k)) / g.h[0] -
                                 (node(A.ax, 1, i, j + 1, k) - A.ax(i, j, k)) / g.h[1];
    return w;
}

}  // namespace

VelocityField hopf_extension(const BoundaryData& bc, double delta_bl, const Grid& grid, double t) {
    return build_extension(bc, delta_bl, grid, t, false);
}

VelocityField hopf_extension_time_derivative(const BoundaryData& bc, double delta_bl, const Grid& grid, double t) {
    return build_extension(bc, delta_bl, grid, t, true);
}

double hopf_smallness_threshold(const BoundaryData& bc, const Grid& grid, double mu, double t, int n_samples,
                                std::uint64_t seed) {
    // random divergence-free test fields with (numerically) homogeneous wall
    // values: curl of a node potential damped by the wall window squared
    Rng rng(seed);
    const auto box = grid.box();

    auto window = [&](const std::array<double, 3>& x) {
        double f = 1.0;
        for (int a = 0; a < 3; ++a) {
            if (grid.periodic(a)) continue;
            const double s = x[static_cast<std::size_t>(a)] / box[static_cast<std::size_t>(a)];
            f *= 16.0 * s * s * (1.0 - s) * (1.0 - s);
        }
        return f;
    };

    auto sample_field = [&]() {
        // low-mode random coefficients for a z-directed node potential (plus
        // in-plane components in genuinely 3-D boxes)
        struct ModeSet {
            std::array<double, 8> c;
        };
        ModeSet mx{}, my{}, mz{};
        for (int i = 0; i < 8; ++i) {
            mz.c[static_cast<std::size_t>(i)] = rng.normal();
            mx.c[static_cast<std::size_t>(i)] = grid.n[2] > 1 ? rng.normal() : 0.0;
            my.c[static_cast<std::size_t>(i)] = grid.n[2] > 1 ? rng.normal() : 0.0;
        }
        auto pot = [&](const ModeSet& m, const std::array<double, 3>& x) {
            const double sx = std::sin(2.0 * M_PI * x[0] / box[0]), cx = std::cos(2.0 * M_PI * x[0] / box[0]);
            const double sy = std::sin(2.0 * M_PI * x[1] / box[1]), cy = std::cos(2.0 * M_PI * x[1] / box[1]);
            const double sz = grid.n[2] > 1 ? std::sin(2.0 * M_PI * x[2] / box[2]) : 0.0;
            const double cz = grid.n[2] > 1 ? std::cos(2.0 * M_PI * x[2] / box[2]) : 1.0;
            return window(x) * (m.c[0] * sx * sy + m.c[1] * sx * cy + m.c[2] * cx * sy + m.c[3] * cx * cy * cz +
                                m.c[4] * sx * sy * sz + m.c[5] * cx * sy * sz + m.c[6] * sx * cy * cz +
                                m.c[7] * cx * cy * sz);
        };
        // edge potentials sampled, then a discrete curl (exactly solenoidal)
        Array3 ax(grid.n[0], grid.faces(1), grid.faces(2));
        Array3 ay(grid.faces(0), grid.n[1], grid.faces(2));
        Array3 az(grid.faces(0), grid.faces(1), grid.n[2]);
        auto fill = [&](Array3& arr, int center_axis, const ModeSet& m) {
            for (int k = 0; k < arr.n2; ++k)
                for (int j = 0; j < arr.n1; ++j)
                    for (int i = 0; i < arr.n0; ++i) {
                        const int idx[3] = {i, j, k};
                        std::array<double, 3> x{};
                        for (int a = 0; a < 3; ++a)
                            x[static_cast<std::size_t>(a)] =
                                a == center_axis ? grid.center(a, idx[a]) : grid.face(a, idx[a]);
                        arr(i, j, k) = pot(m, x);
                    }
        };
        fill(ax, 0, mx);
        fill(ay, 1, my);
        fill(az, 2, mz);

        VelocityField v(grid);
        auto node = [&](const Array3& arr, int axis, int i, int j, int k) {
            int idx[3] = {i, j, k};
            if (grid.periodic(axis)) {
                const int n = axis == 0 ? arr.n0 : axis == 1 ? arr.n1 : arr.n2;
                idx[axis] = idx[axis] % n;
            }
            return arr(idx[0], idx[1], idx[2]);
        };
        for (int k = 0; k < v.u().n2; ++k)
            for (int j = 0; j < v.u().n1; ++j)
                for (int i = 0; i < v.u().n0; ++i)
                    v.u()(i, j, k) = (node(az, 1, i, j + 1, k) - az(i, j, k)) / grid.h[1] -
                                     (node(ay, 2, i, j, k + 1) - ay(i, j, k)) / grid.h[2];
        for (int k = 0; k < v.v().n2; ++k)
            for (int j = 0; j < v.v().n1; ++j)
                for (int i = 0; i < v.v().n0; ++i)
                    v.v()(i, j, k) = (node(ax, 2, i, j, k + 1) - ax(i, j, k)) / grid.h[2] -
                                     (node(az, 0, i + 1, j, k) - az(i, j, k)) / grid.h[0];
        for (int k = 0; k < v.w().n2; ++k)
            for (int j = 0; j < v.w().n1; ++j)
                for (int i = 0; i < v.w().n0; ++i)
                    v.w()(i, j, k) = (node(ay, 0, i + 1, j, k) - ay(i, j, k)) / grid.h[0] -
                                     (node(ax, 1, i, j + 1, k) - ax(i, j, k)) / grid.h[1];
        return v;
    };

    std::vector<VelocityField> samples;
    samples.reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) samples.push_back(sample_field());

    BoundaryData zero_bc{};
    std::vector<double> grad2(samples.size());
    std::vector<std::vector<Mat3>> grads(samples.size());
    std::vector<std::vector<std::array<double, 3>>> centers(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        grad2[s] = grad_norm2(samples[s], zero_bc, 0.0);
        Array3 pad[3];
        pad_velocity(samples[s], zero_bc, 0.0, pad);
        grads[s].reserve(grid.cells());
        centers[s].reserve(grid.cells());
        for (int k = 0; k < grid.n[2]; ++k)
            for (int j = 0; j < grid.n[1]; ++j)
                for (int i = 0; i < grid.n[0]; ++i) {
                    grads[s].push_back(velocity_gradient_at(pad, grid, i, j, k));
                    centers[s].push_back(velocity_at_center(pad, grid, i, j, k));
                }
    }

    double delta = 0.0;
    for (int a = 0; a < 3; ++a)
        if (!grid.periodic(a)) delta = delta == 0.0 ? 0.45 * grid.length(a) : std::min(delta, 0.45 * grid.length(a));
    if (delta == 0.0) throw UnsupportedGeometry("lifting: no wall axes");

    const double vol = grid.cell_volume();
    double best = -1.0;
    for (int level = 0; level < 12; ++level) {
        const VelocityField w = hopf_extension(bc, delta, grid, t);
        Array3 wpad[3];
        pad_velocity(w, zero_bc, 0.0, wpad);
        bool ok = true;
        for (std::size_t s = 0; s < samples.size() && ok; ++s) {
            double functional = 0.0;
            std::size_t cell = 0;
            for (int k = 0; k < grid.n[2]; ++k)
                for (int j = 0; j < grid.n[1]; ++j)
                    for (int i = 0; i < grid.n[0]; ++i, ++cell) {
                        const auto wc = velocity_at_center(wpad, grid, i, j, k);
                        const auto& vc = centers[s][cell];
                        const Mat3& gv = grads[s][cell];
                        // w (x) v : grad v = w_j (grad v)_{jk} v_k
                        double acc = 0.0;
                        for (int jj = 0; jj < 3; ++jj)
                            for (int kk = 0; kk < 3; ++kk)
                                acc += wc[static_cast<std::size_t>(jj)] * gv(jj, kk) * vc[static_cast<std::size_t>(kk)];
                        functional += acc;
                    }
            functional *= vol;
            if (std::abs(functional) > 0.5 * mu * grad2[s]) ok = false;
        }
        if (ok) {
            best = delta;
            return best;
        }
        delta *= 0.5;
    }
    return delta;  // smallest level tried; callers treat it as the threshold
}

}  // namespace vpflow
