#include "vpflow/grid.hpp"

#include <algorithm>
#include <cmath>

#include "vpflow/parallel.hpp"

namespace vpflow {

namespace {

constexpr std::size_t kChunk = 16384;

int wrap(int i, int n) {
    int r = i % n;
    if (r < 0) r += n;
    return r;
}

/// Deterministic parallel reduction: fixed chunk decomposition, serial combine.
double block_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& partial) {
    const std::size_t blocks = n_chunks(n, kChunk);
    std::vector<double> acc(blocks, 0.0);
    parallel_chunks(n, kChunk, [&](std::size_t lo, std::size_t hi, std::size_t b) { acc[b] = partial(lo, hi); });
    double s = 0.0;
    for (double x : acc) s += x;
    return s;
}

// Fills the halo of `a` along `axis`. For periodic axes the data wraps. For
// wall axes: `odd` reflects through a zero boundary node stored in the array
// (normal velocity), otherwise ghosts mirror (Neumann) unless `dirichlet`
// supplies wall values g for tangential velocity (ghost = 2 g - interior).
struct WallDirichlet {
    const BoundaryData* bc = nullptr;
    const Grid* grid = nullptr;
    double t = 0.0;
    int comp = 0;  // velocity component carried by the array
};

void fill_axis_halo(Array3& a, const Grid& g, int axis, bool node_centered, bool odd,
                    const WallDirichlet* dir) {
    const int h = a.halo;
    if (h == 0) return;
    const int n = axis == 0 ? a.n0 : axis == 1 ? a.n1 : a.n2;
    const int lo0 = -h, hi0 = a.n0 + h, lo1 = -h, hi1 = a.n1 + h, lo2 = -h, hi2 = a.n2 + h;

    auto for_ghosts = [&](const std::function<void(int, int, int, int)>& fn) {
        for (int k = lo2; k < hi2; ++k)
            for (int j = lo1; j < hi1; ++j)
                for (int i = lo0; i < hi0; ++i) {
                    const int idx_axis = axis == 0 ? i : axis == 1 ? j : k;
                    if (idx_axis >= 0 && idx_axis < n) continue;
                    fn(i, j, k, idx_axis);
                }
    };

    if (g.periodic(axis)) {
        for_ghosts([&](int i, int j, int k, int ia) {
            int src[3] = {i, j, k};
            src[axis] = wrap(ia, n);
            a(i, j, k) = a(src[0], src[1], src[2]);
        });
        return;
    }
    if (odd) {
        // array stores boundary nodes (faces) at 0 and n-1; reflect odd
        for_ghosts([&](int i, int j, int k, int ia) {
            int src[3] = {i, j, k};
            src[axis] = ia < 0 ? -ia : 2 * (n - 1) - ia;
            a(i, j, k) = -a(src[0], src[1], src[2]);
        });
        return;
    }
    if (dir == nullptr) {
        // Neumann mirror about the wall located at the outer cell face
        for_ghosts([&](int i, int j, int k, int ia) {
            int src[3] = {i, j, k};
            src[axis] = ia < 0 ? -1 - ia : 2 * n - 1 - ia;
            a(i, j, k) = a(src[0], src[1], src[2]);
        });
        return;
    }
    // Tangential Dirichlet: ghost = 2 g(wall point) - mirrored interior value.
    const Grid& gr = *dir->grid;
    const auto box = gr.box();
    for_ghosts([&](int i, int j, int k, int ia) {
        int src[3] = {i, j, k};
        src[axis] = ia < 0 ? -1 - ia : 2 * n - 1 - ia;
        const int side = ia < 0 ? 0 : 1;
        const int wall = BoundaryData::wall_index(axis, side);
        // physical position of the wall point between ghost and mirror
        std::array<double, 3> x{};
        const int idx[3] = {i, j, k};
        for (int axed = 0; axed < 3; ++axed) {
            const bool node = node_centered ? (axed == dir->comp) : false;
            x[static_cast<std::size_t>(axed)] =
                node ? gr.face(axed, idx[axed]) : gr.center(axed, idx[axed]);
        }
        x[static_cast<std::size_t>(axis)] = side == 0 ? 0.0 : gr.length(axis);
        const auto gval = dir->bc->g_at(wall, x, box, dir->t);
        a(i, j, k) = 2.0 * gval[static_cast<std::size_t>(dir->comp)] - a(src[0], src[1], src[2]);
    });
}

}  // namespace

void pad_velocity_component(const Array3& src, const Grid& g, int comp, const BoundaryData& bc, double t,
                            Array3& out) {
    out.resize(src.n0, src.n1, src.n2, 1);
    for (int k = 0; k < src.n2; ++k)
        for (int j = 0; j < src.n1; ++j)
            for (int i = 0; i < src.n0; ++i) out(i, j, k) = src(i, j, k);
    WallDirichlet dir{&bc, &g, t, comp};
    for (int axis = 0; axis < 3; ++axis) {
        if (axis == comp)
            fill_axis_halo(out, g, axis, true, !g.periodic(axis), nullptr);
        else
            fill_axis_halo(out, g, axis, true, false, &dir);
    }
}

void pad_velocity(const VelocityField& V, const BoundaryData& bc, double t, Array3 out[3]) {
    const Grid& g = V.grid;
    for (int c = 0; c < 3; ++c) pad_velocity_component(V.comp[c], g, c, bc, t, out[c]);
}

void pad_tensor_coord(const Array3& c, const Grid& g, int halo, Array3& out) {
    out.resize(c.n0, c.n1, c.n2, halo);
    for (int k = 0; k < c.n2; ++k)
        for (int j = 0; j < c.n1; ++j)
            for (int i = 0; i < c.n0; ++i) out(i, j, k) = c(i, j, k);
    for (int axis = 0; axis < 3; ++axis) fill_axis_halo(out, g, axis, false, false, nullptr);
}

void pad_tensor(const DevTensorField& S, int halo, std::array<Array3, 5>& out) {
    for (int c = 0; c < 5; ++c) pad_tensor_coord(S.coord[static_cast<std::size_t>(c)], S.grid, halo, out[static_cast<std::size_t>(c)]);
}

void divergence(const VelocityField& V, ScalarField& out) {
    const Grid& g = V.grid;
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int ip = g.periodic(0) ? wrap(i + 1, nx) : i + 1;
                const int jp = g.periodic(1) ? wrap(j + 1, ny) : j + 1;
                const int kp = g.periodic(2) ? wrap(k + 1, nz) : k + 1;
                out.a(i, j, k) = (V.u()(ip, j, k) - V.u()(i, j, k)) / g.h[0] +
                                 (V.v()(i, jp, k) - V.v()(i, j, k)) / g.h[1] +
                                 (V.w()(i, j, kp) - V.w()(i, j, k)) / g.h[2];
            }
}

double max_abs_divergence(const VelocityField& V) {
    ScalarField d(V.grid);
    divergence(V, d);
    double m = 0.0;
    for (double x : d.a.v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_velocity(const VelocityField& V) {
    double m = 0.0;
    for (const auto& c : V.comp)
        for (double x : c.v) m = std::max(m, std::abs(x));
    return m;
}

double l2_norm2(const VelocityField& V) {
    const double vol = V.grid.cell_volume();
    double s = 0.0;
    for (const auto& c : V.comp)
        s += block_sum(c.v.size(), [&](std::size_t lo, std::size_t hi) {
            double acc = 0.0;
            for (std::size_t m = lo; m < hi; ++m) acc += c.v[m] * c.v[m];
            return acc;
        });
    return s * vol;
}

double l2_norm2(const DevTensorField& S) {
    const double vol = S.grid.cell_volume();
    double s = 0.0;
    for (const auto& c : S.coord)
        s += block_sum(c.v.size(), [&](std::size_t lo, std::size_t hi) {
            double acc = 0.0;
            for (std::size_t m = lo; m < hi; ++m) acc += c.v[m] * c.v[m];
            return acc;
        });
    return s * vol;
}

double grad_norm2(const VelocityField& V, const BoundaryData& bc, double t) {
    const Grid& g = V.grid;
    Array3 pad[3];
    pad_velocity(V, bc, t, pad);
    const double vol = g.cell_volume();
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const Array3& a = pad[c];
        for (int axis = 0; axis < 3; ++axis) {
            const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
            double s = 0.0;
            if (axis == c) {
                // own-axis derivative at cell centers; no ghosts needed
                const int n0 = g.n[0], n1 = g.n[1], n2 = g.n[2];
                for (int k = 0; k < n2; ++k)
                    for (int j = 0; j < n1; ++j)
                        for (int i = 0; i < n0; ++i) {
                            int ip[3] = {i, j, k};
                            ip[axis] += 1;
                            const double d = (a(ip[0], ip[1], ip[2]) - a(i, j, k)) * invh;
                            s += d * d;
                        }
            } else {
                // transverse derivative at edges; wall rows use ghost values
                const int n_edges = g.periodic(axis) ? g.n[static_cast<std::size_t>(axis)]
                                                     : g.n[static_cast<std::size_t>(axis)] + 1;
                int dims[3] = {V.comp[c].n0, V.comp[c].n1, V.comp[c].n2};
                dims[axis] = n_edges;
                for (int k = 0; k < dims[2]; ++k)
                    for (int j = 0; j < dims[1]; ++j)
                        for (int i = 0; i < dims[0]; ++i) {
                            int im[3] = {i, j, k};
                            im[axis] -= 1;
                            const double d = (a(i, j, k) - a(im[0], im[1], im[2])) * invh;
                            s += d * d;
                        }
            }
            total += s;
        }
    }
    return total * vol;
}

double grad_norm2(const DevTensorField& S) {
    const Grid& g = S.grid;
    const double vol = g.cell_volume();
    double total = 0.0;
    std::array<Array3, 5> pad;
    pad_tensor(S, 1, pad);
    for (int c = 0; c < 5; ++c) {
        const Array3& a = pad[static_cast<std::size_t>(c)];
        for (int axis = 0; axis < 3; ++axis) {
            const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
            const int n_edges = g.periodic(axis) ? g.n[static_cast<std::size_t>(axis)]
                                                 : g.n[static_cast<std::size_t>(axis)] + 1;
            int dims[3] = {g.n[0], g.n[1], g.n[2]};
            dims[axis] = n_edges;
            double s = 0.0;
            for (int k = 0; k < dims[2]; ++k)
                for (int j = 0; j < dims[1]; ++j)
                    for (int i = 0; i < dims[0]; ++i) {
                        int im[3] = {i, j, k};
                        im[axis] -= 1;
                        const double d = (a(i, j, k) - a(im[0], im[1], im[2])) * invh;
                        s += d * d;
                    }
            total += s;
        }
    }
    return total * vol;
}

double grad_dot(const DevTensorField& A, const DevTensorField& B) {
    const Grid& g = A.grid;
    const double vol = g.cell_volume();
    double total = 0.0;
    std::array<Array3, 5> pa, pb;
    pad_tensor(A, 1, pa);
    pad_tensor(B, 1, pb);
    for (int c = 0; c < 5; ++c) {
        const Array3& a = pa[static_cast<std::size_t>(c)];
        const Array3& b = pb[static_cast<std::size_t>(c)];
        for (int axis = 0; axis < 3; ++axis) {
            const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
            const int n_edges = g.periodic(axis) ? g.n[static_cast<std::size_t>(axis)]
                                                 : g.n[static_cast<std::size_t>(axis)] + 1;
            int dims[3] = {g.n[0], g.n[1], g.n[2]};
            dims[axis] = n_edges;
            double s = 0.0;
            for (int k = 0; k < dims[2]; ++k)
                for (int j = 0; j < dims[1]; ++j)
                    for (int i = 0; i < dims[0]; ++i) {
                        int im[3] = {i, j, k};
                        im[axis] -= 1;
                        const double da = (a(i, j, k) - a(im[0], im[1], im[2])) * invh;
                        const double db = (b(i, j, k) - b(im[0], im[1], im[2])) * invh;
                        s += da * db;
                    }
            total += s;
        }
    }
    return total * vol;
}

Mat3 velocity_gradient_at(const Array3 pad[3], const Grid& g, int i, int j, int k) {
    Mat3 grad{};
    const int idx[3] = {i, j, k};
    for (int c = 0; c < 3; ++c) {
        const Array3& a = pad[c];
        for (int axis = 0; axis < 3; ++axis) {
            const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
            double d;
            if (axis == c) {
                int ip[3] = {i, j, k};
                ip[c] += 1;
                d = (a(ip[0], ip[1], ip[2]) - a(i, j, k)) * invh;
            } else {
                // centered difference of face-pair averages over 2h
                int lo[3] = {idx[0], idx[1], idx[2]}, hi[3] = {idx[0], idx[1], idx[2]};
                lo[axis] -= 1;
                hi[axis] += 1;
                int lo2[3] = {lo[0], lo[1], lo[2]}, hi2[3] = {hi[0], hi[1], hi[2]};
                lo2[c] += 1;
                hi2[c] += 1;
                const double below = 0.5 * (a(lo[0], lo[1], lo[2]) + a(lo2[0], lo2[1], lo2[2]));
                const double above = 0.5 * (a(hi[0], hi[1], hi[2]) + a(hi2[0], hi2[1], hi2[2]));
                d = (above - below) * 0.5 * invh;
            }
            grad(c, axis) = d;
        }
    }
    return grad;
}

std::array<double, 3> velocity_at_center(const Array3 pad[3], const Grid&, int i, int j, int k) {
    std::array<double, 3> v{};
    for (int c = 0; c < 3; ++c) {
        int hi[3] = {i, j, k};
        hi[c] += 1;
        v[static_cast<std::size_t>(c)] = 0.5 * (pad[c](i, j, k) + pad[c](hi[0], hi[1], hi[2]));
    }
    return v;
}

double max_norm(const DevTensorField& S) {
    double m2 = 0.0;
    const std::size_t n = S.coord[0].v.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        double s = 0.0;
        for (int c = 0; c < 5; ++c) {
            const double x = S.coord[static_cast<std::size_t>(c)].v[idx];
            s += x * x;
        }
        m2 = std::max(m2, s);
    }
    return std::sqrt(m2);
}

void axpy(VelocityField& a, double s, const VelocityField& b) {
    for (int c = 0; c < 3; ++c)
        for (std::size_t m = 0; m < a.comp[c].v.size(); ++m) a.comp[c].v[m] += s * b.comp[c].v[m];
}

void axpy(DevTensorField& a, double s, const DevTensorField& b) {
    for (int c = 0; c < 5; ++c)
        for (std::size_t m = 0; m < a.coord[static_cast<std::size_t>(c)].v.size(); ++m)
            a.coord[static_cast<std::size_t>(c)].v[m] += s * b.coord[static_cast<std::size_t>(c)].v[m];
}

}  // namespace vpflow
