#include "vpflow/solver.hpp"

#include <algorithm>
#include <cmath>

#include "vpflow/parallel.hpp"
#include "vpflow/snapshot.hpp"

namespace vpflow {

namespace {

struct CgOutcome {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

CgOutcome conjugate_gradient(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                             const std::vector<double>& diag, const std::vector<double>& b, std::vector<double>& x,
                             double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    CgOutcome out;
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        out.converged = true;
        return out;
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] > 0.0 ? r[i] / diag[i] : r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        const double rnorm = std::sqrt(dot(r, r));
        out.iterations = it;
        out.rel_residual = rnorm / bnorm;
        if (rnorm <= rel_tol * bnorm) {
            out.converged = true;
            return out;
        }
        apply(p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] > 0.0 ? r[i] / diag[i] : r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return out;
}

void flat_to_array(const std::vector<double>& x, Array3& a) {
    std::size_t m = 0;
    for (int k = 0; k < a.n2; ++k)
        for (int j = 0; j < a.n1; ++j)
            for (int i = 0; i < a.n0; ++i) a(i, j, k) = x[m++];
}

void array_to_flat(const Array3& a, std::vector<double>& x) {
    x.resize(a.interior_count());
    std::size_t m = 0;
    for (int k = 0; k < a.n2; ++k)
        for (int j = 0; j < a.n1; ++j)
            for (int i = 0; i < a.n0; ++i) x[m++] = a(i, j, k);
}

/// out = x - coef * Laplacian(x) for a cell field with Neumann/periodic ghosts.
void helmholtz_cell_apply(const Grid& g, double coef, const std::vector<double>& x, std::vector<double>& out) {
    Array3 tmp(g.n[0], g.n[1], g.n[2]);
    flat_to_array(x, tmp);
    Array3 pad;
    pad_tensor_coord(tmp, g, 1, pad);
    out.resize(x.size());
    std::size_t m = 0;
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i, ++m) {
                double lap = 0.0;
                lap += (pad(i + 1, j, k) - 2.0 * pad(i, j, k) + pad(i - 1, j, k)) / (g.h[0] * g.h[0]);
                lap += (pad(i, j + 1, k) - 2.0 * pad(i, j, k) + pad(i, j - 1, k)) / (g.h[1] * g.h[1]);
                lap += (pad(i, j, k + 1) - 2.0 * pad(i, j, k) + pad(i, j, k - 1)) / (g.h[2] * g.h[2]);
                out[m] = pad(i, j, k) - coef * lap;
            }
}

bool face_fixed(const Grid& g, int comp, int i, int j, int k) {
    const int idx[3] = {i, j, k};
    return !g.periodic(comp) && (idx[comp] == 0 || idx[comp] == g.n[static_cast<std::size_t>(comp)]);
}

void zero_fixed_faces(const Grid& g, int comp, Array3& a) {
    if (g.periodic(comp)) return;
    for (int k = 0; k < a.n2; ++k)
        for (int j = 0; j < a.n1; ++j)
            for (int i = 0; i < a.n0; ++i)
                if (face_fixed(g, comp, i, j, k)) a(i, j, k) = 0.0;
}

/// out = x - coef * Laplacian(x) for one velocity component with homogeneous
/// wall data; wall-normal faces are held fixed (identity rows).
Array3 component_array(const Grid& g, int comp) {
    if (comp == 0) return Array3(g.faces(0), g.n[1], g.n[2]);
    if (comp == 1) return Array3(g.n[0], g.faces(1), g.n[2]);
    return Array3(g.n[0], g.n[1], g.faces(2));
}

void helmholtz_face_apply(const Grid& g, int comp, double coef, const std::vector<double>& x,
                          std::vector<double>& out) {
    const BoundaryData zero_bc{};
    Array3 tmp = component_array(g, comp);
    flat_to_array(x, tmp);
    zero_fixed_faces(g, comp, tmp);
    Array3 pad;
    pad_velocity_component(tmp, g, comp, zero_bc, 0.0, pad);
    out.resize(x.size());
    std::size_t m = 0;
    for (int k = 0; k < tmp.n2; ++k)
        for (int j = 0; j < tmp.n1; ++j)
            for (int i = 0; i < tmp.n0; ++i, ++m) {
                if (face_fixed(g, comp, i, j, k)) {
                    out[m] = x[m];
                    continue;
                }
                double lap = 0.0;
                lap += (pad(i + 1, j, k) - 2.0 * pad(i, j, k) + pad(i - 1, j, k)) / (g.h[0] * g.h[0]);
                lap += (pad(i, j + 1, k) - 2.0 * pad(i, j, k) + pad(i, j - 1, k)) / (g.h[1] * g.h[1]);
                lap += (pad(i, j, k + 1) - 2.0 * pad(i, j, k) + pad(i, j, k - 1)) / (g.h[2] * g.h[2]);
                out[m] = pad(i, j, k) - coef * lap;
            }
}

/// Laplacian contribution of the inhomogeneous wall ghosts alone: the
/// Laplacian of the zero field padded with the Dirichlet data g(t).
void boundary_laplacian(const Grid& g, int comp, const BoundaryData& bc, double t, std::vector<double>& out) {
    Array3 zero = component_array(g, comp);
    Array3 pad;
    pad_velocity_component(zero, g, comp, bc, t, pad);
    out.assign(zero.interior_count(), 0.0);
    std::size_t m = 0;
    for (int k = 0; k < zero.n2; ++k)
        for (int j = 0; j < zero.n1; ++j)
            for (int i = 0; i < zero.n0; ++i, ++m) {
                if (face_fixed(g, comp, i, j, k)) continue;
                double lap = 0.0;
                lap += (pad(i + 1, j, k) + pad(i - 1, j, k)) / (g.h[0] * g.h[0]);
                lap += (pad(i, j + 1, k) + pad(i, j - 1, k)) / (g.h[1] * g.h[1]);
                lap += (pad(i, j, k + 1) + pad(i, j, k - 1)) / (g.h[2] * g.h[2]);
                out[m] = lap;
            }
}

std::vector<double> cell_diag(const Grid& g, double coef) {
    std::vector<double> diag(g.cells());
    std::size_t m = 0;
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i, ++m) {
                const int idx[3] = {i, j, k};
                double d = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const double inv2 = 1.0 / (g.h[static_cast<std::size_t>(a)] * g.h[static_cast<std::size_t>(a)]);
                    if (g.periodic(a)) {
                        if (g.n[static_cast<std::size_t>(a)] > 1) d += 2.0 * inv2;
                    } else {
                        int c = 2;
                        if (idx[a] == 0) --c;
                        if (idx[a] == g.n[static_cast<std::size_t>(a)] - 1) --c;
                        d += c * inv2;
                    }
                }
                diag[m] = 1.0 + coef * d;  // for I - coef*Lap; Poisson uses coef*d directly
            }
    return diag;
}

}  // namespace

void project(VelocityField& V, ScalarField& pressure, double rel_tol) {
    const Grid& g = V.grid;
    ScalarField div(g);
    divergence(V, div);
    std::vector<double> b;
    array_to_flat(div.a, b);
    for (double& x : b) x = -x;
    // compatible Neumann/periodic data: remove the mean
    double mean = 0.0;
    for (double x : b) mean += x;
    mean /= static_cast<double>(b.size());
    for (double& x : b) x -= mean;

    std::vector<double> phi;
    array_to_flat(pressure.a, phi);  // warm start from the previous multiplier
    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        // helmholtz with unit coefficient gives x - Lap x; drop x for -Lap
        helmholtz_cell_apply(g, 1.0, x, out);
        for (std::size_t i = 0; i < x.size(); ++i) out[i] -= x[i];
    };
    std::vector<double> diag = cell_diag(g, 1.0);
    for (double& d : diag) d -= 1.0;  // Poisson diagonal (no identity part)
    for (double& d : diag)
        if (d <= 0.0) d = 1.0;
    const auto res = conjugate_gradient(apply, diag, b, phi, rel_tol, 20000);
    if (!res.converged) throw SolverDiverged("pressure projection", res.iterations, res.rel_residual);

    Array3 phia(g.n[0], g.n[1], g.n[2]);
    flat_to_array(phi, phia);
    Array3 pad;
    pad_tensor_coord(phia, g, 1, pad);
    for (int c = 0; c < 3; ++c) {
        Array3& a = V.comp[c];
        for (int k = 0; k < a.n2; ++k)
            for (int j = 0; j < a.n1; ++j)
                for (int i = 0; i < a.n0; ++i) {
                    if (face_fixed(g, c, i, j, k)) continue;
                    int lo[3] = {i, j, k};
                    lo[c] -= 1;
                    a(i, j, k) -= (pad(i, j, k) - pad(lo[0], lo[1], lo[2])) / g.h[static_cast<std::size_t>(c)];
                }
    }
    flat_to_array(phi, pressure.a);
}

GridSolver::GridSolver(const SimConfig& cfg) : cfg_(cfg), pot_(cfg.potential.build()) { validate(cfg_); }

SimState GridSolver::initial_state() const {
    const Grid& g = cfg_.grid;
    SimState st(g);
    const auto box = g.box();

    if (cfg_.initial_v_snapshot) {
        const SimState loaded = read_snapshot(*cfg_.initial_v_snapshot);
        if (loaded.V.grid.n != g.n) throw std::runtime_error("initial.v.snapshot: grid mismatch");
        st.V = loaded.V;
        st.V.grid = g;
    } else {
        for (int c = 0; c < 3; ++c) {
            Array3& a = st.V.comp[c];
            for (int k = 0; k < a.n2; ++k)
                for (int j = 0; j < a.n1; ++j)
                    for (int i = 0; i < a.n0; ++i) {
                        const int idx[3] = {i, j, k};
                        std::array<double, 3> x{};
                        for (int axis = 0; axis < 3; ++axis)
                            x[static_cast<std::size_t>(axis)] =
                                axis == c ? g.face(axis, idx[axis]) : g.center(axis, idx[axis]);
                        a(i, j, k) = cfg_.initial_v.value(x, box)[static_cast<std::size_t>(c)];
                    }
        }
    }
    for (int c = 0; c < 3; ++c) zero_fixed_faces(g, c, st.V.comp[c]);
    project(st.V, st.P, cfg_.tol_solver);
    for (auto& x : st.P.a.v) x = 0.0;

    if (cfg_.initial_s_snapshot) {
        const SimState loaded = read_snapshot(*cfg_.initial_s_snapshot);
        if (loaded.S.grid.n != g.n) throw std::runtime_error("initial.s.snapshot: grid mismatch");
        st.S = loaded.S;
        st.S.grid = g;
    } else {
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const std::array<double, 3> x{g.center(0, i), g.center(1, j), g.center(2, k)};
                    st.S.set(i, j, k, cfg_.initial_s.value(x, box));
                }
    }
    return st;
}

void GridSolver::tensor_stage(SimState& state, const Array3 vel_pad[3]) const {
    const Grid& g = cfg_.grid;
    const double dt = cfg_.dt;
    const std::size_t ncells = g.cells();

    // spin tensors of the frozen velocity
    std::vector<Mat3> spins(ncells);
    {
        std::size_t m = 0;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i, ++m)
                    spins[m] = spin(velocity_gradient_at(vel_pad, g, i, j, k));
    }

    auto rhs_at = [&](const std::array<Array3, 5>& spad, int i, int j, int k, const Mat3& w) {
        DevTensor adv;
        const int idx[3] = {i, j, k};
        for (int axis = 0; axis < 3; ++axis) {
            const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
            // face velocities bounding this cell along `axis`
            int flo[3] = {i, j, k}, fhi[3] = {i, j, k};
            fhi[axis] += 1;
            const double ulo = vel_pad[axis](flo[0], flo[1], flo[2]);
            const double uhi = vel_pad[axis](fhi[0], fhi[1], fhi[2]);
            for (int c = 0; c < 5; ++c) {
                const Array3& a = spad[static_cast<std::size_t>(c)];
                auto cellv = [&](int off) {
                    int p[3] = {idx[0], idx[1], idx[2]};
                    p[axis] += off;
                    return a(p[0], p[1], p[2]);
                };
                // second-order upwind reconstruction at the two faces
                double slo, shi;
                if (ulo > 0.0)
                    slo = 1.5 * cellv(-1) - 0.5 * cellv(-2);
                else if (ulo < 0.0)
                    slo = 1.5 * cellv(0) - 0.5 * cellv(1);
                else
                    slo = 0.5 * (cellv(-1) + cellv(0));
                if (uhi > 0.0)
                    shi = 1.5 * cellv(0) - 0.5 * cellv(-1);
                else if (uhi < 0.0)
                    shi = 1.5 * cellv(1) - 0.5 * cellv(2);
                else
                    shi = 0.5 * (cellv(0) + cellv(1));
                adv[c] += (uhi * shi - ulo * slo) * invh;
            }
        }
        DevTensor s;
        for (int c = 0; c < 5; ++c) s[c] = spad[static_cast<std::size_t>(c)](i, j, k);
        const DevTensor rot = jaumann_commutator_unchecked(s, w);
        DevTensor out;
        for (int c = 0; c < 5; ++c) out[c] = -adv[c] - rot[c];
        return out;
    };

    std::array<Array3, 5> spad;
    pad_tensor(state.S, 2, spad);

    DevTensorField half(g);
    {
        std::size_t m = 0;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i, ++m) {
                    const DevTensor l = rhs_at(spad, i, j, k, spins[m]);
                    half.set(i, j, k, state.S.at(i, j, k) + (0.5 * dt) * l);
                }
    }
    std::array<Array3, 5> hpad;
    pad_tensor(half, 2, hpad);
    {
        std::size_t m = 0;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i, ++m) {
                    const DevTensor l = rhs_at(hpad, i, j, k, spins[m]);
                    state.S.set(i, j, k, state.S.at(i, j, k) + dt * l);
                }
    }

    // stress diffusion, Crank-Nicolson
    const double cdiff = 0.5 * cfg_.gamma * dt;
    const std::vector<double> diag = cell_diag(g, cdiff);
    for (int c = 0; c < 5; ++c) {
        std::vector<double> sc;
        array_to_flat(state.S.coord[static_cast<std::size_t>(c)], sc);
        std::vector<double> rhs;
        helmholtz_cell_apply(g, -cdiff, sc, rhs);  // (I + cdiff*Lap) s
        std::vector<double> x = sc;
        auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
            helmholtz_cell_apply(g, cdiff, in, out);
        };
        const auto res = conjugate_gradient(apply, diag, rhs, x, cfg_.tol_solver, 20000);
        if (!res.converged) throw SolverDiverged("stress diffusion", res.iterations, res.rel_residual);
        flat_to_array(x, state.S.coord[static_cast<std::size_t>(c)]);
    }

    // strain-rate source
    if (!cfg_.eta2_zero && cfg_.eta != 0.0) {
        std::size_t m = 0;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i, ++m) {
                    const Mat3 grad = velocity_gradient_at(vel_pad, g, i, j, k);
                    const DevTensor d = dev_sym_project(strain_rate(grad));
                    state.S.set(i, j, k, state.S.at(i, j, k) + (dt * cfg_.eta) * d);
                }
    }

    // plastic step: exact implicit prox for eps = 0, explicit envelope
    // gradient otherwise
    const std::size_t n5 = state.S.coord[0].v.size();
    if (cfg_.eps == 0.0) {
        for (std::size_t m = 0; m < n5; ++m) {
            DevTensor s;
            for (int c = 0; c < 5; ++c) s[c] = state.S.coord[static_cast<std::size_t>(c)].v[m];
            const DevTensor p = pot_.prox(s, dt);
            for (int c = 0; c < 5; ++c) state.S.coord[static_cast<std::size_t>(c)].v[m] = p[c];
        }
    } else {
        for (std::size_t m = 0; m < n5; ++m) {
            DevTensor s;
            for (int c = 0; c < 5; ++c) s[c] = state.S.coord[static_cast<std::size_t>(c)].v[m];
            const DevTensor gfull = pot_.moreau_grad(s, cfg_.eps);
            for (int c = 0; c < 5; ++c) state.S.coord[static_cast<std::size_t>(c)].v[m] = s[c] - dt * gfull[c];
        }
    }
}

void GridSolver::velocity_stage(SimState& state, const Array3 vel_pad[3], double t_new) const {
    const Grid& g = cfg_.grid;
    const double dt = cfg_.dt;
    const double t_old = state.t;
    const auto box = g.box();

    // stress force eta * Div S and tensor forcing divergence at faces
    std::array<Array3, 5> spad;
    pad_tensor(state.S, 1, spad);
    DevTensorField f1field(g);
    const bool has_f1 = cfg_.forcing.f1.kind != TensorProfile::Kind::Zero;
    if (has_f1) {
        const double amp = cfg_.forcing.f1_time.value(t_old);
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const std::array<double, 3> x{g.center(0, i), g.center(1, j), g.center(2, k)};
                    f1field.set(i, j, k, amp * cfg_.forcing.f1.value(x, box));
                }
    }
    std::array<Array3, 5> f1pad;
    if (has_f1) pad_tensor(f1field, 1, f1pad);

    // tensor divergence (row `comp` of the full matrix) evaluated at component
    // faces: own-axis entry differenced across the face, off-diagonal entries
    // averaged over the adjacent cell pair and differenced centrally
    auto tensor_div_at = [&](const std::array<Array3, 5>& tpad, int comp, int i, int j, int k) {
        double acc = 0.0;
        const int idx[3] = {i, j, k};
        auto entry = [&](const int p[3], int axis) {
            DevTensor s;
            for (int c = 0; c < 5; ++c) s[c] = tpad[static_cast<std::size_t>(c)](p[0], p[1], p[2]);
            return s.to_mat3()(comp, axis);
        };
        for (int axis = 0; axis < 3; ++axis) {
            const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
            if (axis == comp) {
                int hi[3] = {idx[0], idx[1], idx[2]};
                int lo[3] = {idx[0], idx[1], idx[2]};
                lo[comp] -= 1;
                acc += (entry(hi, axis) - entry(lo, axis)) * invh;
            } else {
                for (int side = 0; side < 2; ++side) {  // the two adjacent cells along comp
                    int up[3] = {idx[0], idx[1], idx[2]};
                    up[comp] -= side;
                    int dn[3] = {up[0], up[1], up[2]};
                    up[axis] += 1;
                    dn[axis] -= 1;
                    acc += 0.5 * (entry(up, axis) - entry(dn, axis)) * 0.5 * invh;
                }
            }
        }
        return acc;
    };

    for (int c = 0; c < 3; ++c) {
        Array3& u = state.V.comp[c];
        std::vector<double> rhs(u.interior_count());
        std::size_t m = 0;
        for (int k = 0; k < u.n2; ++k)
            for (int j = 0; j < u.n1; ++j)
                for (int i = 0; i < u.n0; ++i, ++m) {
                    if (face_fixed(g, c, i, j, k)) {
                        rhs[m] = 0.0;
                        continue;
                    }
                    const int idx[3] = {i, j, k};
                    // divergence-form advection with centered interpolation
                    double adv = 0.0;
                    for (int axis = 0; axis < 3; ++axis) {
                        const double invh = 1.0 / g.h[static_cast<std::size_t>(axis)];
                        double flux_hi, flux_lo;
                        if (axis == c) {
                            // fluxes u_c^2 at the adjacent cell centers
                            int lo[3] = {idx[0], idx[1], idx[2]};
                            lo[c] -= 1;
                            const double uc_hi = 0.5 * (vel_pad[c](i, j, k) +
                                                        vel_pad[c](i + (c == 0), j + (c == 1), k + (c == 2)));
                            const double uc_lo = 0.5 * (vel_pad[c](lo[0], lo[1], lo[2]) + vel_pad[c](i, j, k));
                            flux_hi = uc_hi * uc_hi;
                            flux_lo = uc_lo * uc_lo;
                        } else {
                            // fluxes (u_axis avg over comp dir) * (u_c avg over axis) at edges
                            auto edge_flux = [&](int shift) {
                                int e[3] = {idx[0], idx[1], idx[2]};
                                e[axis] += shift;  // edge at face `axis` index idx[axis]+shift
                                // u_axis at that face, averaged across comp direction
                                int a1[3] = {e[0], e[1], e[2]};
                                int a0[3] = {e[0], e[1], e[2]};
                                a0[c] -= 1;
                                const double ua =
                                    0.5 * (vel_pad[axis](a1[0], a1[1], a1[2]) + vel_pad[axis](a0[0], a0[1], a0[2]));
                                // u_c averaged across axis direction to the edge
                                int b1[3] = {idx[0], idx[1], idx[2]};
                                b1[axis] += shift;
                                int b0[3] = {b1[0], b1[1], b1[2]};
                                b0[axis] -= 1;
                                const double uc =
                                    0.5 * (vel_pad[c](b1[0], b1[1], b1[2]) + vel_pad[c](b0[0], b0[1], b0[2]));
                                return ua * uc;
                            };
                            flux_hi = edge_flux(1);
                            flux_lo = edge_flux(0);
                        }
                        adv -= (flux_hi - flux_lo) * invh;
                    }

                    std::array<double, 3> x{};
                    for (int axis = 0; axis < 3; ++axis)
                        x[static_cast<std::size_t>(axis)] =
                            axis == c ? g.face(axis, idx[axis]) : g.center(axis, idx[axis]);
                    double force = cfg_.forcing.f0.kind == VectorProfile::Kind::Zero
                                       ? 0.0
                                       : cfg_.forcing.f0_time.value(t_old) *
                                             cfg_.forcing.f0.value(x, box)[static_cast<std::size_t>(c)];
                    if (cfg_.eta != 0.0) force += cfg_.eta * tensor_div_at(spad, c, i, j, k);
                    if (has_f1) force += tensor_div_at(f1pad, c, i, j, k);

                    rhs[m] = u(i, j, k) + dt * (adv + force);
                }

        // Crank-Nicolson viscosity
        const double cvisc = 0.5 * cfg_.mu * dt;
        std::vector<double> uflat;
        array_to_flat(u, uflat);
        std::vector<double> lap_old;
        helmholtz_face_apply(g, c, -cvisc, uflat, lap_old);  // (I + cvisc*Lap_hom) u
        std::vector<double> bc_old, bc_new;
        boundary_laplacian(g, c, cfg_.boundary, t_old, bc_old);
        boundary_laplacian(g, c, cfg_.boundary, t_new, bc_new);
        for (std::size_t q = 0; q < rhs.size(); ++q)
            rhs[q] += lap_old[q] - uflat[q] + cvisc * (bc_old[q] + bc_new[q]);
        std::size_t q = 0;
        for (int k = 0; k < u.n2; ++k)
            for (int j = 0; j < u.n1; ++j)
                for (int i = 0; i < u.n0; ++i, ++q)
                    if (face_fixed(g, c, i, j, k)) rhs[q] = 0.0;

        std::vector<double> diag(rhs.size(), 1.0);
        {
            // diagonal of I - cvisc*Lap with homogeneous ghosts
            std::size_t m2 = 0;
            for (int k = 0; k < u.n2; ++k)
                for (int j = 0; j < u.n1; ++j)
                    for (int i = 0; i < u.n0; ++i, ++m2) {
                        if (face_fixed(g, c, i, j, k)) continue;
                        const int idx[3] = {i, j, k};
                        double d = 0.0;
                        for (int a = 0; a < 3; ++a) {
                            const double inv2 =
                                1.0 / (g.h[static_cast<std::size_t>(a)] * g.h[static_cast<std::size_t>(a)]);
                            if (g.periodic(a)) {
                                if (g.n[static_cast<std::size_t>(a)] > 1) d += 2.0 * inv2;
                            } else if (a == c) {
                                d += 2.0 * inv2;  // neighbors are true unknowns or fixed zeros
                            } else {
                                // tangential ghosts reflect: ghost = -interior
                                int cnt = 2;
                                const int na = g.n[static_cast<std::size_t>(a)];
                                if (idx[a] == 0) cnt += 1;  // ghost adds +1 to the diagonal
                                if (idx[a] == na - 1) cnt += 1;
                                d += cnt * inv2;
                            }
                        }
                        diag[m2] = 1.0 + cvisc * d;
                    }
        }
        std::vector<double> x = uflat;
        auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
            helmholtz_face_apply(g, c, cvisc, in, out);
        };
        const auto res = conjugate_gradient(apply, diag, rhs, x, cfg_.tol_solver, 20000);
        if (!res.converged) throw SolverDiverged("viscous velocity", res.iterations, res.rel_residual);
        flat_to_array(x, u);
        zero_fixed_faces(g, c, u);
    }

    ScalarField phi(g);
    phi.a = state.P.a;
    for (auto& v : phi.a.v) v *= dt;  // warm start: previous multiplier
    project(state.V, phi, cfg_.tol_solver);
    state.P.a = phi.a;
    for (auto& v : state.P.a.v) v /= dt;
}

void GridSolver::step(SimState& state) const {
    const Grid& g = cfg_.grid;
    const double maxv = max_abs_velocity(state.V);
    const double hmin = std::min({g.h[0], g.h[1], g.h[2]});
    if (maxv > 0.0) {
        const double limit = 0.5 * hmin / maxv;
        if (cfg_.dt > limit) throw CflViolation(cfg_.dt, limit);
    }

    Array3 vel_pad[3];
    pad_velocity(state.V, cfg_.boundary, state.t, vel_pad);

    tensor_stage(state, vel_pad);
    velocity_stage(state, vel_pad, state.t + cfg_.dt);
    state.t += cfg_.dt;
}

void GridSolver::run(const RunHooks& hooks) const {
    SimState st = initial_state();
    if (hooks.on_ledger_sample) hooks.on_ledger_sample(st);
    if (hooks.on_output) hooks.on_output(st);
    const long n_steps = cfg_.t_end <= 0.0 ? 0 : std::llround(cfg_.t_end / cfg_.dt);
    const long out_every = std::max<long>(1, std::llround(cfg_.output_interval / cfg_.dt));
    for (long n = 1; n <= n_steps; ++n) {
        step(st);
        if (hooks.on_ledger_sample && (n % cfg_.ledger_every_steps == 0 || n == n_steps)) hooks.on_ledger_sample(st);
        if (hooks.on_output && (n % out_every == 0 || n == n_steps)) hooks.on_output(st);
    }
}

}  // namespace vpflow
