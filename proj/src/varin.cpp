#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vpflow/ledger.hpp"
#include "vpflow/potential.hpp"
#include "vpflow/rng.hpp"
#include "vpflow/solver.hpp"

namespace vpflow {

namespace {

double safe_value(const PotentialSpec& pot, const DevTensor& s) {
    if (pot.kind() == PotentialKind::YieldBall) {
        const double n = s.norm();
        const double sy = pot.sigma_yield();
        if (n > sy && n <= sy * (1.0 + 1e-9)) return pot.value((sy / n) * s);
    }
    return pot.value(s);
}

struct TestField {
    std::string name;
    std::vector<DevTensorField> value;       // per snapshot
    std::vector<DevTensorField> derivative;  // d/dt per snapshot
};

TestField zero_field(const std::vector<SimState>& traj) {
    TestField f;
    f.name = "zero";
    const Grid& g = traj.front().V.grid;
    f.value.assign(traj.size(), DevTensorField(g));
    f.derivative.assign(traj.size(), DevTensorField(g));
    return f;
}

TestField constant_field(const std::vector<SimState>& traj, const SimConfig& cfg) {
    TestField f;
    f.name = "constant";
    const Grid& g = traj.front().V.grid;
    DevTensor c;
    c[0] = 1.0;
    c[1] = 0.5;
    c[2] = -0.3;
    c[3] = 0.2;
    c[4] = -0.1;
    double scale = cfg.varin_amplitude / c.norm();
    if (cfg.potential.kind == PotentialKind::YieldBall)
        scale = std::min(scale, 0.5 * cfg.potential.sigma_yield / c.norm());
    c *= scale;
    DevTensorField field(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) field.set(i, j, k, c);
    f.value.assign(traj.size(), field);
    f.derivative.assign(traj.size(), DevTensorField(g));
    return f;
}

TestField mollified_field(const std::vector<SimState>& traj, const SimConfig& cfg) {
    TestField f;
    f.name = "mollified";
    const Grid& g = traj.front().V.grid;
    const int n = static_cast<int>(traj.size());
    const int w = cfg.varin_mollify_width;
    // smooth compactly supported kernel, normalized
    std::vector<double> kern(static_cast<std::size_t>(2 * w + 1));
    double ksum = 0.0;
    for (int m = -w; m <= w; ++m) {
        const double s = static_cast<double>(m) / (w + 1);
        kern[static_cast<std::size_t>(m + w)] = (1.0 - s * s) * (1.0 - s * s);
        ksum += kern[static_cast<std::size_t>(m + w)];
    }
    for (auto& x : kern) x /= ksum;

    f.value.assign(traj.size(), DevTensorField(g));
    for (int idx = 0; idx < n; ++idx) {
        DevTensorField& out = f.value[static_cast<std::size_t>(idx)];
        for (int m = -w; m <= w; ++m) {
            const int src = std::clamp(idx + m, 0, n - 1);
            const double kv = kern[static_cast<std::size_t>(m + w)];
            for (int c = 0; c < 5; ++c) {
                const auto& sv = traj[static_cast<std::size_t>(src)].S.coord[static_cast<std::size_t>(c)].v;
                auto& ov = out.coord[static_cast<std::size_t>(c)].v;
                for (std::size_t q = 0; q < ov.size(); ++q) ov[q] += kv * sv[q];
            }
        }
    }
    f.derivative.assign(traj.size(), DevTensorField(g));
    for (int idx = 0; idx < n; ++idx) {
        const int lo = std::max(0, idx - 1), hi = std::min(n - 1, idx + 1);
        const double dt = traj[static_cast<std::size_t>(hi)].t - traj[static_cast<std::size_t>(lo)].t;
        if (dt <= 0.0) continue;
        for (int c = 0; c < 5; ++c) {
            const auto& ahi = f.value[static_cast<std::size_t>(hi)].coord[static_cast<std::size_t>(c)].v;
            const auto& alo = f.value[static_cast<std::size_t>(lo)].coord[static_cast<std::size_t>(c)].v;
            auto& dv = f.derivative[static_cast<std::size_t>(idx)].coord[static_cast<std::size_t>(c)].v;
            for (std::size_t q = 0; q < dv.size(); ++q) dv[q] = (ahi[q] - alo[q]) / dt;
        }
    }
    return f;
}

TestField random_field(const std::vector<SimState>& traj, const SimConfig& cfg, Rng& rng, int index) {
    TestField f;
    f.name = "random_" + std::to_string(index);
    const Grid& g = traj.front().V.grid;
    const auto box = g.box();
    const double t_end = traj.back().t;

    struct Component {
        std::array<int, 3> k;
        int frame;
        bool sine;
        double amp, omega, phase;
    };
    std::vector<Component> comps;
    const int kmax = std::max(0, cfg.varin_max_wave);
    for (int q = 0; q < 3; ++q) {
        Component c;
        for (int a = 0; a < 3; ++a)
            c.k[static_cast<std::size_t>(a)] =
                g.n[static_cast<std::size_t>(a)] > 1 ? static_cast<int>(rng.integer_below(2 * kmax + 1)) - kmax : 0;
        c.frame = static_cast<int>(rng.integer_below(5));
        c.sine = rng.uniform() < 0.5;
        c.amp = rng.normal();
        c.omega = rng.uniform(0.0, t_end > 0.0 ? 2.0 * M_PI / t_end : 1.0);
        c.phase = rng.uniform(0.0, 2.0 * M_PI);
        comps.push_back(c);
    }

    auto spatial = [&](const Component& c, const std::array<double, 3>& x) {
        double phase = 0.0;
        for (int a = 0; a < 3; ++a)
            phase += 2.0 * M_PI * c.k[static_cast<std::size_t>(a)] / box[static_cast<std::size_t>(a)] *
                     x[static_cast<std::size_t>(a)];
        return c.sine ? std::sin(phase) : std::cos(phase);
    };

    // normalize the worst-case pointwise norm so yield-ball potentials stay finite
    double max_norm_est = 0.0;
    for (const auto& c : comps) max_norm_est += std::abs(c.amp);
    double scale = cfg.varin_amplitude / std::max(max_norm_est, 1e-12);
    if (cfg.potential.kind == PotentialKind::YieldBall)
        scale = std::min(scale, 0.8 * cfg.potential.sigma_yield / std::max(max_norm_est, 1e-12));

    f.value.assign(traj.size(), DevTensorField(g));
    f.derivative.assign(traj.size(), DevTensorField(g));
    for (std::size_t idx = 0; idx < traj.size(); ++idx) {
        const double t = traj[idx].t;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const std::array<double, 3> x{g.center(0, i), g.center(1, j), g.center(2, k)};
                    DevTensor val, dval;
                    for (const auto& c : comps) {
                        const double sp = spatial(c, x) * scale * c.amp;
                        val[c.frame] += sp * std::cos(c.omega * t + c.phase);
                        dval[c.frame] += -sp * c.omega * std::sin(c.omega * t + c.phase);
                    }
                    f.value[idx].set(i, j, k, val);
                    f.derivative[idx].set(i, j, k, dval);
                }
    }
    return f;
}

}  // namespace

VarInReport check_variational_inequality(const std::vector<SimState>& traj, const SimConfig& cfg, double tol) {
    if (traj.size() < 2) throw IncompatibleSampling("need at least two snapshots");
    for (std::size_t i = 1; i < traj.size(); ++i)
        if (!(traj[i].t > traj[i - 1].t)) throw IncompatibleSampling("snapshot times must increase");

    const Grid& g = traj.front().V.grid;
    const double vol = g.cell_volume();
    const PotentialSpec pot = cfg.potential.build();
    const double eta2 = cfg.eta2_zero ? 0.0 : cfg.eta;
    const BoundaryData& bc = cfg.boundary;

    VarInReport rep;
    const InstantTerms t0 = instantaneous_terms(traj.front(), cfg);
    rep.tol_abs = tol * (1.0 + t0.kinetic + t0.elastic);

    // per-snapshot velocity pads and derived quantities, shared by all cases
    std::vector<std::vector<Mat3>> spins(traj.size()), strains(traj.size());
    std::vector<std::vector<std::array<double, 3>>> centers(traj.size());
    std::vector<std::vector<DevTensor>> grad_s(traj.size());  // (V.grad)S contraction pieces
    for (std::size_t n = 0; n < traj.size(); ++n) {
        Array3 vpad[3];
        pad_velocity(traj[n].V, bc, traj[n].t, vpad);
        std::array<Array3, 5> spad;
        pad_tensor(traj[n].S, 1, spad);
        spins[n].reserve(g.cells());
        strains[n].reserve(g.cells());
        centers[n].reserve(g.cells());
        grad_s[n].reserve(g.cells());
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const Mat3 gv = velocity_gradient_at(vpad, g, i, j, k);
                    spins[n].push_back(spin(gv));
                    strains[n].push_back(strain_rate(gv));
                    const auto vc = velocity_at_center(vpad, g, i, j, k);
                    centers[n].push_back(vc);
                    // (V . grad) S at the cell, centered differences
                    DevTensor adv;
                    for (int axis = 0; axis < 3; ++axis) {
                        const double invh = 0.5 / g.h[static_cast<std::size_t>(axis)];
                        int hi[3] = {i, j, k}, lo[3] = {i, j, k};
                        hi[axis] += 1;
                        lo[axis] -= 1;
                        for (int c = 0; c < 5; ++c)
                            adv[c] += vc[static_cast<std::size_t>(axis)] *
                                      (spad[static_cast<std::size_t>(c)](hi[0], hi[1], hi[2]) -
                                       spad[static_cast<std::size_t>(c)](lo[0], lo[1], lo[2])) *
                                      invh;
                    }
                    grad_s[n].push_back(adv);
                }
    }

    auto eval_case = [&](const TestField& f) {
        VarInCase vc;
        vc.name = f.name;
        std::array<double, 6> acc{};
        std::array<double, 6> prev{};
        for (std::size_t n = 0; n < traj.size(); ++n) {
            std::array<double, 6> cur{};
            const auto& S = traj[n].S;
            const auto& Sm = f.value[n];
            const auto& dSm = f.derivative[n];
            // group 2 via the shared gradient quadratures
            cur[1] = cfg.gamma * (grad_dot(S, Sm) - grad_norm2(S));
            std::size_t cell = 0;
            double g1 = 0.0, g3 = 0.0, g4 = 0.0, g5 = 0.0, g6 = 0.0;
            for (int k = 0; k < g.n[2]; ++k)
                for (int j = 0; j < g.n[1]; ++j)
                    for (int i = 0; i < g.n[0]; ++i, ++cell) {
                        const DevTensor s = S.at(i, j, k);
                        const DevTensor sm = Sm.at(i, j, k);
                        const DevTensor diff = sm - s;
                        g1 += frobenius(dSm.at(i, j, k), diff);
                        if (cfg.eps > 0.0)
                            g3 += pot.moreau_value(sm, cfg.eps) - pot.moreau_value(s, cfg.eps);
                        else
                            g3 += safe_value(pot, sm) - safe_value(pot, s);
                        g4 += frobenius(grad_s[n][cell], sm);
                        g5 += frobenius(jaumann_commutator_unchecked(s, spins[n][cell]), sm);
                        g6 -= eta2 * frobenius(strains[n][cell], diff.to_mat3());
                    }
            cur[0] = g1 * vol;
            cur[2] = g3 * vol;
            cur[3] = g4 * vol;
            cur[4] = g5 * vol;
            cur[5] = g6 * vol;
            if (n > 0) {
                const double dt = traj[n].t - traj[n - 1].t;
                for (int q = 0; q < 6; ++q)
                    acc[static_cast<std::size_t>(q)] += 0.5 * dt * (prev[static_cast<std::size_t>(q)] + cur[static_cast<std::size_t>(q)]);
            }
            prev = cur;
        }
        vc.groups = acc;
        vc.total = 0.0;
        for (double x : acc) vc.total += x;

        double d0 = 0.0, dT = 0.0;
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    DevTensor a = f.value.front().at(i, j, k) - traj.front().S.at(i, j, k);
                    d0 += a.norm2();
                    DevTensor b = f.value.back().at(i, j, k) - traj.back().S.at(i, j, k);
                    dT += b.norm2();
                }
        vc.rhs = -0.5 * d0 * vol;
        vc.strong_extra = 0.5 * dT * vol;
        vc.margin = vc.total - vc.rhs;
        vc.strong_margin = vc.margin - vc.strong_extra;
        vc.pass = vc.margin >= -rep.tol_abs;
        return vc;
    };

    rep.cases.push_back(eval_case(zero_field(traj)));
    rep.cases.push_back(eval_case(constant_field(traj, cfg)));
    rep.cases.push_back(eval_case(mollified_field(traj, cfg)));
    Rng rng(cfg.seed ^ 0x5eedf1e1d5ULL);
    for (int r = 0; r < cfg.varin_random_fields; ++r)
        rep.cases.push_back(eval_case(random_field(traj, cfg, rng, r)));

    rep.all_pass = true;
    for (const auto& c : rep.cases) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

std::string varin_report_text(const VarInReport& rep) {
    std::string out;
    char buf[320];
    std::snprintf(buf, sizeof buf, "variational inequality check (tolerance %.3g)\n", rep.tol_abs);
    out += buf;
    for (const auto& c : rep.cases) {
        std::snprintf(buf, sizeof buf,
                      "  %-12s %s  margin=% .6e  total=% .6e  rhs=% .6e  strong_margin=% .6e\n",
                      c.name.c_str(), c.pass ? "pass" : "FAIL", c.margin, c.total, c.rhs, c.strong_margin);
        out += buf;
    }
    out += rep.all_pass ? "all test fields satisfy the inequality\n" : "violations found\n";
    return out;
}

void write_varin_csv(const VarInReport& rep, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open varin CSV for writing: " + path);
    os << "name,pass,total,rhs,margin,strong_extra,strong_margin,"
          "g_dt,g_grad,g_pot,g_conv,g_rot,g_strain\n";
    char buf[64];
    for (const auto& c : rep.cases) {
        os << c.name << ',' << (c.pass ? 1 : 0);
        const double vals[11] = {c.total, c.rhs,       c.margin,    c.strong_extra, c.strong_margin, c.groups[0],
                                 c.groups[1], c.groups[2], c.groups[3], c.groups[4],    c.groups[5]};
        for (double v : vals) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            os << buf;
        }
        os << '\n';
    }
}

}  // namespace vpflow
