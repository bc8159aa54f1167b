#include "vpflow/ledger.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vpflow/potential.hpp"
#include "vpflow/solver.hpp"

namespace vpflow {

namespace {

/// Potential value with a small radial guard: the plastic step keeps |S|
/// inside the yield ball up to rounding, so grazing overshoots are projected
/// back before evaluating. A genuine violation still yields +inf.
double safe_value(const PotentialSpec& pot, const DevTensor& s) {
    if (pot.kind() == PotentialKind::YieldBall) {
        const double n = s.norm();
        const double sy = pot.sigma_yield();
        if (n > sy && n <= sy * (1.0 + 1e-9)) return pot.value((sy / n) * s);
    }
    return pot.value(s);
}

}  // namespace

InstantTerms instantaneous_terms(const SimState& state, const SimConfig& cfg) {
    const Grid& g = state.V.grid;
    const double t = state.t;
    const double vol = g.cell_volume();
    const auto box = g.box();
    const PotentialSpec pot = cfg.potential.build();
    const double eta2 = cfg.eta2_zero ? 0.0 : cfg.eta;
    InstantTerms out;

    const bool lifted = cfg.boundary.any_nonzero();
    VelocityField w = lifted ? hopf_extension(cfg.boundary, cfg.lifting_delta, g, t) : VelocityField(g);
    VelocityField v = state.V;
    if (lifted) axpy(v, -1.0, w);

    const BoundaryData zero_bc{};
    out.kinetic = 0.5 * l2_norm2(v);
    out.elastic = 0.5 * l2_norm2(state.S);
    out.i_visc = cfg.mu * grad_norm2(v, zero_bc, t);
    out.i_diff = cfg.gamma * grad_norm2(state.S);

    Array3 vpad[3], wpad[3], Vpad[3];
    pad_velocity(v, zero_bc, t, vpad);
    if (lifted) pad_velocity(w, cfg.boundary, t, wpad);
    pad_velocity(state.V, cfg.boundary, t, Vpad);

    const bool has_f0 = cfg.forcing.f0.kind != VectorProfile::Kind::Zero;
    const bool has_f1 = cfg.forcing.f1.kind != TensorProfile::Kind::Zero;
    const double amp0 = has_f0 ? cfg.forcing.f0_time.value(t) : 0.0;
    const double amp1 = has_f1 ? cfg.forcing.f1_time.value(t) : 0.0;

    // face-sampled forcing work <F0, v>
    if (has_f0) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Array3& a = v.comp[c];
            for (int k = 0; k < a.n2; ++k)
                for (int j = 0; j < a.n1; ++j)
                    for (int i = 0; i < a.n0; ++i) {
                        const int idx[3] = {i, j, k};
                        std::array<double, 3> x{};
                        for (int axis = 0; axis < 3; ++axis)
                            x[static_cast<std::size_t>(axis)] =
                                axis == c ? g.face(axis, idx[axis]) : g.center(axis, idx[axis]);
                        acc += amp0 * cfg.forcing.f0.value(x, box)[static_cast<std::size_t>(c)] * a(i, j, k);
                    }
        }
        out.i_forcing += acc * vol;
    }

    // cell-centered contractions
    double acc_f1 = 0.0, acc_adv = 0.0, acc_dw = 0.0, acc_stress = 0.0, acc_source = 0.0;
    double acc_plastic = 0.0, acc_env = 0.0;
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const Mat3 gv = velocity_gradient_at(vpad, g, i, j, k);
                const DevTensor s = state.S.at(i, j, k);
                const Mat3 sm = s.to_mat3();
                acc_stress -= frobenius(sm, gv);
                if (eta2 != 0.0) {
                    const Mat3 gV = velocity_gradient_at(Vpad, g, i, j, k);
                    acc_source += frobenius(strain_rate(gV), sm);
                }
                if (has_f1) {
                    const std::array<double, 3> x{g.center(0, i), g.center(1, j), g.center(2, k)};
                    acc_f1 -= frobenius(cfg.forcing.f1.value(x, box).to_mat3(), gv) * amp1;
                }
                if (lifted) {
                    const auto wc = velocity_at_center(wpad, g, i, j, k);
                    const auto vc = velocity_at_center(vpad, g, i, j, k);
                    double adv = 0.0;
                    for (int jj = 0; jj < 3; ++jj)
                        for (int kk = 0; kk < 3; ++kk)
                            adv += wc[static_cast<std::size_t>(jj)] * gv(jj, kk) *
                                   (vc[static_cast<std::size_t>(kk)] + wc[static_cast<std::size_t>(kk)]);
                    acc_adv += adv;
                    const Mat3 gw = velocity_gradient_at(wpad, g, i, j, k);
                    acc_dw += frobenius(strain_rate(gw), sm);
                }
                if (cfg.eps > 0.0) {
                    acc_plastic += frobenius(pot.moreau_grad(s, cfg.eps), s);
                    acc_env += pot.moreau_value(s, cfg.eps);
                } else {
                    const double val = safe_value(pot, s);
                    acc_plastic += val;
                    acc_env += val;
                }
            }
    out.i_forcing += acc_f1 * vol;
    out.i_lift_adv = acc_adv * vol;
    out.i_lift_dw = cfg.eta * acc_dw * vol;
    out.i_stress = cfg.eta * acc_stress * vol;
    out.i_source = eta2 * acc_source * vol;
    out.i_plastic = acc_plastic * vol;
    out.i_plastic_env = acc_env * vol;

    // <Ftilde1, grad v> = -<dt w, v> + mu <Lap w, v>
    if (lifted) {
        const VelocityField dw = hopf_extension_time_derivative(cfg.boundary, cfg.lifting_delta, g, t);
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Array3& vc = v.comp[c];
            const Array3& dwc = dw.comp[c];
            const Array3& wp = wpad[c];
            for (int k = 0; k < vc.n2; ++k)
                for (int j = 0; j < vc.n1; ++j)
                    for (int i = 0; i < vc.n0; ++i) {
                        double lap = 0.0;
                        lap += (wp(i + 1, j, k) - 2.0 * wp(i, j, k) + wp(i - 1, j, k)) / (g.h[0] * g.h[0]);
                        lap += (wp(i, j + 1, k) - 2.0 * wp(i, j, k) + wp(i, j - 1, k)) / (g.h[1] * g.h[1]);
                        lap += (wp(i, j, k + 1) - 2.0 * wp(i, j, k) + wp(i, j, k - 1)) / (g.h[2] * g.h[2]);
                        acc += (-dwc(i, j, k) + cfg.mu * lap) * vc(i, j, k);
                    }
        }
        out.i_lift_ft = acc * vol;
    }
    return out;
}

void EnergyLedger::append(const SimState& state) {
    const InstantTerms cur = instantaneous_terms(state, cfg_);
    EnergyLedgerRow row;
    row.t = state.t;
    row.kinetic = cur.kinetic;
    row.elastic = cur.elastic;
    if (have_prev_) {
        const EnergyLedgerRow& p = rows_.back();
        const double dt = state.t - p.t;
        auto trap = [dt](double a, double b) { return 0.5 * dt * (a + b); };
        row.visc_dissip = p.visc_dissip + trap(prev_.i_visc, cur.i_visc);
        row.stress_diffusion = p.stress_diffusion + trap(prev_.i_diff, cur.i_diff);
        row.plastic_dissip = p.plastic_dissip + trap(prev_.i_plastic, cur.i_plastic);
        row.plastic_value = p.plastic_value + trap(prev_.i_plastic_env, cur.i_plastic_env);
        row.work_forcing = p.work_forcing + trap(prev_.i_forcing, cur.i_forcing);
        row.work_lift_adv = p.work_lift_adv + trap(prev_.i_lift_adv, cur.i_lift_adv);
        row.work_lift_dw = p.work_lift_dw + trap(prev_.i_lift_dw, cur.i_lift_dw);
        row.work_lift_ft = p.work_lift_ft + trap(prev_.i_lift_ft, cur.i_lift_ft);
        row.work_stress = p.work_stress + trap(prev_.i_stress, cur.i_stress);
        row.work_source = p.work_source + trap(prev_.i_source, cur.i_source);
    }
    const double kin0 = rows_.empty() ? row.kinetic : rows_.front().kinetic;
    const double ela0 = rows_.empty() ? row.elastic : rows_.front().elastic;
    row.resid_kinetic = (row.kinetic + row.visc_dissip) -
                        (kin0 + row.work_forcing + row.work_lift_adv + row.work_lift_ft + row.work_stress);
    row.resid_elastic = (row.elastic + row.stress_diffusion + row.plastic_dissip) - (ela0 + row.work_source);
    row.resid_total = row.resid_kinetic + row.resid_elastic;
    rows_.push_back(row);
    prev_ = cur;
    have_prev_ = true;
}

namespace {
const char* kLedgerHeader =
    "t,kinetic,elastic,visc_dissip,stress_diffusion,plastic_dissip,plastic_value,work_forcing,"
    "work_lift_adv,work_lift_dw,work_lift_ft,work_stress,work_source,resid_kinetic,resid_elastic,resid_total";
}

void EnergyLedger::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open ledger CSV for writing: " + path);
    os << kLedgerHeader << '\n';
    char buf[64];
    for (const auto& r : rows_) {
        const double vals[16] = {r.t,           r.kinetic,      r.elastic,      r.visc_dissip,
                                 r.stress_diffusion, r.plastic_dissip, r.plastic_value, r.work_forcing,
                                 r.work_lift_adv,    r.work_lift_dw,   r.work_lift_ft,  r.work_stress,
                                 r.work_source,      r.resid_kinetic,  r.resid_elastic, r.resid_total};
        for (int c = 0; c < 16; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[c]);
            os << buf << (c == 15 ? '\n' : ',');
        }
    }
}

std::vector<EnergyLedgerRow> EnergyLedger::read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open ledger CSV: " + path);
    std::string line;
    if (!std::getline(is, line) || line != kLedgerHeader)
        throw std::runtime_error("ledger CSV: unexpected header in " + path);
    std::vector<EnergyLedgerRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double vals[16];
        std::string tok;
        for (int c = 0; c < 16; ++c) {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("ledger CSV: short row");
            vals[c] = std::stod(tok);
        }
        EnergyLedgerRow r;
        r.t = vals[0];
        r.kinetic = vals[1];
        r.elastic = vals[2];
        r.visc_dissip = vals[3];
        r.stress_diffusion = vals[4];
        r.plastic_dissip = vals[5];
        r.plastic_value = vals[6];
        r.work_forcing = vals[7];
        r.work_lift_adv = vals[8];
        r.work_lift_dw = vals[9];
        r.work_lift_ft = vals[10];
        r.work_stress = vals[11];
        r.work_source = vals[12];
        r.resid_kinetic = vals[13];
        r.resid_elastic = vals[14];
        r.resid_total = vals[15];
        rows.push_back(r);
    }
    return rows;
}

EdiCheck check_energy_dissipation(const std::vector<EnergyLedgerRow>& rows, double tol) {
    EdiCheck chk;
    if (rows.empty()) return chk;
    const double e0 = rows.front().kinetic + rows.front().elastic;
    chk.tol_abs = tol * (1.0 + e0);
    for (const auto& r : rows) {
        chk.worst_kinetic = std::max(chk.worst_kinetic, r.resid_kinetic);
        chk.worst_elastic = std::max(chk.worst_elastic, r.resid_elastic);
        chk.worst_total = std::max(chk.worst_total, r.resid_total);
    }
    chk.pass = chk.worst_kinetic <= chk.tol_abs && chk.worst_elastic <= chk.tol_abs &&
               chk.worst_total <= chk.tol_abs;
    return chk;
}

}  // namespace vpflow
