#pragma once

#include <string>
#include <vector>

#include "vpflow/config.hpp"
#include "vpflow/grid.hpp"

namespace vpflow {

/// Instantaneous integrands entering the energy bookkeeping, all with midpoint
/// space quadrature; v = V - w with the configured boundary-layer lifting.
struct InstantTerms {
    double kinetic = 0.0;        // 1/2 |v|^2
    double elastic = 0.0;        // 1/2 |S|^2
    double i_visc = 0.0;         // mu |grad v|^2
    double i_diff = 0.0;         // gamma |grad S|^2
    double i_plastic = 0.0;      // dP_eps(S):S (eps > 0) or P(S) (eps = 0)
    double i_plastic_env = 0.0;  // P_eps(S)
    double i_forcing = 0.0;      // <F0, v> - <F1, grad v>
    double i_lift_adv = 0.0;     // <w (x) (v+w), grad v>
    double i_lift_dw = 0.0;      // eta <D(w), S>
    double i_lift_ft = 0.0;      // <Ftilde1, grad v> = -<dt w - mu Lap w, v>
    double i_stress = 0.0;       // -eta <S, grad v>
    double i_source = 0.0;       // eta2 <D(V), S>
};

InstantTerms instantaneous_terms(const SimState& state, const SimConfig& cfg);

/// One time row: energies, cumulative (trapezoid) integrals of every term of
/// the energy identities, and the three inequality residuals (LHS - RHS).
struct EnergyLedgerRow {
    double t = 0.0;
    double kinetic = 0.0;
    double elastic = 0.0;
    double visc_dissip = 0.0;
    double stress_diffusion = 0.0;
    double plastic_dissip = 0.0;
    double plastic_value = 0.0;
    double work_forcing = 0.0;
    double work_lift_adv = 0.0;
    double work_lift_dw = 0.0;
    double work_lift_ft = 0.0;
    double work_stress = 0.0;
    double work_source = 0.0;
    double resid_kinetic = 0.0;
    double resid_elastic = 0.0;
    double resid_total = 0.0;
};

/// Append-only energy ledger; rows accumulate trapezoid time integrals of the
/// instantaneous terms over consecutive states.
class EnergyLedger {
public:
    explicit EnergyLedger(const SimConfig& cfg) : cfg_(cfg) {}

    void append(const SimState& state);
    const std::vector<EnergyLedgerRow>& rows() const { return rows_; }

    void write_csv(const std::string& path) const;
    static std::vector<EnergyLedgerRow> read_csv(const std::string& path);

private:
    SimConfig cfg_;
    std::vector<EnergyLedgerRow> rows_;
    InstantTerms prev_;
    bool have_prev_ = false;
};

struct EdiCheck {
    bool pass = false;
    double worst_kinetic = 0.0;  // max over time of the kinetic residual
    double worst_elastic = 0.0;
    double worst_total = 0.0;
    double tol_abs = 0.0;  // tol * (1 + E(0))
};

/// Checks the kinetic, elastic and total energy-dissipation inequalities at
/// every row; failure is reported, not thrown.
EdiCheck check_energy_dissipation(const std::vector<EnergyLedgerRow>& rows, double tol);

/// One evaluated test field of the evolutionary variational inequality.
struct VarInCase {
    std::string name;
    std::array<double, 6> groups{};  // d_t S~ : (S~-S) | gamma grad | potentials | convection | rotation | -eta D(V)
    double total = 0.0;
    double rhs = 0.0;           // -1/2 |S~(0) - S0|^2
    double margin = 0.0;        // total - rhs; must be >= -tol_abs
    double strong_extra = 0.0;  // 1/2 |S~(T') - S(T')|^2 (stronger variant, reported only)
    double strong_margin = 0.0; // total - rhs - strong_extra
    bool pass = false;
};

struct VarInReport {
    std::vector<VarInCase> cases;
    bool all_pass = false;
    double tol_abs = 0.0;
};

struct IncompatibleSampling : std::runtime_error {
    explicit IncompatibleSampling(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluates the variational inequality on the stored trajectory for the
/// built-in test-field library: the zero field, a constant deviatoric field,
/// a time-mollified copy of S, and varin.random_fields random low-wavenumber
/// fields (seeded). States must be consecutive snapshots.
VarInReport check_variational_inequality(const std::vector<SimState>& traj, const SimConfig& cfg, double tol);

std::string varin_report_text(const VarInReport& rep);
void write_varin_csv(const VarInReport& rep, const std::string& path);

}  // namespace vpflow
