#pragma once

#include <array>
#include <string>
#include <vector>

#include "vpflow/config.hpp"
#include "vpflow/grid.hpp"
#include "vpflow/potential.hpp"
#include "vpflow/tensor.hpp"

namespace vpflow {

/// Thrown by the coefficient-ODE integrator when a coefficient passes 1e12;
/// the a-priori energy bound says this indicates a bug or an oversized step.
struct BlowUp : std::runtime_error {
    explicit BlowUp(double t_, double value_)
        : std::runtime_error("coefficient blow-up at t = " + std::to_string(t_)), t(t_), value(value_) {}
    double t;
    double value;
};

/// Divergence-free Fourier velocity mode on the 2*pi torus:
/// phi(x) = norm * e * trig(k.x) with e.k = 0, |e| = 1.
struct VelocityMode {
    std::array<int, 3> k{};
    std::array<double, 3> e{};
    bool sine = false;
    double norm = 0.0;
};

/// Deviatoric tensor mode: psi(x) = norm * E_frame * trig(k.x); k = 0 allowed
/// (constant modes, cosine parity only).
struct TensorMode {
    std::array<int, 3> k{};
    int frame = 0;
    bool sine = false;
    double norm = 0.0;
};

struct GalerkinBases {
    int max_wavenumber = 0;
    std::vector<VelocityMode> velocity;
    std::vector<TensorMode> tensor;
};

/// All modes with |k|_inf <= max_wavenumber, mutually L2-orthonormal.
GalerkinBases build_bases(int max_wavenumber);

/// Quadrature Gram-matrix check; returns the largest deviation from identity.
double orthonormality_defect(const GalerkinBases& bases, int quad_points);

struct GalerkinTrajectory {
    int n_velocity = 0;
    int n_tensor = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // alpha coefficients then beta
};

struct OracleEnergyReport {
    std::vector<double> times;
    std::vector<double> residual_v;  // |LHS - RHS| of the kinetic equality
    std::vector<double> residual_s;  // |LHS - RHS| of the elastic equality
    double max_residual_v = 0.0;
    double max_residual_s = 0.0;
    double initial_energy = 0.0;
    // a-priori bound bookkeeping: measured sup/integral quantity and its bound
    double apriori_measured = 0.0;
    double apriori_bound = 0.0;
};

/// Spectral semi-discretization of the coupled system on the periodic torus
/// [0, 2*pi)^3: an ODE for the basis coefficients with exactly precomputed
/// bilinear/trilinear coupling tables and a fixed tensor-product quadrature for
/// the (only non-polynomial) envelope-gradient term. Serves as the trusted
/// small-scale reference for the grid solver; boundary-driven runs are out of
/// its scope (the lifting is identically zero here).
class GalerkinOracle {
public:
    /// Requires cfg.eps > 0 (the coefficient ODE needs a Lipschitz right-hand
    /// side) and a 2*pi-periodic domain in the config.
    explicit GalerkinOracle(const SimConfig& cfg);

    const GalerkinBases& bases() const { return bases_; }
    int n_velocity() const { return static_cast<int>(bases_.velocity.size()); }
    int n_tensor() const { return static_cast<int>(bases_.tensor.size()); }

    /// L2 projections of the configured initial data.
    std::vector<double> initial_state() const;

    /// Coefficient derivatives at (t, y); y holds alphas then betas.
    void rhs(double t, const std::vector<double>& y, std::vector<double>& dy) const;

    /// Classical RK4 with the configured fixed step from t = 0 to t_end,
    /// storing every step. Throws BlowUp past 1e12.
    GalerkinTrajectory integrate() const;

    OracleEnergyReport energy_report(const GalerkinTrajectory& traj) const;

    /// Field evaluation (MAC faces / cell centers) for grid cross-checks.
    VelocityField velocity_on_grid(const std::vector<double>& y, const Grid& g) const;
    DevTensorField tensor_on_grid(const std::vector<double>& y, const Grid& g) const;

    /// Pointwise field values.
    std::array<double, 3> velocity_at(const std::vector<double>& y, const std::array<double, 3>& x) const;
    DevTensor tensor_at(const std::vector<double>& y, const std::array<double, 3>& x) const;

    // --- energy bookkeeping pieces (coefficient-space, exact) ---
    double kinetic(const std::vector<double>& y) const;
    double elastic(const std::vector<double>& y) const;
    double velocity_grad_norm2(const std::vector<double>& y) const;
    double tensor_grad_norm2(const std::vector<double>& y) const;
    /// quadrature of dP_eps(S):S over the torus
    double plastic_dissipation(const std::vector<double>& y) const;
    /// <S, grad v> = <grad v, S>
    double stress_coupling(const std::vector<double>& y) const;
    double forcing_work(double t, const std::vector<double>& y) const;
    /// L2 norm^2 of v reconstructed by quadrature (Parseval cross-check)
    double field_velocity_norm2(const std::vector<double>& y) const;

    /// Convection, rotation and transport contributions contracted against the
    /// own coefficients; all three vanish for the continuous forms.
    double convection_energy_defect(const std::vector<double>& y) const;
    double rotation_energy_defect(const std::vector<double>& y) const;
    double transport_energy_defect(const std::vector<double>& y) const;

    int quadrature_points() const { return quad_pts_; }

private:
    struct Triple {
        int r, s, l;
        double c;
    };

    void build_tables();
    void build_quadrature();
    void eval_tensor_at_quad(const double* beta, std::vector<double>& coords) const;

    SimConfig cfg_;
    PotentialSpec pot_;
    GalerkinBases bases_;
    int quad_pts_ = 0;

    std::vector<double> visc_;              // mu |k|^2 per velocity mode
    std::vector<double> diff_;              // gamma |k|^2 per tensor mode
    std::vector<Triple> convection_;        // (r,s,l): velocity x velocity -> velocity
    std::vector<Triple> transport_;         // (r,s,l): velocity r, tensor s -> tensor l
    std::vector<Triple> rotation_;          // (r,s,l): tensor r, velocity s -> tensor l
    std::vector<std::vector<std::pair<int, double>>> coupling_by_vel_;  // B[l_vel] = {(r_ten, c)}
    std::vector<std::vector<std::pair<int, double>>> coupling_by_ten_;  // B^T[l_ten] = {(r_vel, c)}

    // quadrature tables
    std::vector<std::array<double, 3>> quad_x_;
    double quad_w_ = 0.0;
    std::vector<double> ten_table_;  // [mode][point]
    std::vector<double> vel_table_;  // [mode][point]

    std::vector<double> f0_proj_;    // <f0_hat, phi_l>
    std::vector<double> f1_proj_;    // <f1_hat, grad phi_l>
    double f0_l2_ = 0.0;             // |f0_hat|_2 for the a-priori bound
    double f1_l2_ = 0.0;
};

}  // namespace vpflow
