#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "vpflow/config.hpp"
#include "vpflow/grid.hpp"
#include "vpflow/potential.hpp"

namespace vpflow {

struct CflViolation : std::runtime_error {
    CflViolation(double dt, double limit)
        : std::runtime_error("advective CFL violated: dt = " + std::to_string(dt) + " exceeds " +
                             std::to_string(limit)) {}
};

struct SolverDiverged : std::runtime_error {
    SolverDiverged(const std::string& which, int iterations, double residual)
        : std::runtime_error(which + " solve did not reach tolerance after " + std::to_string(iterations) +
                             " iterations (relative residual " + std::to_string(residual) + ")") {}
};

struct UnsupportedGeometry : std::runtime_error {
    explicit UnsupportedGeometry(const std::string& what) : std::runtime_error(what) {}
};

/// Projects V onto the discretely divergence-free space (normal wall faces
/// must already be zero). The returned pressure-like multiplier solves the
/// Neumann/periodic Poisson problem; projecting twice is a no-op.
void project(VelocityField& V, ScalarField& pressure, double rel_tol);

/// Divergence-free boundary-layer extension of the wall data: a discrete curl
/// of an edge-based vector potential supported within distance delta_bl of the
/// walls, so the discrete divergence vanishes to rounding and w matches g on
/// the walls to second order.
VelocityField hopf_extension(const BoundaryData& bc, double delta_bl, const Grid& grid, double t);

/// Time derivative of the extension at fixed x (analytic in the profiles).
VelocityField hopf_extension_time_derivative(const BoundaryData& bc, double delta_bl, const Grid& grid, double t);

/// Largest delta from a shrinking ladder for which the sampled advection
/// functional satisfies |int w (x) v : grad v| <= mu/2 |grad v|^2 on
/// n_samples random divergence-free test fields with homogeneous wall values.
double hopf_smallness_threshold(const BoundaryData& bc, const Grid& grid, double mu, double t, int n_samples,
                                std::uint64_t seed);

/// One operator-splitting step and the run loop.
class GridSolver {
public:
    explicit GridSolver(const SimConfig& cfg);

    const SimConfig& config() const { return cfg_; }

    /// Initial state: profiles (or snapshots) sampled onto the grid, normal
    /// wall faces zeroed, velocity projected to the solenoidal space.
    SimState initial_state() const;

    /// Advances the state by one dt: tensor transport + rotation (explicit
    /// midpoint), stress diffusion (Crank-Nicolson), strain source, plastic
    /// step (prox for eps = 0, explicit envelope gradient otherwise), velocity
    /// advection + stress force + forcing, viscosity (Crank-Nicolson),
    /// pressure projection.
    void step(SimState& state) const;

    struct RunHooks {
        // called at t = 0 and then per the configured cadences
        std::function<void(const SimState&)> on_ledger_sample;
        std::function<void(const SimState&)> on_output;
    };

    /// Runs from t = 0 to t_end. Hooks fire before the error is rethrown when
    /// an inner solve diverges, so partial output is preserved.
    void run(const RunHooks& hooks) const;

private:
    void tensor_stage(SimState& state, const Array3 vel_pad[3]) const;
    void velocity_stage(SimState& state, const Array3 vel_pad[3], double t_new) const;

    SimConfig cfg_;
    PotentialSpec pot_;
};

}  // namespace vpflow
