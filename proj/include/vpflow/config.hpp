#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vpflow/grid.hpp"
#include "vpflow/potential.hpp"
#include "vpflow/profiles.hpp"

namespace vpflow {

struct ParseError : std::runtime_error {
    ParseError(int line_, const std::string& what)
        : std::runtime_error("config parse error at line " + std::to_string(line_) + ": " + what), line(line_) {}
    int line;
};

struct ValidationError : std::runtime_error {
    ValidationError(const std::string& key_, const std::string& constraint_)
        : std::runtime_error("config key '" + key_ + "': " + constraint_), key(key_), constraint(constraint_) {}
    std::string key;
    std::string constraint;
};

/// Potential description as written in a config; turned into a PotentialSpec
/// on demand. Kept separate so configs can round-trip exactly.
struct PotentialConfig {
    PotentialKind kind = PotentialKind::Quadratic;
    double a = 1.0;
    double sigma_yield = 1.0;
    double a2 = 0.0, a4 = 0.0, a6 = 0.0, b = 0.0;
    std::vector<double> radial_knots{0.0};
    std::vector<double> radial_curvatures{1.0};
    double radial_slope0 = 0.0;
    std::vector<double> radial_slope_jumps{};
    double radial_cap = std::numeric_limits<double>::infinity();

    PotentialSpec build() const;
    bool operator==(const PotentialConfig&) const = default;
};

struct ForcingConfig {
    VectorProfile f0;
    TimeProfile f0_time = TimeProfile::constant();
    TensorProfile f1;
    TimeProfile f1_time = TimeProfile::constant();
    bool operator==(const ForcingConfig&) const = default;
};

/// Full run description: domain, discretization, physics, data, tolerances.
struct SimConfig {
    Grid grid;
    double dt = 1e-3;
    double t_end = 0.1;
    double output_interval = 0.05;
    int ledger_every_steps = 1;

    double mu = 0.1;
    double gamma = 0.1;
    double eta = 0.0;
    bool eta2_zero = false;  // decoupled variant: no eta D(V) source in the S equation

    PotentialConfig potential;
    double eps = 1e-2;  // Moreau parameter; 0 means the exact nonsmooth potential

    ForcingConfig forcing;
    BoundaryData boundary;

    VectorProfile initial_v;
    std::optional<std::string> initial_v_snapshot;
    TensorProfile initial_s;
    std::optional<std::string> initial_s_snapshot;

    double lifting_delta = 0.15;

    double tol_energy = 1e-6;
    double tol_div = 1e-10;
    double tol_solver = 1e-10;

    std::uint64_t seed = 1;

    // Galerkin run parameters (oracle subcommand)
    int oracle_max_wavenumber = 1;
    double oracle_step = 1e-3;
    int oracle_quadrature_points = 0;  // 0: 2*max_wavenumber + 2

    // eps sweep
    std::vector<double> sweep_eps{1e-1, 1e-2, 1e-3};

    // variational-inequality checker
    int varin_random_fields = 20;
    int varin_max_wave = 1;
    double varin_amplitude = 0.1;
    int varin_mollify_width = 2;

    // prox-table fixture generator
    std::vector<double> proxtable_radii{0.5, 1.0, 2.0, 4.0};
    double proxtable_lambda = 1.0;

    bool operator==(const SimConfig&) const = default;
};

/// Parses the flat `section.key = value` format; '#' starts a comment.
/// Unknown keys are hard errors. Throws ParseError / ValidationError.
SimConfig parse_config(const std::string& text);

SimConfig load_config(const std::string& path);

/// Canonical serialization; parse(serialize(c)) == c exactly.
std::string serialize_config(const SimConfig& c);

/// Re-checks all cross-field constraints (also called by parse_config).
void validate(const SimConfig& c);

}  // namespace vpflow
