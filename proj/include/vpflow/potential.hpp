#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpflow/tensor.hpp"

namespace vpflow {

/// Thrown when a subgradient is requested where the potential has no unique
/// differential (yield-surface points, kinks of a radial profile).
struct NonsmoothPoint : std::runtime_error {
    explicit NonsmoothPoint(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an iterative proximal solve exceeds its budget.
struct NoConvergence : std::runtime_error {
    NoConvergence(int iterations_, double residual_)
        : std::runtime_error("proximal solve did not converge after " + std::to_string(iterations_) +
                             " iterations (residual " + std::to_string(residual_) + ")"),
          iterations(iterations_),
          residual(residual_) {}
    int iterations;
    double residual;
};

/// Convex piecewise-quadratic profile p on [0, inf) with p(0) = 0, used for
/// potentials of the form P(S) = p(|S|). Segment i covers
/// [knot_i, knot_{i+1}) (the last one is unbounded unless capped) and carries
/// constant curvature; convex kinks (upward slope jumps) are allowed at the
/// interior knots. Beyond `cap` the profile is +inf.
class RadialProfile {
public:
    /// knots must start at 0 and increase; curvatures (one per segment) must be
    /// >= 0; slope_jumps (one per interior knot) must be >= 0; slope0 >= 0 is
    /// the right derivative at 0. cap = +inf disables the domain bound.
    RadialProfile(std::vector<double> knots, std::vector<double> curvatures, double slope0,
                  std::vector<double> slope_jumps,
                  double cap = std::numeric_limits<double>::infinity());

    /// Pure quadratic q/2 sigma^2 (optionally capped).
    static RadialProfile quadratic(double q, double cap = std::numeric_limits<double>::infinity());

    double value(double sigma) const;       // +inf beyond cap
    double derivative(double sigma) const;  // throws NonsmoothPoint at kinks/cap
    bool smooth_at(double sigma) const;

    /// argmin over [0, cap] of (r - m)^2 / (2 lambda) + p(r); exact per segment.
    double prox(double m, double lambda) const;

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& curvatures() const { return curvatures_; }
    const std::vector<double>& slope_jumps() const { return slope_jumps_; }
    double slope0() const { return slopes_.front(); }
    double cap() const { return cap_; }

private:
    int segment_of(double sigma) const;

    std::vector<double> knots_;       // ascending, knots_[0] == 0
    std::vector<double> curvatures_;  // per segment
    std::vector<double> slope_jumps_; // per interior knot
    std::vector<double> slopes_;      // left-end slope per segment (derived)
    std::vector<double> values_;      // value at each knot (derived)
    double cap_;
};

enum class PotentialKind { Quadratic, YieldBall, Radial, PolyDet };

/// Pointwise dissipation potential on deviatoric tensors: values, smooth
/// differentials, proximal maps and Moreau envelopes. All members are const;
/// instances are safe to share across threads.
class PotentialSpec {
public:
    static PotentialSpec quadratic(double a);
    static PotentialSpec yield_ball(double a, double sigma_yield);
    static PotentialSpec radial(RadialProfile profile);
    static PotentialSpec poly_det(double a2, double a4, double a6, double b);

    PotentialKind kind() const { return kind_; }
    double quad_coeff() const { return a_; }
    double sigma_yield() const { return sigma_yield_; }
    double a2() const { return a2_; }
    double a4() const { return a4_; }
    double a6() const { return a6_; }
    double det_coupling() const { return b_; }
    const RadialProfile& profile() const;

    /// Pointwise potential value; +inf outside the domain.
    double value(const DevTensor& s) const;

    /// The unique differential where it exists; throws NonsmoothPoint otherwise.
    DevTensor smooth_subgradient(const DevTensor& s) const;

    /// Unique minimizer of |x - s|^2 / (2 lambda) + P(s), lambda > 0.
    DevTensor prox(const DevTensor& x, double lambda) const;

    /// Moreau envelope value at regularization eps > 0.
    double moreau_value(const DevTensor& x, double eps) const;

    /// Envelope gradient (x - prox(x, eps)) / eps; Lipschitz with constant 1/eps.
    DevTensor moreau_grad(const DevTensor& x, double eps) const;

    bool is_smooth_everywhere() const;

private:
    PotentialSpec() = default;

    DevTensor prox_poly_det(const DevTensor& x, double lambda) const;
    DevTensor poly_det_gradient(const DevTensor& s) const;
    void poly_det_hessian(const DevTensor& s, double h[5][5]) const;

    PotentialKind kind_ = PotentialKind::Quadratic;
    double a_ = 0.0;            // Quadratic / YieldBall coefficient
    double sigma_yield_ = 0.0;  // YieldBall radius
    double a2_ = 0.0, a4_ = 0.0, a6_ = 0.0, b_ = 0.0;  // PolyDet parameters
    std::vector<RadialProfile> profile_;               // Radial (empty otherwise)
};

}  // namespace vpflow
