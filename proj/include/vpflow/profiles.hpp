#pragma once

#include <array>
#include <cmath>
#include <string>

#include "vpflow/tensor.hpp"

namespace vpflow {

/// Separable time amplitude a(t) with analytic derivative, used by forcing and
/// boundary data. Kinds: constant, sinusoidal a0 + a1 cos(omega t) + b1 sin(omega t),
/// exp_decay a0 exp(-rate t).
struct TimeProfile {
    enum class Kind { Constant, Sinusoidal, ExpDecay };
    Kind kind = Kind::Constant;
    double a0 = 1.0;
    double a1 = 0.0;
    double b1 = 0.0;
    double omega = 0.0;
    double rate = 0.0;

    static TimeProfile constant(double value = 1.0) {
        TimeProfile p;
        p.kind = Kind::Constant;
        p.a0 = value;
        return p;
    }
    static TimeProfile sinusoidal(double a0, double a1, double b1, double omega) {
        TimeProfile p;
        p.kind = Kind::Sinusoidal;
        p.a0 = a0;
        p.a1 = a1;
        p.b1 = b1;
        p.omega = omega;
        return p;
    }
    static TimeProfile exp_decay(double a0, double rate) {
        TimeProfile p;
        p.kind = Kind::ExpDecay;
        p.a0 = a0;
        p.rate = rate;
        return p;
    }

    bool operator==(const TimeProfile&) const = default;

    double value(double t) const {
        switch (kind) {
            case Kind::Constant: return a0;
            case Kind::Sinusoidal: return a0 + a1 * std::cos(omega * t) + b1 * std::sin(omega * t);
            case Kind::ExpDecay: return a0 * std::exp(-rate * t);
        }
        return 0.0;
    }
    double derivative(double t) const {
        switch (kind) {
            case Kind::Constant: return 0.0;
            case Kind::Sinusoidal: return omega * (-a1 * std::sin(omega * t) + b1 * std::cos(omega * t));
            case Kind::ExpDecay: return -rate * a0 * std::exp(-rate * t);
        }
        return 0.0;
    }
};

/// Spatial vector-field profile over the box. Wave indices are integer mode
/// counts per axis; the physical wavevector is 2*pi*n_i/L_i.
struct VectorProfile {
    enum class Kind { Zero, Constant, FourierMode, TaylorGreen, GaussianBump };
    Kind kind = Kind::Zero;
    std::array<double, 3> direction{0.0, 0.0, 0.0};  // constant value / mode polarization / bump direction
    std::array<int, 3> wave{0, 0, 0};
    bool sine = true;                 // FourierMode parity
    double amplitude = 0.0;           // TaylorGreen / GaussianBump scale
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 1.0;

    std::array<double, 3> value(const std::array<double, 3>& x, const std::array<double, 3>& box) const;
    bool operator==(const VectorProfile&) const = default;
};

/// Spatial deviatoric-tensor profile; coordinates are with respect to the
/// DevTensor frame.
struct TensorProfile {
    enum class Kind { Zero, Constant, FourierMode, GaussianBump };
    Kind kind = Kind::Zero;
    std::array<double, 5> coords{};
    std::array<int, 3> wave{0, 0, 0};
    bool sine = true;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 1.0;

    DevTensor value(const std::array<double, 3>& x, const std::array<double, 3>& box) const;
    bool operator==(const TensorProfile&) const = default;
};

/// Tangential boundary velocity on one axis-aligned wall:
///   g(t, x) = time.value(t) * direction * shape(x_tangential),
/// where shape is 1 (constant) or the polynomial bump prod_i (4 s (1-s))^power
/// in each tangential coordinate s in [0,1] (lid_tangential).
struct WallProfile {
    enum class Kind { Zero, Constant, LidTangential };
    Kind kind = Kind::Zero;
    std::array<double, 3> direction{0.0, 0.0, 0.0};  // must be tangential to the wall
    double power = 2.0;
    TimeProfile time = TimeProfile::constant();

    /// Spatial factor (excluding the time amplitude) at physical point x.
    std::array<double, 3> shape(const std::array<double, 3>& x, const std::array<double, 3>& box, int wall_axis) const;
    bool operator==(const WallProfile&) const = default;
};

std::string to_string(VectorProfile::Kind k);
std::string to_string(TensorProfile::Kind k);
std::string to_string(WallProfile::Kind k);
std::string to_string(TimeProfile::Kind k);

}  // namespace vpflow
