#include "vpflow/profiles.hpp"

namespace vpflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925;
}

std::array<double, 3> VectorProfile::value(const std::array<double, 3>& x,
                                           const std::array<double, 3>& box) const {
    switch (kind) {
        case Kind::Zero:
            return {0.0, 0.0, 0.0};
        case Kind::Constant:
            return direction;
        case Kind::FourierMode: {
            double phase = 0.0;
            for (int a = 0; a < 3; ++a) phase += kTwoPi * wave[a] / box[a] * x[a];
            const double f = sine ? std::sin(phase) : std::cos(phase);
            return {direction[0] * f, direction[1] * f, direction[2] * f};
        }
        case Kind::TaylorGreen: {
            const double kx = kTwoPi * (wave[0] == 0 ? 1 : wave[0]) / box[0];
            const double ky = kTwoPi * (wave[1] == 0 ? 1 : wave[1]) / box[1];
            return {amplitude * std::sin(kx * x[0]) * std::cos(ky * x[1]),
                    -amplitude * (kx / ky) * std::cos(kx * x[0]) * std::sin(ky * x[1]), 0.0};
        }
        case Kind::GaussianBump: {
            double r2 = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double d = x[a] - center[a];
                r2 += d * d;
            }
            const double f = amplitude * std::exp(-r2 / (2.0 * width * width));
            return {direction[0] * f, direction[1] * f, direction[2] * f};
        }
    }
    return {0.0, 0.0, 0.0};
}

DevTensor TensorProfile::value(const std::array<double, 3>& x, const std::array<double, 3>& box) const {
    DevTensor d;
    switch (kind) {
        case Kind::Zero:
            return d;
        case Kind::Constant:
            for (int i = 0; i < 5; ++i) d[i] = coords[static_cast<std::size_t>(i)];
            return d;
        case Kind::FourierMode: {
            double phase = 0.0;
            for (int a = 0; a < 3; ++a) phase += kTwoPi * wave[a] / box[a] * x[a];
            const double f = sine ? std::sin(phase) : std::cos(phase);
            for (int i = 0; i < 5; ++i) d[i] = coords[static_cast<std::size_t>(i)] * f;
            return d;
        }
        case Kind::GaussianBump: {
            double r2 = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double dd = x[a] - center[a];
                r2 += dd * dd;
            }
            const double f = std::exp(-r2 / (2.0 * width * width));
            for (int i = 0; i < 5; ++i) d[i] = coords[static_cast<std::size_t>(i)] * f;
            return d;
        }
    }
    return d;
}

std::array<double, 3> WallProfile::shape(const std::array<double, 3>& x, const std::array<double, 3>& box,
                                         int wall_axis) const {
    if (kind == Kind::Zero) return {0.0, 0.0, 0.0};
    double factor = 1.0;
    if (kind == Kind::LidTangential) {
        for (int a = 0; a < 3; ++a) {
            if (a == wall_axis) continue;
            const double s = x[a] / box[a];
            const double bump = 4.0 * s * (1.0 - s);
            factor *= bump <= 0.0 ? 0.0 : std::pow(bump, power);
        }
    }
    return {direction[0] * factor, direction[1] * factor, direction[2] * factor};
}

std::string to_string(VectorProfile::Kind k) {
    switch (k) {
        case VectorProfile::Kind::Zero: return "zero";
        case VectorProfile::Kind::Constant: return "constant";
        case VectorProfile::Kind::FourierMode: return "fourier_mode";
        case VectorProfile::Kind::TaylorGreen: return "taylor_green";
        case VectorProfile::Kind::GaussianBump: return "gaussian_bump";
    }
    return "?";
}

std::string to_string(TensorProfile::Kind k) {
    switch (k) {
        case TensorProfile::Kind::Zero: return "zero";
        case TensorProfile::Kind::Constant: return "constant";
        case TensorProfile::Kind::FourierMode: return "fourier_mode";
        case TensorProfile::Kind::GaussianBump: return "gaussian_bump";
    }
    return "?";
}

std::string to_string(WallProfile::Kind k) {
    switch (k) {
        case WallProfile::Kind::Zero: return "zero";
        case WallProfile::Kind::Constant: return "constant";
        case WallProfile::Kind::LidTangential: return "lid_tangential";
    }
    return "?";
}

std::string to_string(TimeProfile::Kind k) {
    switch (k) {
        case TimeProfile::Kind::Constant: return "constant";
        case TimeProfile::Kind::Sinusoidal: return "sinusoidal";
        case TimeProfile::Kind::ExpDecay: return "exp_decay";
    }
    return "?";
}

}  // namespace vpflow
