#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "vpflow/tensor.hpp"

namespace vpflow {

/// Seeded random stream with stdlib-version-independent output, so fixtures
/// and CSV outputs stay bit-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    std::uint64_t integer() { return eng_(); }

    /// Integer in [0, n).
    std::uint64_t integer_below(std::uint64_t n) { return eng_() % n; }

    DevTensor dev_tensor(double scale = 1.0) {
        DevTensor d;
        for (int i = 0; i < 5; ++i) d[i] = scale * normal();
        return d;
    }

    Mat3 mat3(double scale = 1.0) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = scale * normal();
        return m;
    }

    Mat3 antisymmetric(double scale = 1.0) {
        Mat3 m{};
        const double a = scale * normal(), b = scale * normal(), c = scale * normal();
        m(0, 1) = a;
        m(1, 0) = -a;
        m(0, 2) = b;
        m(2, 0) = -b;
        m(1, 2) = c;
        m(2, 1) = -c;
        return m;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace vpflow
