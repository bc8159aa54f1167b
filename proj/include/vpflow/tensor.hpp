#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace vpflow {

/// General real 3x3 matrix. Row-major; grad(i,j) means d(component i)/d(x_j).
struct Mat3 {
    std::array<double, 9> a{};

    constexpr double& operator()(int i, int j) { return a[3 * i + j]; }
    constexpr double operator()(int i, int j) const { return a[3 * i + j]; }

    static constexpr Mat3 zero() { return Mat3{}; }
    static constexpr Mat3 identity() {
        Mat3 m{};
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }
    static constexpr Mat3 diag(double x, double y, double z) {
        Mat3 m{};
        m(0, 0) = x;
        m(1, 1) = y;
        m(2, 2) = z;
        return m;
    }

    constexpr double trace() const { return a[0] + a[4] + a[8]; }

    constexpr Mat3 transposed() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = (*this)(j, i);
        return m;
    }

    friend constexpr Mat3 operator+(const Mat3& x, const Mat3& y) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[i] = x.a[i] + y.a[i];
        return m;
    }
    friend constexpr Mat3 operator-(const Mat3& x, const Mat3& y) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[i] = x.a[i] - y.a[i];
        return m;
    }
    friend constexpr Mat3 operator*(double s, const Mat3& x) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[i] = s * x.a[i];
        return m;
    }
    friend constexpr Mat3 operator*(const Mat3& x, const Mat3& y) {
        Mat3 m{};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) {
                const double xik = x(i, k);
                for (int j = 0; j < 3; ++j) m(i, j) += xik * y(k, j);
            }
        return m;
    }
};

/// Frobenius inner product A:B = A_jk B_jk.
constexpr double frobenius(const Mat3& x, const Mat3& y) {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) s += x.a[i] * y.a[i];
    return s;
}

inline double frobenius_norm(const Mat3& x) { return std::sqrt(frobenius(x, x)); }

/// Symmetric trace-free 3x3 tensor stored as five coordinates with respect to
/// an orthonormal frame of the deviatoric subspace, so that the constraints
/// M = M^T and tr M = 0 hold by construction and the Frobenius inner product
/// is the plain dot product of coordinates.
///
/// Frame:
///   E0 = diag(1,-1,0)/sqrt(2)      E1 = diag(1,1,-2)/sqrt(6)
///   E2 = (e1 e2^T + e2 e1^T)/sqrt(2)   (and likewise E3 for (1,3), E4 for (2,3))
struct DevTensor {
    std::array<double, 5> c{};

    constexpr double& operator[](int i) { return c[i]; }
    constexpr double operator[](int i) const { return c[i]; }

    static constexpr DevTensor zero() { return DevTensor{}; }

    /// Projects a general matrix onto the symmetric trace-free subspace:
    /// coordinates are M:E_i, which annihilate the antisymmetric and
    /// spherical parts without explicit symmetrization.
    static DevTensor from_matrix(const Mat3& m) {
        constexpr double s2 = 0.70710678118654752440;   // 1/sqrt(2)
        constexpr double s6 = 0.40824829046386301637;   // 1/sqrt(6)
        DevTensor d;
        d.c[0] = (m(0, 0) - m(1, 1)) * s2;
        d.c[1] = (m(0, 0) + m(1, 1) - 2.0 * m(2, 2)) * s6;
        d.c[2] = (m(0, 1) + m(1, 0)) * s2;
        d.c[3] = (m(0, 2) + m(2, 0)) * s2;
        d.c[4] = (m(1, 2) + m(2, 1)) * s2;
        return d;
    }

    static DevTensor diag(double x, double y, double z) { return from_matrix(Mat3::diag(x, y, z)); }

    /// Frame element i as a full matrix.
    static Mat3 frame(int i) {
        DevTensor d;
        d.c[static_cast<std::size_t>(i)] = 1.0;
        return d.to_mat3();
    }

    Mat3 to_mat3() const {
        constexpr double s2 = 0.70710678118654752440;
        constexpr double s6 = 0.40824829046386301637;
        Mat3 m{};
        m(0, 0) = c[0] * s2 + c[1] * s6;
        m(1, 1) = -c[0] * s2 + c[1] * s6;
        m(2, 2) = -2.0 * c[1] * s6;
        m(0, 1) = m(1, 0) = c[2] * s2;
        m(0, 2) = m(2, 0) = c[3] * s2;
        m(1, 2) = m(2, 1) = c[4] * s2;
        return m;
    }

    constexpr double norm2() const {
        return c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3] + c[4] * c[4];
    }
    double norm() const { return std::sqrt(norm2()); }

    friend constexpr DevTensor operator+(const DevTensor& x, const DevTensor& y) {
        DevTensor d;
        for (int i = 0; i < 5; ++i) d.c[i] = x.c[i] + y.c[i];
        return d;
    }
    friend constexpr DevTensor operator-(const DevTensor& x, const DevTensor& y) {
        DevTensor d;
        for (int i = 0; i < 5; ++i) d.c[i] = x.c[i] - y.c[i];
        return d;
    }
    friend constexpr DevTensor operator*(double s, const DevTensor& x) {
        DevTensor d;
        for (int i = 0; i < 5; ++i) d.c[i] = s * x.c[i];
        return d;
    }
    DevTensor& operator+=(const DevTensor& y) {
        for (int i = 0; i < 5; ++i) c[i] += y.c[i];
        return *this;
    }
    DevTensor& operator-=(const DevTensor& y) {
        for (int i = 0; i < 5; ++i) c[i] -= y.c[i];
        return *this;
    }
    DevTensor& operator*=(double s) {
        for (int i = 0; i < 5; ++i) c[i] *= s;
        return *this;
    }
};

constexpr double frobenius(const DevTensor& x, const DevTensor& y) {
    return x.c[0] * y.c[0] + x.c[1] * y.c[1] + x.c[2] * y.c[2] + x.c[3] * y.c[3] + x.c[4] * y.c[4];
}

inline double frobenius(const DevTensor& x, const Mat3& y) { return frobenius(x.to_mat3(), y); }
inline double frobenius(const Mat3& x, const DevTensor& y) { return frobenius(x, y.to_mat3()); }

/// Symmetric trace-free part: (M + M^T)/2 - (tr M / 3) I.
inline DevTensor dev_sym_project(const Mat3& m) { return DevTensor::from_matrix(m); }

/// D(V) = (G + G^T)/2 for G = grad V.
inline Mat3 strain_rate(const Mat3& g) { return 0.5 * (g + g.transposed()); }

/// W(V) = (G - G^T)/2 for G = grad V.
inline Mat3 spin(const Mat3& g) { return 0.5 * (g - g.transposed()); }

/// Corotational rotation term S W - W S for antisymmetric W. The result is
/// symmetric and trace-free, hence representable exactly as a DevTensor.
/// Throws std::invalid_argument if W fails the antisymmetry check (caller bug).
inline DevTensor jaumann_commutator(const DevTensor& s, const Mat3& w) {
    const double scale = 1.0 + frobenius_norm(w);
    double defect = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) defect = std::max(defect, std::abs(w(i, j) + w(j, i)));
    if (defect > 1e-12 * scale) throw std::invalid_argument("jaumann_commutator: W is not antisymmetric");
    const Mat3 sm = s.to_mat3();
    return DevTensor::from_matrix(sm * w - w * sm);
}

/// Rotation term without the antisymmetry guard, for hot loops where W comes
/// from spin() by construction.
inline DevTensor jaumann_commutator_unchecked(const DevTensor& s, const Mat3& w) {
    const Mat3 sm = s.to_mat3();
    return DevTensor::from_matrix(sm * w - w * sm);
}

/// Cofactor matrix of the reconstructed tensor. For symmetric trace-free S
/// this reduces to S^2 - (|S|^2/2) I, so trace(cof S) = -|S|^2/2.
inline Mat3 cofactor(const DevTensor& s) {
    const Mat3 m = s.to_mat3();
    return m * m - (0.5 * s.norm2()) * Mat3::identity();
}

/// Determinant of the reconstructed tensor.
inline double det3(const DevTensor& s) {
    const Mat3 m = s.to_mat3();
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace vpflow
