#include "vpflow/potential.hpp"

#include <algorithm>
#include <cmath>

namespace vpflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool near(double x, double y, double scale) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(scale)); }
}  // namespace

RadialProfile::RadialProfile(std::vector<double> knots, std::vector<double> curvatures, double slope0,
                             std::vector<double> slope_jumps, double cap)
    : knots_(std::move(knots)), curvatures_(std::move(curvatures)), slope_jumps_(std::move(slope_jumps)), cap_(cap) {
    if (knots_.empty() || knots_.front() != 0.0) throw std::invalid_argument("radial profile: first knot must be 0");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i] <= knots_[i - 1]) throw std::invalid_argument("radial profile: knots must increase");
    if (curvatures_.size() != knots_.size())
        throw std::invalid_argument("radial profile: need one curvature per segment");
    if (slope_jumps_.size() != knots_.size() - 1)
        throw std::invalid_argument("radial profile: need one slope jump per interior knot");
    for (double q : curvatures_)
        if (q < 0.0) throw std::invalid_argument("radial profile: curvatures must be >= 0");
    for (double j : slope_jumps_)
        if (j < 0.0) throw std::invalid_argument("radial profile: slope jumps must be >= 0");
    if (slope0 < 0.0) throw std::invalid_argument("radial profile: slope at 0 must be >= 0");
    if (!(cap_ > 0.0)) throw std::invalid_argument("radial profile: cap must be positive");

    slopes_.resize(knots_.size());
    values_.resize(knots_.size());
    slopes_[0] = slope0;
    values_[0] = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        const double dx = knots_[i + 1] - knots_[i];
        values_[i + 1] = values_[i] + slopes_[i] * dx + 0.5 * curvatures_[i] * dx * dx;
        slopes_[i + 1] = slopes_[i] + curvatures_[i] * dx + slope_jumps_[i];
    }
}

RadialProfile RadialProfile::quadratic(double q, double cap) {
    return RadialProfile({0.0}, {q}, 0.0, {}, cap);
}

int RadialProfile::segment_of(double sigma) const {
    int i = static_cast<int>(knots_.size()) - 1;
    while (i > 0 && sigma < knots_[static_cast<std::size_t>(i)]) --i;
    return i;
}

double RadialProfile::value(double sigma) const {
    if (sigma <= 0.0) return 0.0;
    if (sigma > cap_) return kInf;
    const auto i = static_cast<std::size_t>(segment_of(sigma));
    const double d = sigma - knots_[i];
    return values_[i] + slopes_[i] * d + 0.5 * curvatures_[i] * d * d;
}

bool RadialProfile::smooth_at(double sigma) const {
    if (sigma > cap_ || near(sigma, cap_, cap_)) return std::isinf(cap_);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
        if (slope_jumps_[i] > 0.0 && near(sigma, knots_[i + 1], knots_[i + 1])) return false;
    return true;
}

double RadialProfile::derivative(double sigma) const {
    if (sigma <= 0.0) return 0.0;
    if (!smooth_at(sigma)) throw NonsmoothPoint("radial profile: no unique derivative at sigma = " + std::to_string(sigma));
    const auto i = static_cast<std::size_t>(segment_of(sigma));
    return slopes_[i] + curvatures_[i] * (sigma - knots_[i]);
}

double RadialProfile::prox(double m, double lambda) const {
    // Minimize (r - m)^2/(2 lambda) + p(r) over r in [0, cap]. The objective's
    // derivative is piecewise linear and increasing; walk the segments.
    if (m <= 0.0) return 0.0;
    const double inv = 1.0 / lambda;
    if (-m * inv + slopes_[0] >= 0.0) return 0.0;
    const std::size_t nseg = knots_.size();
    for (std::size_t i = 0; i < nseg; ++i) {
        const double left = knots_[i];
        const double right = std::min(i + 1 < nseg ? knots_[i + 1] : kInf, cap_);
        const double dleft = (left - m) * inv + slopes_[i];
        if (dleft >= 0.0 && i > 0) return left;  // optimum pinned at a kink
        const double dright = (right - m) * inv + slopes_[i] + curvatures_[i] * (right - left);
        if (dright >= 0.0 || right == cap_) {
            if (dright < 0.0) return cap_;  // derivative still negative at the cap
            // linear equation (r - m)/lambda + s + q (r - left) = 0
            const double r = (m * inv + curvatures_[i] * left - slopes_[i]) / (inv + curvatures_[i]);
            return std::clamp(r, left, right);
        }
        if (right >= cap_) return cap_;
    }
    return cap_;
}

PotentialSpec PotentialSpec::quadratic(double a) {
    if (a < 0.0) throw std::invalid_argument("quadratic potential: a must be >= 0");
    PotentialSpec p;
    p.kind_ = PotentialKind::Quadratic;
    p.a_ = a;
    return p;
}

PotentialSpec PotentialSpec::yield_ball(double a, double sigma_yield) {
    if (a < 0.0) throw std::invalid_argument("yield-ball potential: a must be >= 0");
    if (!(sigma_yield > 0.0)) throw std::invalid_argument("yield-ball potential: sigma_yield must be > 0");
    PotentialSpec p;
    p.kind_ = PotentialKind::YieldBall;
    p.a_ = a;
    p.sigma_yield_ = sigma_yield;
    return p;
}

PotentialSpec PotentialSpec::radial(RadialProfile profile) {
    PotentialSpec p;
    p.kind_ = PotentialKind::Radial;
    p.profile_.push_back(std::move(profile));
    return p;
}

PotentialSpec PotentialSpec::poly_det(double a2, double a4, double a6, double b) {
    if (a2 < 0.0 || a4 < 0.0 || a6 < 0.0)
        throw std::invalid_argument("poly-det potential: a2, a4, a6 must be >= 0");
    if (std::abs(b) > 4.0) throw std::invalid_argument("poly-det potential: |b| must be <= 4");
    PotentialSpec p;
    p.kind_ = PotentialKind::PolyDet;
    p.a2_ = a2;
    p.a4_ = a4;
    p.a6_ = a6;
    p.b_ = b;
    return p;
}

const RadialProfile& PotentialSpec::profile() const {
    if (profile_.empty()) throw std::logic_error("potential has no radial profile");
    return profile_.front();
}

bool PotentialSpec::is_smooth_everywhere() const {
    switch (kind_) {
        case PotentialKind::Quadratic:
        case PotentialKind::PolyDet:
            return true;
        case PotentialKind::YieldBall:
            return false;
        case PotentialKind::Radial: {
            const auto& p = profile_.front();
            if (!std::isinf(p.cap())) return false;
            if (p.slope0() > 0.0) return false;
            for (double j : p.slope_jumps())
                if (j > 0.0) return false;
            return true;
        }
    }
    return false;
}

double PotentialSpec::value(const DevTensor& s) const {
    const double n2 = s.norm2();
    switch (kind_) {
        case PotentialKind::Quadratic:
            return 0.5 * a_ * n2;
        case PotentialKind::YieldBall:
            return std::sqrt(n2) > sigma_yield_ ? kInf : 0.5 * a_ * n2;
        case PotentialKind::Radial:
            return profile_.front().value(std::sqrt(n2));
        case PotentialKind::PolyDet: {
            const double d = det3(s);
            return 0.5 * a2_ * n2 + 0.25 * a4_ * n2 * n2 + (a6_ / 6.0) * (n2 * n2 * n2 + b_ * d * d);
        }
    }
    return 0.0;
}

DevTensor PotentialSpec::poly_det_gradient(const DevTensor& s) const {
    const double n2 = s.norm2();
    DevTensor g = (a2_ + a4_ * n2 + a6_ * n2 * n2) * s;
    if (b_ != 0.0 && a6_ != 0.0) {
        const double d = det3(s);
        // coordinates of cof(S) + |S|^2/6 I, the trace-free correction of cof
        const DevTensor q = DevTensor::from_matrix(cofactor(s));
        g += (a6_ * b_ / 3.0 * d) * q;
    }
    return g;
}

void PotentialSpec::poly_det_hessian(const DevTensor& s, double h[5][5]) const {
    const double n2 = s.norm2();
    const double iso = a2_ + a4_ * n2 + a6_ * n2 * n2;
    const double rank1 = 2.0 * a4_ + 4.0 * a6_ * n2;
    const DevTensor q = DevTensor::from_matrix(cofactor(s));
    const double d = det3(s);
    const double cb = a6_ * b_ / 3.0;
    const Mat3 sm = s.to_mat3();
    Mat3 frames[5];
    for (int i = 0; i < 5; ++i) frames[i] = DevTensor::frame(i);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            double hij = rank1 * s[i] * s[j] + cb * q[i] * q[j];
            if (i == j) hij += iso;
            if (cb != 0.0) {
                const Mat3 m = sm * frames[j] + frames[j] * sm;
                hij += cb * d * frobenius(m, frames[i]);
            }
            h[i][j] = hij;
        }
    }
}

namespace {

// Cholesky solve of a 5x5 SPD system, in place on copies.
bool solve5(const double a[5][5], const double b[5], double x[5]) {
    double l[5][5] = {};
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[i][j];
            for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
            if (i == j) {
                if (sum <= 0.0) return false;
                l[i][i] = std::sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    double y[5];
    for (int i = 0; i < 5; ++i) {
        double sum = b[i];
        for (int k = 0; k < i; ++k) sum -= l[i][k] * y[k];
        y[i] = sum / l[i][i];
    }
    for (int i = 4; i >= 0; --i) {
        double sum = y[i];
        for (int k = i + 1; k < 5; ++k) sum -= l[k][i] * x[k];
        x[i] = sum / l[i][i];
    }
    return true;
}

}  // namespace

DevTensor PotentialSpec::prox_poly_det(const DevTensor& x, double lambda) const {
    const auto objective = [&](const DevTensor& s) {
        const DevTensor r = s - x;
        return 0.5 * r.norm2() / lambda + value(s);
    };
    const auto residual = [&](const DevTensor& s) {
        return (1.0 / lambda) * (s - x) + poly_det_gradient(s);
    };
    const double tol = 1e-12 * (1.0 + x.norm() / lambda);
    DevTensor s = (1.0 / (1.0 + lambda * a2_)) * x;

    // Damped Newton on the stationarity system (s - x)/lambda + dP(s) = 0;
    // steps are accepted on residual decrease (the objective itself is flat to
    // rounding near the minimizer).
    for (int it = 0; it < 100; ++it) {
        const DevTensor grad = residual(s);
        const double res = grad.norm();
        if (res <= tol) return s;
        double h[5][5];
        poly_det_hessian(s, h);
        for (int i = 0; i < 5; ++i) h[i][i] += 1.0 / lambda;
        double delta[5];
        double rhs[5];
        for (int i = 0; i < 5; ++i) rhs[i] = -grad[i];
        if (!solve5(h, rhs, delta)) break;
        DevTensor step;
        for (int i = 0; i < 5; ++i) step[i] = delta[i];
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const DevTensor cand = s + t * step;
            if (residual(cand).norm() < res) {
                s = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (res <= 1e4 * tol) return s;  // rounding floor near the minimizer
            break;
        }
    }

    // Fallback: projected (here unconstrained) gradient descent with backtracking.
    double step_size = lambda / (1.0 + lambda * (a2_ + 1.0));
    int it = 0;
    for (; it < 100000; ++it) {
        const DevTensor grad = residual(s);
        const double res = grad.norm();
        if (res <= tol) return s;
        const double base = objective(s);
        double t = step_size;
        bool moved = false;
        for (int ls = 0; ls < 200; ++ls) {
            const DevTensor cand = s - t * grad;
            if (objective(cand) <= base - 0.5 * t * res * res) {
                s = cand;
                step_size = 2.0 * t;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) {
            if (res <= 1e4 * tol) return s;
            break;
        }
    }
    throw NoConvergence(it, residual(s).norm());
}

DevTensor PotentialSpec::smooth_subgradient(const DevTensor& s) const {
    switch (kind_) {
        case PotentialKind::Quadratic:
            return a_ * s;
        case PotentialKind::YieldBall: {
            const double n = s.norm();
            if (n < sigma_yield_ && !near(n, sigma_yield_, sigma_yield_))
                return a_ * s;
            throw NonsmoothPoint("yield-ball potential: no unique differential at |S| >= sigma_yield");
        }
        case PotentialKind::Radial: {
            const double n = s.norm();
            if (n == 0.0) {
                if (profile_.front().slope0() > 0.0)
                    throw NonsmoothPoint("radial potential: kink at S = 0");
                return DevTensor::zero();
            }
            const double dp = profile_.front().derivative(n);
            return (dp / n) * s;
        }
        case PotentialKind::PolyDet:
            return poly_det_gradient(s);
    }
    return DevTensor::zero();
}

DevTensor PotentialSpec::prox(const DevTensor& x, double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("prox: lambda must be > 0");
    switch (kind_) {
        case PotentialKind::Quadratic:
            return (1.0 / (1.0 + lambda * a_)) * x;
        case PotentialKind::YieldBall: {
            const double n = x.norm();
            if (n == 0.0) return DevTensor::zero();
            const double r = std::min(n / (1.0 + lambda * a_), sigma_yield_);
            return (r / n) * x;
        }
        case PotentialKind::Radial: {
            const double n = x.norm();
            if (n == 0.0) return DevTensor::zero();
            const double r = profile_.front().prox(n, lambda);
            return (r / n) * x;
        }
        case PotentialKind::PolyDet:
            return prox_poly_det(x, lambda);
    }
    return x;
}

double PotentialSpec::moreau_value(const DevTensor& x, double eps) const {
    if (!(eps > 0.0)) throw std::invalid_argument("moreau_value: eps must be > 0");
    const DevTensor p = prox(x, eps);
    const DevTensor r = x - p;
    return 0.5 * r.norm2() / eps + value(p);
}

DevTensor PotentialSpec::moreau_grad(const DevTensor& x, double eps) const {
    if (!(eps > 0.0)) throw std::invalid_argument("moreau_grad: eps must be > 0");
    return (1.0 / eps) * (x - prox(x, eps));
}

}  // namespace vpflow
