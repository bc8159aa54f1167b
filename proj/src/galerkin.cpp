#include "vpflow/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace vpflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;
constexpr double kVolume = kTwoPi * kTwoPi * kTwoPi;

struct Wave {
    std::array<int, 3> k{};
    bool sine = false;
};

bool is_zero(const std::array<int, 3>& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

std::array<int, 3> add(const std::array<int, 3>& a, const std::array<int, 3>& b, int sa, int sb) {
    return {sa * a[0] + sb * b[0], sa * a[1] + sb * b[1], sa * a[2] + sb * b[2]};
}

bool canonical(const std::array<int, 3>& k) {
    if (k[2] != 0) return k[2] > 0;
    if (k[1] != 0) return k[1] > 0;
    return k[0] > 0;
}

std::array<int, 3> canonicalize(const std::array<int, 3>& k) {
    if (is_zero(k) || canonical(k)) return k;
    return {-k[0], -k[1], -k[2]};
}

std::complex<double> sign_coeff(const Wave& w, int s) {
    // trig(k.x) written as a sum over e^{i s k.x}
    if (!w.sine) return {0.5, 0.0};
    return {0.0, -0.5 * s};
}

/// Exact integral over the torus of a product of two or three trig factors.
double pair_integral(const Wave& a, const Wave& b) {
    std::complex<double> acc{};
    for (int sa : {1, -1})
        for (int sb : {1, -1})
            if (is_zero(add(a.k, b.k, sa, sb))) acc += sign_coeff(a, sa) * sign_coeff(b, sb);
    return acc.real() * kVolume;
}

double triple_integral(const Wave& a, const Wave& b, const Wave& c) {
    std::complex<double> acc{};
    for (int sa : {1, -1})
        for (int sb : {1, -1})
            for (int sc : {1, -1}) {
                const auto sum = add(add(a.k, b.k, sa, sb), c.k, 1, sc);
                if (is_zero(sum)) acc += sign_coeff(a, sa) * sign_coeff(b, sb) * sign_coeff(c, sc);
            }
    return acc.real() * kVolume;
}

/// d/dx_axis of a trig factor: returns the coefficient and the flipped wave.
std::pair<double, Wave> wave_derivative(const Wave& w, int axis) {
    Wave out = w;
    out.sine = !w.sine;
    const double k = w.k[static_cast<std::size_t>(axis)];
    return {w.sine ? k : -k, out};
}

double mode_norm(const std::array<int, 3>& k) {
    const double base = std::pow(kTwoPi, -1.5);
    return is_zero(k) ? base : std::sqrt(2.0) * base;
}

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm3(const std::array<double, 3>& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

double trig(const Wave& w, const std::array<double, 3>& x) {
    const double phase = w.k[0] * x[0] + w.k[1] * x[1] + w.k[2] * x[2];
    return w.sine ? std::sin(phase) : std::cos(phase);
}

Wave wave_of(const VelocityMode& m) { return {m.k, m.sine}; }
Wave wave_of(const TensorMode& m) { return {m.k, m.sine}; }

int norm2_int(const std::array<int, 3>& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

}  // namespace

GalerkinBases build_bases(int max_wavenumber) {
    if (max_wavenumber < 1) throw std::invalid_argument("build_bases: max_wavenumber must be >= 1");
    GalerkinBases bases;
    bases.max_wavenumber = max_wavenumber;
    const int K = max_wavenumber;

    // constant tensor modes first (cosine parity only)
    for (int f = 0; f < 5; ++f) {
        TensorMode m;
        m.k = {0, 0, 0};
        m.frame = f;
        m.sine = false;
        m.norm = mode_norm(m.k);
        bases.tensor.push_back(m);
    }

    for (int kx = -K; kx <= K; ++kx)
        for (int ky = -K; ky <= K; ++ky)
            for (int kz = -K; kz <= K; ++kz) {
                const std::array<int, 3> k{kx, ky, kz};
                if (!canonical(k)) continue;

                // polarization pair orthogonal to k
                const std::array<double, 3> kd{static_cast<double>(kx), static_cast<double>(ky),
                                               static_cast<double>(kz)};
                int axis = 0;
                for (int a = 1; a < 3; ++a)
                    if (std::abs(kd[static_cast<std::size_t>(a)]) < std::abs(kd[static_cast<std::size_t>(axis)]))
                        axis = a;
                std::array<double, 3> unit{0, 0, 0};
                unit[static_cast<std::size_t>(axis)] = 1.0;
                std::array<double, 3> e1 = cross(kd, unit);
                const double n1 = norm3(e1);
                for (auto& v : e1) v /= n1;
                std::array<double, 3> e2 = cross(kd, e1);
                const double n2 = norm3(e2);
                for (auto& v : e2) v /= n2;

                for (const auto& e : {e1, e2})
                    for (bool sine : {false, true}) {
                        VelocityMode m;
                        m.k = k;
                        m.e = e;
                        m.sine = sine;
                        m.norm = mode_norm(k);
                        bases.velocity.push_back(m);
                    }
                for (int f = 0; f < 5; ++f)
                    for (bool sine : {false, true}) {
                        TensorMode m;
                        m.k = k;
                        m.frame = f;
                        m.sine = sine;
                        m.norm = mode_norm(k);
                        bases.tensor.push_back(m);
                    }
            }
    return bases;
}

double orthonormality_defect(const GalerkinBases& bases, int quad_points) {
    const int m = quad_points;
    std::vector<std::array<double, 3>> pts;
    pts.reserve(static_cast<std::size_t>(m) * m * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                pts.push_back({kTwoPi * a / m, kTwoPi * b / m, kTwoPi * c / m});
    const double w = kVolume / (static_cast<double>(m) * m * m);

    double defect = 0.0;
    const auto& vel = bases.velocity;
    for (std::size_t r = 0; r < vel.size(); ++r)
        for (std::size_t l = r; l < vel.size(); ++l) {
            double dot = 0.0;
            const double ee = vel[r].e[0] * vel[l].e[0] + vel[r].e[1] * vel[l].e[1] + vel[r].e[2] * vel[l].e[2];
            for (const auto& x : pts) dot += trig(wave_of(vel[r]), x) * trig(wave_of(vel[l]), x);
            dot *= w * vel[r].norm * vel[l].norm * ee;
            defect = std::max(defect, std::abs(dot - (r == l ? 1.0 : 0.0)));
        }
    const auto& ten = bases.tensor;
    for (std::size_t r = 0; r < ten.size(); ++r)
        for (std::size_t l = r; l < ten.size(); ++l) {
            if (ten[r].frame != ten[l].frame) continue;  // frame orthonormality is structural
            double dot = 0.0;
            for (const auto& x : pts) dot += trig(wave_of(ten[r]), x) * trig(wave_of(ten[l]), x);
            dot *= w * ten[r].norm * ten[l].norm;
            defect = std::max(defect, std::abs(dot - (r == l ? 1.0 : 0.0)));
        }
    return defect;
}

GalerkinOracle::GalerkinOracle(const SimConfig& cfg) : cfg_(cfg), pot_(cfg.potential.build()) {
    if (!(cfg_.eps > 0.0))
        throw std::invalid_argument("oracle: the coefficient system needs eps > 0 (Lipschitz envelope gradient)");
    for (int a = 0; a < 3; ++a) {
        if (std::abs(cfg_.grid.length(a) - kTwoPi) > 1e-9 && !(a == 2 && cfg_.grid.n[2] == 1))
            throw std::invalid_argument("oracle: domain must be the 2*pi torus");
        if (!cfg_.grid.periodic(a)) throw std::invalid_argument("oracle: domain must be periodic");
    }
    bases_ = build_bases(cfg_.oracle_max_wavenumber);
    quad_pts_ = cfg_.oracle_quadrature_points > 0 ? cfg_.oracle_quadrature_points
                                                  : 2 * cfg_.oracle_max_wavenumber + 2;
    build_quadrature();
    build_tables();
}

void GalerkinOracle::build_quadrature() {
    const int m = quad_pts_;
    quad_x_.clear();
    quad_x_.reserve(static_cast<std::size_t>(m) * m * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                quad_x_.push_back({kTwoPi * a / m, kTwoPi * b / m, kTwoPi * c / m});
    quad_w_ = kVolume / static_cast<double>(quad_x_.size());

    const std::size_t npts = quad_x_.size();
    ten_table_.assign(bases_.tensor.size() * npts, 0.0);
    for (std::size_t s = 0; s < bases_.tensor.size(); ++s) {
        const auto& mode = bases_.tensor[s];
        for (std::size_t p = 0; p < npts; ++p)
            ten_table_[s * npts + p] = mode.norm * trig(wave_of(mode), quad_x_[p]);
    }
    vel_table_.assign(bases_.velocity.size() * npts, 0.0);
    for (std::size_t s = 0; s < bases_.velocity.size(); ++s) {
        const auto& mode = bases_.velocity[s];
        for (std::size_t p = 0; p < npts; ++p)
            vel_table_[s * npts + p] = mode.norm * trig(wave_of(mode), quad_x_[p]);
    }

    // forcing projections and norms
    const auto box = std::array<double, 3>{kTwoPi, kTwoPi, kTwoPi};
    f0_proj_.assign(bases_.velocity.size(), 0.0);
    f1_proj_.assign(bases_.velocity.size(), 0.0);
    f0_l2_ = f1_l2_ = 0.0;
    if (cfg_.forcing.f0.kind != VectorProfile::Kind::Zero || cfg_.forcing.f1.kind != TensorProfile::Kind::Zero) {
        std::vector<std::array<double, 3>> f0v(quad_x_.size());
        std::vector<DevTensor> f1v(quad_x_.size());
        for (std::size_t p = 0; p < npts; ++p) {
            f0v[p] = cfg_.forcing.f0.value(quad_x_[p], box);
            f1v[p] = cfg_.forcing.f1.value(quad_x_[p], box);
            f0_l2_ += quad_w_ * (f0v[p][0] * f0v[p][0] + f0v[p][1] * f0v[p][1] + f0v[p][2] * f0v[p][2]);
            f1_l2_ += quad_w_ * f1v[p].norm2();
        }
        f0_l2_ = std::sqrt(f0_l2_);
        f1_l2_ = std::sqrt(f1_l2_);
        for (std::size_t l = 0; l < bases_.velocity.size(); ++l) {
            const auto& mode = bases_.velocity[l];
            double p0 = 0.0, p1 = 0.0;
            for (std::size_t p = 0; p < npts; ++p) {
                const double phi = vel_table_[l * npts + p];
                p0 += (f0v[p][0] * mode.e[0] + f0v[p][1] * mode.e[1] + f0v[p][2] * mode.e[2]) * phi;
                // f1 : grad phi with grad phi = norm * e (x) dtrig
                const Mat3 f1m = f1v[p].to_mat3();
                for (int axis = 0; axis < 3; ++axis) {
                    const auto [dc, dw] = wave_derivative(wave_of(mode), axis);
                    if (dc == 0.0) continue;
                    const double dval = mode.norm * dc * trig(dw, quad_x_[p]);
                    double row = 0.0;
                    for (int j = 0; j < 3; ++j) row += f1m(j, axis) * mode.e[static_cast<std::size_t>(j)];
                    p1 += row * dval;
                }
            }
            f0_proj_[l] = quad_w_ * p0;
            f1_proj_[l] = quad_w_ * p1;
        }
    }
}

void GalerkinOracle::build_tables() {
    const auto& vel = bases_.velocity;
    const auto& ten = bases_.tensor;
    const int K = bases_.max_wavenumber;

    visc_.resize(vel.size());
    for (std::size_t r = 0; r < vel.size(); ++r) visc_[r] = cfg_.mu * norm2_int(vel[r].k);
    diff_.resize(ten.size());
    for (std::size_t r = 0; r < ten.size(); ++r) diff_[r] = cfg_.gamma * norm2_int(ten[r].k);

    std::map<std::array<int, 3>, std::vector<int>> vel_by_k, ten_by_k;
    for (std::size_t i = 0; i < vel.size(); ++i) vel_by_k[canonicalize(vel[i].k)].push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < ten.size(); ++i) ten_by_k[canonicalize(ten[i].k)].push_back(static_cast<int>(i));

    auto targets = [&](const std::array<int, 3>& ka, const std::array<int, 3>& kb) {
        std::vector<std::array<int, 3>> out;
        for (int sa : {1, -1})
            for (int sb : {1, -1}) {
                auto t = canonicalize(add(ka, kb, sa, sb));
                bool in_range = true;
                for (int a = 0; a < 3; ++a) in_range = in_range && std::abs(t[static_cast<std::size_t>(a)]) <= K;
                if (!in_range) continue;
                if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
            }
        return out;
    };

    // convection: C_{rsl} = int phi_r (x) phi_s : grad phi_l
    convection_.clear();
    for (std::size_t r = 0; r < vel.size(); ++r)
        for (std::size_t s = 0; s < vel.size(); ++s) {
            for (const auto& tk : targets(vel[r].k, vel[s].k)) {
                const auto it = vel_by_k.find(tk);
                if (it == vel_by_k.end()) continue;
                for (int l : it->second) {
                    const auto& ml = vel[static_cast<std::size_t>(l)];
                    const double ee =
                        vel[r].e[0] * ml.e[0] + vel[r].e[1] * ml.e[1] + vel[r].e[2] * ml.e[2];
                    if (ee == 0.0) continue;
                    double c = 0.0;
                    for (int axis = 0; axis < 3; ++axis) {
                        const double es = vel[s].e[static_cast<std::size_t>(axis)];
                        if (es == 0.0) continue;
                        const auto [dc, dw] = wave_derivative(wave_of(ml), axis);
                        if (dc == 0.0) continue;
                        c += es * dc * triple_integral(wave_of(vel[r]), wave_of(vel[s]), dw);
                    }
                    c *= ee * vel[r].norm * vel[s].norm * ml.norm;
                    if (std::abs(c) > 1e-14)
                        convection_.push_back({static_cast<int>(r), static_cast<int>(s), l, c});
                }
            }
        }

    // transport: D_{rsl} = int phi_r . grad psi_s : psi_l (same frame only)
    transport_.clear();
    for (std::size_t r = 0; r < vel.size(); ++r)
        for (std::size_t s = 0; s < ten.size(); ++s) {
            for (const auto& tk : targets(vel[r].k, ten[s].k)) {
                const auto it = ten_by_k.find(tk);
                if (it == ten_by_k.end()) continue;
                for (int l : it->second) {
                    const auto& ml = ten[static_cast<std::size_t>(l)];
                    if (ml.frame != ten[s].frame) continue;
                    double c = 0.0;
                    for (int axis = 0; axis < 3; ++axis) {
                        const double er = vel[r].e[static_cast<std::size_t>(axis)];
                        if (er == 0.0) continue;
                        const auto [dc, dw] = wave_derivative(wave_of(ten[s]), axis);
                        if (dc == 0.0) continue;
                        c += er * dc * triple_integral(wave_of(vel[r]), dw, wave_of(ml));
                    }
                    c *= vel[r].norm * ten[s].norm * ml.norm;
                    if (std::abs(c) > 1e-14)
                        transport_.push_back({static_cast<int>(r), static_cast<int>(s), l, c});
                }
            }
        }

    // rotation: J_{rsl} = int (psi_r W(phi_s) - W(phi_s) psi_r) : psi_l
    rotation_.clear();
    Mat3 frames[5];
    for (int f = 0; f < 5; ++f) frames[f] = DevTensor::frame(f);
    for (std::size_t r = 0; r < ten.size(); ++r)
        for (std::size_t s = 0; s < vel.size(); ++s) {
            // constant spin matrix of the mode: W(phi_s) = sgn * norm * What * trig_flipped
            Mat3 what{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    what(i, j) = 0.5 * (vel[s].e[static_cast<std::size_t>(i)] * vel[s].k[static_cast<std::size_t>(j)] -
                                        vel[s].e[static_cast<std::size_t>(j)] * vel[s].k[static_cast<std::size_t>(i)]);
            const double sgn = vel[s].sine ? 1.0 : -1.0;
            Wave flipped = wave_of(vel[s]);
            flipped.sine = !flipped.sine;
            const Mat3 er = frames[ten[r].frame];
            const Mat3 comm = er * what - what * er;
            for (const auto& tk : targets(ten[r].k, vel[s].k)) {
                const auto it = ten_by_k.find(tk);
                if (it == ten_by_k.end()) continue;
                for (int l : it->second) {
                    const auto& ml = ten[static_cast<std::size_t>(l)];
                    const double geo = frobenius(comm, frames[ml.frame]);
                    if (geo == 0.0) continue;
                    const double tint = triple_integral(wave_of(ten[r]), flipped, wave_of(ml));
                    const double c = sgn * geo * tint * ten[r].norm * vel[s].norm * ml.norm;
                    if (std::abs(c) > 1e-14)
                        rotation_.push_back({static_cast<int>(r), static_cast<int>(s), l, c});
                }
            }
        }

    // stress coupling: B_{tv} = int psi_t : grad phi_v
    coupling_by_vel_.assign(vel.size(), {});
    coupling_by_ten_.assign(ten.size(), {});
    for (std::size_t t = 0; t < ten.size(); ++t) {
        const Mat3 et = frames[ten[t].frame];
        for (const auto& tk : targets(ten[t].k, {0, 0, 0})) {
            const auto it = vel_by_k.find(tk);
            if (it == vel_by_k.end()) continue;
            for (int v : it->second) {
                const auto& mv = vel[static_cast<std::size_t>(v)];
                std::array<double, 3> ee{};
                for (int m = 0; m < 3; ++m)
                    ee[static_cast<std::size_t>(m)] = et(0, m) * mv.e[0] + et(1, m) * mv.e[1] + et(2, m) * mv.e[2];
                double c = 0.0;
                for (int axis = 0; axis < 3; ++axis) {
                    if (ee[static_cast<std::size_t>(axis)] == 0.0) continue;
                    const auto [dc, dw] = wave_derivative(wave_of(mv), axis);
                    if (dc == 0.0) continue;
                    c += ee[static_cast<std::size_t>(axis)] * dc * pair_integral(wave_of(ten[t]), dw);
                }
                c *= ten[t].norm * mv.norm;
                if (std::abs(c) > 1e-14) {
                    coupling_by_vel_[static_cast<std::size_t>(v)].push_back({static_cast<int>(t), c});
                    coupling_by_ten_[t].push_back({v, c});
                }
            }
        }
    }
}

std::vector<double> GalerkinOracle::initial_state() const {
    const auto box = std::array<double, 3>{kTwoPi, kTwoPi, kTwoPi};
    const std::size_t nv = bases_.velocity.size(), ns = bases_.tensor.size();
    const std::size_t npts = quad_x_.size();
    std::vector<double> y(nv + ns, 0.0);
    if (cfg_.initial_v_snapshot || cfg_.initial_s_snapshot)
        throw std::invalid_argument("oracle: snapshot initial data is not supported (use analytic profiles)");
    std::vector<std::array<double, 3>> v0(npts);
    std::vector<DevTensor> s0(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        v0[p] = cfg_.initial_v.value(quad_x_[p], box);
        s0[p] = cfg_.initial_s.value(quad_x_[p], box);
    }
    for (std::size_t l = 0; l < nv; ++l) {
        const auto& e = bases_.velocity[l].e;
        double acc = 0.0;
        for (std::size_t p = 0; p < npts; ++p)
            acc += (v0[p][0] * e[0] + v0[p][1] * e[1] + v0[p][2] * e[2]) * vel_table_[l * npts + p];
        y[l] = quad_w_ * acc;
    }
    for (std::size_t l = 0; l < ns; ++l) {
        const int frame = bases_.tensor[l].frame;
        double acc = 0.0;
        for (std::size_t p = 0; p < npts; ++p) acc += s0[p][frame] * ten_table_[l * npts + p];
        y[nv + l] = quad_w_ * acc;
    }
    return y;
}

void GalerkinOracle::eval_tensor_at_quad(const double* beta, std::vector<double>& coords) const {
    const std::size_t npts = quad_x_.size();
    coords.assign(5 * npts, 0.0);
    for (std::size_t s = 0; s < bases_.tensor.size(); ++s) {
        const double b = beta[s];
        if (b == 0.0) continue;
        const int frame = bases_.tensor[s].frame;
        double* dst = coords.data() + static_cast<std::size_t>(frame) * npts;
        const double* src = ten_table_.data() + s * npts;
        for (std::size_t p = 0; p < npts; ++p) dst[p] += b * src[p];
    }
}

void GalerkinOracle::rhs(double t, const std::vector<double>& y, std::vector<double>& dy) const {
    const std::size_t nv = bases_.velocity.size(), ns = bases_.tensor.size();
    dy.assign(nv + ns, 0.0);
    const double* alpha = y.data();
    const double* beta = y.data() + nv;
    double* da = dy.data();
    double* db = dy.data() + nv;

    // velocity: convection + stress coupling + viscosity + forcing
    for (const auto& tr : convection_)
        da[tr.l] += tr.c * alpha[tr.r] * alpha[tr.s];
    const double eta = cfg_.eta;
    for (std::size_t l = 0; l < nv; ++l) {
        double c = 0.0;
        for (const auto& [tidx, coef] : coupling_by_vel_[l]) c += coef * beta[tidx];
        da[l] += -eta * c - visc_[l] * alpha[l];
    }
    if (!f0_proj_.empty()) {
        const double amp0 = cfg_.forcing.f0_time.value(t);
        const double amp1 = cfg_.forcing.f1_time.value(t);
        for (std::size_t l = 0; l < nv; ++l) da[l] += amp0 * f0_proj_[l] - amp1 * f1_proj_[l];
    }

    // tensor: transport + rotation + diffusion + source + envelope gradient
    for (const auto& tr : transport_)
        db[tr.l] -= tr.c * alpha[tr.r] * beta[tr.s];
    for (const auto& tr : rotation_)
        db[tr.l] -= tr.c * beta[tr.r] * alpha[tr.s];
    const double eta2 = cfg_.eta2_zero ? 0.0 : eta;
    for (std::size_t l = 0; l < ns; ++l) {
        double c = 0.0;
        for (const auto& [vidx, coef] : coupling_by_ten_[l]) c += coef * alpha[vidx];
        db[l] += eta2 * c - diff_[l] * beta[l];
    }

    const std::size_t npts = quad_x_.size();
    std::vector<double> coords;
    eval_tensor_at_quad(beta, coords);
    std::vector<double> grads(5 * npts);
    for (std::size_t p = 0; p < npts; ++p) {
        DevTensor s;
        for (int c = 0; c < 5; ++c) s[c] = coords[static_cast<std::size_t>(c) * npts + p];
        const DevTensor g = pot_.moreau_grad(s, cfg_.eps);
        for (int c = 0; c < 5; ++c) grads[static_cast<std::size_t>(c) * npts + p] = g[c];
    }
    for (std::size_t l = 0; l < ns; ++l) {
        const int frame = bases_.tensor[l].frame;
        const double* g = grads.data() + static_cast<std::size_t>(frame) * npts;
        const double* tab = ten_table_.data() + l * npts;
        double acc = 0.0;
        for (std::size_t p = 0; p < npts; ++p) acc += g[p] * tab[p];
        db[l] -= quad_w_ * acc;
    }
}

GalerkinTrajectory GalerkinOracle::integrate() const {
    GalerkinTrajectory traj;
    traj.n_velocity = n_velocity();
    traj.n_tensor = n_tensor();
    const double h = cfg_.oracle_step;
    const long n_steps = cfg_.t_end <= 0.0 ? 0 : std::llround(cfg_.t_end / h);

    std::vector<double> y = initial_state();
    traj.times.push_back(0.0);
    traj.states.push_back(y);

    std::vector<double> k1, k2, k3, k4, tmp(y.size());
    for (long n = 0; n < n_steps; ++n) {
        const double t = n * h;
        rhs(t, y, k1);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
        rhs(t + h, tmp, k4);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        for (double v : y)
            if (!(std::abs(v) <= 1e12)) throw BlowUp((n + 1) * h, v);
        traj.times.push_back((n + 1) * h);
        traj.states.push_back(y);
    }
    return traj;
}

double GalerkinOracle::kinetic(const std::vector<double>& y) const {
    double s = 0.0;
    for (int l = 0; l < n_velocity(); ++l) s += y[static_cast<std::size_t>(l)] * y[static_cast<std::size_t>(l)];
    return 0.5 * s;
}

double GalerkinOracle::elastic(const std::vector<double>& y) const {
    const std::size_t nv = bases_.velocity.size();
    double s = 0.0;
    for (std::size_t l = 0; l < bases_.tensor.size(); ++l) s += y[nv + l] * y[nv + l];
    return 0.5 * s;
}

double GalerkinOracle::velocity_grad_norm2(const std::vector<double>& y) const {
    double s = 0.0;
    for (std::size_t l = 0; l < bases_.velocity.size(); ++l)
        s += norm2_int(bases_.velocity[l].k) * y[l] * y[l];
    return s;
}

double GalerkinOracle::tensor_grad_norm2(const std::vector<double>& y) const {
    const std::size_t nv = bases_.velocity.size();
    double s = 0.0;
    for (std::size_t l = 0; l < bases_.tensor.size(); ++l)
        s += norm2_int(bases_.tensor[l].k) * y[nv + l] * y[nv + l];
    return s;
}

double GalerkinOracle::plastic_dissipation(const std::vector<double>& y) const {
    const std::size_t nv = bases_.velocity.size();
    const std::size_t npts = quad_x_.size();
    std::vector<double> coords;
    eval_tensor_at_quad(y.data() + nv, coords);
    double acc = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
        DevTensor s;
        for (int c = 0; c < 5; ++c) s[c] = coords[static_cast<std::size_t>(c) * npts + p];
        acc += frobenius(pot_.moreau_grad(s, cfg_.eps), s);
    }
    return quad_w_ * acc;
}

double GalerkinOracle::stress_coupling(const std::vector<double>& y) const {
    const std::size_t nv = bases_.velocity.size();
    double s = 0.0;
    for (std::size_t v = 0; v < nv; ++v)
        for (const auto& [tidx, coef] : coupling_by_vel_[v]) s += coef * y[nv + static_cast<std::size_t>(tidx)] * y[v];
    return s;
}

double GalerkinOracle::forcing_work(double t, const std::vector<double>& y) const {
    if (f0_proj_.empty()) return 0.0;
    const double amp0 = cfg_.forcing.f0_time.value(t);
    const double amp1 = cfg_.forcing.f1_time.value(t);
    double s = 0.0;
    for (std::size_t l = 0; l < bases_.velocity.size(); ++l)
        s += y[l] * (amp0 * f0_proj_[l] - amp1 * f1_proj_[l]);
    return s;
}

double GalerkinOracle::field_velocity_norm2(const std::vector<double>& y) const {
    const std::size_t npts = quad_x_.size();
    const std::size_t nv = bases_.velocity.size();
    double acc = 0.0;
    std::vector<std::array<double, 3>> vals(npts, {0.0, 0.0, 0.0});
    for (std::size_t l = 0; l < nv; ++l) {
        const double a = y[l];
        if (a == 0.0) continue;
        const auto& e = bases_.velocity[l].e;
        const double* tab = vel_table_.data() + l * npts;
        for (std::size_t p = 0; p < npts; ++p) {
            vals[p][0] += a * e[0] * tab[p];
            vals[p][1] += a * e[1] * tab[p];
            vals[p][2] += a * e[2] * tab[p];
        }
    }
    for (const auto& v : vals) acc += v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    return quad_w_ * acc;
}

double GalerkinOracle::convection_energy_defect(const std::vector<double>& y) const {
    double s = 0.0;
    for (const auto& tr : convection_) s += y[static_cast<std::size_t>(tr.l)] * tr.c * y[static_cast<std::size_t>(tr.r)] * y[static_cast<std::size_t>(tr.s)];
    return s;
}

double GalerkinOracle::rotation_energy_defect(const std::vector<double>& y) const {
    const std::size_t nv = bases_.velocity.size();
    double s = 0.0;
    for (const auto& tr : rotation_)
        s += y[nv + static_cast<std::size_t>(tr.l)] * tr.c * y[nv + static_cast<std::size_t>(tr.r)] * y[static_cast<std::size_t>(tr.s)];
    return s;
}

double GalerkinOracle::transport_energy_defect(const std::vector<double>& y) const {
    const std::size_t nv = bases_.velocity.size();
    double s = 0.0;
    for (const auto& tr : transport_)
        s += y[nv + static_cast<std::size_t>(tr.l)] * tr.c * y[static_cast<std::size_t>(tr.r)] * y[nv + static_cast<std::size_t>(tr.s)];
    return s;
}

OracleEnergyReport GalerkinOracle::energy_report(const GalerkinTrajectory& traj) const {
    OracleEnergyReport rep;
    const std::size_t n = traj.times.size();
    rep.times = traj.times;
    rep.residual_v.resize(n);
    rep.residual_s.resize(n);
    const double eta = cfg_.eta;
    const double eta2 = cfg_.eta2_zero ? 0.0 : eta;

    const double kin0 = kinetic(traj.states[0]);
    const double ela0 = elastic(traj.states[0]);
    rep.initial_energy = kin0 + ela0;

    double int_gradv = 0.0, int_grads = 0.0, int_plastic = 0.0, int_work = 0.0, int_coupling = 0.0;
    double prev_gradv = 0.0, prev_grads = 0.0, prev_plastic = 0.0, prev_work = 0.0, prev_coupling = 0.0;

    double sup_energy = 0.0, int_h1 = 0.0, prev_h1 = 0.0;
    double int_f0amp = 0.0, prev_f0amp = 0.0, int_f1amp2 = 0.0, prev_f1amp2 = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& y = traj.states[i];
        const double t = traj.times[i];
        const double gradv = velocity_grad_norm2(y);
        const double grads = tensor_grad_norm2(y);
        const double plastic = plastic_dissipation(y);
        const double work = forcing_work(t, y);
        const double coupling = stress_coupling(y);
        if (i > 0) {
            const double dt = traj.times[i] - traj.times[i - 1];
            int_gradv += 0.5 * dt * (prev_gradv + gradv);
            int_grads += 0.5 * dt * (prev_grads + grads);
            int_plastic += 0.5 * dt * (prev_plastic + plastic);
            int_work += 0.5 * dt * (prev_work + work);
            int_coupling += 0.5 * dt * (prev_coupling + coupling);
        }
        prev_gradv = gradv;
        prev_grads = grads;
        prev_plastic = plastic;
        prev_work = work;
        prev_coupling = coupling;

        const double kin = kinetic(y);
        const double ela = elastic(y);
        const double lhs_v = kin + cfg_.mu * int_gradv;
        const double rhs_v = kin0 + int_work - eta * int_coupling;
        rep.residual_v[i] = std::abs(lhs_v - rhs_v);
        const double lhs_s = ela + cfg_.gamma * int_grads + int_plastic;
        const double rhs_s = ela0 + eta2 * int_coupling;
        rep.residual_s[i] = std::abs(lhs_s - rhs_s);
        rep.max_residual_v = std::max(rep.max_residual_v, rep.residual_v[i]);
        rep.max_residual_s = std::max(rep.max_residual_s, rep.residual_s[i]);

        sup_energy = std::max(sup_energy, 2.0 * (kin + ela));
        const double h1 = 2.0 * (kin + ela) + gradv + grads;
        if (i > 0) {
            const double dt = traj.times[i] - traj.times[i - 1];
            int_h1 += 0.5 * dt * (prev_h1 + h1);
        }
        prev_h1 = h1;

        const double a0 = std::abs(cfg_.forcing.f0_time.value(t)) * f0_l2_;
        const double a1 = cfg_.forcing.f1_time.value(t);
        if (i > 0) {
            const double dt = traj.times[i] - traj.times[i - 1];
            int_f0amp += 0.5 * dt * (prev_f0amp + a0);
            int_f1amp2 += 0.5 * dt * (prev_f1amp2 + a1 * a1 * f1_l2_ * f1_l2_);
        }
        prev_f0amp = a0;
        prev_f1amp2 = a1 * a1 * f1_l2_ * f1_l2_;
    }

    // a-priori bound with w = 0 (Young splittings as in the uniform estimate):
    //   sup(|v|^2+|S|^2)/2 <= K* = 2 E0 + 2 |f0|_{L1L2}^2 + |f1|_{L2L2}^2 / mu
    const double T = traj.times.back();
    const double e0 = kin0 + ela0;
    const double f0n = int_f0amp;
    const double f1n2 = int_f1amp2;
    const double kstar = 2.0 * e0 + 2.0 * f0n * f0n + f1n2 / cfg_.mu;
    const double dstar = e0 + 0.5 * kstar + f0n * f0n + 0.5 * f1n2 / cfg_.mu;
    rep.apriori_measured = sup_energy + int_h1;
    rep.apriori_bound = 2.0 * kstar + 2.0 * T * kstar + 2.0 * dstar / cfg_.mu + dstar / cfg_.gamma;
    return rep;
}

std::array<double, 3> GalerkinOracle::velocity_at(const std::vector<double>& y,
                                                  const std::array<double, 3>& x) const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (std::size_t l = 0; l < bases_.velocity.size(); ++l) {
        const double a = y[l];
        if (a == 0.0) continue;
        const auto& m = bases_.velocity[l];
        const double f = a * m.norm * trig(wave_of(m), x);
        out[0] += f * m.e[0];
        out[1] += f * m.e[1];
        out[2] += f * m.e[2];
    }
    return out;
}

DevTensor GalerkinOracle::tensor_at(const std::vector<double>& y, const std::array<double, 3>& x) const {
    const std::size_t nv = bases_.velocity.size();
    DevTensor out;
    for (std::size_t l = 0; l < bases_.tensor.size(); ++l) {
        const double b = y[nv + l];
        if (b == 0.0) continue;
        const auto& m = bases_.tensor[l];
        out[m.frame] += b * m.norm * trig(wave_of(m), x);
    }
    return out;
}

VelocityField GalerkinOracle::velocity_on_grid(const std::vector<double>& y, const Grid& g) const {
    VelocityField V(g);
    for (int c = 0; c < 3; ++c) {
        Array3& a = V.comp[c];
        for (int k = 0; k < a.n2; ++k)
            for (int j = 0; j < a.n1; ++j)
                for (int i = 0; i < a.n0; ++i) {
                    std::array<double, 3> x{};
                    const int idx[3] = {i, j, k};
                    for (int axis = 0; axis < 3; ++axis)
                        x[static_cast<std::size_t>(axis)] =
                            axis == c ? g.face(axis, idx[axis]) : g.center(axis, idx[axis]);
                    a(i, j, k) = velocity_at(y, x)[static_cast<std::size_t>(c)];
                }
    }
    return V;
}

DevTensorField GalerkinOracle::tensor_on_grid(const std::vector<double>& y, const Grid& g) const {
    DevTensorField S(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const std::array<double, 3> x{g.center(0, i), g.center(1, j), g.center(2, k)};
                S.set(i, j, k, tensor_at(y, x));
            }
    return S;
}

}  // namespace vpflow
