#include "vpflow/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vpflow {

PotentialSpec PotentialConfig::build() const {
    switch (kind) {
        case PotentialKind::Quadratic: return PotentialSpec::quadratic(a);
        case PotentialKind::YieldBall: return PotentialSpec::yield_ball(a, sigma_yield);
        case PotentialKind::Radial:
            return PotentialSpec::radial(RadialProfile(radial_knots, radial_curvatures, radial_slope0,
                                                       radial_slope_jumps, radial_cap));
        case PotentialKind::PolyDet: return PotentialSpec::poly_det(a2, a4, a6, b);
    }
    throw std::logic_error("unreachable potential kind");
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ' ';
        out += fmt(xs[i]);
    }
    return out;
}

std::string fmt_vec3(const std::array<double, 3>& v) { return fmt(v[0]) + ' ' + fmt(v[1]) + ' ' + fmt(v[2]); }

std::string fmt_wave(const std::array<int, 3>& v) {
    return std::to_string(v[0]) + ' ' + std::to_string(v[1]) + ' ' + std::to_string(v[2]);
}

std::string fmt_coords(const std::array<double, 5>& v) {
    std::string out;
    for (int i = 0; i < 5; ++i) {
        if (i) out += ' ';
        out += fmt(v[static_cast<std::size_t>(i)]);
    }
    return out;
}

struct Setter {
    std::function<void(const std::string& key, const std::string& value, SimConfig& c)> apply;
};

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ValidationError(key, "expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ValidationError(key, "expected a nonnegative integer, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        throw ValidationError(key, "expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError(key, "expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(key, tok));
    return out;
}

std::array<double, 3> parse_vec3(const std::string& key, const std::string& v) {
    const auto xs = parse_list(key, v);
    if (xs.size() != 3) throw ValidationError(key, "expected 3 numbers");
    return {xs[0], xs[1], xs[2]};
}

std::array<int, 3> parse_wave(const std::string& key, const std::string& v) {
    const auto xs = parse_list(key, v);
    if (xs.size() != 3) throw ValidationError(key, "expected 3 integers");
    std::array<int, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[static_cast<std::size_t>(i)] = static_cast<int>(std::llround(xs[static_cast<std::size_t>(i)]));
        if (out[static_cast<std::size_t>(i)] != xs[static_cast<std::size_t>(i)])
            throw ValidationError(key, "expected integers");
    }
    return out;
}

std::array<double, 5> parse_coords(const std::string& key, const std::string& v) {
    const auto xs = parse_list(key, v);
    if (xs.size() != 5) throw ValidationError(key, "expected 5 numbers");
    std::array<double, 5> out{};
    for (int i = 0; i < 5; ++i) out[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)];
    return out;
}

Topology parse_topology(const std::string& key, const std::string& v) {
    if (v == "periodic") return Topology::Periodic;
    if (v == "wall") return Topology::Wall;
    throw ValidationError(key, "expected periodic or wall");
}

TimeProfile::Kind parse_time_kind(const std::string& key, const std::string& v) {
    if (v == "constant") return TimeProfile::Kind::Constant;
    if (v == "sinusoidal") return TimeProfile::Kind::Sinusoidal;
    if (v == "exp_decay") return TimeProfile::Kind::ExpDecay;
    throw ValidationError(key, "unknown time profile '" + v + "'");
}

// Registers key handlers for a TimeProfile under the given prefix.
void time_profile_keys(std::map<std::string, Setter>& reg, const std::string& prefix,
                       std::function<TimeProfile&(SimConfig&)> get) {
    reg[prefix + ".time"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).kind = parse_time_kind(k, v);
    }};
    reg[prefix + ".time_a0"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).a0 = parse_double(k, v);
    }};
    reg[prefix + ".time_a1"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).a1 = parse_double(k, v);
    }};
    reg[prefix + ".time_b1"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).b1 = parse_double(k, v);
    }};
    reg[prefix + ".time_omega"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).omega = parse_double(k, v);
    }};
    reg[prefix + ".time_rate"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).rate = parse_double(k, v);
    }};
}

void vector_profile_keys(std::map<std::string, Setter>& reg, const std::string& prefix,
                         std::function<VectorProfile&(SimConfig&)> get) {
    reg[prefix + ".kind"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        auto& p = get(c);
        if (v == "zero") p.kind = VectorProfile::Kind::Zero;
        else if (v == "constant") p.kind = VectorProfile::Kind::Constant;
        else if (v == "fourier_mode") p.kind = VectorProfile::Kind::FourierMode;
        else if (v == "taylor_green") p.kind = VectorProfile::Kind::TaylorGreen;
        else if (v == "gaussian_bump") p.kind = VectorProfile::Kind::GaussianBump;
        else throw ValidationError(k, "unknown vector profile '" + v + "'");
    }};
    reg[prefix + ".direction"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).direction = parse_vec3(k, v);
    }};
    reg[prefix + ".wave"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).wave = parse_wave(k, v);
    }};
    reg[prefix + ".parity"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        if (v == "sin") get(c).sine = true;
        else if (v == "cos") get(c).sine = false;
        else throw ValidationError(k, "expected sin or cos");
    }};
    reg[prefix + ".amplitude"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).amplitude = parse_double(k, v);
    }};
    reg[prefix + ".center"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).center = parse_vec3(k, v);
    }};
    reg[prefix + ".width"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        const double w = parse_double(k, v);
        if (!(w > 0.0)) throw ValidationError(k, "must be > 0");
        get(c).width = w;
    }};
}

void tensor_profile_keys(std::map<std::string, Setter>& reg, const std::string& prefix,
                         std::function<TensorProfile&(SimConfig&)> get) {
    reg[prefix + ".kind"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        auto& p = get(c);
        if (v == "zero") p.kind = TensorProfile::Kind::Zero;
        else if (v == "constant") p.kind = TensorProfile::Kind::Constant;
        else if (v == "fourier_mode") p.kind = TensorProfile::Kind::FourierMode;
        else if (v == "gaussian_bump") p.kind = TensorProfile::Kind::GaussianBump;
        else throw ValidationError(k, "unknown tensor profile '" + v + "'");
    }};
    reg[prefix + ".coords"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).coords = parse_coords(k, v);
    }};
    reg[prefix + ".wave"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).wave = parse_wave(k, v);
    }};
    reg[prefix + ".parity"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        if (v == "sin") get(c).sine = true;
        else if (v == "cos") get(c).sine = false;
        else throw ValidationError(k, "expected sin or cos");
    }};
    reg[prefix + ".center"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        get(c).center = parse_vec3(k, v);
    }};
    reg[prefix + ".width"] = {[get](const std::string& k, const std::string& v, SimConfig& c) {
        const double w = parse_double(k, v);
        if (!(w > 0.0)) throw ValidationError(k, "must be > 0");
        get(c).width = w;
    }};
}

const std::map<std::string, Setter>& registry() {
    static const std::map<std::string, Setter> reg = [] {
        std::map<std::string, Setter> r;
        auto num = [&r](const std::string& key, std::function<void(SimConfig&, double)> set) {
            r[key] = {[set](const std::string& k, const std::string& v, SimConfig& c) { set(c, parse_double(k, v)); }};
        };
        auto integer = [&r](const std::string& key, std::function<void(SimConfig&, int)> set) {
            r[key] = {[set](const std::string& k, const std::string& v, SimConfig& c) { set(c, parse_int(k, v)); }};
        };

        r["domain.topology_x"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.grid.topo[0] = parse_topology(k, v);
        }};
        r["domain.topology_y"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.grid.topo[1] = parse_topology(k, v);
        }};
        r["domain.topology_z"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.grid.topo[2] = parse_topology(k, v);
        }};
        integer("grid.nx", [](SimConfig& c, int x) { c.grid.n[0] = x; });
        integer("grid.ny", [](SimConfig& c, int x) { c.grid.n[1] = x; });
        integer("grid.nz", [](SimConfig& c, int x) { c.grid.n[2] = x; });

        num("time.dt", [](SimConfig& c, double x) { c.dt = x; });
        num("time.t_end", [](SimConfig& c, double x) { c.t_end = x; });
        num("output.interval", [](SimConfig& c, double x) { c.output_interval = x; });
        integer("output.ledger_every_steps", [](SimConfig& c, int x) { c.ledger_every_steps = x; });

        num("physics.mu", [](SimConfig& c, double x) { c.mu = x; });
        num("physics.gamma", [](SimConfig& c, double x) { c.gamma = x; });
        num("physics.eta", [](SimConfig& c, double x) { c.eta = x; });
        r["physics.eta2_zero"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.eta2_zero = parse_bool(k, v);
        }};

        r["potential.type"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            if (v == "quadratic") c.potential.kind = PotentialKind::Quadratic;
            else if (v == "yield_ball") c.potential.kind = PotentialKind::YieldBall;
            else if (v == "radial") c.potential.kind = PotentialKind::Radial;
            else if (v == "poly_det") c.potential.kind = PotentialKind::PolyDet;
            else throw ValidationError(k, "unknown potential '" + v + "'");
        }};
        num("potential.a", [](SimConfig& c, double x) { c.potential.a = x; });
        num("potential.sigma_yield", [](SimConfig& c, double x) { c.potential.sigma_yield = x; });
        num("potential.a2", [](SimConfig& c, double x) { c.potential.a2 = x; });
        num("potential.a4", [](SimConfig& c, double x) { c.potential.a4 = x; });
        num("potential.a6", [](SimConfig& c, double x) { c.potential.a6 = x; });
        num("potential.b", [](SimConfig& c, double x) { c.potential.b = x; });
        r["potential.radial_knots"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.potential.radial_knots = parse_list(k, v);
        }};
        r["potential.radial_curvatures"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.potential.radial_curvatures = parse_list(k, v);
        }};
        num("potential.radial_slope0", [](SimConfig& c, double x) { c.potential.radial_slope0 = x; });
        r["potential.radial_slope_jumps"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.potential.radial_slope_jumps = parse_list(k, v);
        }};
        num("potential.radial_cap", [](SimConfig& c, double x) { c.potential.radial_cap = x; });

        num("moreau.eps", [](SimConfig& c, double x) { c.eps = x; });

        vector_profile_keys(r, "forcing.f0", [](SimConfig& c) -> VectorProfile& { return c.forcing.f0; });
        time_profile_keys(r, "forcing.f0", [](SimConfig& c) -> TimeProfile& { return c.forcing.f0_time; });
        tensor_profile_keys(r, "forcing.f1", [](SimConfig& c) -> TensorProfile& { return c.forcing.f1; });
        time_profile_keys(r, "forcing.f1", [](SimConfig& c) -> TimeProfile& { return c.forcing.f1_time; });

        static const char* wall_names[6] = {"xlow", "xhigh", "ylow", "yhigh", "zlow", "zhigh"};
        for (int wall = 0; wall < 6; ++wall) {
            const std::string prefix = std::string("boundary.") + wall_names[wall];
            r[prefix + ".kind"] = {[wall](const std::string& k, const std::string& v, SimConfig& c) {
                auto& p = c.boundary.walls[static_cast<std::size_t>(wall)];
                if (v == "zero") p.kind = WallProfile::Kind::Zero;
                else if (v == "constant") p.kind = WallProfile::Kind::Constant;
                else if (v == "lid_tangential") p.kind = WallProfile::Kind::LidTangential;
                else throw ValidationError(k, "unknown wall profile '" + v + "'");
            }};
            r[prefix + ".direction"] = {[wall](const std::string& k, const std::string& v, SimConfig& c) {
                c.boundary.walls[static_cast<std::size_t>(wall)].direction = parse_vec3(k, v);
            }};
            r[prefix + ".power"] = {[wall](const std::string& k, const std::string& v, SimConfig& c) {
                c.boundary.walls[static_cast<std::size_t>(wall)].power = parse_double(k, v);
            }};
            time_profile_keys(r, prefix, [wall](SimConfig& c) -> TimeProfile& {
                return c.boundary.walls[static_cast<std::size_t>(wall)].time;
            });
        }

        vector_profile_keys(r, "initial.v", [](SimConfig& c) -> VectorProfile& { return c.initial_v; });
        r["initial.v.snapshot"] = {[](const std::string&, const std::string& v, SimConfig& c) {
            c.initial_v_snapshot = v;
        }};
        tensor_profile_keys(r, "initial.s", [](SimConfig& c) -> TensorProfile& { return c.initial_s; });
        r["initial.s.snapshot"] = {[](const std::string&, const std::string& v, SimConfig& c) {
            c.initial_s_snapshot = v;
        }};

        num("lifting.delta", [](SimConfig& c, double x) { c.lifting_delta = x; });

        num("tol.energy", [](SimConfig& c, double x) { c.tol_energy = x; });
        num("tol.div", [](SimConfig& c, double x) { c.tol_div = x; });
        num("tol.solver", [](SimConfig& c, double x) { c.tol_solver = x; });

        r["rng.seed"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.seed = parse_u64(k, v);
        }};

        integer("oracle.max_wavenumber", [](SimConfig& c, int x) { c.oracle_max_wavenumber = x; });
        num("oracle.h", [](SimConfig& c, double x) { c.oracle_step = x; });
        integer("oracle.quadrature_points", [](SimConfig& c, int x) { c.oracle_quadrature_points = x; });

        r["sweep.eps"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.sweep_eps = parse_list(k, v);
        }};

        integer("varin.random_fields", [](SimConfig& c, int x) { c.varin_random_fields = x; });
        integer("varin.max_wave", [](SimConfig& c, int x) { c.varin_max_wave = x; });
        num("varin.amplitude", [](SimConfig& c, double x) { c.varin_amplitude = x; });
        integer("varin.mollify_width", [](SimConfig& c, int x) { c.varin_mollify_width = x; });

        r["proxtable.radii"] = {[](const std::string& k, const std::string& v, SimConfig& c) {
            c.proxtable_radii = parse_list(k, v);
        }};
        num("proxtable.lambda", [](SimConfig& c, double x) { c.proxtable_lambda = x; });
        return r;
    }();
    return reg;
}

}  // namespace

void validate(const SimConfig& c) {
    c.grid.validate();
    if (!(c.dt > 0.0)) throw ValidationError("time.dt", "must be > 0");
    if (c.t_end < 0.0) throw ValidationError("time.t_end", "must be >= 0");
    if (!(c.output_interval > 0.0)) throw ValidationError("output.interval", "must be > 0");
    if (c.ledger_every_steps < 1) throw ValidationError("output.ledger_every_steps", "must be >= 1");
    if (!(c.mu > 0.0)) throw ValidationError("physics.mu", "must be > 0");
    if (!(c.gamma > 0.0)) throw ValidationError("physics.gamma", "must be > 0");
    if (c.eta < 0.0) throw ValidationError("physics.eta", "must be >= 0");
    if (c.eps < 0.0 || c.eps > 1.0) throw ValidationError("moreau.eps", "must lie in [0, 1]");
    if (c.eps > 0.0 && c.dt > c.eps)
        throw ValidationError("time.dt", "must be <= moreau.eps for the explicit envelope-gradient step");
    if (!(c.lifting_delta > 0.0)) throw ValidationError("lifting.delta", "must be > 0");
    for (int a = 0; a < 3; ++a) {
        if (!c.grid.periodic(a) && c.lifting_delta >= 0.5 * c.grid.length(a) && c.boundary.any_nonzero())
            throw ValidationError("lifting.delta", "must be below half the box width on wall axes");
    }
    if (!(c.tol_energy > 0.0)) throw ValidationError("tol.energy", "must be > 0");
    if (!(c.tol_div > 0.0)) throw ValidationError("tol.div", "must be > 0");
    if (!(c.tol_solver > 0.0)) throw ValidationError("tol.solver", "must be > 0");
    if (c.oracle_max_wavenumber < 1) throw ValidationError("oracle.max_wavenumber", "must be >= 1");
    if (!(c.oracle_step > 0.0)) throw ValidationError("oracle.h", "must be > 0");
    if (c.oracle_quadrature_points < 0) throw ValidationError("oracle.quadrature_points", "must be >= 0");
    if (c.varin_random_fields < 0) throw ValidationError("varin.random_fields", "must be >= 0");
    if (c.varin_max_wave < 0) throw ValidationError("varin.max_wave", "must be >= 0");
    if (c.varin_mollify_width < 1) throw ValidationError("varin.mollify_width", "must be >= 1");
    for (double e : c.sweep_eps)
        if (!(e > 0.0) || e > 1.0) throw ValidationError("sweep.eps", "entries must lie in (0, 1]");
    if (!(c.proxtable_lambda > 0.0)) throw ValidationError("proxtable.lambda", "must be > 0");

    try {
        c.boundary.validate(c.grid);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("boundary", e.what());
    }
    try {
        (void)c.potential.build();
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (what.find("|b|") != std::string::npos) throw ValidationError("potential.b", "|b| must be <= 4");
        throw ValidationError("potential", what);
    }
    if (c.eps == 0.0) {
        // the exact nonsmooth path needs only prox; nothing further to check
    }
}

SimConfig parse_config(const std::string& text) {
    SimConfig c;
    // domain lengths are resolved after all keys so that key order is free
    std::array<double, 3> length{};
    std::array<bool, 3> has_length{};
    const auto& reg = registry();
    std::istringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string stripped = strip(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
        const std::string key = strip(stripped.substr(0, eq));
        const std::string value = strip(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError(lineno, "empty key");
        if (key == "domain.lx" || key == "domain.ly" || key == "domain.lz") {
            const int a = key[7] - 'x';
            const double x = parse_double(key, value);
            if (!(x > 0.0)) throw ValidationError(key, "must be > 0");
            length[static_cast<std::size_t>(a)] = x;
            has_length[static_cast<std::size_t>(a)] = true;
            continue;
        }
        const auto it = reg.find(key);
        if (it == reg.end()) throw ValidationError(key, "unknown key");
        it->second.apply(key, value, c);
    }
    for (int a = 0; a < 3; ++a) {
        if (has_length[static_cast<std::size_t>(a)])
            c.grid.h[static_cast<std::size_t>(a)] = length[static_cast<std::size_t>(a)] / c.grid.n[static_cast<std::size_t>(a)];
    }
    validate(c);
    return c;
}

SimConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SimConfig& c) {
    std::ostringstream o;
    auto kv = [&o](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
    kv("grid.nx", std::to_string(c.grid.n[0]));
    kv("grid.ny", std::to_string(c.grid.n[1]));
    kv("grid.nz", std::to_string(c.grid.n[2]));
    kv("domain.lx", fmt(c.grid.length(0)));
    kv("domain.ly", fmt(c.grid.length(1)));
    kv("domain.lz", fmt(c.grid.length(2)));
    auto topo = [](Topology t) { return t == Topology::Periodic ? "periodic" : "wall"; };
    kv("domain.topology_x", topo(c.grid.topo[0]));
    kv("domain.topology_y", topo(c.grid.topo[1]));
    kv("domain.topology_z", topo(c.grid.topo[2]));
    kv("time.dt", fmt(c.dt));
    kv("time.t_end", fmt(c.t_end));
    kv("output.interval", fmt(c.output_interval));
    kv("output.ledger_every_steps", std::to_string(c.ledger_every_steps));
    kv("physics.mu", fmt(c.mu));
    kv("physics.gamma", fmt(c.gamma));
    kv("physics.eta", fmt(c.eta));
    kv("physics.eta2_zero", c.eta2_zero ? "true" : "false");
    switch (c.potential.kind) {
        case PotentialKind::Quadratic:
            kv("potential.type", "quadratic");
            kv("potential.a", fmt(c.potential.a));
            break;
        case PotentialKind::YieldBall:
            kv("potential.type", "yield_ball");
            kv("potential.a", fmt(c.potential.a));
            kv("potential.sigma_yield", fmt(c.potential.sigma_yield));
            break;
        case PotentialKind::Radial:
            kv("potential.type", "radial");
            kv("potential.radial_knots", fmt_list(c.potential.radial_knots));
            kv("potential.radial_curvatures", fmt_list(c.potential.radial_curvatures));
            kv("potential.radial_slope0", fmt(c.potential.radial_slope0));
            if (!c.potential.radial_slope_jumps.empty())
                kv("potential.radial_slope_jumps", fmt_list(c.potential.radial_slope_jumps));
            if (std::isfinite(c.potential.radial_cap)) kv("potential.radial_cap", fmt(c.potential.radial_cap));
            break;
        case PotentialKind::PolyDet:
            kv("potential.type", "poly_det");
            kv("potential.a2", fmt(c.potential.a2));
            kv("potential.a4", fmt(c.potential.a4));
            kv("potential.a6", fmt(c.potential.a6));
            kv("potential.b", fmt(c.potential.b));
            break;
    }
    kv("moreau.eps", fmt(c.eps));

    auto vec_profile = [&](const std::string& p, const VectorProfile& v) {
        kv(p + ".kind", to_string(v.kind));
        if (v.kind == VectorProfile::Kind::Zero) return;
        kv(p + ".direction", fmt_vec3(v.direction));
        kv(p + ".wave", fmt_wave(v.wave));
        kv(p + ".parity", v.sine ? "sin" : "cos");
        kv(p + ".amplitude", fmt(v.amplitude));
        kv(p + ".center", fmt_vec3(v.center));
        kv(p + ".width", fmt(v.width));
    };
    auto ten_profile = [&](const std::string& p, const TensorProfile& v) {
        kv(p + ".kind", to_string(v.kind));
        if (v.kind == TensorProfile::Kind::Zero) return;
        kv(p + ".coords", fmt_coords(v.coords));
        kv(p + ".wave", fmt_wave(v.wave));
        kv(p + ".parity", v.sine ? "sin" : "cos");
        kv(p + ".center", fmt_vec3(v.center));
        kv(p + ".width", fmt(v.width));
    };
    auto time_profile = [&](const std::string& p, const TimeProfile& t) {
        kv(p + ".time", to_string(t.kind));
        kv(p + ".time_a0", fmt(t.a0));
        if (t.kind == TimeProfile::Kind::Sinusoidal) {
            kv(p + ".time_a1", fmt(t.a1));
            kv(p + ".time_b1", fmt(t.b1));
            kv(p + ".time_omega", fmt(t.omega));
        }
        if (t.kind == TimeProfile::Kind::ExpDecay) kv(p + ".time_rate", fmt(t.rate));
    };

    vec_profile("forcing.f0", c.forcing.f0);
    if (c.forcing.f0.kind != VectorProfile::Kind::Zero) time_profile("forcing.f0", c.forcing.f0_time);
    ten_profile("forcing.f1", c.forcing.f1);
    if (c.forcing.f1.kind != TensorProfile::Kind::Zero) time_profile("forcing.f1", c.forcing.f1_time);

    static const char* wall_names[6] = {"xlow", "xhigh", "ylow", "yhigh", "zlow", "zhigh"};
    for (int wall = 0; wall < 6; ++wall) {
        const auto& w = c.boundary.walls[static_cast<std::size_t>(wall)];
        if (w.kind == WallProfile::Kind::Zero) continue;
        const std::string p = std::string("boundary.") + wall_names[wall];
        kv(p + ".kind", to_string(w.kind));
        kv(p + ".direction", fmt_vec3(w.direction));
        kv(p + ".power", fmt(w.power));
        time_profile(p, w.time);
    }

    vec_profile("initial.v", c.initial_v);
    if (c.initial_v_snapshot) kv("initial.v.snapshot", *c.initial_v_snapshot);
    ten_profile("initial.s", c.initial_s);
    if (c.initial_s_snapshot) kv("initial.s.snapshot", *c.initial_s_snapshot);

    kv("lifting.delta", fmt(c.lifting_delta));
    kv("tol.energy", fmt(c.tol_energy));
    kv("tol.div", fmt(c.tol_div));
    kv("tol.solver", fmt(c.tol_solver));
    kv("rng.seed", std::to_string(c.seed));
    kv("oracle.max_wavenumber", std::to_string(c.oracle_max_wavenumber));
    kv("oracle.h", fmt(c.oracle_step));
    kv("oracle.quadrature_points", std::to_string(c.oracle_quadrature_points));
    kv("sweep.eps", fmt_list(c.sweep_eps));
    kv("varin.random_fields", std::to_string(c.varin_random_fields));
    kv("varin.max_wave", std::to_string(c.varin_max_wave));
    kv("varin.amplitude", fmt(c.varin_amplitude));
    kv("varin.mollify_width", std::to_string(c.varin_mollify_width));
    kv("proxtable.radii", fmt_list(c.proxtable_radii));
    kv("proxtable.lambda", fmt(c.proxtable_lambda));
    return o.str();
}

}  // namespace vpflow
