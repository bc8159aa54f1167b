#include "vpflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "vpflow/galerkin.hpp"
#include "vpflow/ledger.hpp"
#include "vpflow/rng.hpp"
#include "vpflow/snapshot.hpp"
#include "vpflow/solver.hpp"

namespace vpflow {

namespace fs = std::filesystem;

std::string snapshot_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06d.vpf", index);
    return buf;
}

std::vector<SimState> load_trajectory(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("snap_", 0) == 0 && name.size() > 4 && name.substr(name.size() - 4) == ".vpf")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<SimState> traj;
    traj.reserve(files.size());
    for (const auto& f : files) traj.push_back(read_snapshot(f));
    return traj;
}

namespace {

struct CliCommon {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double tol = 0.0;
    bool tol_set = false;
    bool quiet = false;
};

SimConfig load_with_overrides(const CliCommon& common) {
    SimConfig cfg = load_config(common.config_path);
    if (common.seed_set) cfg.seed = common.seed;
    if (common.tol_set) cfg.tol_energy = common.tol;
    return cfg;
}

void say(const CliCommon& c, const std::string& msg) {
    if (!c.quiet) std::cout << msg << '\n';
}

int do_run(const CliCommon& common) {
    const SimConfig cfg = load_with_overrides(common);
    fs::create_directories(common.out_dir);
    {
        std::ofstream os(fs::path(common.out_dir) / "config.cfg");
        os << serialize_config(cfg);
    }
    GridSolver solver(cfg);
    EnergyLedger ledger(cfg);
    int snap_idx = 0;
    GridSolver::RunHooks hooks;
    hooks.on_ledger_sample = [&](const SimState& st) { ledger.append(st); };
    hooks.on_output = [&](const SimState& st) {
        write_snapshot((fs::path(common.out_dir) / snapshot_filename(snap_idx)).string(), st);
        ++snap_idx;
    };
    const std::string ledger_path = (fs::path(common.out_dir) / "ledger.csv").string();
    try {
        solver.run(hooks);
    } catch (const std::exception& e) {
        ledger.write_csv(ledger_path);  // keep the partial trajectory inspectable
        std::cerr << "run diverged: " << e.what() << '\n';
        return 3;
    }
    ledger.write_csv(ledger_path);
    const EdiCheck chk = check_energy_dissipation(ledger.rows(), cfg.tol_energy);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "energy inequalities: %s (worst kinetic %.3e, elastic %.3e, total %.3e, tol %.3e)",
                  chk.pass ? "pass" : "FAIL", chk.worst_kinetic, chk.worst_elastic, chk.worst_total, chk.tol_abs);
    say(common, buf);
    say(common, "wrote " + std::to_string(snap_idx) + " snapshots and " + ledger_path);
    return chk.pass ? 0 : 4;
}

int do_oracle(const CliCommon& common) {
    const SimConfig cfg = load_with_overrides(common);
    fs::create_directories(common.out_dir);
    GalerkinOracle oracle(cfg);
    GalerkinTrajectory traj;
    try {
        traj = oracle.integrate();
    } catch (const BlowUp& e) {
        std::cerr << "oracle diverged: " << e.what() << '\n';
        return 3;
    }

    // coefficient trajectory
    {
        std::ofstream os(fs::path(common.out_dir) / "oracle_coeffs.csv");
        os << "t";
        for (int l = 0; l < traj.n_velocity; ++l) os << ",alpha" << l;
        for (int l = 0; l < traj.n_tensor; ++l) os << ",beta" << l;
        os << '\n';
        char buf[64];
        for (std::size_t n = 0; n < traj.times.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g", traj.times[n]);
            os << buf;
            for (double v : traj.states[n]) {
                std::snprintf(buf, sizeof buf, ",%.17g", v);
                os << buf;
            }
            os << '\n';
        }
    }

    // field snapshots at the output cadence, sampled on the config grid
    const long out_every = std::max<long>(1, std::llround(cfg.output_interval / cfg.oracle_step));
    int snap_idx = 0;
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        if (n % static_cast<std::size_t>(out_every) != 0 && n + 1 != traj.times.size()) continue;
        SimState st(cfg.grid);
        st.t = traj.times[n];
        st.V = oracle.velocity_on_grid(traj.states[n], cfg.grid);
        st.S = oracle.tensor_on_grid(traj.states[n], cfg.grid);
        write_snapshot((fs::path(common.out_dir) / snapshot_filename(snap_idx)).string(), st);
        ++snap_idx;
    }

    const OracleEnergyReport rep = oracle.energy_report(traj);
    {
        std::ofstream os(fs::path(common.out_dir) / "oracle_energy.csv");
        os << "t,residual_v,residual_s\n";
        char buf[96];
        for (std::size_t n = 0; n < rep.times.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", rep.times[n], rep.residual_v[n],
                          rep.residual_s[n]);
            os << buf;
        }
    }
    const double tol_abs = cfg.tol_energy * (1.0 + rep.initial_energy);
    const bool pass = rep.max_residual_v <= tol_abs && rep.max_residual_s <= tol_abs &&
                      rep.apriori_measured <= rep.apriori_bound;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "oracle energy equalities: %s (residual_v %.3e, residual_s %.3e, tol %.3e; bound %.3e <= %.3e)",
                  pass ? "pass" : "FAIL", rep.max_residual_v, rep.max_residual_s, tol_abs, rep.apriori_measured,
                  rep.apriori_bound);
    say(common, buf);
    return pass ? 0 : 4;
}

int do_sweep(const CliCommon& common) {
    const SimConfig base = load_with_overrides(common);
    fs::create_directories(common.out_dir);

    auto run_eps = [&](double eps) {
        SimConfig cfg = base;
        cfg.eps = eps;
        GridSolver solver(cfg);
        std::vector<SimState> states;
        GridSolver::RunHooks hooks;
        hooks.on_output = [&](const SimState& st) { states.push_back(st); };
        solver.run(hooks);
        return states;
    };

    const std::vector<SimState> ref = run_eps(0.0);
    std::vector<double> eps_list = base.sweep_eps;
    std::sort(eps_list.begin(), eps_list.end(), std::greater<>());

    std::ofstream os(fs::path(common.out_dir) / "sweep.csv");
    os << "eps,distance\n";
    char buf[64];
    for (double eps : eps_list) {
        const std::vector<SimState> states = run_eps(eps);
        if (states.size() != ref.size()) throw std::runtime_error("sweep: output cadence mismatch");
        // L2-in-time distance of the (V, S) pair against the eps = 0 run
        double acc = 0.0, prev = 0.0;
        for (std::size_t n = 0; n < states.size(); ++n) {
            VelocityField dv = states[n].V;
            axpy(dv, -1.0, ref[n].V);
            DevTensorField ds = states[n].S;
            axpy(ds, -1.0, ref[n].S);
            const double cur = l2_norm2(dv) + l2_norm2(ds);
            if (n > 0) acc += 0.5 * (states[n].t - states[n - 1].t) * (prev + cur);
            prev = cur;
        }
        const double dist = std::sqrt(acc);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", eps, dist);
        os << buf;
        say(common, "eps " + std::to_string(eps) + ": distance " + std::to_string(dist));
    }
    return 0;
}

int do_check(const CliCommon& common) {
    const SimConfig cfg = load_with_overrides(common);
    const std::vector<SimState> traj = load_trajectory(common.out_dir);
    if (traj.size() < 2) {
        std::cerr << "check: no stored trajectory in " << common.out_dir << '\n';
        return 2;
    }
    EnergyLedger ledger(cfg);
    for (const auto& st : traj) ledger.append(st);
    const EdiCheck chk = check_energy_dissipation(ledger.rows(), cfg.tol_energy);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "energy inequalities: %s (worst kinetic %.3e, elastic %.3e, total %.3e, tol %.3e)",
                  chk.pass ? "pass" : "FAIL", chk.worst_kinetic, chk.worst_elastic, chk.worst_total, chk.tol_abs);
    say(common, buf);
    if (!chk.pass) {
        if (chk.worst_kinetic > chk.tol_abs) say(common, "failing inequality: kinetic");
        if (chk.worst_elastic > chk.tol_abs) say(common, "failing inequality: elastic");
        if (chk.worst_total > chk.tol_abs) say(common, "failing inequality: total");
    }

    const VarInReport rep = check_variational_inequality(traj, cfg, cfg.tol_energy);
    if (!common.quiet) std::cout << varin_report_text(rep);
    write_varin_csv(rep, (fs::path(common.out_dir) / "varin.csv").string());

    return (chk.pass && rep.all_pass) ? 0 : 4;
}

int do_prox_table(const CliCommon& common) {
    const SimConfig cfg = load_with_overrides(common);
    const PotentialSpec pot = cfg.potential.build();
    std::string out_text = "radius,prox_radius,moreau_value,moreau_grad_norm\n";
    char buf[160];
    Rng rng(cfg.seed);
    DevTensor dir = rng.dev_tensor(1.0);
    dir *= 1.0 / dir.norm();
    for (double r : cfg.proxtable_radii) {
        const DevTensor x = r * dir;
        const DevTensor p = pot.prox(x, cfg.proxtable_lambda);
        const double env = pot.moreau_value(x, cfg.proxtable_lambda);
        const double gn = pot.moreau_grad(x, cfg.proxtable_lambda).norm();
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r, p.norm(), env, gn);
        out_text += buf;
    }
    if (!common.out_dir.empty()) {
        fs::create_directories(common.out_dir);
        std::ofstream os(fs::path(common.out_dir) / "prox_table.csv");
        os << out_text;
    }
    if (!common.quiet) std::cout << out_text;
    return 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
    CLI::App app{"viscoelastoplastic flow: grid solver, spectral reference and energy checks"};
    app.require_subcommand(1);

    CliCommon common;
    auto add_common = [&](CLI::App* sub, bool need_out) {
        sub->add_option("--config", common.config_path, "run configuration file")->required();
        auto* out = sub->add_option("--out", common.out_dir, "output directory");
        if (need_out) out->required();
        sub->add_option("--seed", common.seed, "override rng.seed")->each([&](const std::string&) {
            common.seed_set = true;
        });
        sub->add_option("--tol", common.tol, "override tol.energy")->each([&](const std::string&) {
            common.tol_set = true;
        });
        sub->add_flag("--quiet", common.quiet, "suppress progress output");
    };

    auto* run_cmd = app.add_subcommand("run", "time-step the grid solver and check the energy inequalities");
    add_common(run_cmd, true);
    auto* oracle_cmd = app.add_subcommand("oracle", "integrate the spectral reference system");
    add_common(oracle_cmd, true);
    auto* sweep_cmd = app.add_subcommand("sweep-eps", "repeat a run over the eps list against the eps = 0 run");
    add_common(sweep_cmd, true);
    auto* check_cmd = app.add_subcommand("check", "re-run energy and variational checks on a stored trajectory");
    add_common(check_cmd, true);
    auto* prox_cmd = app.add_subcommand("prox-table", "tabulate prox and envelope values over a radial grid");
    add_common(prox_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(common);
        if (oracle_cmd->parsed()) return do_oracle(common);
        if (sweep_cmd->parsed()) return do_sweep(common);
        if (check_cmd->parsed()) return do_check(common);
        if (prox_cmd->parsed()) return do_prox_table(common);
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const CflViolation& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const SolverDiverged& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const BlowUp& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace vpflow
