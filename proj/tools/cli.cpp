#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "config.hpp"
#include "gsc/csv.hpp"
#include "gsc/errors.hpp"
#include "gsc/exposure.hpp"
#include "gsc/iotable.hpp"

namespace gsc::cli {
namespace {

namespace fs = std::filesystem;

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level log_level() {
    const char* env = std::getenv("GSC_LOG");
    if (!env) return Level::Error;
    const std::string v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    return Level::Error;
}

void log(Level level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static const char* names[] = {"error", "info", "debug"};
    std::cerr << "gsc [" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

void require_out(const std::string& out) {
    if (out.empty()) throw ValidationError("--out is required");
}

void ensure_dir(const fs::path& dir) {
    if (dir.empty()) throw ValidationError("--out is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---- exposure -------------------------------------------------------------

struct ExposureArgs {
    std::vector<std::string> wiot;
    std::string sectors = "all";
    std::string out;
    std::string kind = "fir";
    int digits = 1;
};

exposure::ExposureMatrix compute(exposure::Kind kind, const std::string& dir, const std::string& sectors) {
    const auto w = io::load_wiot(dir);
    const auto bal = io::validate_balance(w);
    if (!bal.pass) {
        log(Level::Info, dir + ": table is not balanced (row residual " + csv::format_exact(bal.max_row_residual) +
                             ", column residual " + csv::format_exact(bal.max_col_residual) + ")");
    }
    const auto scope = exposure::SectorFilter::parse(sectors, w);
    return kind == exposure::Kind::FIR ? exposure::fir(w, scope) : exposure::fmr(w, scope);
}

void run_exposure(exposure::Kind kind, const ExposureArgs& a) {
    if (a.wiot.size() != 1) throw ValidationError("exactly one --wiot directory is required");
    require_out(a.out);
    exposure::write_csv(compute(kind, a.wiot.front(), a.sectors), a.out, a.digits);
    log(Level::Info, "wrote " + a.out);
}

void run_delta(const ExposureArgs& a) {
    if (a.wiot.size() != 2) throw ValidationError("delta needs --wiot twice (base year, then comparison year)");
    require_out(a.out);
    exposure::Kind kind;
    if (a.kind == "fir") {
        kind = exposure::Kind::FIR;
    } else if (a.kind == "fmr") {
        kind = exposure::Kind::FMR;
    } else {
        throw ValidationError("--kind must be fir or fmr");
    }
    const auto e0 = compute(kind, a.wiot[0], a.sectors);
    const auto e1 = compute(kind, a.wiot[1], a.sectors);
    exposure::write_csv(exposure::delta_exposure(e0, e1), a.out, a.digits);
    log(Level::Info, "wrote " + a.out);
}

// ---- survival and policy --------------------------------------------------

struct SimArgs {
    std::string config;
    std::string out;
    std::string uncertainty;
    std::string organization;
    std::string shock;
    std::optional<int> period;
};

SimConfig sim_config(const std::string& path) { return path.empty() ? SimConfig{} : load_sim_config(path); }

void run_simulate(const SimArgs& a) {
    require_out(a.out);
    auto cfg = sim_config(a.config);
    auto& sc = cfg.scenario;
    if (!a.uncertainty.empty()) sc.uncertainty = survival::parse_uncertainty(a.uncertainty);
    if (!a.organization.empty()) sc.organization = survival::parse_organization(a.organization);
    const int period = a.period.value_or(sc.realization.event == survival::Event::None ? cfg.shock_period
                                                                                        : sc.realization.period);
    if (!a.shock.empty()) {
        if (a.shock == "none") {
            sc.realization = survival::Realization::none();
        } else if (a.shock == "east") {
            sc.realization = survival::Realization::east(period);
        } else if (a.shock == "south") {
            sc.realization = survival::Realization::south(period);
        } else {
            throw ValidationError("--shock must be none, east or south");
        }
    } else if (a.period) {
        sc.realization.period = period;
    }
    const auto traj = survival::simulate(sc, cfg.shocks, cfg.econ, cfg.grid_step);
    survival::write_trajectories_csv({traj}, a.out);
    std::cout << traj.label << ": share_east=" << csv::format_exact(traj.share)
              << (traj.extinct ? " (extinct)" : "") << '\n';
}

void run_grid(const SimArgs& a) {
    require_out(a.out);
    const auto cfg = sim_config(a.config);
    const auto runs = survival::run_grid(cfg.shocks, cfg.econ, cfg.shock_period, cfg.grid_step);
    survival::write_trajectories_csv(runs, a.out);
    for (const auto& r : runs) {
        std::cout << r.label << ": share_east=" << csv::format_exact(r.share) << (r.extinct ? " (extinct)" : "")
                  << '\n';
    }
}

struct PolicyArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
};

void run_policy(const PolicyArgs& a) {
    require_out(a.out);
    auto cfg = sim_config(a.config);
    if (a.seed) cfg.policy.seed = *a.seed;
    if (a.reps) cfg.policy.replications = *a.reps;
    const auto outcomes = policy::run_policy(cfg.shocks, cfg.econ, cfg.policy);
    policy::write_bands_csv(outcomes, cfg.policy, a.out);
    std::cout << "scenario,subsidy,share_east,target_share,total_outlay,welfare,feasible\n";
    for (const auto& o : outcomes) {
        std::cout << csv::join({survival::to_string(o.mode), csv::format_exact(o.subsidy),
                                csv::format_exact(o.share_east), csv::format_exact(o.target),
                                csv::format_exact(o.total_outlay), csv::format_exact(o.welfare),
                                o.feasibility.feasible ? "yes" : "no"})
                  << '\n';
    }
}

// ---- equilibrium ----------------------------------------------------------

struct EqArgs {
    std::string config;
    std::string out;
    std::string wiot;
    int budget = 2000;
};

void run_solve(const EqArgs& a) {
    const auto econ = load_world(a.config);
    const auto sol = eq::solve_equilibrium(econ);
    log(Level::Info, "converged in " + std::to_string(sol.iterations) + " iterations, residual " +
                         csv::format_exact(sol.residual));
    ensure_dir(a.out);
    eq::write_chain_shares_csv(econ, sol, (fs::path(a.out) / "chain_shares.csv").string());
    eq::write_prices_csv(econ, sol, (fs::path(a.out) / "prices.csv").string());
}

void run_model_wiot(const EqArgs& a) {
    const auto econ = load_world(a.config);
    const auto sol = eq::solve_equilibrium(econ);
    ensure_dir(a.out);
    io::save_wiot(eq::model_wiot(econ, sol), a.out);
}

void run_gains(const EqArgs& a) {
    const auto econ = load_world(a.config);
    const auto sol = eq::solve_equilibrium(econ);
    auto emit = [&](std::ostream& os) {
        os << "country,direct,via_domestic_share,domestic_share\n";
        for (int j = 0; j < econ.J; ++j) {
            const auto g = eq::gains_from_trade(econ, sol, j);
            os << csv::join({econ.name(j), csv::format_exact(g.direct), csv::format_exact(g.via_domestic_share),
                             csv::format_exact(g.domestic_share)})
               << '\n';
        }
    };
    emit(std::cout);
    if (!a.out.empty()) csv::write_atomic(a.out, emit);
}

void run_calibrate(const EqArgs& a) {
    require_out(a.out);
    if (a.wiot.empty()) throw ValidationError("--wiot (target table) is required");
    const auto econ0 = load_world(a.config);
    const auto target = eq::ShareMoments::from_wiot(io::load_wiot(a.wiot));
    const auto res = eq::calibrate(target, econ0, a.budget);
    const auto text = world_to_json(res.fitted);
    csv::write_atomic(a.out, [&](std::ostream& os) { os << text; });
    std::cout << "objective " << csv::format_exact(res.initial_objective) << " -> " << csv::format_exact(res.objective)
              << " after " << res.evaluations << " evaluations" << (res.improved ? "" : " (no improvement)") << '\n';
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Supply-chain exposure, survival, policy and trade equilibrium toolkit", "gsc"};
    app.require_subcommand(1);

    ExposureArgs ex;
    auto* exposure_cmd = app.add_subcommand("exposure", "FIR/FMR exposure matrices from a WIOT directory");
    exposure_cmd->require_subcommand(1);
    auto add_exposure_flags = [&](CLI::App* c) {
        c->add_option("--wiot", ex.wiot, "WIOT directory")->required();
        c->add_option("--sectors", ex.sectors, "comma-separated sector scope or 'all'");
        c->add_option("--out", ex.out, "output CSV")->required();
        c->add_option("--digits", ex.digits, "decimals in the output")->check(CLI::Range(0, 17));
    };
    auto* fir_cmd = exposure_cmd->add_subcommand("fir", "foreign input reliance");
    auto* fmr_cmd = exposure_cmd->add_subcommand("fmr", "foreign market reliance");
    auto* delta_cmd = exposure_cmd->add_subcommand("delta", "change between two tables (give --wiot twice)");
    add_exposure_flags(fir_cmd);
    add_exposure_flags(fmr_cmd);
    add_exposure_flags(delta_cmd);
    delta_cmd->add_option("--kind", ex.kind, "fir or fmr");

    SimArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "one survival scenario");
    simulate_cmd->add_option("--config", sim.config, "simulation config (JSON)");
    simulate_cmd->add_option("--out", sim.out, "trajectory CSV")->required();
    simulate_cmd->add_option("--uncertainty", sim.uncertainty, "risk-free, risk or ambiguity");
    simulate_cmd->add_option("--organization", sim.organization, "outsourcing or integrated");
    simulate_cmd->add_option("--shock", sim.shock, "none, east or south");
    simulate_cmd->add_option("--period", sim.period, "shock period");

    SimArgs grid;
    auto* grid_cmd = app.add_subcommand("grid", "all 18 survival scenarios");
    grid_cmd->add_option("--config", grid.config, "simulation config (JSON)");
    grid_cmd->add_option("--out", grid.out, "trajectory CSV")->required();

    PolicyArgs pol;
    auto* policy_cmd = app.add_subcommand("policy", "subsidy optimisation with Monte Carlo bands");
    policy_cmd->add_option("--config", pol.config, "policy config (JSON)");
    policy_cmd->add_option("--out", pol.out, "band CSV")->required();
    policy_cmd->add_option("--seed", pol.seed, "random seed");
    policy_cmd->add_option("--reps", pol.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);

    EqArgs eqa;
    auto* eq_cmd = app.add_subcommand("equilibrium", "multi-country supply-chain equilibrium");
    eq_cmd->require_subcommand(1);
    auto* solve_cmd = eq_cmd->add_subcommand("solve", "wages, prices and chain shares");
    auto* wiot_cmd = eq_cmd->add_subcommand("wiot", "model-implied input-output table");
    auto* gains_cmd = eq_cmd->add_subcommand("gains", "real wages computed two ways");
    for (auto* c : {solve_cmd, wiot_cmd, gains_cmd}) {
        c->add_option("--config", eqa.config, "economy config (JSON)")->required();
    }
    solve_cmd->add_option("--out", eqa.out, "output directory")->required();
    wiot_cmd->add_option("--out", eqa.out, "output directory")->required();
    gains_cmd->add_option("--out", eqa.out, "optional CSV copy of the printed table");

    auto* cal_cmd = app.add_subcommand("calibrate", "fit technologies and trade costs to a table");
    cal_cmd->add_option("--config", eqa.config, "initial economy (JSON)")->required();
    cal_cmd->add_option("--wiot", eqa.wiot, "target WIOT directory")->required();
    cal_cmd->add_option("--out", eqa.out, "fitted economy (JSON)")->required();
    cal_cmd->add_option("--budget", eqa.budget, "evaluation budget")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (fir_cmd->parsed()) run_exposure(exposure::Kind::FIR, ex);
        else if (fmr_cmd->parsed()) run_exposure(exposure::Kind::FMR, ex);
        else if (delta_cmd->parsed()) run_delta(ex);
        else if (simulate_cmd->parsed()) run_simulate(sim);
        else if (grid_cmd->parsed()) run_grid(grid);
        else if (policy_cmd->parsed()) run_policy(pol);
        else if (solve_cmd->parsed()) run_solve(eqa);
        else if (wiot_cmd->parsed()) run_model_wiot(eqa);
        else if (gains_cmd->parsed()) run_gains(eqa);
        else if (cal_cmd->parsed()) run_calibrate(eqa);
    } catch (const NumericalError& e) {
        log(Level::Error, e.what());
        return kExitNumerical;
    } catch (const ValidationError& e) {
        log(Level::Error, e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        log(Level::Error, e.what());
        return kExitValidation;
    }
    return kExitOk;
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"gsc"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace gsc::cli
