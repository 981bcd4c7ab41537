#include "gsc/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gsc/csv.hpp"
#include "gsc/errors.hpp"

namespace gsc::survival {
namespace {

constexpr int kQuadratureNodes = 65;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

double cost(double s, const EconParams& p) { return s * p.c_east + (1.0 - s) * p.c_south; }

/// Probability that a shock, if it arrives, hits `loc`.
double hit(Event loc, double zeta) { return loc == Event::East ? zeta : 1.0 - zeta; }

double firm_payoff(Event loc, double zeta, const ShockProcess& shocks, const EconParams& p) {
    const double c = loc == Event::East ? p.c_east : p.c_south;
    return (1.0 - shocks.epsilon * hit(loc, zeta)) * (p.p - c);
}

double outsourcing_share(Uncertainty u, const ShockProcess& shocks, const EconParams& p) {
    double east = 0.0;
    double south = 0.0;
    switch (u) {
        case Uncertainty::RiskFree:
            east = firm_payoff(Event::East, shocks.zeta_bar, shocks, p);
            south = firm_payoff(Event::South, shocks.zeta_bar, shocks, p);
            break;
        case Uncertainty::Risk:
            east = firm_payoff(Event::East, shocks.mean_zeta(), shocks, p);
            south = firm_payoff(Event::South, shocks.mean_zeta(), shocks, p);
            break;
        case Uncertainty::Ambiguity:
            // Each firm evaluates its own location at the least favourable zeta.
            east = std::min(firm_payoff(Event::East, shocks.ambiguity_lo, shocks, p),
                            firm_payoff(Event::East, shocks.ambiguity_hi, shocks, p));
            south = std::min(firm_payoff(Event::South, shocks.ambiguity_lo, shocks, p),
                             firm_payoff(Event::South, shocks.ambiguity_hi, shocks, p));
            break;
    }
    return east > south ? 1.0 : 0.0;
}

}  // namespace

void EconParams::validate() const {
    auto bad = [](const std::string& what) { throw ValidationError("invalid parameter: " + what); };
    if (!std::isfinite(p) || !std::isfinite(r)) bad("p and r must be finite");
    if (!(c_east >= 0.0) || !(c_south >= 0.0)) bad("costs must be >= 0");
    if (!(g >= 0.0)) bad("g must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) bad("delta must lie in (0,1)");
    if (!(rho >= 0.0)) bad("rho must be >= 0");
    if (!(M0 > 0.0) || !std::isfinite(M0)) bad("M0 must be > 0");
    if (horizon < 1) bad("horizon must be >= 1");
}

void ShockProcess::validate() const {
    auto bad = [](const std::string& what) { throw ValidationError("invalid shock process: " + what); };
    if (!in_unit(epsilon)) bad("epsilon must lie in [0,1]");
    if (!in_unit(zeta_bar)) bad("zeta_bar must lie in [0,1]");
    if (!in_unit(zeta_lo) || !in_unit(zeta_hi) || zeta_lo > zeta_hi) bad("need 0 <= zeta_lo <= zeta_hi <= 1");
    if (!in_unit(ambiguity_lo) || !in_unit(ambiguity_hi) || ambiguity_lo > ambiguity_hi) {
        bad("need 0 <= ambiguity_lo <= ambiguity_hi <= 1");
    }
}

std::string to_string(Uncertainty u) {
    switch (u) {
        case Uncertainty::RiskFree: return "risk-free";
        case Uncertainty::Risk: return "risk";
        case Uncertainty::Ambiguity: return "ambiguity";
    }
    return "?";
}

std::string to_string(Organization o) { return o == Organization::Outsourcing ? "outsourcing" : "integrated"; }

std::string to_string(Event e) {
    switch (e) {
        case Event::None: return "none";
        case Event::East: return "east";
        case Event::South: return "south";
    }
    return "?";
}

Uncertainty parse_uncertainty(const std::string& s) {
    if (s == "risk-free" || s == "riskfree" || s == "risk_free") return Uncertainty::RiskFree;
    if (s == "risk") return Uncertainty::Risk;
    if (s == "ambiguity") return Uncertainty::Ambiguity;
    throw ValidationError("unknown uncertainty mode '" + s + "'");
}

Organization parse_organization(const std::string& s) {
    if (s == "outsourcing") return Organization::Outsourcing;
    if (s == "integrated" || s == "integration") return Organization::Integrated;
    throw ValidationError("unknown organization '" + s + "'");
}

double survival_factor(double s, double zeta, double eps) {
    return (1.0 - eps) + eps * (zeta * (1.0 - s) + (1.0 - zeta) * s);
}

double stationary_value(double s, double zeta, double eps, const EconParams& params) {
    const double q = params.delta * (1.0 + params.g) * survival_factor(s, zeta, eps);
    if (!(q < 1.0)) {
        throw NumericalError("stationary value diverges: delta*(1+g)*mu = " + csv::format_exact(q) + " >= 1");
    }
    return (params.r - cost(s, params)) / (1.0 - q);
}

double crra(double v, double rho) {
    if (rho == 0.0) return v;
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    if (rho == 1.0) return std::log(v);
    return std::pow(v, 1.0 - rho) / (1.0 - rho);
}

double expected_utility(double s, double lo, double hi, double eps, const EconParams& params) {
    if (hi <= lo) return crra(stationary_value(s, lo, eps, params), params.rho);
    const int intervals = kQuadratureNodes - 1;
    const double h = (hi - lo) / intervals;
    double sum = 0.0;
    for (int k = 0; k <= intervals; ++k) {
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * crra(stationary_value(s, lo + k * h, eps, params), params.rho);
    }
    return sum * h / 3.0 / (hi - lo);
}

std::vector<double> share_grid(double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 1.0)) {
        throw ValidationError("grid_step must lie in (0,1]");
    }
    const double n_real = 1.0 / grid_step;
    const long n = std::lround(n_real);
    if (n < 1 || std::abs(n_real - static_cast<double>(n)) > 1e-9 * n_real) {
        throw ValidationError("grid_step " + csv::format_exact(grid_step) + " does not divide [0,1]");
    }
    std::vector<double> grid(static_cast<std::size_t>(n + 1));
    for (long k = 0; k <= n; ++k) grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / static_cast<double>(n);
    return grid;
}

double allocate(const ScenarioSpec& scenario, const ShockProcess& shocks, const EconParams& params,
                double grid_step) {
    shocks.validate();
    params.validate();
    const auto grid = share_grid(grid_step);
    if (scenario.organization == Organization::Outsourcing) {
        return outsourcing_share(scenario.uncertainty, shocks, params);
    }

    // The integrated firm never puts its whole supply base in one region.
    std::vector<double> feasible;
    for (std::size_t k = 1; k + 1 < grid.size(); ++k) feasible.push_back(grid[k]);
    if (feasible.empty()) {
        throw ValidationError("grid_step leaves no interior allocation");
    }

    auto objective = [&](double s) {
        const double eps = shocks.epsilon;
        switch (scenario.uncertainty) {
            case Uncertainty::RiskFree:
                return stationary_value(s, shocks.zeta_bar, eps, params);
            case Uncertainty::Risk:
                return expected_utility(s, shocks.zeta_lo, shocks.zeta_hi, eps, params);
            case Uncertainty::Ambiguity:
                // v is affine in zeta, so the worst case sits at an endpoint.
                return std::min(stationary_value(s, shocks.ambiguity_lo, eps, params),
                                stationary_value(s, shocks.ambiguity_hi, eps, params));
        }
        return 0.0;
    };

    double best_s = feasible.front();
    double best = objective(best_s);
    for (std::size_t k = 1; k < feasible.size(); ++k) {
        const double val = objective(feasible[k]);
        if (val > best) {
            best = val;
            best_s = feasible[k];
        }
    }
    return best_s;
}

PopulationState strike(PopulationState state, double s, Event event) {
    const double m = state.total();
    state.m_east = s * m;
    state.m_south = (1.0 - s) * m;
    if (event == Event::East) state.m_east = 0.0;
    if (event == Event::South) state.m_south = 0.0;
    return state;
}

PopulationState step(PopulationState state, double s, Event event, const EconParams& params) {
    state = strike(state, s, event);
    // Entrants follow surviving shares, so scaling each region is exact.
    state.m_east *= 1.0 + params.g;
    state.m_south *= 1.0 + params.g;
    return state;
}

Trajectory simulate(const ScenarioSpec& scenario, const ShockProcess& shocks, const EconParams& params,
                    double grid_step) {
    Trajectory traj;
    traj.scenario = scenario;
    traj.label = cell_label(scenario);
    traj.share = allocate(scenario, shocks, params, grid_step);
    if (scenario.realization.event != Event::None &&
        (scenario.realization.period < 0 || scenario.realization.period >= params.horizon)) {
        throw ValidationError("shock period " + std::to_string(scenario.realization.period) +
                              " outside horizon " + std::to_string(params.horizon));
    }

    PopulationState state{traj.share * params.M0, (1.0 - traj.share) * params.M0};
    for (int t = 0; t < params.horizon; ++t) {
        const Event ev = scenario.realization.at(t);
        PeriodRecord rec;
        rec.period = t;
        rec.share = traj.share;
        rec.event = ev;
        if (state.alive()) {
            const PopulationState hit_state = strike(state, traj.share, ev);
            rec.m_east = hit_state.m_east;
            rec.m_south = hit_state.m_south;
            state = step(state, traj.share, ev, params);
        } else {
            state = PopulationState{};
        }
        rec.total = rec.m_east + rec.m_south;
        rec.transfer = params.r * rec.total;
        rec.flow_payoff = rec.transfer - params.c_east * rec.m_east - params.c_south * rec.m_south;
        traj.periods.push_back(rec);
        if (!state.alive()) traj.extinct = true;
    }
    return traj;
}

std::string cell_label(const ScenarioSpec& scenario) {
    std::string row;
    switch (scenario.uncertainty) {
        case Uncertainty::RiskFree: row = "Risk-free"; break;
        case Uncertainty::Risk: row = "GSC risk"; break;
        case Uncertainty::Ambiguity: row = "Ambiguity"; break;
    }
    row += scenario.organization == Organization::Outsourcing ? ", outsourcing" : ", vertical integration";
    std::string col;
    switch (scenario.realization.event) {
        case Event::None: col = "No aggregate shock"; break;
        case Event::East: col = "Aggregate shock in East"; break;
        case Event::South: col = "Aggregate shock in South"; break;
    }
    return row + " | " + col;
}

std::vector<Trajectory> run_grid(const ShockProcess& shocks, const EconParams& params, int shock_period,
                                 double grid_step) {
    std::vector<Trajectory> out;
    for (auto org : {Organization::Outsourcing, Organization::Integrated}) {
        for (auto u : {Uncertainty::RiskFree, Uncertainty::Risk, Uncertainty::Ambiguity}) {
            for (auto real : {Realization::none(), Realization::east(shock_period),
                              Realization::south(shock_period)}) {
                out.push_back(simulate(ScenarioSpec{u, org, real}, shocks, params, grid_step));
            }
        }
    }
    return out;
}

void write_trajectories_csv(const std::vector<Trajectory>& runs, const std::string& path) {
    csv::write_atomic(path, [&](std::ostream& out) {
        out << "period,cell_label,m_east,m_south,total,share_east,shock_event,flow_payoff,transfer\n";
        for (const auto& tr : runs) {
            for (const auto& p : tr.periods) {
                out << csv::join({std::to_string(p.period), tr.label, csv::format_exact(p.m_east),
                                  csv::format_exact(p.m_south), csv::format_exact(p.total),
                                  csv::format_exact(p.share), to_string(p.event), csv::format_exact(p.flow_payoff),
                                  csv::format_exact(p.transfer)})
                    << '\n';
            }
        }
    });
}

}  // namespace gsc::survival
