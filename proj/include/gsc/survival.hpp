#pragma once

#include <string>
#include <vector>

namespace gsc::survival {

struct EconParams {
    double p = 1.0;         // price per intermediate unit
    double r = 1.0;         // downstream revenue per surviving supplier
    double c_east = 0.2;
    double c_south = 0.2;
    double g = 0.1;         // entrants per surviving supplier per period
    double delta = 0.9;
    double rho = 2.0;       // downstream relative risk aversion
    double M0 = 100.0;
    int horizon = 20;

    void validate() const;
};

/// Shock arrival and the probability zeta that a shock strikes the East.
/// Each uncertainty mode reads its own belief: zeta_bar (risk-free), a
/// uniform law on [zeta_lo, zeta_hi] (risk), or the interval
/// [ambiguity_lo, ambiguity_hi] with unknown law (ambiguity).
struct ShockProcess {
    double epsilon = 0.1;
    double zeta_bar = 0.8;
    double zeta_lo = 0.5;
    double zeta_hi = 1.0;
    double ambiguity_lo = 0.0;
    double ambiguity_hi = 1.0;

    void validate() const;
    double mean_zeta() const { return 0.5 * (zeta_lo + zeta_hi); }
};

enum class Uncertainty { RiskFree, Risk, Ambiguity };
enum class Organization { Outsourcing, Integrated };
enum class Event { None, East, South };

/// Scripted shock realization: at most one shock, at `period`.
struct Realization {
    Event event = Event::None;
    int period = 0;

    static Realization none() { return {}; }
    static Realization east(int t) { return {Event::East, t}; }
    static Realization south(int t) { return {Event::South, t}; }
    Event at(int t) const { return t == period ? event : Event::None; }
};

struct ScenarioSpec {
    Uncertainty uncertainty = Uncertainty::RiskFree;
    Organization organization = Organization::Outsourcing;
    Realization realization;
};

std::string to_string(Uncertainty u);
std::string to_string(Organization o);
std::string to_string(Event e);
Uncertainty parse_uncertainty(const std::string& s);
Organization parse_organization(const std::string& s);

struct PopulationState {
    double m_east = 0.0;
    double m_south = 0.0;

    double total() const { return m_east + m_south; }
    bool alive() const { return total() > 0.0; }
};

/// Expected surviving fraction when a share s sits in the East.
double survival_factor(double s, double zeta, double eps);

/// Value per unit of supplier mass of holding share s forever.
double stationary_value(double s, double zeta, double eps, const EconParams& params);

/// Constant-relative-risk-aversion transform; log at rho = 1. Nonpositive
/// arguments map to -infinity when rho > 0.
double crra(double v, double rho);

/// Expected CRRA utility of v(s, zeta) with zeta uniform on [lo, hi],
/// by composite Simpson on 65 equispaced nodes.
double expected_utility(double s, double lo, double hi, double eps, const EconParams& params);

/// Grid points k / n for n = round(1 / step). Throws if step does not divide 1.
std::vector<double> share_grid(double grid_step);

double allocate(const ScenarioSpec& scenario, const ShockProcess& shocks, const EconParams& params,
                double grid_step = 0.01);

/// Reallocate mass to (s, 1 - s), then apply the event. No entry.
PopulationState strike(PopulationState state, double s, Event event);

/// strike followed by proportional entry g * M_surv.
PopulationState step(PopulationState state, double s, Event event, const EconParams& params);

struct PeriodRecord {
    int period = 0;
    double m_east = 0.0;   // survivors after this period's event, before entry
    double m_south = 0.0;
    double total = 0.0;
    double share = 0.0;
    Event event = Event::None;
    double flow_payoff = 0.0;
    double transfer = 0.0;
};

struct Trajectory {
    std::string label;
    ScenarioSpec scenario;
    double share = 0.0;
    std::vector<PeriodRecord> periods;
    bool extinct = false;
};

Trajectory simulate(const ScenarioSpec& scenario, const ShockProcess& shocks, const EconParams& params,
                    double grid_step = 0.01);

/// Human-readable cell label, e.g. "Risk-free, outsourcing | No aggregate shock".
std::string cell_label(const ScenarioSpec& scenario);

/// All 3 x 2 x 3 cells; shocks strike at `shock_period`.
std::vector<Trajectory> run_grid(const ShockProcess& shocks, const EconParams& params, int shock_period = 10,
                                 double grid_step = 0.01);

void write_trajectories_csv(const std::vector<Trajectory>& runs, const std::string& path);

}  // namespace gsc::survival
