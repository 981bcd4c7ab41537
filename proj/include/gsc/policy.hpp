#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gsc/survival.hpp"

namespace gsc::policy {

using survival::EconParams;
using survival::Realization;
using survival::ShockProcess;
using survival::Uncertainty;

struct PolicyConfig {
    double floor = 0.5;   // minimum total as a fraction of M0
    double cap = 2.0;     // maximum total as a fraction of M0
    std::vector<double> subsidy_grid = default_grid();
    int replications = 10000;
    std::uint64_t seed = 20220101;
    std::array<int, 3> band_levels{90, 95, 99};
    int horizon = 5;          // periods 0..horizon-1, period 0 is the base year
    int base_year = 2022;
    double growth = 0.0;      // organic entry rate during the policy horizon
    double grid_step = 0.01;  // resolution of the planner's target share
    bool paired = true;       // give risk and ambiguity a common budget

    static std::vector<double> default_grid();
    void validate() const;
};

/// Share the planner wants in the East: expected CRRA utility of the
/// realised one-period payoff under the mode's beliefs (risk-neutral with
/// zeta_bar when risk-free, max-min over the ambiguity interval).
double planner_target_share(Uncertainty mode, const ShockProcess& shocks, const EconParams& params,
                            double grid_step = 0.01);

/// Expected per-firm payoff of the South minus that of the East under the
/// mode's beliefs (worst case per location under ambiguity).
double payoff_gap(Uncertainty mode, const ShockProcess& shocks, const EconParams& params);

/// East share chosen by atomistic firms given a per-supplier subsidy paid in
/// the under-chosen location. Rises linearly from the unsubsidised corner and
/// reaches `target` when the subsidy covers the payoff gap.
double decentralized_allocation_with_subsidy(const EconParams& params, const ShockProcess& shocks,
                                             Uncertainty mode, double subsidy, double target = 0.5);

/// Supplier capacity under a constant subsidised share. Period 0 is the base
/// year with all of M0 in the preferred location.
struct PolicyPath {
    std::vector<double> m_east;
    std::vector<double> m_south;
    std::vector<double> total;
    std::vector<double> pct_change;
    std::vector<double> flow;
    std::vector<double> outlay;
};

PolicyPath simulate_policy(double share_east, double subsidy, const Realization& realization,
                           const EconParams& params, const PolicyConfig& config);

/// sum_t delta^t (flow_t - outlay_t).
double welfare(const std::vector<double>& flows, const std::vector<double>& outlays, const EconParams& params);
double welfare(const survival::Trajectory& trajectory, const std::vector<double>& outlays, const EconParams& params);

struct FeasibilityReport {
    bool feasible = true;
    double min_total = 0.0;
    double max_total = 0.0;
    double violation = 0.0;  // summed floor and cap breaches, in units of M0
};

/// Checks floor and cap under no shock and every single scripted shock.
FeasibilityReport check_feasibility(double share_east, double subsidy, const EconParams& params,
                                    const PolicyConfig& config);

struct Band {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct Bands {
    std::array<Band, 3> levels;        // in band_levels order
    std::vector<double> shock_rate;    // share of replications with a shock in each period
};

struct PolicyOutcome {
    Uncertainty mode = Uncertainty::RiskFree;
    double subsidy = 0.0;
    double share_east = 0.0;
    double target = 0.0;
    PolicyPath path;  // no-shock realization
    double welfare = 0.0;
    double total_outlay = 0.0;
    FeasibilityReport feasibility;
    Bands bands;
};

PolicyOutcome optimize_subsidy(Uncertainty mode, const ShockProcess& shocks, const EconParams& params,
                               const PolicyConfig& config);

/// Risk-free, risk and ambiguity outcomes with bands. When config.paired is
/// set, risk and ambiguity subsidies are rescaled to a common total outlay.
std::vector<PolicyOutcome> run_policy(const ShockProcess& shocks, const EconParams& params,
                                      const PolicyConfig& config);

/// Percent-change quantile bands from Monte Carlo shock paths.
Bands monte_carlo_bands(const PolicyOutcome& outcome, const ShockProcess& shocks, const EconParams& params,
                        const PolicyConfig& config);

/// Type-7 empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q);

void write_bands_csv(const std::vector<PolicyOutcome>& outcomes, const PolicyConfig& config, const std::string& path);

}  // namespace gsc::policy
