#include "gsc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "gsc/csv.hpp"
#include "gsc/errors.hpp"

namespace gsc::policy {
namespace {

using survival::Event;

constexpr double kFeasibilitySlack = 1e-12;

double flow_unit(double s, const EconParams& p) { return p.r - s * p.c_east - (1.0 - s) * p.c_south; }

/// E[U(phi * f)] for a known zeta, where phi is the surviving fraction.
double realised_utility(double s, double zeta, double eps, double rho, const EconParams& p) {
    const double f = flow_unit(s, p);
    double total = 0.0;
    auto add = [&](double weight, double phi) {
        if (weight > 0.0) total += weight * survival::crra(phi * f, rho);
    };
    add(1.0 - eps, 1.0);
    add(eps * zeta, 1.0 - s);
    add(eps * (1.0 - zeta), s);
    return total;
}

double firm_payoff(Event loc, double zeta, const ShockProcess& shocks, const EconParams& p) {
    const double hit = loc == Event::East ? zeta : 1.0 - zeta;
    const double c = loc == Event::East ? p.c_east : p.c_south;
    return (1.0 - shocks.epsilon * hit) * (p.p - c);
}

/// Capacity dynamics for an arbitrary event sequence (events[0] is ignored).
PolicyPath run_path(double share_east, double subsidy, const std::vector<Event>& events, const EconParams& params,
                    const PolicyConfig& config) {
    const bool base_is_east = share_east > 0.5;
    const double minority = base_is_east ? 1.0 - share_east : share_east;
    const double k = minority / (1.0 - minority);
    double base = params.M0;
    double alt = 0.0;

    PolicyPath path;
    const auto H = static_cast<std::size_t>(config.horizon);
    for (std::size_t t = 0; t < H; ++t) {
        if (t > 0) {
            alt = std::max(alt, k * base);
            const Event ev = events[t];
            const Event base_loc = base_is_east ? Event::East : Event::South;
            if (ev != Event::None) {
                if (ev == base_loc) {
                    base = 0.0;
                } else {
                    alt = 0.0;
                }
            }
        }
        const double east = base_is_east ? base : alt;
        const double south = base_is_east ? alt : base;
        const double total = east + south;
        path.m_east.push_back(east);
        path.m_south.push_back(south);
        path.total.push_back(total);
        path.pct_change.push_back(100.0 * (total / params.M0 - 1.0));
        path.flow.push_back(params.r * total - params.c_east * east - params.c_south * south);
        path.outlay.push_back(t > 0 ? subsidy * alt : 0.0);
        base *= 1.0 + config.growth;
        alt *= 1.0 + config.growth;
    }
    return path;
}

std::vector<Event> scripted(const Realization& r, int horizon) {
    std::vector<Event> ev(static_cast<std::size_t>(horizon), Event::None);
    for (int t = 1; t < horizon; ++t) ev[static_cast<std::size_t>(t)] = r.at(t);
    return ev;
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void evaluate(PolicyOutcome& out, double subsidy, const ShockProcess& shocks, const EconParams& params,
              const PolicyConfig& config) {
    out.subsidy = subsidy;
    out.share_east = decentralized_allocation_with_subsidy(params, shocks, out.mode, subsidy, out.target);
    out.path = simulate_policy(out.share_east, subsidy, Realization::none(), params, config);
    out.welfare = welfare(out.path.flow, out.path.outlay, params);
    out.total_outlay = sum(out.path.outlay);
    out.feasibility = check_feasibility(out.share_east, subsidy, params, config);
}

}  // namespace

std::vector<double> PolicyConfig::default_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(0.005 * k);
    return grid;
}

void PolicyConfig::validate() const {
    auto bad = [](const std::string& what) { throw ValidationError("invalid policy config: " + what); };
    if (!(floor > 0.0 && floor < cap)) bad("need 0 < floor < cap");
    if (subsidy_grid.empty()) bad("subsidy_grid is empty");
    for (double s : subsidy_grid) {
        if (!(s >= 0.0) || !std::isfinite(s)) bad("subsidy levels must be finite and >= 0");
    }
    if (replications < 1) bad("replications must be >= 1");
    if (horizon < 2) bad("horizon must be >= 2");
    if (!(growth >= 0.0)) bad("growth must be >= 0");
    for (std::size_t i = 0; i < band_levels.size(); ++i) {
        if (band_levels[i] <= 0 || band_levels[i] >= 100) bad("band levels must lie in (0,100)");
        if (i > 0 && band_levels[i] <= band_levels[i - 1]) bad("band levels must be increasing");
    }
}

double planner_target_share(Uncertainty mode, const ShockProcess& shocks, const EconParams& params,
                            double grid_step) {
    shocks.validate();
    params.validate();
    const double eps = shocks.epsilon;
    auto objective = [&](double s) {
        switch (mode) {
            case Uncertainty::RiskFree:
                return realised_utility(s, shocks.zeta_bar, eps, 0.0, params);
            case Uncertainty::Risk:
                // Utility is affine in zeta, so the uniform law enters through its mean.
                return realised_utility(s, shocks.mean_zeta(), eps, params.rho, params);
            case Uncertainty::Ambiguity:
                return std::min(realised_utility(s, shocks.ambiguity_lo, eps, params.rho, params),
                                realised_utility(s, shocks.ambiguity_hi, eps, params.rho, params));
        }
        return 0.0;
    };
    const auto grid = survival::share_grid(grid_step);
    double best_s = grid.front();
    double best = objective(best_s);
    for (double s : grid) {
        const double v = objective(s);
        if (v > best) {
            best = v;
            best_s = s;
        }
    }
    return best_s;
}

double payoff_gap(Uncertainty mode, const ShockProcess& shocks, const EconParams& params) {
    auto payoff = [&](Event loc) {
        switch (mode) {
            case Uncertainty::RiskFree: return firm_payoff(loc, shocks.zeta_bar, shocks, params);
            case Uncertainty::Risk: return firm_payoff(loc, shocks.mean_zeta(), shocks, params);
            case Uncertainty::Ambiguity:
                return std::min(firm_payoff(loc, shocks.ambiguity_lo, shocks, params),
                                firm_payoff(loc, shocks.ambiguity_hi, shocks, params));
        }
        return 0.0;
    };
    return payoff(Event::South) - payoff(Event::East);
}

double decentralized_allocation_with_subsidy(const EconParams& params, const ShockProcess& shocks,
                                             Uncertainty mode, double subsidy, double target) {
    if (!(subsidy >= 0.0)) {
        throw ValidationError("subsidy must be >= 0");
    }
    if (!(target >= 0.0 && target <= 1.0)) {
        throw ValidationError("target share must lie in [0,1]");
    }
    const double gap = payoff_gap(mode, shocks, params);
    // Firms start at the corner they prefer (ties go South) and move toward
    // the target as the subsidy closes the gap.
    const double corner = gap < 0.0 ? 1.0 : 0.0;
    const double need = std::abs(gap);
    double progress = 0.0;
    if (need > 0.0) {
        progress = std::min(1.0, subsidy / need);
    } else if (subsidy > 0.0) {
        progress = 1.0;
    }
    return corner + progress * (target - corner);
}

PolicyPath simulate_policy(double share_east, double subsidy, const Realization& realization,
                           const EconParams& params, const PolicyConfig& config) {
    if (!(share_east >= 0.0 && share_east <= 1.0)) {
        throw ValidationError("share must lie in [0,1]");
    }
    return run_path(share_east, subsidy, scripted(realization, config.horizon), params, config);
}

double welfare(const std::vector<double>& flows, const std::vector<double>& outlays, const EconParams& params) {
    if (flows.size() != outlays.size()) {
        throw ValidationError("welfare: flow and outlay series differ in length");
    }
    double w = 0.0;
    double d = 1.0;
    for (std::size_t t = 0; t < flows.size(); ++t) {
        w += d * (flows[t] - outlays[t]);
        d *= params.delta;
    }
    return w;
}

double welfare(const survival::Trajectory& trajectory, const std::vector<double>& outlays, const EconParams& params) {
    std::vector<double> flows;
    for (const auto& p : trajectory.periods) flows.push_back(p.flow_payoff);
    return welfare(flows, outlays, params);
}

FeasibilityReport check_feasibility(double share_east, double subsidy, const EconParams& params,
                                    const PolicyConfig& config) {
    std::vector<Realization> cases{Realization::none()};
    for (int t = 1; t < config.horizon; ++t) {
        cases.push_back(Realization::east(t));
        cases.push_back(Realization::south(t));
    }
    FeasibilityReport rep;
    rep.min_total = std::numeric_limits<double>::infinity();
    rep.max_total = -std::numeric_limits<double>::infinity();
    const double lo = config.floor * params.M0;
    const double hi = config.cap * params.M0;
    for (const auto& c : cases) {
        const auto path = simulate_policy(share_east, subsidy, c, params, config);
        for (double m : path.total) {
            rep.min_total = std::min(rep.min_total, m);
            rep.max_total = std::max(rep.max_total, m);
            if (m < lo * (1.0 - kFeasibilitySlack)) rep.violation += (lo - m) / params.M0;
            if (m > hi * (1.0 + kFeasibilitySlack)) rep.violation += (m - hi) / params.M0;
        }
    }
    rep.feasible = rep.violation == 0.0;
    return rep;
}

PolicyOutcome optimize_subsidy(Uncertainty mode, const ShockProcess& shocks, const EconParams& params,
                               const PolicyConfig& config) {
    config.validate();
    PolicyOutcome best;
    best.mode = mode;
    best.target = planner_target_share(mode, shocks, params, config.grid_step);
    bool have = false;
    for (double sigma : config.subsidy_grid) {
        PolicyOutcome cand;
        cand.mode = mode;
        cand.target = best.target;
        evaluate(cand, sigma, shocks, params, config);
        bool better = false;
        if (!have) {
            better = true;
        } else if (cand.feasibility.feasible != best.feasibility.feasible) {
            better = cand.feasibility.feasible;
        } else if (cand.feasibility.feasible) {
            better = cand.welfare > best.welfare;
        } else {
            better = cand.feasibility.violation < best.feasibility.violation;
        }
        if (better) {
            best = std::move(cand);
            have = true;
        }
    }
    return best;
}

std::vector<PolicyOutcome> run_policy(const ShockProcess& shocks, const EconParams& params,
                                      const PolicyConfig& config) {
    std::vector<PolicyOutcome> out;
    for (auto mode : {Uncertainty::RiskFree, Uncertainty::Risk, Uncertainty::Ambiguity}) {
        out.push_back(optimize_subsidy(mode, shocks, params, config));
    }
    if (config.paired) {
        PolicyOutcome& risk = out[1];
        PolicyOutcome& amb = out[2];
        if (risk.total_outlay > 0.0 && amb.total_outlay > 0.0) {
            const double budget = std::max(risk.total_outlay, amb.total_outlay);
            for (PolicyOutcome* o : {&risk, &amb}) {
                if (o->total_outlay < budget) {
                    evaluate(*o, o->subsidy * budget / o->total_outlay, shocks, params, config);
                }
            }
        }
    }
    for (auto& o : out) o.bands = monte_carlo_bands(o, shocks, params, config);
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) {
        throw ValidationError("quantile of an empty sample");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Bands monte_carlo_bands(const PolicyOutcome& outcome, const ShockProcess& shocks, const EconParams& params,
                        const PolicyConfig& config) {
    config.validate();
    const auto H = static_cast<std::size_t>(config.horizon);
    const auto R = static_cast<std::size_t>(config.replications);
    std::vector<std::vector<double>> samples(H, std::vector<double>(R));
    std::vector<std::size_t> shocked(H, 0);
    std::vector<Event> events(H, Event::None);

    for (std::size_t rep = 0; rep < R; ++rep) {
        // Independent substream per replication; common across modes.
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
        std::mt19937_64 rng(seq);
        const double u = uniform01(rng);
        double zeta = shocks.zeta_bar;
        if (outcome.mode == Uncertainty::Risk) {
            zeta = shocks.zeta_lo + (shocks.zeta_hi - shocks.zeta_lo) * u;
        } else if (outcome.mode == Uncertainty::Ambiguity) {
            zeta = shocks.ambiguity_lo + (shocks.ambiguity_hi - shocks.ambiguity_lo) * u;
        }
        for (std::size_t t = 1; t < H; ++t) {
            const double arrive = uniform01(rng);
            const double where = uniform01(rng);
            events[t] = arrive < shocks.epsilon ? (where < zeta ? Event::East : Event::South) : Event::None;
            if (events[t] != Event::None) ++shocked[t];
        }
        const auto path = run_path(outcome.share_east, outcome.subsidy, events, params, config);
        for (std::size_t t = 0; t < H; ++t) samples[t][rep] = path.pct_change[t];
    }

    Bands bands;
    for (auto& b : bands.levels) {
        b.lo.resize(H);
        b.hi.resize(H);
    }
    for (std::size_t t = 0; t < H; ++t) {
        std::sort(samples[t].begin(), samples[t].end());
        for (std::size_t l = 0; l < bands.levels.size(); ++l) {
            const double tail = (1.0 - config.band_levels[l] / 100.0) / 2.0;
            bands.levels[l].lo[t] = quantile_sorted(samples[t], tail);
            bands.levels[l].hi[t] = quantile_sorted(samples[t], 1.0 - tail);
        }
        bands.shock_rate.push_back(static_cast<double>(shocked[t]) / static_cast<double>(R));
    }
    return bands;
}

void write_bands_csv(const std::vector<PolicyOutcome>& outcomes, const PolicyConfig& config,
                     const std::string& path) {
    csv::write_atomic(path, [&](std::ostream& out) {
        std::vector<std::string> header{"period", "scenario", "pct_change_point"};
        for (int level : config.band_levels) {
            header.push_back("lo" + std::to_string(level));
            header.push_back("hi" + std::to_string(level));
        }
        header.push_back("subsidy_outlay");
        out << csv::join(header) << '\n';
        for (const auto& o : outcomes) {
            for (std::size_t t = 0; t < o.path.total.size(); ++t) {
                std::vector<std::string> row{std::to_string(t), survival::to_string(o.mode),
                                             csv::format_exact(o.path.pct_change[t])};
                for (const auto& b : o.bands.levels) {
                    row.push_back(csv::format_exact(b.lo[t]));
                    row.push_back(csv::format_exact(b.hi[t]));
                }
                row.push_back(csv::format_exact(o.path.outlay[t]));
                out << csv::join(row) << '\n';
            }
        }
    });
}

}  // namespace gsc::policy
