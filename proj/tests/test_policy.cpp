#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gsc/errors.hpp"
#include "gsc/policy.hpp"
#include "support.hpp"

using namespace gsc;
using namespace gsc::policy;

namespace {

PolicyConfig small_config(int reps = 2000) {
    PolicyConfig c;
    c.replications = reps;
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("planner targets") {
    const ShockProcess shocks;
    const EconParams p;
    CHECK(planner_target_share(Uncertainty::RiskFree, shocks, p) == 0.0);
    CHECK(planner_target_share(Uncertainty::Ambiguity, shocks, p) == 0.5);
    // rho = 2, E[zeta] = 0.75: s / (1 - s) = sqrt(1/3).
    const double closed = std::sqrt(1.0 / 3.0) / (1.0 + std::sqrt(1.0 / 3.0));
    CHECK(planner_target_share(Uncertainty::Risk, shocks, p, 0.001) == doctest::Approx(closed).epsilon(2e-3));
}

TEST_CASE("decentralized response to a subsidy") {
    const ShockProcess shocks;
    const EconParams p;
    CHECK(decentralized_allocation_with_subsidy(p, shocks, Uncertainty::RiskFree, 0.0) == 0.0);

    // Gap = eps (2 zeta - 1) (p - c) under symmetric costs.
    const double gap = 0.1 * (2 * 0.8 - 1) * 0.8;
    CHECK(payoff_gap(Uncertainty::RiskFree, shocks, p) == doctest::Approx(gap));
    CHECK(decentralized_allocation_with_subsidy(p, shocks, Uncertainty::RiskFree, gap) == doctest::Approx(0.5));
    CHECK(decentralized_allocation_with_subsidy(p, shocks, Uncertainty::RiskFree, gap / 2) == doctest::Approx(0.25));
    CHECK(decentralized_allocation_with_subsidy(p, shocks, Uncertainty::RiskFree, 100 * gap) == 0.5);
    CHECK(decentralized_allocation_with_subsidy(p, shocks, Uncertainty::Risk, 1.0, 0.37) == 0.37);
    CHECK_THROWS_AS(decentralized_allocation_with_subsidy(p, shocks, Uncertainty::Risk, -1.0), ValidationError);
}

TEST_CASE("welfare accounting") {
    EconParams p;
    p.delta = 0.5;
    CHECK(welfare({4.0, 4.0, 4.0}, {0.0, 0.0, 0.0}, p) == doctest::Approx(4.0 + 2.0 + 1.0));
    CHECK(welfare({4.0, 4.0, 4.0}, {0.0, 2.0, 4.0}, p) == doctest::Approx(4.0 + 1.0 + 0.0));
    CHECK(welfare({0.0, 0.0}, {0.0, 0.0}, p) == 0.0);
    CHECK_THROWS_AS(welfare({1.0}, {1.0, 2.0}, p), ValidationError);

    survival::Trajectory dead;
    dead.periods.resize(3);
    CHECK(welfare(dead, {0.0, 0.0, 0.0}, p) == 0.0);
}

TEST_CASE("policy capacity dynamics") {
    const EconParams p;
    const PolicyConfig c;
    const auto none = simulate_policy(0.5, 0.01, Realization::none(), p, c);
    CHECK(none.total.front() == p.M0);
    CHECK(none.pct_change.front() == 0.0);
    CHECK(none.outlay.front() == 0.0);
    CHECK(none.total.back() == doctest::Approx(2.0 * p.M0));
    CHECK(none.outlay[1] == doctest::Approx(0.01 * p.M0));

    const auto south = simulate_policy(0.5, 0.01, Realization::south(2), p, c);
    CHECK(south.total[2] == doctest::Approx(p.M0));
    const auto east = simulate_policy(0.5, 0.01, Realization::east(2), p, c);
    CHECK(east.total[2] == doctest::Approx(p.M0));
    CHECK(east.total[3] == doctest::Approx(2.0 * p.M0));
}

TEST_CASE("subsidy optimisation") {
    const ShockProcess shocks;
    const EconParams p;
    const auto c = small_config();

    const auto rf = optimize_subsidy(Uncertainty::RiskFree, shocks, p, c);
    CHECK(rf.subsidy == 0.0);

    const auto outcomes = run_policy(shocks, p, c);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].subsidy == 0.0);
    CHECK(outcomes[1].feasibility.feasible);
    CHECK(outcomes[2].feasibility.feasible);
    CHECK(outcomes[1].total_outlay == doctest::Approx(outcomes[2].total_outlay).epsilon(1e-12));
    for (const auto& o : outcomes) {
        if (!o.feasibility.feasible) continue;
        for (int t = 1; t < c.horizon; ++t) {
            for (auto r : {Realization::none(), Realization::east(t), Realization::south(t)}) {
                const auto path = simulate_policy(o.share_east, o.subsidy, r, p, c);
                for (double m : path.total) {
                    CHECK(m >= c.floor * p.M0 * (1 - 1e-12));
                    CHECK(m <= c.cap * p.M0 * (1 + 1e-12));
                }
            }
        }
    }
    const double ss_rf = outcomes[0].path.pct_change.back();
    const double ss_risk = outcomes[1].path.pct_change.back();
    const double ss_amb = outcomes[2].path.pct_change.back();
    CHECK(ss_amb >= ss_risk);
    CHECK(ss_risk >= ss_rf);
}

TEST_CASE("a cap below the initial mass is infeasible") {
    PolicyConfig c = small_config(10);
    c.cap = 0.9;
    c.floor = 0.5;
    const auto o = optimize_subsidy(Uncertainty::Ambiguity, ShockProcess{}, EconParams{}, c);
    CHECK_FALSE(o.feasibility.feasible);
    CHECK(o.feasibility.violation > 0.0);
}

TEST_CASE("config validation") {
    PolicyConfig c;
    c.floor = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = PolicyConfig{};
    c.subsidy_grid.clear();
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = PolicyConfig{};
    c.replications = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("quantiles") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(x, 0.0) == 1.0);
    CHECK(quantile_sorted(x, 1.0) == 4.0);
    CHECK(quantile_sorted(x, 0.5) == 2.5);
    CHECK(quantile_sorted({7.0}, 0.05) == 7.0);
}

TEST_CASE("Monte Carlo bands") {
    const EconParams p;
    SUBCASE("no shocks collapse the bands onto the point path") {
        ShockProcess calm;
        calm.epsilon = 0.0;
        const auto o = optimize_subsidy(Uncertainty::Ambiguity, calm, p, small_config(50));
        const auto b = monte_carlo_bands(o, calm, p, small_config(50));
        for (const auto& band : b.levels) {
            for (std::size_t t = 0; t < o.path.pct_change.size(); ++t) {
                CHECK(band.lo[t] == o.path.pct_change[t]);
                CHECK(band.hi[t] == o.path.pct_change[t]);
            }
        }
    }
    SUBCASE("one replication makes all bands identical") {
        const ShockProcess shocks;
        const auto o = optimize_subsidy(Uncertainty::Risk, shocks, p, small_config(1));
        const auto b = monte_carlo_bands(o, shocks, p, small_config(1));
        CHECK(b.levels[0].lo == b.levels[2].lo);
        CHECK(b.levels[0].hi == b.levels[2].hi);
        CHECK(b.levels[0].lo == b.levels[0].hi);
    }
    SUBCASE("shock frequency matches epsilon") {
        const ShockProcess shocks;
        const auto c = small_config(10000);
        const auto o = optimize_subsidy(Uncertainty::Risk, shocks, p, c);
        const auto b = monte_carlo_bands(o, shocks, p, c);
        const double se = std::sqrt(0.1 * 0.9 / 10000.0);
        CHECK(std::abs(b.shock_rate[1] - 0.1) < 3 * se);
        CHECK(b.shock_rate[0] == 0.0);
    }
    SUBCASE("bands are nested") {
        const ShockProcess shocks;
        for (const auto& o : run_policy(shocks, p, small_config(3000))) {
            for (std::size_t t = 0; t < o.path.total.size(); ++t) {
                CHECK(o.bands.levels[2].lo[t] <= o.bands.levels[1].lo[t]);
                CHECK(o.bands.levels[1].lo[t] <= o.bands.levels[0].lo[t]);
                CHECK(o.bands.levels[0].hi[t] <= o.bands.levels[1].hi[t]);
                CHECK(o.bands.levels[1].hi[t] <= o.bands.levels[2].hi[t]);
            }
        }
    }
}

TEST_CASE("band CSV is reproducible") {
    const ShockProcess shocks;
    const EconParams p;
    const auto c = small_config(500);
    testing::TempDir tmp("bands");
    const auto a = (tmp.path / "a.csv").string();
    const auto b = (tmp.path / "b.csv").string();
    write_bands_csv(run_policy(shocks, p, c), c, a);
    write_bands_csv(run_policy(shocks, p, c), c, b);
    const auto text = slurp(a);
    CHECK(text == slurp(b));
    CHECK(text.rfind("period,scenario,pct_change_point,lo90,hi90,lo95,hi95,lo99,hi99,subsidy_outlay\n", 0) == 0);
}
