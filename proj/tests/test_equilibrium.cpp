#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>

#include "gsc/errors.hpp"
#include "gsc/equilibrium.hpp"
#include "gsc/exposure.hpp"
#include "support.hpp"

using namespace gsc;
using namespace gsc::eq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Eq-7 numerator evaluated directly in levels.
double direct_potential(int l1, int l2, int j, const WorldEconomy& e, const Vector& c) {
    const double a2 = e.alpha2;
    return std::pow(e.T1(l1) * std::pow(c(l1) * e.tau(l1, l2), -e.theta), 1.0 - a2) * std::pow(e.T2(l2), a2) *
           std::pow(std::pow(c(l2), a2) * e.tau(l2, j), -e.theta);
}

Vector random_costs(std::mt19937_64& rng, int J) {
    Vector c(J);
    for (int i = 0; i < J; ++i) c(i) = testing::uniform(rng, 0.5, 2.0);
    return c;
}

WorldEconomy autarky(int J) {
    auto e = testing::symmetric_economy(J);
    e.tau = Matrix::Constant(J, J, kInf);
    e.tau.diagonal().setOnes();
    e.T1(0) = 2.0;
    e.T2(1 % J) = 0.5;
    return e;
}

}  // namespace

TEST_CASE("chain potentials") {
    const auto sym = testing::symmetric_economy(2, 1.0);
    const Vector c = Vector::Ones(2);
    const double phi = chain_potential(0, 0, 0, sym, c);
    for (int l1 = 0; l1 < 2; ++l1)
        for (int l2 = 0; l2 < 2; ++l2) CHECK(chain_potential(l1, l2, 1, sym, c) == doctest::Approx(phi));

    auto far = testing::symmetric_economy(2);
    far.tau(1, 0) = 1e12;
    CHECK(chain_potential(0, 1, 0, far, c) < 1e-40);

    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const auto e = testing::random_economy(rng, 3);
        const Vector cc = random_costs(rng, 3);
        for (int l1 = 0; l1 < 3; ++l1)
            for (int l2 = 0; l2 < 3; ++l2)
                CHECK(chain_potential(l1, l2, 2, e, cc) ==
                      doctest::Approx(direct_potential(l1, l2, 2, e, cc)).epsilon(1e-12));
    }
}

TEST_CASE("trade-cost elasticities along a chain") {
    std::mt19937_64 rng(2);
    const double h = 1e-6;
    for (int rep = 0; rep < 10; ++rep) {
        const auto e = testing::random_economy(rng, 3);
        const Vector c = random_costs(rng, 3);
        const int l1 = 0, l2 = 1, j = 2;
        auto bumped = [&](double up, double down) {
            auto x = e;
            x.tau(l1, l2) *= std::exp(up);
            x.tau(l2, j) *= std::exp(down);
            return log_chain_potential(l1, l2, j, x, c);
        };
        const double both = (bumped(h, h) - bumped(-h, -h)) / (2 * h);
        const double upstream = (bumped(h, 0) - bumped(-h, 0)) / (2 * h);
        const double downstream = (bumped(0, h) - bumped(0, -h)) / (2 * h);
        CHECK(both == doctest::Approx(-e.theta * (2 - e.alpha2)).epsilon(1e-6));
        CHECK(upstream == doctest::Approx(-e.theta * (1 - e.alpha2)).epsilon(1e-6));
        CHECK(downstream == doctest::Approx(-e.theta).epsilon(1e-6));
        CHECK(std::abs(downstream) > std::abs(upstream));
    }
}

TEST_CASE("chain shares") {
    const auto sym = testing::symmetric_economy(2, 1.0);
    const Matrix pi = chain_shares(0, sym, Vector::Ones(2));
    CHECK((pi.array() - 0.25).abs().maxCoeff() < 1e-15);

    const auto aut = autarky(3);
    const Matrix pa = chain_shares(1, aut, Vector::Ones(3));
    CHECK(pa(1, 1) == 1.0);
    CHECK(pa.sum() == 1.0);

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto e = testing::random_economy(rng, 3);
        const Vector c = random_costs(rng, 3);
        for (int j = 0; j < 3; ++j) {
            const Matrix p = chain_shares(j, e, c);
            double total = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) total += direct_potential(a, b, j, e, c);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    CHECK(p(a, b) == doctest::Approx(direct_potential(a, b, j, e, c) / total).epsilon(1e-12));
            CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("price index") {
    std::mt19937_64 rng(4);
    const auto e = testing::random_economy(rng, 2);
    const Vector c = random_costs(rng, 2);
    const double k = std::pow(std::tgamma((e.theta + 1 - e.sigma) / e.theta), 1.0 / (1.0 - e.sigma));
    double sum = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) sum += direct_potential(a, b, 0, e, c);
    CHECK(price_index(0, e, c) == doctest::Approx(k * std::pow(sum, -1.0 / e.theta)).epsilon(1e-12));

    auto scaled = e;
    const double lambda = 3.0;
    scaled.T1 *= lambda;
    scaled.T2 *= lambda;
    CHECK(price_index(1, scaled, c) ==
          doctest::Approx(price_index(1, e, c) * std::pow(lambda, -1.0 / e.theta)).epsilon(1e-12));

    const auto aut = autarky(2);
    const double own = std::pow(aut.T1(0), 1 - aut.alpha2) * std::pow(aut.T2(0), aut.alpha2) *
                       std::pow(c(0), -aut.theta);
    CHECK(price_index(0, aut, c) ==
          doctest::Approx(kappa(aut.theta, aut.sigma) * std::pow(own, -1.0 / aut.theta)).epsilon(1e-12));

    auto bad = e;
    bad.sigma = e.theta + 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("equilibrium wages") {
    SUBCASE("symmetric economies pay equal wages") {
        for (int J : {2, 3, 4}) {
            const auto e = testing::symmetric_economy(J);
            const auto sol = solve_equilibrium(e);
            for (int i = 0; i < J; ++i) CHECK(std::abs(sol.w(i) - 1.0 / J) < 1e-8);
        }
    }
    SUBCASE("random economies clear markets") {
        std::mt19937_64 rng(5);
        for (int rep = 0; rep < 5; ++rep) {
            const auto e = testing::random_economy(rng, 3);
            const auto sol = solve_equilibrium(e);
            CHECK(sol.residual < 1e-10);
            CHECK(std::abs(sol.walras_residual) < 1e-10);
            CHECK(std::abs(sol.w.dot(e.L) - 1.0) < 1e-12);
            const Vector income = labour_income(e, sol.pi, sol.w);
            CHECK((income - sol.w.cwiseProduct(e.L)).cwiseAbs().maxCoeff() < 1e-10);
            for (int i = 0; i < 3; ++i)
                CHECK(sol.c(i) == doctest::Approx(std::pow(sol.w(i), e.gamma) * std::pow(sol.P(i), 1 - e.gamma)));
        }
    }
    SUBCASE("homogeneity in technology") {
        std::mt19937_64 rng(6);
        const auto e = testing::random_economy(rng, 3);
        auto s = e;
        s.T1 *= 2.0;
        s.T2 *= 2.0;
        const auto a = solve_equilibrium(e);
        const auto b = solve_equilibrium(s);
        CHECK((a.w - b.w).cwiseAbs().maxCoeff() < 1e-9);
        for (int j = 0; j < 3; ++j)
            CHECK(b.P(j) == doctest::Approx(a.P(j) * std::pow(2.0, -1.0 / (e.theta * e.gamma))).epsilon(1e-8));
    }
    SUBCASE("non-convergence reports the last residual") {
        std::mt19937_64 rng(7);
        const auto e = testing::random_economy(rng, 3);
        SolverOptions opt;
        opt.max_iter = 1;
        try {
            solve_equilibrium(e, opt);
            FAIL("expected non-convergence");
        } catch (const ConvergenceError& err) {
            CHECK(err.iterations() == 1);
            CHECK(err.last_residual() > 0.0);
        }
    }
}

TEST_CASE("single-stage mode reduces to the one-stage gravity shares") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        auto e = testing::random_economy(rng, 3);
        e.single_stage = true;
        const auto sol = solve_equilibrium(e);
        const Matrix piF = final_demand_shares(e, sol);
        for (int j = 0; j < 3; ++j) {
            double den = 0.0;
            for (int k = 0; k < 3; ++k) den += std::pow(e.tau(k, j) * sol.c(k), -e.theta) * e.T2(k);
            for (int i = 0; i < 3; ++i) {
                const double closed = std::pow(e.tau(i, j) * sol.c(i), -e.theta) * e.T2(i) / den;
                CHECK(std::abs(piF(i, j) - closed) < 1e-10);
            }
        }
    }
}

TEST_CASE("final demand shares and the model table") {
    const auto sym = testing::symmetric_economy(2, 1.0);
    const auto s = solve_equilibrium(sym);
    const Matrix piF = final_demand_shares(sym, s);
    CHECK((piF.array() - 0.5).abs().maxCoeff() < 1e-12);

    const auto aut = autarky(3);
    const auto sa = solve_equilibrium(aut);
    CHECK(final_demand_shares(aut, sa).isIdentity(1e-15));
    const auto wa = model_wiot(aut, sa);
    CHECK(io::validate_balance(wa, 1e-8).pass);
    const auto fir = exposure::fir(wa, exposure::SectorFilter::all(wa));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r != c) CHECK(fir.values(r, c) < 1e-6);

    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 5; ++rep) {
        const auto e = testing::random_economy(rng, 3);
        const auto sol = solve_equilibrium(e);
        const Matrix p = final_demand_shares(e, sol);
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(p.col(j).sum() - 1.0) < 1e-12);
            for (int i = 0; i < 3; ++i) {
                double agg = 0.0;
                for (int l1 = 0; l1 < 3; ++l1) agg += sol.share(l1, i, j);
                CHECK(p(i, j) == doctest::Approx(agg).epsilon(1e-14));
            }
        }
        const auto w = model_wiot(e, sol);
        const auto bal = io::validate_balance(w, 1e-8);
        CHECK(bal.pass);
        const auto f = exposure::fir(w, exposure::SectorFilter::all(w));
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                if (r != c) CHECK(f.values(r, c) > 0.0);
    }
}

TEST_CASE("model table is symmetric under relabelling a symmetric world") {
    const auto e = testing::symmetric_economy(2);
    const auto w = model_wiot(e, solve_equilibrium(e));
    CHECK(w.T(0, 1) == doctest::Approx(w.T(1, 0)).epsilon(1e-12));
    CHECK(w.T(0, 0) == doctest::Approx(w.T(1, 1)).epsilon(1e-12));
    CHECK(w.F(0, 1) == doctest::Approx(w.F(1, 0)).epsilon(1e-12));
}

TEST_CASE("gains from trade") {
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 10; ++rep) {
        const auto e = testing::random_economy(rng, 3);
        const auto sol = solve_equilibrium(e);
        for (int j = 0; j < 3; ++j) {
            const auto g = gains_from_trade(e, sol, j);
            CHECK(std::abs(g.direct - g.via_domestic_share) / g.direct < 1e-8);
        }
    }

    const auto aut = autarky(2);
    const auto sa = solve_equilibrium(aut);
    for (int j = 0; j < 2; ++j) {
        const auto g = gains_from_trade(aut, sa, j);
        CHECK(g.domestic_share == 1.0);
        const double closed =
            std::pow(std::pow(aut.T1(j), 1 - aut.alpha2) * std::pow(aut.T2(j), aut.alpha2), 1 / (aut.theta * aut.gamma)) *
            std::pow(kappa(aut.theta, aut.sigma), -1 / aut.gamma);
        CHECK(g.direct == doctest::Approx(closed).epsilon(1e-12));
        CHECK(g.via_domestic_share == doctest::Approx(closed).epsilon(1e-12));
    }

    const auto sym = testing::symmetric_economy(2);
    const auto ss = solve_equilibrium(sym);
    CHECK(gains_from_trade(sym, ss, 0).direct == doctest::Approx(gains_from_trade(sym, ss, 1).direct).epsilon(1e-10));
}

TEST_CASE("economy validation") {
    auto e = testing::symmetric_economy(2);
    e.tau(0, 0) = 1.2;
    CHECK_THROWS_AS(e.validate(), ValidationError);
    e = testing::symmetric_economy(2);
    e.tau(0, 1) = 0.9;
    CHECK_THROWS_AS(e.validate(), ValidationError);
    e = testing::symmetric_economy(2);
    e.alpha2 = 1.0;
    CHECK_THROWS_AS(e.validate(), ValidationError);
    e.single_stage = true;
    CHECK_NOTHROW(e.validate());
}

TEST_CASE("four-country solve is fast") {
    std::mt19937_64 rng(12);
    const auto e = testing::random_economy(rng, 4);
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_equilibrium(e);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(sol.residual < 1e-10);
    CHECK(secs < 10.0);
}
