#include "gsc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gsc/csv.hpp"
#include "gsc/errors.hpp"

namespace gsc::eq {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// ln of sum exp(x) over a matrix, -inf if every entry is -inf.
double log_sum_exp(const Matrix& x, double& max_out) {
    const double m = x.maxCoeff();
    max_out = m;
    if (m == kNegInf) return kNegInf;
    return m + std::log((x.array() - m).exp().sum());
}

Matrix log_potentials(int j, const WorldEconomy& econ, const Vector& log_c) {
    const int J = econ.J;
    Matrix lp(J, J);
    const double th = econ.theta;
    if (econ.single_stage) {
        const double lj = std::log(static_cast<double>(J));
        for (int l2 = 0; l2 < J; ++l2) {
            const double v = std::log(econ.T2(l2)) - th * (log_c(l2) + std::log(econ.tau(l2, j))) - lj;
            for (int l1 = 0; l1 < J; ++l1) lp(l1, l2) = v;
        }
        return lp;
    }
    const double a2 = econ.alpha2;
    for (int l1 = 0; l1 < J; ++l1) {
        for (int l2 = 0; l2 < J; ++l2) {
            const double stage1 = std::log(econ.T1(l1)) - th * (log_c(l1) + std::log(econ.tau(l1, l2)));
            const double stage2 = a2 * std::log(econ.T2(l2)) - th * (a2 * log_c(l2) + std::log(econ.tau(l2, j)));
            lp(l1, l2) = (1.0 - a2) * stage1 + stage2;
        }
    }
    return lp;
}

Vector checked_log(const Vector& c, const char* what) {
    if (!(c.array() > 0.0).all() || !c.allFinite()) {
        throw ValidationError(std::string(what) + " must be positive and finite");
    }
    return c.array().log().matrix();
}

/// ln P for every destination given ln c; also fills shares when requested.
Vector log_prices_from_costs(const WorldEconomy& econ, const Vector& log_c, std::vector<Matrix>* pi) {
    const double log_kappa = std::log(kappa(econ.theta, econ.sigma));
    Vector lp(econ.J);
    if (pi) pi->assign(static_cast<std::size_t>(econ.J), Matrix());
    for (int j = 0; j < econ.J; ++j) {
        const Matrix x = log_potentials(j, econ, log_c);
        double m = 0.0;
        const double lse = log_sum_exp(x, m);
        if (lse == kNegInf) {
            throw NumericalError("destination " + econ.name(j) + " is unreachable by every chain");
        }
        lp(j) = log_kappa - lse / econ.theta;
        if (pi) (*pi)[static_cast<std::size_t>(j)] = (x.array() - lse).exp().matrix();
    }
    return lp;
}

Vector log_costs(const WorldEconomy& econ, const Vector& log_w, const Vector& log_p) {
    return econ.gamma * log_w + (1.0 - econ.gamma) * log_p;
}

}  // namespace

std::string WorldEconomy::name(int i) const {
    if (static_cast<std::size_t>(i) < names.size()) return names[static_cast<std::size_t>(i)];
    return "C" + std::to_string(i + 1);
}

void WorldEconomy::validate() const {
    auto bad = [](const std::string& what) { throw ValidationError("invalid economy: " + what); };
    if (J < 1) bad("J must be >= 1");
    if (L.size() != J || T1.size() != J || T2.size() != J) bad("L, T1 and T2 must have J entries");
    if (tau.rows() != J || tau.cols() != J) bad("tau must be J x J");
    if (!names.empty() && static_cast<int>(names.size()) != J) bad("names must have J entries");
    for (int i = 0; i < J; ++i) {
        if (!(L(i) > 0.0) || !std::isfinite(L(i))) bad("L must be positive");
        if (!(T1(i) > 0.0) || !std::isfinite(T1(i))) bad("T1 must be positive");
        if (!(T2(i) > 0.0) || !std::isfinite(T2(i))) bad("T2 must be positive");
        for (int j = 0; j < J; ++j) {
            const double t = tau(i, j);
            if (i == j && t != 1.0) bad("tau diagonal must be 1");
            if (!(t >= 1.0)) bad("tau entries must be >= 1");
        }
    }
    if (!(theta > 0.0) || !std::isfinite(theta)) bad("theta must be > 0");
    if (!(sigma > 1.0)) bad("sigma must be > 1");
    if (!(sigma - 1.0 < theta)) bad("need sigma - 1 < theta");
    if (!(gamma > 0.0 && gamma <= 1.0)) bad("gamma must lie in (0,1]");
    if (!single_stage && !(alpha2 > 0.0 && alpha2 < 1.0)) bad("alpha2 must lie in (0,1)");
}

double kappa(double theta, double sigma) {
    if (!(sigma > 1.0 && sigma - 1.0 < theta)) {
        throw ValidationError("price index requires 1 < sigma < theta + 1");
    }
    return std::pow(std::tgamma((theta + 1.0 - sigma) / theta), 1.0 / (1.0 - sigma));
}

double log_chain_potential(int l1, int l2, int j, const WorldEconomy& econ, const Vector& c) {
    return log_potentials(j, econ, checked_log(c, "costs"))(l1, l2);
}

double chain_potential(int l1, int l2, int j, const WorldEconomy& econ, const Vector& c) {
    return std::exp(log_chain_potential(l1, l2, j, econ, c));
}

Matrix chain_shares(int j, const WorldEconomy& econ, const Vector& c) {
    const Matrix x = log_potentials(j, econ, checked_log(c, "costs"));
    double m = 0.0;
    const double lse = log_sum_exp(x, m);
    if (lse == kNegInf) {
        throw NumericalError("all chain potentials are zero for destination " + econ.name(j));
    }
    return (x.array() - lse).exp().matrix();
}

double price_index(int j, const WorldEconomy& econ, const Vector& c) {
    const Matrix x = log_potentials(j, econ, checked_log(c, "costs"));
    double m = 0.0;
    const double lse = log_sum_exp(x, m);
    if (lse == kNegInf) {
        throw NumericalError("all chain potentials are zero for destination " + econ.name(j));
    }
    return kappa(econ.theta, econ.sigma) * std::exp(-lse / econ.theta);
}

Vector solve_prices(const WorldEconomy& econ, const Vector& w, const SolverOptions& opt, const Vector* log_p_start) {
    const Vector log_w = checked_log(w, "wages");
    Vector lp = log_p_start ? *log_p_start : Vector::Zero(econ.J);
    // The map is a contraction with modulus 1 - gamma.
    for (int it = 0; it < opt.inner_max_iter; ++it) {
        const Vector next = log_prices_from_costs(econ, log_costs(econ, log_w, lp), nullptr);
        const double diff = (next - lp).cwiseAbs().maxCoeff();
        lp = next;
        if (diff < opt.inner_tol) return lp;
    }
    throw ConvergenceError("price index iteration did not converge", opt.inner_max_iter, 0.0);
}

Vector labour_income(const WorldEconomy& econ, const std::vector<Matrix>& pi, const Vector& w) {
    const double a2 = econ.stage2_share();
    const Vector y = w.cwiseProduct(econ.L);
    Vector income = Vector::Zero(econ.J);
    for (int j = 0; j < econ.J; ++j) {
        const Matrix& p = pi[static_cast<std::size_t>(j)];
        // Stage-1 country i: row sums; stage-2 country i: column sums.
        income += y(j) * ((1.0 - a2) * p.rowwise().sum() + a2 * p.colwise().sum().transpose());
    }
    return income;
}

EquilibriumSolution solve_equilibrium(const WorldEconomy& econ, const SolverOptions& opt) {
    econ.validate();
    if (!(opt.tol > 0.0)) throw ValidationError("tol must be > 0");
    if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw ValidationError("damping must lie in (0,1]");
    if (opt.max_iter < 1) throw ValidationError("max_iter must be >= 1");

    const int J = econ.J;
    Vector w = (static_cast<double>(J) * econ.L).cwiseInverse();
    Vector log_p = Vector::Zero(J);
    EquilibriumSolution sol;
    double residual = std::numeric_limits<double>::infinity();
    const double step = opt.damping / (1.0 + econ.theta * econ.gamma);

    for (int it = 1; it <= opt.max_iter; ++it) {
        log_p = solve_prices(econ, w, opt, &log_p);
        const Vector log_c = log_costs(econ, w.array().log().matrix(), log_p);
        log_prices_from_costs(econ, log_c, &sol.pi);
        const Vector income = labour_income(econ, sol.pi, w);
        const Vector y = w.cwiseProduct(econ.L);
        residual = (y - income).cwiseAbs().maxCoeff();
        if (residual < opt.tol) {
            sol.w = w;
            sol.P = log_p.array().exp().matrix();
            sol.c = log_c.array().exp().matrix();
            sol.iterations = it;
            sol.residual = residual;
            sol.walras_residual = income.sum() - y.sum();
            return sol;
        }
        if (!(income.array() > 0.0).all()) {
            throw NumericalError("a country earns no labour income; check trade costs");
        }
        Vector log_w = w.array().log().matrix();
        log_w += step * (income.array().log() - y.array().log()).matrix();
        w = log_w.array().exp().matrix();
        w /= w.dot(econ.L);
    }
    throw ConvergenceError("wage iteration did not converge after " + std::to_string(opt.max_iter) +
                               " iterations (residual " + csv::format_exact(residual) + ")",
                           opt.max_iter, residual);
}

Matrix final_demand_shares(const WorldEconomy& econ, const EquilibriumSolution& sol) {
    Matrix piF(econ.J, econ.J);
    for (int j = 0; j < econ.J; ++j) piF.col(j) = sol.pi[static_cast<std::size_t>(j)].colwise().sum().transpose();
    return piF;
}

Matrix final_demand_flows(const WorldEconomy& econ, const EquilibriumSolution& sol) {
    const Vector y = sol.w.cwiseProduct(econ.L);
    return final_demand_shares(econ, sol) * y.asDiagonal();
}

io::WiotTable model_wiot(const WorldEconomy& econ, const EquilibriumSolution& sol, const std::string& sector) {
    const int J = econ.J;
    const double a2 = econ.stage2_share();
    const Vector y = sol.w.cwiseProduct(econ.L);
    const Vector spend = y / econ.gamma;  // final goods bought by j, consumption plus input bundle
    const Matrix piF = final_demand_shares(econ, sol);

    Matrix T = Matrix::Zero(J, J);
    for (int j = 0; j < J; ++j) {
        const Matrix& p = sol.pi[static_cast<std::size_t>(j)];
        // Stage-1 goods shipped to the stage-2 assembler.
        T += (1.0 - a2) * spend(j) * p;
    }
    // Input bundles are final goods bought for use in production.
    T += (1.0 - econ.gamma) * piF * spend.asDiagonal();
    Matrix F = piF * y.asDiagonal();
    Vector X = T.rowwise().sum() + F.rowwise().sum();

    std::vector<std::string> nations;
    for (int i = 0; i < J; ++i) nations.push_back(econ.name(i));
    return io::make_wiot(std::move(nations), {sector}, std::move(T), std::move(F), y, std::move(X));
}

GainsFromTrade gains_from_trade(const WorldEconomy& econ, const EquilibriumSolution& sol, int j) {
    if (j < 0 || j >= econ.J) throw ValidationError("country index out of range");
    GainsFromTrade g;
    const double a2 = econ.stage2_share();
    g.direct = sol.w(j) / sol.P(j);
    g.domestic_share = econ.single_stage ? final_demand_shares(econ, sol)(j, j) : sol.share(j, j, j);
    if (!(g.domestic_share > 0.0)) {
        throw NumericalError("purely domestic chain of " + econ.name(j) + " has zero share");
    }
    const double tech = econ.single_stage ? std::log(econ.T2(j))
                                          : (1.0 - a2) * std::log(econ.T1(j)) + a2 * std::log(econ.T2(j));
    const double log_tau = std::log(econ.tau(j, j)) * (2.0 - a2);
    const double log_cp = -std::log(kappa(econ.theta, econ.sigma)) - log_tau +
                          (tech - std::log(g.domestic_share)) / econ.theta;
    // c/P = (w/P)^gamma.
    g.via_domestic_share = std::exp(log_cp / econ.gamma);
    return g;
}

void write_chain_shares_csv(const WorldEconomy& econ, const EquilibriumSolution& sol, const std::string& path) {
    csv::write_atomic(path, [&](std::ostream& out) {
        out << "l1,l2,dest,share\n";
        for (int j = 0; j < econ.J; ++j)
            for (int l1 = 0; l1 < econ.J; ++l1)
                for (int l2 = 0; l2 < econ.J; ++l2)
                    out << csv::join({econ.name(l1), econ.name(l2), econ.name(j),
                                      csv::format_exact(sol.share(l1, l2, j))})
                        << '\n';
    });
}

void write_prices_csv(const WorldEconomy& econ, const EquilibriumSolution& sol, const std::string& path) {
    csv::write_atomic(path, [&](std::ostream& out) {
        out << "country,wage,price_index,composite_cost,real_wage\n";
        for (int i = 0; i < econ.J; ++i) {
            out << csv::join({econ.name(i), csv::format_exact(sol.w(i)), csv::format_exact(sol.P(i)),
                              csv::format_exact(sol.c(i)), csv::format_exact(sol.w(i) / sol.P(i))})
                << '\n';
        }
    });
}

}  // namespace gsc::eq
