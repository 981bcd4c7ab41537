#pragma once

#include <string>
#include <vector>

#include "gsc/iotable.hpp"

namespace gsc::eq {

using io::Matrix;
using io::Vector;

/// Two-stage global supply chain economy. Stage 1 uses the composite input
/// only; stage 2 combines the composite (share alpha2) with a stage-1 good.
/// With single_stage set, alpha2 is forced to 1, T2 is the technology and
/// the stage-1 country of a chain is irrelevant.
struct WorldEconomy {
    int J = 0;
    Vector L;
    Vector T1;
    Vector T2;
    Matrix tau;  // tau(i, j): ship tau units from i for one to arrive in j; may be +inf
    double alpha2 = 0.5;
    double theta = 4.0;
    double sigma = 2.0;
    double gamma = 1.0;
    bool single_stage = false;
    std::vector<std::string> names;

    void validate() const;
    double stage2_share() const { return single_stage ? 1.0 : alpha2; }
    std::string name(int i) const;
};

/// Gamma((theta + 1 - sigma) / theta)^(1 / (1 - sigma)).
double kappa(double theta, double sigma);

/// ln of the chain potential for stage-1 country l1, stage-2 country l2,
/// destination j, given composite costs c. May be -inf.
double log_chain_potential(int l1, int l2, int j, const WorldEconomy& econ, const Vector& c);
double chain_potential(int l1, int l2, int j, const WorldEconomy& econ, const Vector& c);

/// J x J matrix of shares over (l1, l2) for destination j; sums to 1.
Matrix chain_shares(int j, const WorldEconomy& econ, const Vector& c);

double price_index(int j, const WorldEconomy& econ, const Vector& c);

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 20000;
    double damping = 0.5;
    double inner_tol = 1e-12;
    int inner_max_iter = 100000;
};

struct EquilibriumSolution {
    Vector w;
    Vector P;
    Vector c;
    std::vector<Matrix> pi;  // pi[j](l1, l2)
    int iterations = 0;
    double residual = 0.0;         // max_i |w_i L_i - income_i|
    double walras_residual = 0.0;  // sum_i (income_i - w_i L_i)

    double share(int l1, int l2, int j) const { return pi[static_cast<std::size_t>(j)](l1, l2); }
};

/// Price indices consistent with wages w, c_i = w_i^gamma P_i^(1 - gamma).
Vector solve_prices(const WorldEconomy& econ, const Vector& w, const SolverOptions& opt = {},
                    const Vector* log_p_start = nullptr);

/// Labour income implied by wages w: sum_j sum_n alpha_n beta_n Pr(i at stage n | j) w_j L_j.
Vector labour_income(const WorldEconomy& econ, const std::vector<Matrix>& pi, const Vector& w);

EquilibriumSolution solve_equilibrium(const WorldEconomy& econ, const SolverOptions& opt = {});

/// piF(i, j): share of j's spending on final goods assembled in i.
Matrix final_demand_shares(const WorldEconomy& econ, const EquilibriumSolution& sol);
/// F(i, j) = piF(i, j) * w_j L_j.
Matrix final_demand_flows(const WorldEconomy& econ, const EquilibriumSolution& sol);

/// One-sector-per-country table implied by the model.
io::WiotTable model_wiot(const WorldEconomy& econ, const EquilibriumSolution& sol,
                         const std::string& sector = "TOT");

struct GainsFromTrade {
    double direct = 0.0;              // w_j / P_j
    double via_domestic_share = 0.0;  // from the purely domestic chain's share
    double domestic_share = 0.0;
};

GainsFromTrade gains_from_trade(const WorldEconomy& econ, const EquilibriumSolution& sol, int j);

/// Column shares of final demand and of intermediate use, aggregated to
/// nations.
struct ShareMoments {
    Matrix final_shares;
    Matrix intermediate_shares;

    static ShareMoments from_wiot(const io::WiotTable& w);
    void validate(int J) const;
};

double moment_distance(const ShareMoments& a, const ShareMoments& b);

struct CalibrationResult {
    WorldEconomy fitted;
    double objective = 0.0;
    double initial_objective = 0.0;
    int evaluations = 0;
    bool improved = false;
};

/// Fits T1, T2 and symmetric off-diagonal tau by Nelder-Mead over log
/// parameters; theta, sigma, gamma, alpha2 and L stay fixed.
CalibrationResult calibrate(const ShareMoments& target, const WorldEconomy& econ0, int budget = 2000);

void write_chain_shares_csv(const WorldEconomy& econ, const EquilibriumSolution& sol, const std::string& path);
void write_prices_csv(const WorldEconomy& econ, const EquilibriumSolution& sol, const std::string& path);

}  // namespace gsc::eq
