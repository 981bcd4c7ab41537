#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gsc/equilibrium.hpp"
#include "gsc/errors.hpp"

namespace gsc::eq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinMarkup = 1e-8;  // smallest tau - 1 the search can express

Matrix column_shares(const Matrix& m) {
    Matrix out = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double total = m.col(j).sum();
        if (total > 0.0) out.col(j) = m.col(j) / total;
    }
    return out;
}

struct Packing {
    int J;

    int size() const { return 2 * J + J * (J - 1) / 2; }

    Vector pack(const WorldEconomy& e) const {
        Vector x(size());
        int k = 0;
        for (int i = 0; i < J; ++i) x(k++) = std::log(e.T1(i));
        for (int i = 0; i < J; ++i) x(k++) = std::log(e.T2(i));
        for (int i = 0; i < J; ++i) {
            for (int j = i + 1; j < J; ++j) {
                const double mean = 0.5 * (e.tau(i, j) + e.tau(j, i));
                if (!std::isfinite(mean)) {
                    throw ValidationError("calibration needs finite trade costs in the initial economy");
                }
                x(k++) = std::log(std::max(mean - 1.0, kMinMarkup));
            }
        }
        return x;
    }

    WorldEconomy unpack(const Vector& x, WorldEconomy e) const {
        int k = 0;
        for (int i = 0; i < J; ++i) e.T1(i) = std::exp(x(k++));
        for (int i = 0; i < J; ++i) e.T2(i) = std::exp(x(k++));
        for (int i = 0; i < J; ++i) {
            for (int j = i + 1; j < J; ++j) {
                e.tau(i, j) = e.tau(j, i) = 1.0 + std::exp(x(k++));
            }
        }
        return e;
    }
};

double evaluate(const ShareMoments& target, const WorldEconomy& econ) {
    try {
        SolverOptions opt;
        opt.max_iter = 5000;
        const auto sol = solve_equilibrium(econ, opt);
        const double d = moment_distance(ShareMoments::from_wiot(model_wiot(econ, sol)), target);
        return std::isfinite(d) ? d : kInf;
    } catch (const NumericalError&) {
        return kInf;
    } catch (const ValidationError&) {
        return kInf;
    }
}

}  // namespace

ShareMoments ShareMoments::from_wiot(const io::WiotTable& w) {
    const auto N = static_cast<Eigen::Index>(w.nation_count());
    const auto K = static_cast<Eigen::Index>(w.sector_count());
    Matrix F = Matrix::Zero(N, N);
    Matrix T = Matrix::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index s = 0; s < K; ++s) {
            const auto row = i * K + s;
            F.row(i) += w.F.row(row);
            for (Eigen::Index j = 0; j < N; ++j) T(i, j) += w.T.row(row).segment(j * K, K).sum();
        }
    }
    return {column_shares(F), column_shares(T)};
}

void ShareMoments::validate(int J) const {
    auto check = [J](const Matrix& m, const char* what, bool allow_empty_columns) {
        if (m.rows() != J || m.cols() != J) {
            throw ValidationError(std::string(what) + " shares must be " + std::to_string(J) + " x " +
                                  std::to_string(J));
        }
        if (!m.allFinite() || (m.array() < 0.0).any()) {
            throw ValidationError(std::string(what) + " shares must be finite and nonnegative");
        }
        for (int j = 0; j < J; ++j) {
            const double s = m.col(j).sum();
            if (allow_empty_columns && s == 0.0) continue;
            if (std::abs(s - 1.0) > 1e-6) {
                throw ValidationError(std::string(what) + " shares in column " + std::to_string(j + 1) +
                                      " sum to " + std::to_string(s) + ", not 1");
            }
        }
    };
    check(final_shares, "final-demand", false);
    check(intermediate_shares, "intermediate", true);
}

double moment_distance(const ShareMoments& a, const ShareMoments& b) {
    if (a.final_shares.rows() != b.final_shares.rows() || a.final_shares.cols() != b.final_shares.cols() ||
        a.intermediate_shares.rows() != b.intermediate_shares.rows() ||
        a.intermediate_shares.cols() != b.intermediate_shares.cols()) {
        throw ValidationError("moment dimensions differ");
    }
    return (a.final_shares - b.final_shares).squaredNorm() +
           (a.intermediate_shares - b.intermediate_shares).squaredNorm();
}

CalibrationResult calibrate(const ShareMoments& target, const WorldEconomy& econ0, int budget) {
    econ0.validate();
    target.validate(econ0.J);
    if (budget < 1) throw ValidationError("evaluation budget must be >= 1");

    CalibrationResult res;
    res.fitted = econ0;
    res.initial_objective = evaluate(target, econ0);
    res.objective = res.initial_objective;
    res.evaluations = 1;

    const Packing pk{econ0.J};
    const int n = pk.size();
    bool exhausted = false;
    auto f = [&](const Vector& x) {
        if (res.evaluations >= budget) {
            exhausted = true;
            return std::numeric_limits<double>::infinity();
        }
        ++res.evaluations;
        return evaluate(target, pk.unpack(x, econ0));
    };
    auto record = [&](const Vector& x, double fx) {
        if (fx < res.objective) {
            res.objective = fx;
            res.fitted = pk.unpack(x, econ0);
            res.improved = true;
        }
    };

    Vector best_x = pk.pack(econ0);
    double best_f = res.initial_objective;
    double step = 0.1;
    while (res.evaluations + n <= budget && res.objective > 0.0) {
        std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), best_x);
        std::vector<double> fv(static_cast<std::size_t>(n + 1));
        fv[0] = best_f;
        for (int k = 0; k < n; ++k) simplex[static_cast<std::size_t>(k + 1)](k) += step;
        for (int k = 1; k <= n; ++k) {
            fv[static_cast<std::size_t>(k)] = f(simplex[static_cast<std::size_t>(k)]);
            record(simplex[static_cast<std::size_t>(k)], fv[static_cast<std::size_t>(k)]);
        }
        const double restart_value = *std::min_element(fv.begin(), fv.end());

        std::vector<int> order(static_cast<std::size_t>(n + 1));
        while (!exhausted && res.evaluations < budget) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return fv[static_cast<std::size_t>(a)] < fv[static_cast<std::size_t>(b)];
            });
            const auto ib = static_cast<std::size_t>(order.front());
            const auto iw = static_cast<std::size_t>(order.back());
            const auto is = static_cast<std::size_t>(order[static_cast<std::size_t>(n - 1)]);
            double spread = 0.0;
            for (const auto& v : simplex) spread = std::max(spread, (v - simplex[ib]).cwiseAbs().maxCoeff());
            if (fv[iw] - fv[ib] <= 1e-16 * (1.0 + std::abs(fv[ib])) && spread < 1e-9) break;

            Vector centroid = Vector::Zero(n);
            for (int k = 0; k <= n; ++k)
                if (static_cast<std::size_t>(k) != iw) centroid += simplex[static_cast<std::size_t>(k)];
            centroid /= n;

            const Vector xr = centroid + (centroid - simplex[iw]);
            const double fr = f(xr);
            record(xr, fr);
            if (fr < fv[ib]) {
                const Vector xe = centroid + 2.0 * (centroid - simplex[iw]);
                const double fe = f(xe);
                record(xe, fe);
                if (fe < fr) {
                    simplex[iw] = xe;
                    fv[iw] = fe;
                } else {
                    simplex[iw] = xr;
                    fv[iw] = fr;
                }
                continue;
            }
            if (fr < fv[is]) {
                simplex[iw] = xr;
                fv[iw] = fr;
                continue;
            }
            const bool outside = fr < fv[iw];
            const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                                      : Vector(centroid + 0.5 * (simplex[iw] - centroid));
            const double fc = f(xc);
            record(xc, fc);
            if (fc < (outside ? fr : fv[iw])) {
                simplex[iw] = xc;
                fv[iw] = fc;
                continue;
            }
            for (int k = 0; k <= n; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                if (kk == ib) continue;
                simplex[kk] = simplex[ib] + 0.5 * (simplex[kk] - simplex[ib]);
                fv[kk] = f(simplex[kk]);
                record(simplex[kk], fv[kk]);
            }
        }

        // Restart around the incumbent; stop once a restart brings nothing new.
        const auto ib = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
        const bool progressed = fv[ib] < restart_value;
        best_x = simplex[ib];
        best_f = fv[ib];
        if (!progressed || exhausted) break;
        step = std::max(step * 0.5, 1e-3);
    }
    if (!res.improved) res.fitted = econ0;
    return res;
}

}  // namespace gsc::eq
