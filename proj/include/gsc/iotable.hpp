#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace gsc::io {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// World input-output table with nation-major (nation, sector) ordering:
/// row/column index = nation * K + sector.
///
/// T is producer-row by user-column intermediate use, F is producer-row by
/// destination-nation final demand, V is value added and X gross output.
/// Construct through make_wiot or load_wiot; both reject non-finite or
/// negative entries but neither enforces balance (see validate_balance).
struct WiotTable {
    std::vector<std::string> nations;
    std::vector<std::string> sectors;
    Matrix T;
    Matrix F;
    Vector V;
    Vector X;

    std::size_t nation_count() const { return nations.size(); }
    std::size_t sector_count() const { return sectors.size(); }
    std::size_t size() const { return nations.size() * sectors.size(); }
    std::size_t index(std::size_t nation, std::size_t sector) const { return nation * sectors.size() + sector; }
    std::string label(std::size_t i) const;
    std::size_t nation_index(const std::string& nation) const;
    std::size_t sector_index(const std::string& sector) const;
};

WiotTable make_wiot(std::vector<std::string> nations, std::vector<std::string> sectors, Matrix T, Matrix F,
                    Vector V, Vector X);

/// Reads intermediate.csv, final.csv, value_added.csv and gross_output.csv
/// from a directory. Labels are NATION.SECTOR.
WiotTable load_wiot(const std::filesystem::path& dir);

/// Writes the four-file layout read by load_wiot. Values use the shortest
/// round-trip representation.
void save_wiot(const WiotTable& w, const std::filesystem::path& dir);

struct BalanceReport {
    double max_row_residual = 0.0;
    double max_col_residual = 0.0;
    std::size_t worst_row = 0;
    std::size_t worst_col = 0;
    double threshold = 0.0;
    bool pass = true;
};

inline constexpr double kDefaultBalanceTolerance = 1e-6;

/// Row identity sum_j T[i,j] + sum_n F[i,n] = X[i] and column identity
/// sum_i T[i,j] + V[j] = X[j]; passes iff both residuals are within
/// tol * max(1, max|X|).
BalanceReport validate_balance(const WiotTable& w, double tol = kDefaultBalanceTolerance);

struct CoefficientMatrix {
    Matrix A;
};

struct LeontiefInverse {
    Matrix B;
};

/// A[i,j] = T[i,j] / X[j]; zero-output columns are all zero.
CoefficientMatrix coefficients(const WiotTable& w);

/// B = (I - A)^-1. Throws NumericalError when A is not productive, i.e. when
/// I - A is singular or its inverse has a negative entry (for nonnegative A
/// the latter is equivalent to spectral radius >= 1).
LeontiefInverse leontief(const CoefficientMatrix& a);

/// Value-added coefficients v[j] = V[j] / X[j], zero where X[j] = 0.
Vector value_added_coefficients(const WiotTable& w);

}  // namespace gsc::io
