#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "gsc/equilibrium.hpp"
#include "gsc/iotable.hpp"

namespace gsc::testing {

using io::Matrix;
using io::Vector;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Nonnegative n x n matrix whose column sums lie in [0.05, max_col_sum].
inline Matrix random_productive(std::mt19937_64& rng, int n, double max_col_sum = 0.9) {
    Matrix A(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) A(i, j) = uniform(rng, 0.0, 1.0) * (uniform(rng, 0.0, 1.0) < 0.8 ? 1.0 : 0.0);
        const double s = A.col(j).sum();
        const double target = uniform(rng, 0.05, max_col_sum);
        if (s > 0.0) A.col(j) *= target / s;
    }
    return A;
}

/// Balanced table built from a productive A and positive final demand.
inline io::WiotTable random_wiot(std::mt19937_64& rng, int nations, int sectors) {
    const int n = nations * sectors;
    const Matrix A = random_productive(rng, n, 0.8);
    Matrix F(n, nations);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < nations; ++d) F(i, d) = uniform(rng, 1.0, 50.0);
    const Vector X = (Matrix::Identity(n, n) - A).partialPivLu().solve(F.rowwise().sum());
    const Matrix T = A * X.asDiagonal();
    const Vector V = X - T.colwise().sum().transpose();
    std::vector<std::string> ns, ss;
    for (int i = 0; i < nations; ++i) ns.push_back("N" + std::to_string(i));
    for (int k = 0; k < sectors; ++k) ss.push_back("S" + std::to_string(k));
    return io::make_wiot(ns, ss, T, F, V, X);
}

inline eq::WorldEconomy random_economy(std::mt19937_64& rng, int J) {
    eq::WorldEconomy e;
    e.J = J;
    e.L.resize(J);
    e.T1.resize(J);
    e.T2.resize(J);
    e.tau = Matrix::Ones(J, J);
    for (int i = 0; i < J; ++i) {
        e.L(i) = uniform(rng, 0.5, 2.0);
        e.T1(i) = uniform(rng, 0.5, 2.0);
        e.T2(i) = uniform(rng, 0.5, 2.0);
        for (int j = 0; j < J; ++j)
            if (i != j) e.tau(i, j) = uniform(rng, 1.1, 2.5);
    }
    e.alpha2 = uniform(rng, 0.2, 0.8);
    e.theta = uniform(rng, 2.0, 8.0);
    e.sigma = uniform(rng, 1.5, std::min(e.theta + 0.9, 5.0));
    e.gamma = uniform(rng, 0.4, 1.0);
    return e;
}

inline eq::WorldEconomy symmetric_economy(int J, double tau_off = 1.5) {
    eq::WorldEconomy e;
    e.J = J;
    e.L = Vector::Ones(J);
    e.T1 = Vector::Ones(J);
    e.T2 = Vector::Ones(J);
    e.tau = Matrix::Constant(J, J, tau_off);
    e.tau.diagonal().setOnes();
    e.alpha2 = 0.6;
    e.theta = 4.0;
    e.sigma = 2.5;
    e.gamma = 0.7;
    return e;
}

/// Fresh directory under the system temp dir, removed by the destructor.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("gsc_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace gsc::testing
