#include "gsc/iotable.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "gsc/csv.hpp"
#include "gsc/errors.hpp"

namespace gsc::io {
namespace {

void check_entries(const Eigen::Ref<const Matrix>& m, const char* name, const WiotTable& w, bool columns_are_nations) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double x = m(i, j);
            if (std::isfinite(x) && x >= 0.0) continue;
            std::string col;
            if (m.cols() == 1) {
                col = w.label(static_cast<std::size_t>(i));
            } else if (columns_are_nations) {
                col = w.nations[static_cast<std::size_t>(j)];
            } else {
                col = w.label(static_cast<std::size_t>(j));
            }
            const std::string row = m.cols() == 1 ? std::string("-") : w.label(static_cast<std::size_t>(i));
            throw ValidationError(std::string(x < 0.0 ? "negative" : "non-finite") + " entry " + csv::format_exact(x) +
                                  " in " + name + " at row " + row + ", column " + col);
        }
    }
}

std::pair<std::string, std::string> split_label(const std::string& label, const std::string& source) {
    const auto dot = label.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == label.size()) {
        throw ValidationError(source + ": label '" + label + "' is not of the form NATION.SECTOR");
    }
    return {label.substr(0, dot), label.substr(dot + 1)};
}

template <typename T>
void push_unique(std::vector<T>& v, const T& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

std::vector<std::string> expected_labels(const std::vector<std::string>& nations,
                                         const std::vector<std::string>& sectors) {
    std::vector<std::string> out;
    for (const auto& n : nations)
        for (const auto& s : sectors) out.push_back(n + "." + s);
    return out;
}

Vector read_row_vector(const std::filesystem::path& path, const std::vector<std::string>& labels) {
    const auto t = csv::read(path);
    if (t.header.size() < 1 || t.rows.size() != 1) {
        throw ValidationError(t.source + ": expected a header and exactly one data row");
    }
    const std::vector<std::string> cols(t.header.begin() + 1, t.header.end());
    if (cols.size() != labels.size()) {
        throw ValidationError(t.source + ": dimension mismatch, expected " + std::to_string(labels.size()) +
                              " entries, found " + std::to_string(cols.size()));
    }
    if (cols != labels) {
        throw ValidationError(t.source + ": column labels differ from intermediate.csv");
    }
    const auto& row = t.rows.front();
    if (row.size() != t.header.size()) {
        throw ValidationError(t.source + ": dimension mismatch, row has " + std::to_string(row.size() - 1) +
                              " entries, header has " + std::to_string(cols.size()));
    }
    Vector v(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        v(static_cast<Eigen::Index>(j)) = csv::to_double(row[j + 1], t.source, 1, j + 1);
    }
    return v;
}

}  // namespace

std::string WiotTable::label(std::size_t i) const {
    const std::size_t k = sectors.size();
    return nations.at(i / k) + "." + sectors.at(i % k);
}

std::size_t WiotTable::nation_index(const std::string& nation) const {
    auto it = std::find(nations.begin(), nations.end(), nation);
    if (it == nations.end()) throw ValidationError("unknown nation '" + nation + "'");
    return static_cast<std::size_t>(it - nations.begin());
}

std::size_t WiotTable::sector_index(const std::string& sector) const {
    auto it = std::find(sectors.begin(), sectors.end(), sector);
    if (it == sectors.end()) throw ValidationError("unknown sector '" + sector + "'");
    return static_cast<std::size_t>(it - sectors.begin());
}

WiotTable make_wiot(std::vector<std::string> nations, std::vector<std::string> sectors, Matrix T, Matrix F,
                    Vector V, Vector X) {
    if (nations.empty() || sectors.empty()) {
        throw ValidationError("a WIOT needs at least one nation and one sector");
    }
    const auto n = static_cast<Eigen::Index>(nations.size() * sectors.size());
    const auto nn = static_cast<Eigen::Index>(nations.size());
    auto dims = [](Eigen::Index r, Eigen::Index c) { return std::to_string(r) + "x" + std::to_string(c); };
    if (T.rows() != n || T.cols() != n) {
        throw ValidationError("dimension mismatch: T is " + dims(T.rows(), T.cols()) + ", expected " + dims(n, n));
    }
    if (F.rows() != n || F.cols() != nn) {
        throw ValidationError("dimension mismatch: F is " + dims(F.rows(), F.cols()) + ", expected " + dims(n, nn));
    }
    if (V.size() != n) {
        throw ValidationError("dimension mismatch: V has " + std::to_string(V.size()) + " entries, expected " +
                              std::to_string(n));
    }
    if (X.size() != n) {
        throw ValidationError("dimension mismatch: X has " + std::to_string(X.size()) + " entries, expected " +
                              std::to_string(n));
    }
    WiotTable w{std::move(nations), std::move(sectors), std::move(T), std::move(F), std::move(V), std::move(X)};
    check_entries(w.T, "T", w, false);
    check_entries(w.F, "F", w, true);
    check_entries(w.V, "V", w, false);
    check_entries(w.X, "X", w, false);
    return w;
}

WiotTable load_wiot(const std::filesystem::path& dir) {
    const auto inter = csv::read(dir / "intermediate.csv");
    if (inter.header.size() < 2) {
        throw ValidationError(inter.source + ": header must hold a label column and at least one data column");
    }
    const std::vector<std::string> col_labels(inter.header.begin() + 1, inter.header.end());
    std::vector<std::string> nations;
    std::vector<std::string> sectors;
    for (const auto& l : col_labels) {
        auto [nation, sector] = split_label(l, inter.source);
        push_unique(nations, nation);
        push_unique(sectors, sector);
    }
    const auto labels = expected_labels(nations, sectors);
    if (labels != col_labels) {
        throw ValidationError(inter.source +
                              ": column labels must enumerate every NATION.SECTOR pair in nation-major order");
    }
    const std::size_t n = labels.size();
    if (inter.rows.size() != n) {
        throw ValidationError(inter.source + ": dimension mismatch, " + std::to_string(inter.rows.size()) +
                              " rows for " + std::to_string(n) + " columns");
    }
    Matrix T(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = inter.rows[i];
        if (row.size() != n + 1) {
            throw ValidationError(inter.source + ": dimension mismatch in row " + std::to_string(i + 1));
        }
        if (row[0] != labels[i]) {
            throw ValidationError(inter.source + ": row label '" + row[0] + "' does not match column label '" +
                                  labels[i] + "'");
        }
        for (std::size_t j = 0; j < n; ++j) {
            T(i, j) = csv::to_double(row[j + 1], inter.source, i + 1, j + 1);
        }
    }

    const auto fin = csv::read(dir / "final.csv");
    const std::vector<std::string> fin_cols(fin.header.begin() + (fin.header.empty() ? 0 : 1), fin.header.end());
    if (fin_cols != nations) {
        throw ValidationError(fin.source + ": final-demand columns must be the nation labels in table order");
    }
    if (fin.rows.size() != n) {
        throw ValidationError(fin.source + ": dimension mismatch, expected " + std::to_string(n) + " rows");
    }
    Matrix F(n, nations.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = fin.rows[i];
        if (row.size() != nations.size() + 1) {
            throw ValidationError(fin.source + ": dimension mismatch in row " + std::to_string(i + 1));
        }
        if (row[0] != labels[i]) {
            throw ValidationError(fin.source + ": row label '" + row[0] + "' does not match '" + labels[i] + "'");
        }
        for (std::size_t j = 0; j < nations.size(); ++j) {
            F(i, j) = csv::to_double(row[j + 1], fin.source, i + 1, j + 1);
        }
    }

    Vector V = read_row_vector(dir / "value_added.csv", labels);
    Vector X = read_row_vector(dir / "gross_output.csv", labels);
    return make_wiot(std::move(nations), std::move(sectors), std::move(T), std::move(F), std::move(V), std::move(X));
}

void save_wiot(const WiotTable& w, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::size_t n = w.size();
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(w.label(i));

    csv::write_atomic(dir / "intermediate.csv", [&](std::ostream& out) {
        std::vector<std::string> header{"label"};
        header.insert(header.end(), labels.begin(), labels.end());
        out << csv::join(header) << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> row{labels[i]};
            for (std::size_t j = 0; j < n; ++j) row.push_back(csv::format_exact(w.T(i, j)));
            out << csv::join(row) << '\n';
        }
    });
    csv::write_atomic(dir / "final.csv", [&](std::ostream& out) {
        std::vector<std::string> header{"label"};
        header.insert(header.end(), w.nations.begin(), w.nations.end());
        out << csv::join(header) << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> row{labels[i]};
            for (std::size_t j = 0; j < w.nations.size(); ++j) row.push_back(csv::format_exact(w.F(i, j)));
            out << csv::join(row) << '\n';
        }
    });
    auto write_vector = [&](const char* file, const char* row_label, const Vector& v) {
        csv::write_atomic(dir / file, [&](std::ostream& out) {
            std::vector<std::string> header{"label"};
            header.insert(header.end(), labels.begin(), labels.end());
            out << csv::join(header) << '\n';
            std::vector<std::string> row{row_label};
            for (std::size_t j = 0; j < n; ++j) row.push_back(csv::format_exact(v(j)));
            out << csv::join(row) << '\n';
        });
    };
    write_vector("value_added.csv", "VA", w.V);
    write_vector("gross_output.csv", "X", w.X);
}

BalanceReport validate_balance(const WiotTable& w, double tol) {
    BalanceReport r;
    const Vector row_res = (w.T.rowwise().sum() + w.F.rowwise().sum() - w.X).cwiseAbs();
    const Vector col_res = (w.T.colwise().sum().transpose() + w.V - w.X).cwiseAbs();
    Eigen::Index worst_row = 0;
    Eigen::Index worst_col = 0;
    r.max_row_residual = row_res.size() ? row_res.maxCoeff(&worst_row) : 0.0;
    r.max_col_residual = col_res.size() ? col_res.maxCoeff(&worst_col) : 0.0;
    r.worst_row = static_cast<std::size_t>(worst_row);
    r.worst_col = static_cast<std::size_t>(worst_col);
    const double scale = std::max(1.0, w.X.size() ? w.X.cwiseAbs().maxCoeff() : 0.0);
    r.threshold = tol * scale;
    r.pass = r.max_row_residual <= r.threshold && r.max_col_residual <= r.threshold;
    return r;
}

CoefficientMatrix coefficients(const WiotTable& w) {
    const auto n = static_cast<Eigen::Index>(w.size());
    Matrix A = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (w.X(j) > 0.0) A.col(j) = w.T.col(j) / w.X(j);
    }
    return {std::move(A)};
}

Vector value_added_coefficients(const WiotTable& w) {
    const auto n = static_cast<Eigen::Index>(w.size());
    Vector v = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (w.X(j) > 0.0) v(j) = w.V(j) / w.X(j);
    }
    return v;
}

LeontiefInverse leontief(const CoefficientMatrix& a) {
    const Matrix& A = a.A;
    if (A.rows() != A.cols()) {
        throw ValidationError("coefficient matrix must be square");
    }
    const auto n = A.rows();
    if (n == 0) return {Matrix(0, 0)};
    if (!A.allFinite()) {
        throw ValidationError("coefficient matrix has non-finite entries");
    }
    const Matrix I = Matrix::Identity(n, n);
    const Matrix M = I - A;
    Eigen::PartialPivLU<Matrix> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-13)) {
        throw NumericalError("non-productive economy: I - A is singular (rcond " + csv::format_exact(rcond) + ")");
    }
    Matrix B = lu.solve(I);
    const double scale = B.cwiseAbs().maxCoeff();
    if (!std::isfinite(scale)) {
        throw NumericalError("non-productive economy: Leontief inverse is not finite");
    }
    // A nonsingular Z-matrix I - A has a nonnegative inverse exactly when A is
    // productive, so a clearly negative entry means spectral radius >= 1.
    const double min_entry = B.minCoeff();
    if (min_entry < -1e-9 * std::max(1.0, scale)) {
        throw NumericalError("non-productive economy: Leontief inverse has negative entry " +
                             csv::format_exact(min_entry));
    }
    B = B.cwiseMax(0.0);
    const double residual = (M * B - I).cwiseAbs().maxCoeff();
    if (residual > 1e-9 * std::max(1.0, scale)) {
        throw NumericalError("Leontief solve residual too large: " + csv::format_exact(residual));
    }
    return {std::move(B)};
}

}  // namespace gsc::io
