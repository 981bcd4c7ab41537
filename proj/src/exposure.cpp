#include "gsc/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "gsc/csv.hpp"
#include "gsc/errors.hpp"

namespace gsc::exposure {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> scope_indices(const io::WiotTable& w, const SectorFilter& scope) {
    if (scope.sectors.empty()) {
        throw ValidationError("sector scope is empty");
    }
    std::vector<std::size_t> idx;
    for (const auto& s : scope.sectors) idx.push_back(w.sector_index(s));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

ExposureMatrix blank(Kind kind, const io::WiotTable& w, const SectorFilter& scope) {
    const auto n = static_cast<Eigen::Index>(w.nation_count());
    ExposureMatrix e;
    e.kind = kind;
    e.nations = w.nations;
    e.scope = scope.sectors;
    e.values = io::Matrix::Zero(n, n);
    e.domestic = io::Vector::Zero(n);
    return e;
}

void split_diagonal(ExposureMatrix& e) {
    for (Eigen::Index r = 0; r < e.values.rows(); ++r) {
        e.domestic(r) = e.values(r, r);
        e.values(r, r) = kNaN;
    }
}

}  // namespace

std::string to_string(Kind kind) { return kind == Kind::FIR ? "FIR" : "FMR"; }

SectorFilter SectorFilter::all(const io::WiotTable& w) { return SectorFilter{w.sectors}; }

SectorFilter SectorFilter::parse(const std::string& spec, const io::WiotTable& w) {
    if (spec.empty() || spec == "all") return all(w);
    SectorFilter f;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        w.sector_index(item);
        f.sectors.push_back(item);
    }
    if (f.sectors.empty()) {
        throw ValidationError("sector scope '" + spec + "' selects nothing");
    }
    return f;
}

io::Matrix va_origin(const io::WiotTable& w) {
    const auto B = io::leontief(io::coefficients(w)).B;
    const io::Vector v = io::value_added_coefficients(w);
    return v.asDiagonal() * B;
}

ExposureMatrix fir(const io::WiotTable& w, const SectorFilter& scope) {
    const auto idx = scope_indices(w, scope);
    const io::Matrix omega = va_origin(w);
    const std::size_t N = w.nation_count();
    const std::size_t K = w.sector_count();
    ExposureMatrix e = blank(Kind::FIR, w, scope);
    for (std::size_t r = 0; r < N; ++r) {
        double denom = 0.0;
        for (auto t : idx) denom += w.X(w.index(r, t));
        if (!(denom > 0.0)) {
            throw ValidationError("FIR: nation " + w.nations[r] + " has zero in-scope gross output");
        }
        for (std::size_t c = 0; c < N; ++c) {
            double num = 0.0;
            for (std::size_t s = 0; s < K; ++s) {
                for (auto t : idx) {
                    const auto user = w.index(r, t);
                    num += omega(w.index(c, s), user) * w.X(user);
                }
            }
            e.values(r, c) = 100.0 * num / denom;
        }
    }
    split_diagonal(e);
    return e;
}

ExposureMatrix fmr(const io::WiotTable& w, const SectorFilter& scope) {
    const auto idx = scope_indices(w, scope);
    const io::Matrix omega = va_origin(w);
    const std::size_t N = w.nation_count();
    const std::size_t K = w.sector_count();
    ExposureMatrix e = blank(Kind::FMR, w, scope);
    for (std::size_t r = 0; r < N; ++r) {
        double denom = 0.0;
        for (std::size_t s = 0; s < K; ++s) denom += w.V(w.index(r, s));
        if (!(denom > 0.0)) {
            throw ValidationError("FMR: nation " + w.nations[r] + " has zero value added");
        }
        for (std::size_t c = 0; c < N; ++c) {
            double num = 0.0;
            for (std::size_t s = 0; s < K; ++s) {
                for (auto t : idx) {
                    const auto user = w.index(c, t);
                    num += omega(w.index(r, s), user) * w.X(user);
                }
            }
            e.values(r, c) = 100.0 * num / denom;
        }
    }
    split_diagonal(e);
    return e;
}

ExposureMatrix delta_exposure(const ExposureMatrix& e0, const ExposureMatrix& e1) {
    if (e0.kind != e1.kind) {
        throw ValidationError("delta: kind mismatch (" + to_string(e0.kind) + " vs " + to_string(e1.kind) + ")");
    }
    if (e0.nations != e1.nations) {
        throw ValidationError("delta: nation labels differ");
    }
    if (e0.scope != e1.scope) {
        throw ValidationError("delta: sector scopes differ");
    }
    ExposureMatrix d = e0;
    d.values = e1.values - e0.values;
    d.domestic = e1.domestic - e0.domestic;
    return d;
}

void write_csv(const ExposureMatrix& e, const std::string& path, int digits) {
    csv::write_atomic(path, [&](std::ostream& out) {
        std::vector<std::string> header{to_string(e.kind)};
        header.insert(header.end(), e.nations.begin(), e.nations.end());
        out << csv::join(header) << '\n';
        for (std::size_t r = 0; r < e.nations.size(); ++r) {
            std::vector<std::string> row{e.nations[r]};
            for (std::size_t c = 0; c < e.nations.size(); ++c) {
                const double x = e.values(r, c);
                row.push_back(r == c || std::isnan(x) ? std::string() : csv::format_fixed(x, digits));
            }
            out << csv::join(row) << '\n';
        }
    });
}

}  // namespace gsc::exposure
