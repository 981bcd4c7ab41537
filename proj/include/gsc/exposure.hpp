#pragma once

#include <string>
#include <vector>

#include "gsc/iotable.hpp"

namespace gsc::exposure {

enum class Kind { FIR, FMR };

std::string to_string(Kind kind);

/// Sectors counted on the user side (FIR) or seller side (FMR).
struct SectorFilter {
    std::vector<std::string> sectors;

    static SectorFilter all(const io::WiotTable& w);
    /// Comma-separated labels, or "all".
    static SectorFilter parse(const std::string& spec, const io::WiotTable& w);
};

/// N x N percent shares, row = base nation, column = partner. The diagonal of
/// `values` is NaN (suppressed on output); the computed domestic share is kept
/// in `domestic` so that row completeness can be checked.
struct ExposureMatrix {
    Kind kind = Kind::FIR;
    std::vector<std::string> nations;
    std::vector<std::string> scope;
    io::Matrix values;
    io::Vector domestic;
};

/// Omega = diag(v) * B: Omega[i, j] is value added by (nation, sector) i per
/// unit of gross output of j. Columns with positive output sum to 1.
io::Matrix va_origin(const io::WiotTable& w);

ExposureMatrix fir(const io::WiotTable& w, const SectorFilter& scope);
ExposureMatrix fmr(const io::WiotTable& w, const SectorFilter& scope);

/// Elementwise e1 - e0 in percentage points. Requires matching kind, labels
/// and scope.
ExposureMatrix delta_exposure(const ExposureMatrix& e0, const ExposureMatrix& e1);

/// CSV with the diagonal left empty.
void write_csv(const ExposureMatrix& e, const std::string& path, int digits = 1);

}  // namespace gsc::exposure
