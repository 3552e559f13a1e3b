#pragma once

// Finite-horizon approximations of the sets of points whose orbits stay in a
// closed half-cylinder, and of the height profiles of their omega-limits.
//
// Sampling is at cell centres with no outer enclosure: masks are diagnostics
// and nothing in certify depends on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "map_model.hpp"
#include "parallel.hpp"

namespace dtrot {

enum class HalfSign { lower, upper };

struct Window {
    double y_min = -1.0;
    double y_max = 0.0;
};

struct BasinMask {
    Window window;
    int nx = 0;
    int ny = 0;
    long long horizon = 0;
    HalfSign sign = HalfSign::lower;
    bool two_sided = false;
    /// translation offset applied to the window (omega-limit translates)
    long shift = 0;
    /// set when components not touching the far window edge were dropped
    bool heuristic_unbounded = false;
    /// row-major, row 0 = lowest y
    std::vector<std::uint8_t> cells;
    /// number of consecutive confined iterates (-1: the centre itself is outside)
    std::vector<long long> survival;

    double cell_height() const noexcept { return (window.y_max - window.y_min) / ny; }
    double x_center(int i) const noexcept { return (i + 0.5) / nx; }
    double y_center(int j) const noexcept { return window.y_min + (j + 0.5) * cell_height(); }
    bool at(int i, int j) const noexcept { return cells[static_cast<std::size_t>(j) * nx + i] != 0; }
    std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }
    bool empty() const noexcept { return count() == 0; }

    /// Cell containing a cylinder point, or -1 if outside the window.
    long long cell_of(CylinderPoint p) const noexcept {
        if (p.y < window.y_min || p.y >= window.y_max) return -1;
        const int i = std::min(nx - 1, static_cast<int>(frac(p.x) * nx));
        const int j = std::min(ny - 1, static_cast<int>((p.y - window.y_min) / cell_height()));
        return static_cast<long long>(j) * nx + i;
    }
};

inline bool in_half(HalfSign sign, double y) noexcept { return sign == HalfSign::lower ? y <= 0.0 : y >= 0.0; }

/// Marks cells whose centre stays in H- (resp. H+) for iterates 0..horizon,
/// and, when two_sided, also for the backward iterates 0..horizon.
inline BasinMask compute_basin_mask(const MapSpec& spec, HalfSign sign, long long horizon, Window window, int nx,
                                    int ny, bool two_sided = false, unsigned threads = 1) {
    if (horizon < 0) throw ConfigError("horizon must be >= 0");
    if (nx < 1 || ny < 1) throw ConfigError("resolution must be >= 1");
    if (!(window.y_max > window.y_min)) throw ConfigError("empty window");
    if (window.y_max < 0.0 || window.y_min > 0.0)
        throw ConfigError("window must contain the y = 0 circle");

    BasinMask mask;
    mask.window = window;
    mask.nx = nx;
    mask.ny = ny;
    mask.horizon = horizon;
    mask.sign = sign;
    mask.two_sided = two_sided;
    mask.cells.assign(static_cast<std::size_t>(nx) * ny, 0);
    mask.survival.assign(mask.cells.size(), -1);

    parallel_for(static_cast<std::size_t>(ny), threads, [&](std::size_t row) {
        const int j = static_cast<int>(row);
        for (int i = 0; i < nx; ++i) {
            const CylinderPoint z{mask.x_center(i), mask.y_center(j)};
            long long survived = -1;
            if (in_half(sign, z.y)) {
                survived = 0;
                CylinderPoint p = z;
                while (survived < horizon) {
                    p = step_cylinder(spec, p);
                    if (!in_half(sign, p.y)) break;
                    ++survived;
                }
                if (two_sided) {
                    long long back = 0;
                    p = z;
                    while (back < survived) {
                        p = step_cylinder_inverse(spec, p);
                        if (!in_half(sign, p.y)) break;
                        ++back;
                    }
                    survived = std::min(survived, back);
                }
            }
            const auto idx = static_cast<std::size_t>(j) * nx + i;
            mask.survival[idx] = survived;
            mask.cells[idx] = survived >= horizon ? 1 : 0;
        }
    });
    return mask;
}

/// Keeps connected components (4-neighbour, periodic in x) that touch the
/// window bottom (lower) or top (upper). Stands in for selecting unbounded
/// components, which a finite window cannot decide.
inline BasinMask select_unbounded_components(const BasinMask& mask) {
    BasinMask out = mask;
    std::fill(out.cells.begin(), out.cells.end(), 0);
    out.heuristic_unbounded = true;
    const int edge_row = mask.sign == HalfSign::lower ? 0 : mask.ny - 1;
    std::vector<std::size_t> stack;
    for (int i = 0; i < mask.nx; ++i) {
        const auto idx = static_cast<std::size_t>(edge_row) * mask.nx + i;
        if (mask.cells[idx] && !out.cells[idx]) {
            out.cells[idx] = 1;
            stack.push_back(idx);
        }
    }
    while (!stack.empty()) {
        const auto idx = stack.back();
        stack.pop_back();
        const int i = static_cast<int>(idx % mask.nx);
        const int j = static_cast<int>(idx / mask.nx);
        const int nbr[4][2] = {{(i + 1) % mask.nx, j}, {(i + mask.nx - 1) % mask.nx, j}, {i, j + 1}, {i, j - 1}};
        for (const auto& [ni, nj] : nbr) {
            if (nj < 0 || nj >= mask.ny) continue;
            const auto n = static_cast<std::size_t>(nj) * mask.nx + ni;
            if (mask.cells[n] && !out.cells[n]) {
                out.cells[n] = 1;
                stack.push_back(n);
            }
        }
    }
    return out;
}

/// The mask translated by (0, n).
inline BasinMask shifted(const BasinMask& mask, long n) {
    BasinMask out = mask;
    out.window.y_min += static_cast<double>(n);
    out.window.y_max += static_cast<double>(n);
    out.shift += n;
    return out;
}

/// P5 greyscale, 255 = in the set, top row = highest y.
inline void write_mask_pgm(std::ostream& out, const BasinMask& mask) {
    out << "P5\n" << mask.nx << ' ' << mask.ny << "\n255\n";
    for (int j = mask.ny - 1; j >= 0; --j)
        for (int i = 0; i < mask.nx; ++i) out.put(mask.at(i, j) ? static_cast<char>(255) : static_cast<char>(0));
}

// ---------------------------------------------------------------------------

struct HeightProfile {
    HalfSign sign = HalfSign::lower;
    std::vector<double> x;
    /// top of the set per column (lower) or bottom (upper); NaN where the column is empty
    std::vector<double> values;
    double oscillation = 0.0;
    bool defined_everywhere = false;

    double extreme() const {
        double best = sign == HalfSign::lower ? -std::numeric_limits<double>::infinity()
                                              : std::numeric_limits<double>::infinity();
        for (double v : values)
            if (!std::isnan(v)) best = sign == HalfSign::lower ? std::max(best, v) : std::min(best, v);
        return best;
    }
};

inline HeightProfile compute_height_profile(const BasinMask& mask) {
    if (mask.empty()) throw EmptyMaskError("height profile of an empty mask");
    HeightProfile prof;
    prof.sign = mask.sign;
    prof.defined_everywhere = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < mask.nx; ++i) {
        double v = std::numeric_limits<double>::quiet_NaN();
        if (mask.sign == HalfSign::lower) {
            for (int j = mask.ny - 1; j >= 0; --j)
                if (mask.at(i, j)) { v = mask.y_center(j); break; }
        } else {
            for (int j = 0; j < mask.ny; ++j)
                if (mask.at(i, j)) { v = mask.y_center(j); break; }
        }
        prof.x.push_back(mask.x_center(i));
        prof.values.push_back(v);
        if (std::isnan(v)) {
            prof.defined_everywhere = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    prof.oscillation = hi - lo;
    return prof;
}

/// Smallest integer translate lifting the whole lower profile above M_Dehn:
/// floor(-max mu + M_f + M_Dehn) + 1. For upper profiles the mirrored offset
/// (a negative integer) is returned.
inline long translation_offset(const HeightProfile& prof, const ConstantsReport& c) {
    const double ext = prof.extreme();
    if (prof.sign == HalfSign::lower) return static_cast<long>(std::floor(-ext + c.M_f + c.M_Dehn)) + 1;
    return -(static_cast<long>(std::floor(ext + c.M_f + c.M_Dehn)) + 1);
}

/// CSV `column,x,value`.
inline void write_profile_csv(std::ostream& out, const HeightProfile& prof) {
    out << "column,x,value\n";
    for (std::size_t i = 0; i < prof.values.size(); ++i)
        out << i << ',' << fmt_double(prof.x[i]) << ','
            << (std::isnan(prof.values[i]) ? std::string("nan") : fmt_double(prof.values[i])) << '\n';
}

}  // namespace dtrot
