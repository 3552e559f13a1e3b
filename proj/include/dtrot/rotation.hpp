#pragma once

// Empirical vertical rotation interval of the cylinder lift and the vertical
// rotation number of Lebesgue measure.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "map_model.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace dtrot {

/// n points on a uniform grid of cell centres in [0,1) x [0,1): nx = ceil(sqrt(n))
/// columns, filled row by row. Displacement is 1-periodic in y, so this
/// window represents all of the cylinder.
inline std::vector<CylinderPoint> grid_seeds(long long n) {
    if (n < 1) throw ConfigError("seed count must be >= 1");
    auto nx = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(n))));
    while (nx * nx < n) ++nx;
    const long long ny = (n + nx - 1) / nx;
    std::vector<CylinderPoint> seeds;
    seeds.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        seeds.push_back({(static_cast<double>(i % nx) + 0.5) / static_cast<double>(nx),
                         (static_cast<double>(i / nx) + 0.5) / static_cast<double>(ny)});
    return seeds;
}

/// {10^2, 10^3, ...} below n_iter, then n_iter itself.
inline std::vector<long long> rotation_checkpoints(long long n_iter) {
    std::vector<long long> cps;
    for (long long c = 100; c < n_iter; c *= 10) cps.push_back(c);
    cps.push_back(n_iter);
    return cps;
}

struct RotationOptions {
    unsigned threads = 1;
    int power = 1;    ///< estimate for f^^power + (0, shift)
    long shift = 0;
};

struct RotationEstimate {
    double lower = 0.0;  ///< empirical: min over seeds of the final Birkhoff average
    double upper = 0.0;
    long long n_iter = 0;
    long long n_seeds = 0;
    std::vector<CylinderPoint> seeds;
    std::vector<long long> checkpoints;
    /// averages[c][s]: (y_n - y_0)/n for seed s at checkpoint c
    std::vector<std::vector<double>> averages;
    /// [min, max] over seeds at each checkpoint
    std::vector<std::pair<double, double>> envelope;

    const std::vector<double>& final_averages() const { return averages.back(); }
};

inline RotationEstimate estimate_rotation_interval(const MapSpec& spec, long long n_seeds, long long n_iter,
                                                   const RotationOptions& opt = {}) {
    if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
    if (opt.power < 1) throw ConfigError("power must be >= 1");
    RotationEstimate est;
    est.n_iter = n_iter;
    est.n_seeds = n_seeds;
    est.seeds = grid_seeds(n_seeds);
    est.checkpoints = rotation_checkpoints(n_iter);
    const std::size_t ncp = est.checkpoints.size();
    est.averages.assign(ncp, std::vector<double>(est.seeds.size(), 0.0));

    const CylinderPowerMap g{&spec, opt.power, opt.shift};
    parallel_for(est.seeds.size(), opt.threads, [&](std::size_t s) {
        CylinderPoint p = est.seeds[s];
        std::size_t c = 0;
        for (long long n = 1; n <= n_iter; ++n) {
            p = g(p);
            if (!std::isfinite(p.y)) throw NumericalError("non-finite orbit coordinate for seed " + std::to_string(s), n);
            if (n == est.checkpoints[c]) {
                est.averages[c][s] = (p.y - est.seeds[s].y) / static_cast<double>(n);
                ++c;
            }
        }
    });

    for (const auto& row : est.averages) {
        auto [lo, hi] = std::minmax_element(row.begin(), row.end());
        est.envelope.emplace_back(*lo, *hi);
    }
    est.lower = est.envelope.back().first;
    est.upper = est.envelope.back().second;
    return est;
}

/// CSV `seed,x,y,average` of final averages.
inline void write_rotation_csv(std::ostream& out, const RotationEstimate& est) {
    out << "seed,x,y,average\n";
    const auto& fin = est.final_averages();
    for (std::size_t s = 0; s < est.seeds.size(); ++s)
        out << s << ',' << fmt_double(est.seeds[s].x) << ',' << fmt_double(est.seeds[s].y) << ','
            << fmt_double(fin[s]) << '\n';
}

// ---------------------------------------------------------------------------

enum class MeasureMethod { quadrature, monte_carlo };

struct MeasureRotation {
    double value = 0.0;
    /// monte_carlo: standard error; quadrature: discretisation bound
    double std_error = 0.0;
    MeasureMethod method = MeasureMethod::quadrature;
    long long samples = 0;
};

/// Vertical displacement function phi(x, y) = p2 o f^(x, y) - y; a function on the torus.
inline double vertical_displacement(const MapSpec& spec, double x, double y) noexcept {
    return spec.v_at(x + spec.k_dehn * y + spec.h_at(y));
}

/// Integral of phi against Lebesgue measure on the torus.
///
/// quadrature: n x n midpoint rule. For fixed y, phi is a trigonometric
/// polynomial in x with top frequency J_v, so the x-rule is exact when
/// n > J_v and the bound is the summation rounding bound; otherwise a
/// Lipschitz midpoint bound is reported.
/// monte_carlo: n uniform draws from the counter generator.
inline MeasureRotation lebesgue_rotation_number(const MapSpec& spec, MeasureMethod method, long long n,
                                                std::uint64_t rng_seed = 0) {
    if (n < 16) throw ConfigError("lebesgue_rotation_number: n must be >= 16");
    MeasureRotation out;
    out.method = method;
    const double sup_phi = std::abs(spec.v_const) + spec.v.amplitude_sum();
    if (method == MeasureMethod::quadrature) {
        const double d = 1.0 / static_cast<double>(n);
        double total = 0.0;
        for (long long j = 0; j < n; ++j) {
            const double y = (static_cast<double>(j) + 0.5) * d;
            double row = 0.0;
            for (long long i = 0; i < n; ++i) row += vertical_displacement(spec, (static_cast<double>(i) + 0.5) * d, y);
            total += row * d;
        }
        out.value = total * d;
        out.samples = n * n;
        const double rounding = 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * sup_phi;
        if (n > spec.v.max_frequency()) {
            out.std_error = rounding;
        } else {
            const double l = spec.v.lipschitz() * (1.0 + spec.k_dehn + spec.h.lipschitz());
            out.std_error = l * d + rounding;
        }
        return out;
    }
    const CounterRng rng = CounterRng(rng_seed).split(0x1eb);
    double sum = 0.0;
    double sumsq = 0.0;
    for (long long i = 0; i < n; ++i) {
        const auto k = static_cast<std::uint64_t>(i);
        const double phi = vertical_displacement(spec, rng.uniform(2 * k), rng.uniform(2 * k + 1));
        sum += phi;
        sumsq += phi * phi;
    }
    const double nn = static_cast<double>(n);
    out.value = sum / nn;
    const double var = std::max(0.0, (sumsq - nn * out.value * out.value) / (nn - 1.0));
    out.std_error = std::sqrt(var / nn);
    out.samples = n;
    return out;
}

}  // namespace dtrot
