#pragma once

// The explicit constant ledger of the rotation-set arguments for maps in the
// Dehn-twist class. Everything is driven by three numbers:
//   A_f >= sup |p2 o f~(z) - y|            (vertical displacement defect)
//   B_f >= sup |p1 o f~(z) - x - k y|      (horizontal defect against the twist)
//   k   =  the Dehn-twist coefficient.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "map_model.hpp"

namespace dtrot {

enum class ConstantsMode { closed_form, grid };

struct ConstantsReport {
    ConstantsMode mode = ConstantsMode::closed_form;
    double k = 1.0;
    double A_f = 0.0;
    double B_f = 0.0;
    double V_f = 0.0;      ///< (3 + 2 B_f)/k: height forcing a compact set of width < 1 to meet its image
    double M_f = 0.0;      ///< V_f + A_f: oscillation bound of the omega-limit height profiles
    double M_Dehn = 0.0;   ///< (2 + B_f)/k: above it points move right by more than 2
    double M_prime = 0.0;  ///< M_f + M_Dehn + 2
    double m_D = 0.0;      ///< (10 + B_f)/k
    double M0 = 0.0;       ///< (20 + 2 B_f)/k + 10
    double M1 = 0.0;       ///< 2 M' + 8
    double M_thm3 = 0.0;   ///< max(M0, M1): entropy witness threshold
    double bound_displacement = 0.0;  ///< 2 M' + 8
    double bound_band = 0.0;          ///< 4 M' + 20
    std::vector<std::pair<std::string, std::string>> provenance;  ///< name -> defining formula
    std::vector<std::string> notes;
};

/// Fills every derived constant from (A_f, B_f, k).
inline ConstantsReport derive_constants(double A_f, double B_f, double k,
                                        ConstantsMode mode = ConstantsMode::closed_form) {
    if (!(k > 0)) throw ConfigError("Dehn-twist coefficient must be positive");
    ConstantsReport r;
    r.mode = mode;
    r.k = k;
    r.A_f = A_f;
    r.B_f = B_f;
    r.V_f = (3.0 + 2.0 * B_f) / k;
    r.M_f = r.V_f + A_f;
    r.M_Dehn = (2.0 + B_f) / k;
    r.M_prime = r.M_f + r.M_Dehn + 2.0;
    r.m_D = (10.0 + B_f) / k;
    r.M0 = (20.0 + 2.0 * B_f) / k + 10.0;
    r.M1 = 2.0 * r.M_prime + 8.0;
    r.M_thm3 = std::max(r.M0, r.M1);
    r.bound_displacement = 2.0 * r.M_prime + 8.0;
    r.bound_band = 4.0 * r.M_prime + 20.0;
    r.provenance = {
        {"A_f", "sup |p2 o f~ - y| = |v.const| + sup |v - v.const|"},
        {"B_f", "sup |p1 o f~ - x - k y| = sup |h|"},
        {"V_f", "(3 + 2 B_f) / k"},
        {"M_f", "V_f + A_f"},
        {"M_Dehn", "(2 + B_f) / k"},
        {"M_prime", "M_f + M_Dehn + 2 = (5 + 3 B_f) / k + A_f + 2"},
        {"m_D", "(10 + B_f) / k"},
        {"M0", "(20 + 2 B_f) / k + 10"},
        {"M1", "2 M_prime + 8 = (10 + 6 B_f) / k + 2 A_f + 12"},
        {"M_thm3", "max(M0, M1) <= (20 + 6 B_f) / k + 2 A_f + 12"},
        {"bound_displacement", "2 M_prime + 8"},
        {"bound_band", "4 M_prime + 20"},
    };
    if (A_f == 0.0 || B_f == 0.0)
        r.notes.emplace_back("zero A_f or B_f accepted; every derived formula stays valid");
    return r;
}

/// Certified upper bound of sup|p|: min of the amplitude sum and a dense
/// sample (4096 points per period of the top harmonic) padded by L * dt / 2.
inline double sup_abs_bound(const TrigPolynomial& p) {
    if (p.empty()) return 0.0;
    const double amp = p.amplitude_sum();
    if (p.terms().size() == 1) return amp;
    const long n = 4096L * p.max_frequency();
    double best = 0.0;
    for (long i = 0; i < n; ++i) best = std::max(best, std::abs(p(static_cast<double>(i) / n)));
    const double padded = best + p.lipschitz() * (0.5 / n);
    return std::min(amp, padded);
}

/// A_f and B_f from the fundamental-domain grid with full-cell Lipschitz padding.
inline std::pair<double, double> grid_defects(const MapSpec& spec, int resolution) {
    if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
    const double dt = 1.0 / resolution;
    const double lv = spec.v.lipschitz();
    const double lh = spec.h.lipschitz();
    double vmax = 0.0;
    double hmax = 0.0;
    for (int j = 0; j < resolution; ++j) {
        const double y = j * dt;
        const double hy = spec.h(y);
        hmax = std::max(hmax, std::abs(hy));
        for (int i = 0; i < resolution; ++i) {
            const double x1 = i * dt + spec.k_dehn * y + hy;
            vmax = std::max(vmax, std::abs(spec.v(x1)));
        }
    }
    const double a = std::abs(spec.v_const) + (spec.v.empty() ? 0.0 : vmax + lv * dt * (1.0 + spec.k_dehn + lh));
    const double b = spec.h.empty() ? 0.0 : hmax + lh * dt;
    return {a, b};
}

inline ConstantsReport compute_constants(const MapSpec& spec, ConstantsMode mode = ConstantsMode::closed_form,
                                         int grid_resolution = 512) {
    double a = 0.0;
    double b = 0.0;
    if (mode == ConstantsMode::closed_form) {
        a = std::abs(spec.v_const) + sup_abs_bound(spec.v);
        b = sup_abs_bound(spec.h);
    } else {
        std::tie(a, b) = grid_defects(spec, grid_resolution);
    }
    return derive_constants(a, b, spec.k_dehn, mode);
}

/// Constants of g^ = f^^q - (0, p), itself a lift of a map with twist q k:
///   A_g = q sup|v - c| + |q c - p|,   B_g = q B_f + k A_f q (q - 1) / 2.
inline ConstantsReport power_map_constants(const MapSpec& spec, int q, long p) {
    if (q < 1) throw ConfigError("power q must be >= 1");
    const double osc = sup_abs_bound(spec.v);
    const double a_f = std::abs(spec.v_const) + osc;
    const double b_f = sup_abs_bound(spec.h);
    const double a = q * osc + std::abs(q * spec.v_const - static_cast<double>(p));
    const double b = q * b_f + spec.k_dehn * a_f * q * (q - 1) / 2.0;
    auto r = derive_constants(a, b, static_cast<double>(q) * spec.k_dehn);
    r.notes.push_back("constants of f^" + std::to_string(q) + " - (0," + std::to_string(p) + ")");
    return r;
}

/// Two-column table `name value`, provenance as `#` comments.
inline void write_constants_table(std::ostream& out, const ConstantsReport& r) {
    out << "# mode " << (r.mode == ConstantsMode::closed_form ? "closed_form" : "grid") << '\n';
    out << "# map family: shear composition V o H o T_k\n";
    for (const auto& note : r.notes) out << "# note: " << note << '\n';
    for (const auto& [name, formula] : r.provenance) out << "# " << name << " := " << formula << '\n';
    const std::pair<const char*, double> rows[] = {
        {"k_dehn", r.k},   {"A_f", r.A_f},         {"B_f", r.B_f},     {"V_f", r.V_f},
        {"M_f", r.M_f},    {"M_Dehn", r.M_Dehn},   {"M_prime", r.M_prime},
        {"m_D", r.m_D},    {"M0", r.M0},           {"M1", r.M1},
        {"bound_displacement", r.bound_displacement}, {"bound_band", r.bound_band},
        {"M_thm3", r.M_thm3},
    };
    for (const auto& [name, value] : rows) out << name << ' ' << fmt_double(value) << '\n';
}

}  // namespace dtrot
