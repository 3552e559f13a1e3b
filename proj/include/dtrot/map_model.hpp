#pragma once

// Torus maps homotopic to a Dehn twist, restricted to the shear family
//
//     f~ = V o H o T_k,   T_k(x,y) = (x + k y, y),
//                         H(x,y)   = (x + h(y), y),
//                         V(x,y)   = (x, y + v(x)),
//
// with h, v 1-periodic trigonometric polynomials (v may carry a constant
// term). Each factor is a unit-Jacobian shear, so f~ is an area-preserving
// homeomorphism of the plane with an explicit inverse, and
//     f~(x+1, y) = f~(x, y) + (1, 0),   f~(x, y+1) = f~(x, y) + (k, 1).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "format.hpp"

namespace dtrot {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Fractional part in [0, 1), via floor.
inline double frac(double t) noexcept {
    double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
}

struct Harmonic {
    int frequency = 1;
    double sin_amp = 0.0;
    double cos_amp = 0.0;
};

/// Zero-mean 1-periodic trigonometric polynomial
///     p(t) = sum_j a_j sin(2 pi j t) + b_j cos(2 pi j t).
class TrigPolynomial {
public:
    TrigPolynomial() = default;
    explicit TrigPolynomial(std::vector<Harmonic> terms) : terms_(std::move(terms)) { normalize(); }

    double operator()(double t) const noexcept {
        if (terms_.empty()) return 0.0;
        const double s = two_pi * frac(t);
        double acc = 0.0;
        for (const auto& h : terms_) {
            const double a = s * h.frequency;
            if (h.sin_amp != 0.0) acc += h.sin_amp * std::sin(a);
            if (h.cos_amp != 0.0) acc += h.cos_amp * std::cos(a);
        }
        return acc;
    }

    double derivative(double t) const noexcept {
        const double s = two_pi * frac(t);
        double acc = 0.0;
        for (const auto& h : terms_) {
            const double w = two_pi * h.frequency;
            acc += w * (h.sin_amp * std::cos(s * h.frequency) - h.cos_amp * std::sin(s * h.frequency));
        }
        return acc;
    }

    /// L = sum 2 pi j (|a_j| + |b_j|), a Lipschitz constant.
    double lipschitz() const noexcept {
        double l = 0.0;
        for (const auto& h : terms_) l += two_pi * h.frequency * (std::abs(h.sin_amp) + std::abs(h.cos_amp));
        return l;
    }

    /// sum_j sqrt(a_j^2 + b_j^2); exact sup|p| for a single harmonic.
    double amplitude_sum() const noexcept {
        double s = 0.0;
        for (const auto& h : terms_) s += std::hypot(h.sin_amp, h.cos_amp);
        return s;
    }

    int max_frequency() const noexcept {
        int m = 0;
        for (const auto& h : terms_) m = std::max(m, h.frequency);
        return m;
    }

    bool empty() const noexcept { return terms_.empty(); }
    const std::vector<Harmonic>& terms() const noexcept { return terms_; }

    void set(int frequency, bool is_sin, double amp) {
        for (auto& h : terms_) {
            if (h.frequency == frequency) {
                (is_sin ? h.sin_amp : h.cos_amp) = amp;
                normalize();
                return;
            }
        }
        Harmonic h{frequency, 0.0, 0.0};
        (is_sin ? h.sin_amp : h.cos_amp) = amp;
        terms_.push_back(h);
        normalize();
    }

private:
    void normalize() {
        std::erase_if(terms_, [](const Harmonic& h) { return h.sin_amp == 0.0 && h.cos_amp == 0.0; });
        std::sort(terms_.begin(), terms_.end(),
                  [](const Harmonic& a, const Harmonic& b) { return a.frequency < b.frequency; });
    }

    std::vector<Harmonic> terms_;
};

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
};

/// Point of S^1 x R; x in [0, 1), y unreduced.
struct CylinderPoint {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const CylinderPoint&, const CylinderPoint&) = default;
};

/// Point of the torus; both coordinates in [0, 1).
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Covering projection R^2 -> S^1 x R.
inline CylinderPoint to_cylinder(PlanePoint p) noexcept { return {frac(p.x), p.y}; }
/// Covering projection R^2 -> T^2.
inline TorusPoint to_torus(PlanePoint p) noexcept { return {frac(p.x), frac(p.y)}; }
inline TorusPoint to_torus(CylinderPoint p) noexcept { return {p.x, frac(p.y)}; }
/// The lift of a cylinder point lying in the fundamental strip [sheet, sheet+1) x R.
inline PlanePoint to_plane(CylinderPoint p, long sheet = 0) noexcept { return {p.x + static_cast<double>(sheet), p.y}; }

struct MapSpec {
    int k_dehn = 1;
    TrigPolynomial h;     ///< horizontal shear h(y)
    TrigPolynomial v;     ///< zero-mean part of the vertical shear
    double v_const = 0.0; ///< mean vertical drift

    double h_at(double y) const noexcept { return h(y); }
    double v_at(double x) const noexcept { return v_const + v(x); }
};

enum class Direction { forward, inverse };

/// One application of the plane lift f~ (or its inverse).
inline PlanePoint eval_lift(const MapSpec& spec, PlanePoint p, Direction dir = Direction::forward) noexcept {
    if (dir == Direction::forward) {
        const double x1 = p.x + spec.k_dehn * p.y + spec.h_at(p.y);
        return {x1, p.y + spec.v_at(x1)};
    }
    // T_k^-1 o H^-1 o V^-1
    const double y0 = p.y - spec.v_at(p.x);
    return {p.x - spec.k_dehn * y0 - spec.h_at(y0), y0};
}

/// One application of the cylinder lift f^. The horizontal update uses
/// k * frac(y), which is congruent to k * y mod 1 for integer k and keeps the
/// reduction exact-to-rounding for large |y|.
inline CylinderPoint step_cylinder(const MapSpec& spec, CylinderPoint p) noexcept {
    const double x1 = frac(p.x + spec.k_dehn * frac(p.y) + spec.h_at(p.y));
    return {x1, p.y + spec.v_at(x1)};
}

inline CylinderPoint step_cylinder_inverse(const MapSpec& spec, CylinderPoint p) noexcept {
    const double y0 = p.y - spec.v_at(p.x);
    return {frac(p.x - spec.k_dehn * frac(y0) - spec.h_at(y0)), y0};
}

/// g^ = f^^power + (0, shift) on the cylinder.
struct CylinderPowerMap {
    const MapSpec* spec;
    int power = 1;
    long shift = 0;

    CylinderPoint operator()(CylinderPoint p) const noexcept {
        for (int i = 0; i < power; ++i) p = step_cylinder(*spec, p);
        p.y += static_cast<double>(shift);
        return p;
    }
};

/// g~ = f~^iterates - (0, drop) on the plane, with its exact inverse.
struct PlanePowerMap {
    const MapSpec* spec;
    int iterates = 1;
    long drop = 0;

    PlanePoint operator()(PlanePoint p) const noexcept {
        for (int i = 0; i < iterates; ++i) p = eval_lift(*spec, p);
        p.y -= static_cast<double>(drop);
        return p;
    }

    PlanePoint inverse(PlanePoint p) const noexcept {
        p.y += static_cast<double>(drop);
        for (int i = 0; i < iterates; ++i) p = eval_lift(*spec, p, Direction::inverse);
        return p;
    }
};

// ---------------------------------------------------------------------------
// Map-spec documents: UTF-8 lines `key = value`, `#` comments.
//   k_dehn      positive integer (required)
//   h.sin.J, h.cos.J, v.sin.J, v.cos.J   amplitudes, J >= 1
//   v.const     mean vertical drift

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view text, int line) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw SpecError("malformed number '" + std::string(text) + "'", line);
    if (!std::isfinite(value)) throw SpecError("non-finite value", line);
    return value;
}

}  // namespace detail

inline MapSpec parse_map_spec(std::string_view text) {
    MapSpec spec;
    bool have_k = false;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) {
            if (nl == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw SpecError("expected key = value", line_no);
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = line.substr(eq + 1);
        if (auto [it, fresh] = seen.emplace(key, line_no); !fresh)
            throw SpecError("duplicate key '" + key + "' (first on line " + std::to_string(it->second) + ")",
                            line_no);

        if (key == "k_dehn") {
            const double k = detail::parse_real(value, line_no);
            if (k != std::floor(k)) throw SpecError("k_dehn must be an integer", line_no);
            if (k <= 0) throw SpecError("k_dehn must be a positive integer", line_no);
            if (k > 1e6) throw SpecError("k_dehn out of range", line_no);
            spec.k_dehn = static_cast<int>(k);
            have_k = true;
        } else if (key == "v.const") {
            spec.v_const = detail::parse_real(value, line_no);
        } else if (key.size() > 6 && (key[0] == 'h' || key[0] == 'v') && key[1] == '.' &&
                   (key.compare(2, 4, "sin.") == 0 || key.compare(2, 4, "cos.") == 0)) {
            const std::string_view jtext = std::string_view(key).substr(6);
            int j = 0;
            auto [ptr, ec] = std::from_chars(jtext.data(), jtext.data() + jtext.size(), j);
            if (ec != std::errc{} || ptr != jtext.data() + jtext.size() || j < 1 || j > 4096)
                throw SpecError("bad harmonic index in key '" + key + "'", line_no);
            const double amp = detail::parse_real(value, line_no);
            auto& poly = key[0] == 'h' ? spec.h : spec.v;
            poly.set(j, key[2] == 's', amp);
        } else {
            throw SpecError("unknown key '" + key + "'", line_no);
        }
        if (nl == text.size()) break;
    }
    if (!have_k) throw SpecError("missing required key k_dehn");
    return spec;
}

/// Canonical document for a spec; parse_map_spec(to_map_text(s)) reproduces s.
inline std::string to_map_text(const MapSpec& spec) {
    std::ostringstream out;
    out << "k_dehn = " << spec.k_dehn << '\n';
    auto emit = [&](char name, const TrigPolynomial& p) {
        for (const auto& t : p.terms()) {
            if (t.sin_amp != 0.0) out << name << ".sin." << t.frequency << " = " << fmt_double(t.sin_amp) << '\n';
            if (t.cos_amp != 0.0) out << name << ".cos." << t.frequency << " = " << fmt_double(t.cos_amp) << '\n';
        }
    };
    emit('h', spec.h);
    emit('v', spec.v);
    if (spec.v_const != 0.0) out << "v.const = " << fmt_double(spec.v_const) << '\n';
    return out.str();
}

/// FNV-1a of the canonical document, printed in certificates.
inline std::string spec_digest(const MapSpec& spec) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : to_map_text(spec)) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    static constexpr char hex[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i, hash >>= 4) buf[i] = hex[hash & 0xf];
    buf[16] = '\0';
    return buf;
}

// ---------------------------------------------------------------------------
// Orbits

struct OrbitSample {
    long long step = 0;
    double x = 0.0;
    double y = 0.0;
    double displacement = 0.0;  ///< y_step - y_0
};

struct Orbit {
    CylinderPoint seed;
    long long n_steps = 0;
    std::vector<OrbitSample> samples;
};

inline Orbit iterate_orbit(const MapSpec& spec, CylinderPoint seed, long long n, long long record_every = 1) {
    if (n < 0) throw ConfigError("iterate_orbit: n must be >= 0");
    if (record_every < 1) throw ConfigError("iterate_orbit: record_every must be >= 1");
    seed.x = frac(seed.x);
    Orbit orbit{seed, n, {}};
    orbit.samples.reserve(static_cast<std::size_t>(n / record_every + 1));
    orbit.samples.push_back({0, seed.x, seed.y, 0.0});
    CylinderPoint p = seed;
    for (long long step = 1; step <= n; ++step) {
        p = step_cylinder(spec, p);
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw NumericalError("non-finite orbit coordinate", step);
        if (step % record_every == 0) orbit.samples.push_back({step, p.x, p.y, p.y - seed.y});
    }
    return orbit;
}

/// CSV `step,x,y,displacement`.
inline void write_orbit_csv(std::ostream& out, const Orbit& orbit) {
    out << "step,x,y,displacement\n";
    for (const auto& s : orbit.samples)
        out << s.step << ',' << fmt_double(s.x) << ',' << fmt_double(s.y) << ',' << fmt_double(s.displacement)
            << '\n';
}

}  // namespace dtrot
