#pragma once

// Certification pipelines. Every search reports one of three outcomes; an
// inconclusive result says only that no witness turned up within budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "map_model.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "rotation.hpp"

namespace dtrot {

enum class CertificateKind {
    entropy_interior_zero,
    entropy_inconclusive,
    bounded_consistent,
    bounded_violated,
    exactness,
    boyland_verdict,
};

enum class Outcome { certified, inconclusive, violated };

enum class BoylandBranch { interior_zero, bounded, inconclusive };

inline const char* to_string(CertificateKind k) {
    switch (k) {
        case CertificateKind::entropy_interior_zero: return "entropy_interior_zero";
        case CertificateKind::entropy_inconclusive: return "entropy_inconclusive";
        case CertificateKind::bounded_consistent: return "bounded_consistent";
        case CertificateKind::bounded_violated: return "bounded_violated";
        case CertificateKind::exactness: return "exactness";
        case CertificateKind::boyland_verdict: return "boyland_verdict";
    }
    return "?";
}

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::certified: return "certified";
        case Outcome::inconclusive: return "inconclusive";
        case Outcome::violated: return "violated";
    }
    return "?";
}

/// Process exit code: 0 certified/consistent, 2 inconclusive, 3 violated.
inline int exit_code(Outcome o) {
    switch (o) {
        case Outcome::certified: return 0;
        case Outcome::inconclusive: return 2;
        case Outcome::violated: return 3;
    }
    return 2;
}

/// Replayable orbit witness of g^ = f^^power + (0, shift): iterate `seed` n times.
struct Witness {
    std::string role;
    long long seed_index = 0;
    CylinderPoint seed;
    long long n = 0;
    int power = 1;
    long shift = 0;
    double displacement = 0.0;
};

struct Certificate {
    CertificateKind kind = CertificateKind::entropy_inconclusive;
    Outcome outcome = Outcome::inconclusive;
    std::string map_digest;
    std::string map_text;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::pair<std::string, std::string>> evidence;
    std::vector<Witness> witnesses;
    double threshold = 0.0;
    std::optional<BoylandBranch> branch;
    std::string verdict;

    std::string find(const std::string& key) const {
        for (const auto& [k, v] : inputs)
            if (k == key) return v;
        for (const auto& [k, v] : evidence)
            if (k == key) return v;
        return {};
    }
};

inline double replay_witness(const MapSpec& spec, const Witness& w) {
    const CylinderPowerMap g{&spec, w.power, w.shift};
    CylinderPoint p = w.seed;
    for (long long i = 0; i < w.n; ++i) p = g(p);
    return p.y - w.seed.y;
}

namespace detail {

inline Certificate start_certificate(const MapSpec& spec) {
    Certificate c;
    c.map_digest = spec_digest(spec);
    std::string text = to_map_text(spec);
    for (auto& ch : text)
        if (ch == '\n') ch = ';';
    if (!text.empty() && text.back() == ';') text.pop_back();
    c.map_text = text;
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct EntropyOptions {
    unsigned threads = 1;
    /// seeds are processed in blocks of this size; the search stops after the
    /// first block by which both witnesses exist (independent of threads)
    std::size_t block = 64;
};

/// Searches grid seeds for z1 with p2 f^n1(z1) - p2(z1) < -M and z2 with
/// p2 f^n2(z2) - p2(z2) > M, M = max(M0, M1). Both found means 0 is an
/// interior point of the vertical rotation set and f has positive
/// topological entropy.
inline Certificate certify_entropy(const MapSpec& spec, long long budget_seeds, long long budget_iter,
                                   const EntropyOptions& opt = {}) {
    if (budget_seeds < 1 || budget_iter < 1) throw ConfigError("budgets must be >= 1");
    const ConstantsReport constants = compute_constants(spec);
    const double M = constants.M_thm3;
    const auto seeds = grid_seeds(budget_seeds);

    struct SeedResult {
        long long neg_n = -1, pos_n = -1;
        double neg_d = 0.0, pos_d = 0.0;
        double min_d = 0.0, max_d = 0.0;
        long long iterated = 0;
    };
    std::vector<SeedResult> results(seeds.size());
    std::optional<std::size_t> neg_idx, pos_idx;
    std::size_t processed = 0;
    const std::size_t block = std::max<std::size_t>(1, opt.block);
    for (std::size_t lo = 0; lo < seeds.size(); lo += block) {
        const std::size_t hi = std::min(seeds.size(), lo + block);
        parallel_for(hi - lo, opt.threads, [&](std::size_t k) {
            const std::size_t s = lo + k;
            SeedResult r;
            CylinderPoint p = seeds[s];
            for (long long n = 1; n <= budget_iter; ++n) {
                p = step_cylinder(spec, p);
                const double d = p.y - seeds[s].y;
                if (!std::isfinite(d)) throw NumericalError("non-finite orbit coordinate", n);
                r.min_d = std::min(r.min_d, d);
                r.max_d = std::max(r.max_d, d);
                r.iterated = n;
                if (r.neg_n < 0 && d < -M) { r.neg_n = n; r.neg_d = d; }
                if (r.pos_n < 0 && d > M) { r.pos_n = n; r.pos_d = d; }
                if (r.neg_n >= 0 && r.pos_n >= 0) break;
            }
            results[s] = r;
        });
        for (std::size_t s = lo; s < hi; ++s) {
            if (!neg_idx && results[s].neg_n >= 0) neg_idx = s;
            if (!pos_idx && results[s].pos_n >= 0) pos_idx = s;
        }
        processed = hi;
        if (neg_idx && pos_idx) break;
    }

    double min_d = 0.0, max_d = 0.0;
    long long iterations = 0;
    for (std::size_t s = 0; s < processed; ++s) {
        min_d = std::min(min_d, results[s].min_d);
        max_d = std::max(max_d, results[s].max_d);
        iterations += results[s].iterated;
    }

    Certificate c = detail::start_certificate(spec);
    c.threshold = M;
    c.inputs = {{"budget_seeds", fmt_int(budget_seeds)},
                {"budget_iter", fmt_int(budget_iter)},
                {"A_f", fmt_double(constants.A_f)},
                {"B_f", fmt_double(constants.B_f)},
                {"M0", fmt_double(constants.M0)},
                {"M1", fmt_double(constants.M1)},
                {"M_thm3", fmt_double(M)}};
    c.evidence = {{"seeds_processed", fmt_int(static_cast<long long>(processed))},
                  {"iterations_total", fmt_int(iterations)},
                  {"min_displacement", fmt_double(min_d)},
                  {"max_displacement", fmt_double(max_d)}};
    if (neg_idx) {
        const auto& r = results[*neg_idx];
        c.witnesses.push_back({"negative", static_cast<long long>(*neg_idx), seeds[*neg_idx], r.neg_n, 1, 0, r.neg_d});
    }
    if (pos_idx) {
        const auto& r = results[*pos_idx];
        c.witnesses.push_back({"positive", static_cast<long long>(*pos_idx), seeds[*pos_idx], r.pos_n, 1, 0, r.pos_d});
    }
    if (neg_idx && pos_idx) {
        c.kind = CertificateKind::entropy_interior_zero;
        c.outcome = Outcome::certified;
        c.verdict = "orbits with displacement below -M and above +M exist: 0 is an interior point of the "
                    "vertical rotation set and f has positive topological entropy";
    } else {
        c.kind = CertificateKind::entropy_inconclusive;
        c.outcome = Outcome::inconclusive;
        c.verdict = std::string("inconclusive: ") + (neg_idx ? "" : "no displacement below -M") +
                    (!neg_idx && !pos_idx ? " and " : "") + (pos_idx ? "" : "no displacement above +M") +
                    " within budget";
    }
    return c;
}

// ---------------------------------------------------------------------------

struct BoundedOptions {
    /// check only the upward side: sup of the signed displacement
    bool one_sided = false;
    unsigned threads = 1;
};

/// Tests g^ = f^^q - (0, p) for displacement bounded by 2 M'(g) + 8, the
/// pass line of uniformly bounded displacement for rho_V = {p/q}. A
/// violation is evidence that rho_V(f^) != {p/q}.
inline Certificate test_bounded_displacement(const MapSpec& spec, long p, int q, long long n_seeds, long long n_iter,
                                             const BoundedOptions& opt = {}) {
    if (q <= 0) throw ConfigError("q must be >= 1");
    if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
    const ConstantsReport constants = power_map_constants(spec, q, p);
    const double threshold = constants.bound_displacement;
    const auto seeds = grid_seeds(n_seeds);
    const CylinderPowerMap g{&spec, q, -p};

    struct SeedResult {
        double sup = 0.0;
        long long at = 0;
        long long first_violation = -1;
        double violation_d = 0.0;
    };
    std::vector<SeedResult> results(seeds.size());
    parallel_for(seeds.size(), opt.threads, [&](std::size_t s) {
        SeedResult r;
        CylinderPoint z = seeds[s];
        for (long long n = 1; n <= n_iter; ++n) {
            z = g(z);
            const double d = z.y - seeds[s].y;
            if (!std::isfinite(d)) throw NumericalError("non-finite orbit coordinate", n);
            const double m = opt.one_sided ? d : std::abs(d);
            if (m > r.sup) { r.sup = m; r.at = n; }
            if (r.first_violation < 0 && m > threshold) { r.first_violation = n; r.violation_d = d; }
        }
        results[s] = r;
    });

    double sup = 0.0;
    std::size_t sup_seed = 0;
    std::optional<std::size_t> violator;
    for (std::size_t s = 0; s < results.size(); ++s) {
        if (results[s].sup > sup) { sup = results[s].sup; sup_seed = s; }
        if (!violator && results[s].first_violation >= 0) violator = s;
    }

    Certificate c = detail::start_certificate(spec);
    c.threshold = threshold;
    c.inputs = {{"p", fmt_int(p)},
                {"q", fmt_int(q)},
                {"n_seeds", fmt_int(n_seeds)},
                {"n_iter", fmt_int(n_iter)},
                {"one_sided", opt.one_sided ? "true" : "false"},
                {"A_g", fmt_double(constants.A_f)},
                {"B_g", fmt_double(constants.B_f)},
                {"k_g", fmt_double(constants.k)},
                {"M_prime_g", fmt_double(constants.M_prime)},
                {"threshold", fmt_double(threshold)}};
    c.evidence = {{"sup_displacement", fmt_double(sup)},
                  {"sup_seed", fmt_int(static_cast<long long>(sup_seed))},
                  {"sup_step", fmt_int(results.empty() ? 0 : results[sup_seed].at)}};
    if (violator) {
        const auto& r = results[*violator];
        c.witnesses.push_back({"violation", static_cast<long long>(*violator), seeds[*violator], r.first_violation, q,
                               -p, r.violation_d});
        c.kind = CertificateKind::bounded_violated;
        c.outcome = Outcome::violated;
        c.verdict = "displacement of f^" + std::to_string(q) + " - (0," + std::to_string(p) +
                    ") exceeds 2M'+8: the vertical rotation set is not {" + std::to_string(p) + "/" +
                    std::to_string(q) + "}";
    } else {
        c.kind = CertificateKind::bounded_consistent;
        c.outcome = Outcome::certified;
        c.verdict = "sup displacement within 2M'+8 over all seeds and iterates: consistent with uniformly bounded "
                    "displacement for rotation set {" + std::to_string(p) + "/" + std::to_string(q) + "}";
    }
    return c;
}

// ---------------------------------------------------------------------------

struct ExactnessResult {
    double up_flux = 0.0;    ///< Leb(H_b^+ intersect f^(H_b^-))
    double down_flux = 0.0;  ///< Leb(H_b^- intersect f^(H_b^+))
    double difference = 0.0;
    double sigma = 0.0;      ///< standard error of the difference
    double up_sigma = 0.0;
    double down_sigma = 0.0;
};

/// Monte-Carlo flux balance across the circle y = b over the strip
/// S^1 x [b - A_f - 1, b + A_f + 1]. Draws come from the counter generator,
/// counts are integers, so the estimate does not depend on thread count.
inline ExactnessResult estimate_flux(const MapSpec& spec, double b, long long n_samples, std::uint64_t rng_seed,
                                     unsigned threads = 1) {
    if (n_samples < 1000) throw ConfigError("exactness check needs at least 1000 samples");
    const double A = compute_constants(spec).A_f;
    const double lo = b - A - 1.0;
    const double area = 2.0 * A + 2.0;
    const CounterRng rng = CounterRng(rng_seed).split(0xe4ac7);
    constexpr long long chunk = 1 << 16;
    const auto nchunks = static_cast<std::size_t>((n_samples + chunk - 1) / chunk);
    std::vector<long long> ups(nchunks, 0), downs(nchunks, 0);
    parallel_for(nchunks, threads, [&](std::size_t c) {
        const long long begin = static_cast<long long>(c) * chunk;
        const long long end = std::min(n_samples, begin + chunk);
        long long u = 0, d = 0;
        for (long long i = begin; i < end; ++i) {
            const auto k = static_cast<std::uint64_t>(i);
            const CylinderPoint z{rng.uniform(2 * k), lo + area * rng.uniform(2 * k + 1)};
            const CylinderPoint pre = step_cylinder_inverse(spec, z);
            if (z.y >= b && pre.y < b) ++u;
            if (z.y < b && pre.y >= b) ++d;
        }
        ups[c] = u;
        downs[c] = d;
    });
    long long up = 0, down = 0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        up += ups[c];
        down += downs[c];
    }
    const double n = static_cast<double>(n_samples);
    const double pu = up / n, pd = down / n;
    ExactnessResult r;
    r.up_flux = area * pu;
    r.down_flux = area * pd;
    r.difference = r.up_flux - r.down_flux;
    // indicator difference takes values in {-1, 0, 1}; up and down are disjoint events
    const double mean = pu - pd;
    const double var = pu + pd - mean * mean;
    r.sigma = area * std::sqrt(std::max(0.0, var) / n);
    r.up_sigma = area * std::sqrt(pu * (1.0 - pu) / n);
    r.down_sigma = area * std::sqrt(pd * (1.0 - pd) / n);
    return r;
}

/// Exact area-preserving lifts carry equal flux up and down across every
/// horizontal circle; in general the difference equals the Lebesgue vertical
/// rotation number, v.const for this family.
inline Certificate check_exactness(const MapSpec& spec, double b, long long n_samples, std::uint64_t rng_seed = 0,
                                   unsigned threads = 1) {
    const auto r = estimate_flux(spec, b, n_samples, rng_seed, threads);
    Certificate c = detail::start_certificate(spec);
    c.kind = CertificateKind::exactness;
    c.threshold = 3.0 * r.sigma;
    c.inputs = {{"b", fmt_double(b)}, {"n_samples", fmt_int(n_samples)}, {"rng_seed", std::to_string(rng_seed)}};
    const double gap = r.difference - spec.v_const;
    const bool agrees = std::abs(gap) <= std::max(3.0 * r.sigma, 1e-12);
    c.evidence = {{"up_flux", fmt_double(r.up_flux)},
                  {"down_flux", fmt_double(r.down_flux)},
                  {"difference", fmt_double(r.difference)},
                  {"sigma", fmt_double(r.sigma)},
                  {"band_3sigma", fmt_double(3.0 * r.sigma)},
                  {"expected_difference", fmt_double(spec.v_const)},
                  {"agrees", agrees ? "true" : "false"}};
    c.outcome = agrees ? Outcome::certified : Outcome::violated;
    if (spec.v_const == 0.0)
        c.verdict = agrees ? "upward and downward fluxes agree within 3 sigma: consistent with an exact map"
                           : "flux imbalance beyond 3 sigma for a zero-drift map";
    else
        c.verdict = agrees ? "flux difference matches the mean drift v.const within 3 sigma (map is not exact)"
                           : "flux difference disagrees with v.const beyond 3 sigma";
    return c;
}

// ---------------------------------------------------------------------------

struct BoylandBudgets {
    long long entropy_seeds = 4096;
    long long entropy_iter = 100000;
    long long bounded_seeds = 4096;
    long long bounded_iter = 100000;
    unsigned threads = 1;
};

/// For zero Lebesgue rotation number exactly one of: 0 interior to rho_V, or
/// uniformly bounded displacement. The verdict here is empirical; with finite
/// budgets "bounded" cannot be told apart from witnesses beyond the budget.
inline Certificate boyland_verdict(const MapSpec& spec, const BoylandBudgets& budgets = {}) {
    const auto leb = lebesgue_rotation_number(spec, MeasureMethod::quadrature, 64);
    if (std::abs(leb.value) > leb.std_error + 1e-12)
        throw PreconditionError("dichotomy needs zero Lebesgue rotation number; got " + fmt_double(leb.value));

    Certificate c = detail::start_certificate(spec);
    c.kind = CertificateKind::boyland_verdict;
    c.inputs = {{"entropy_seeds", fmt_int(budgets.entropy_seeds)},
                {"entropy_iter", fmt_int(budgets.entropy_iter)},
                {"bounded_seeds", fmt_int(budgets.bounded_seeds)},
                {"bounded_iter", fmt_int(budgets.bounded_iter)}};
    c.evidence.emplace_back("lebesgue_rotation", fmt_double(leb.value));

    const auto entropy = certify_entropy(spec, budgets.entropy_seeds, budgets.entropy_iter, {budgets.threads});
    c.evidence.emplace_back("entropy.outcome", to_string(entropy.outcome));
    c.evidence.emplace_back("entropy.min_displacement", entropy.find("min_displacement"));
    c.evidence.emplace_back("entropy.max_displacement", entropy.find("max_displacement"));
    c.threshold = entropy.threshold;
    const std::string caveat = "; empirical at the given budgets";
    if (entropy.outcome == Outcome::certified) {
        c.witnesses = entropy.witnesses;
        c.branch = BoylandBranch::interior_zero;
        c.outcome = Outcome::certified;
        c.verdict = "0 interior to rho_V: positive entropy" + caveat;
        return c;
    }
    const auto bounded =
        test_bounded_displacement(spec, 0, 1, budgets.bounded_seeds, budgets.bounded_iter, {false, budgets.threads});
    c.evidence.emplace_back("bounded.outcome", to_string(bounded.outcome));
    c.evidence.emplace_back("bounded.sup_displacement", bounded.find("sup_displacement"));
    c.evidence.emplace_back("bounded.threshold", bounded.find("threshold"));
    if (bounded.outcome == Outcome::certified) {
        c.branch = BoylandBranch::bounded;
        c.outcome = Outcome::certified;
        c.verdict = "uniformly bounded (annulus-like), consistent with rho_V = {0}" + caveat +
                    "; witnesses beyond the budget are not excluded";
        return c;
    }
    c.witnesses = bounded.witnesses;
    c.branch = BoylandBranch::inconclusive;
    c.outcome = Outcome::inconclusive;
    c.verdict = "inconclusive at given budgets: displacement exceeds 2M'+8 but no two-sided witness beyond M";
    return c;
}

inline const char* to_string(BoylandBranch b) {
    switch (b) {
        case BoylandBranch::interior_zero: return "interior_zero";
        case BoylandBranch::bounded: return "bounded";
        case BoylandBranch::inconclusive: return "inconclusive";
    }
    return "?";
}

/// Structured text report; deterministic for fixed inputs.
inline void write_certificate(std::ostream& out, const Certificate& c) {
    out << "[certificate]\n";
    out << "kind: " << to_string(c.kind) << '\n';
    out << "outcome: " << to_string(c.outcome) << '\n';
    out << "map_digest: " << c.map_digest << '\n';
    out << "map: " << c.map_text << '\n';
    for (const auto& [k, v] : c.inputs) out << "input." << k << ": " << v << '\n';
    out << "threshold: " << fmt_double(c.threshold) << '\n';
    for (const auto& [k, v] : c.evidence) out << "evidence." << k << ": " << v << '\n';
    for (const auto& w : c.witnesses)
        out << "witness: role=" << w.role << " seed_index=" << w.seed_index << " x=" << fmt_double(w.seed.x)
            << " y=" << fmt_double(w.seed.y) << " n=" << w.n << " power=" << w.power << " shift=" << w.shift
            << " displacement=" << fmt_double(w.displacement) << '\n';
    if (c.branch) out << "branch: " << to_string(*c.branch) << '\n';
    out << "verdict: " << c.verdict << '\n';
}

}  // namespace dtrot
