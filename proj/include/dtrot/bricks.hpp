#pragma once

// Free brick decompositions for g~ = f~^n0 - (0, m0), their shift-labelled
// transition graphs and the closed-chain search. A closed chain of free
// bricks forces g~ to have a fixed point, i.e. m0/n0 in the vertical rotation
// set; the index argument behind that implication is not recomputed here.
//
// All decisions are three-valued: "certified" labels carry a conservative
// evaluation margin eps = 1e-9 (1 + |coords|), everything else is sampled or
// undetermined.

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

namespace dtrot {

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
    double diameter() const noexcept { return std::hypot(width(), height()); }
    PlanePoint center() const noexcept { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    Rect translated(double dx, double dy = 0.0) const noexcept { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }
    Rect inflated(double ex, double ey) const noexcept { return {x0 - ex, y0 - ey, x1 + ex, y1 + ey}; }
    bool intersects(const Rect& o) const noexcept { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
    bool contains(PlanePoint p) const noexcept { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    Rect intersection(const Rect& o) const noexcept {
        return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
    }
};

inline double eval_margin(PlanePoint p) noexcept { return 1e-9 * (1.0 + std::max(std::abs(p.x), std::abs(p.y))); }

/// Componentwise bound on |g~(z) - g~(z')| given |x - x'| <= dx, |y - y'| <= dy,
/// propagated through the n0 shear compositions.
inline std::pair<double, double> propagate_modulus(const MapSpec& spec, int iterates, double dx, double dy) {
    const double lh = spec.h.lipschitz();
    const double lv = spec.v.lipschitz();
    for (int i = 0; i < iterates; ++i) {
        dx = dx + (spec.k_dehn + lh) * dy;
        dy = dy + lv * dx;
    }
    return {dx, dy};
}

/// Axis-aligned box containing g~(r): the centre image and the corner-image
/// hull, each inflated by the modulus bound over half the sides, intersected.
inline Rect image_enclosure(const PlanePowerMap& g, const Rect& r) {
    const auto [ex, ey] = propagate_modulus(*g.spec, g.iterates, 0.5 * r.width(), 0.5 * r.height());
    const PlanePoint c = g(r.center());
    Rect box{c.x - ex, c.y - ey, c.x + ex, c.y + ey};
    const PlanePoint corners[4] = {g({r.x0, r.y0}), g({r.x1, r.y0}), g({r.x0, r.y1}), g({r.x1, r.y1})};
    Rect hull{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
    for (const auto& p : corners) {
        hull.x0 = std::min(hull.x0, p.x);
        hull.x1 = std::max(hull.x1, p.x);
        hull.y0 = std::min(hull.y0, p.y);
        hull.y1 = std::max(hull.y1, p.y);
    }
    box = box.intersection(hull.inflated(ex, ey));
    const double eps = eval_margin({std::max(std::abs(box.x0), std::abs(box.x1)), std::max(std::abs(box.y0), std::abs(box.y1))});
    return box.inflated(eps, eps);
}

// ---------------------------------------------------------------------------

enum class BrickKind { fine, lower_strip, upper_strip };
enum class Freeness { certified_free, free_sampled, not_free };

inline const char* to_string(Freeness f) {
    switch (f) {
        case Freeness::certified_free: return "certified_free";
        case Freeness::free_sampled: return "free_sampled";
        case Freeness::not_free: return "not_free";
    }
    return "?";
}

/// A quotient brick; the plane bricks are its integer x-translates.
/// Strips are half-infinite: rect holds the truncated working extent, and
/// membership tests use the full half-strip.
struct Brick {
    BrickKind kind = BrickKind::fine;
    Rect rect;
    int strip_index = -1;
    Freeness status = Freeness::not_free;
    std::vector<Rect> cells;  ///< pieces used for image enclosures

    /// Closed region as used for overlap tests (strips extend to +-infinity).
    Rect region() const noexcept {
        Rect r = rect;
        if (kind == BrickKind::upper_strip) r.y1 = std::numeric_limits<double>::infinity();
        if (kind == BrickKind::lower_strip) r.y0 = -std::numeric_limits<double>::infinity();
        return r;
    }

    bool interior_contains(PlanePoint p, double margin) const noexcept {
        const Rect r = region();
        return p.x > r.x0 + margin && p.x < r.x1 - margin && p.y > r.y0 + margin && p.y < r.y1 - margin;
    }
};

struct FixedPointSuspected {
    int brick = -1;
    Rect location;
};

struct DecompositionOptions {
    double min_diameter = 1e-3;
    int max_strip_subdivisions = 1024;
    unsigned threads = 1;
};

struct BrickDecomposition {
    int n0 = 1;
    long m0 = 0;
    double band = 0.0;   ///< Y = M' + 2; fine bricks tile [0,1) x [-Y, Y]
    double depth = 0.0;  ///< strips are truncated at |y| = depth
    int N = 1;           ///< strip width 1/N
    double target_diameter = 0.0;
    double min_diameter = 0.0;
    ConstantsReport constants;
    std::vector<Brick> bricks;  ///< fine bricks first, then lower strips 0..N-1, then upper strips 0..N-1
    std::vector<FixedPointSuspected> warnings;
    std::vector<std::string> notes;

    int lower_strip(int n) const noexcept { return static_cast<int>(bricks.size()) - 2 * N + n; }
    int upper_strip(int n) const noexcept { return static_cast<int>(bricks.size()) - N + n; }
    std::size_t fine_count() const noexcept { return bricks.size() - 2 * static_cast<std::size_t>(N); }
    bool all_certified_free() const noexcept {
        return std::all_of(bricks.begin(), bricks.end(),
                           [](const Brick& b) { return b.status == Freeness::certified_free; });
    }
};

namespace detail {

inline bool enclosure_misses(const PlanePowerMap& g, const Rect& piece, const Rect& region) {
    return !image_enclosure(g, piece).intersects(region);
}

/// Samples an m x m grid of interior points; true if some image lands in the closed region.
inline bool sampled_hit(const PlanePowerMap& g, const Rect& piece, const Rect& region, int m) {
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const PlanePoint z{piece.x0 + (a + 0.5) / m * piece.width(), piece.y0 + (b + 0.5) / m * piece.height()};
            if (region.contains(g(z))) return true;
        }
    return false;
}

/// Horizontal displacement of g~ restricted to the half-planes |y| >= depth:
/// the returned value s satisfies p1 g~(z) - x >= s above depth and
/// p1 g~(z) - x <= -s below -depth.
inline double tail_shift(const ConstantsReport& c, int n0, double depth) {
    return n0 * (c.k * (depth - n0 * c.A_f) - c.B_f);
}

}  // namespace detail

inline BrickDecomposition build_free_decomposition(const MapSpec& spec, int n0, long m0, double target_diameter,
                                                   const DecompositionOptions& opt = {}) {
    if (n0 < 1) throw ConfigError("n0 must be >= 1");
    if (!(target_diameter > 0.0)) throw ConfigError("target_diameter must be positive");
    if (!(opt.min_diameter > 0.0)) throw ConfigError("min_diameter must be positive");

    BrickDecomposition dec;
    dec.n0 = n0;
    dec.m0 = m0;
    dec.constants = compute_constants(spec);
    dec.band = dec.constants.M_prime + 2.0;
    dec.depth = dec.band + 10.0 * (dec.constants.A_f * n0 + std::abs(static_cast<double>(m0)) + 1.0);
    dec.target_diameter = target_diameter;
    dec.min_diameter = opt.min_diameter;
    const PlanePowerMap g{&spec, n0, m0};
    const double Y = dec.band;

    // Fine bricks: square seeds of diameter <= target, quadrisected until free.
    const double side = target_diameter / std::sqrt(2.0);
    const int cols = std::max(1, static_cast<int>(std::ceil(1.0 / side)));
    const int rows = std::max(1, static_cast<int>(std::ceil(2.0 * Y / side)));
    std::vector<Rect> seeds;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            seeds.push_back({static_cast<double>(c) / cols, -Y + 2.0 * Y * r / rows,
                             static_cast<double>(c + 1) / cols, -Y + 2.0 * Y * (r + 1) / rows});

    std::vector<std::vector<Brick>> per_seed(seeds.size());
    parallel_for(seeds.size(), opt.threads, [&](std::size_t s) {
        std::vector<Rect> stack{seeds[s]};
        while (!stack.empty()) {
            const Rect r = stack.back();
            stack.pop_back();
            if (detail::enclosure_misses(g, r, r)) {
                per_seed[s].push_back({BrickKind::fine, r, -1, Freeness::certified_free, {r}});
                continue;
            }
            if (r.diameter() < opt.min_diameter) {
                per_seed[s].push_back({BrickKind::fine, r, -1, Freeness::not_free, {r}});
                continue;
            }
            const double xm = 0.5 * (r.x0 + r.x1);
            const double ym = 0.5 * (r.y0 + r.y1);
            // pushed in reverse so bricks come out in (y, x) order within a seed
            stack.push_back({xm, ym, r.x1, r.y1});
            stack.push_back({r.x0, ym, xm, r.y1});
            stack.push_back({xm, r.y0, r.x1, ym});
            stack.push_back({r.x0, r.y0, xm, ym});
        }
    });
    for (auto& v : per_seed)
        for (auto& b : v) dec.bricks.push_back(std::move(b));
    for (std::size_t i = 0; i < dec.bricks.size(); ++i)
        if (dec.bricks[i].status == Freeness::not_free)
            dec.warnings.push_back({static_cast<int>(i), dec.bricks[i].rect});

    // Half-strips: smallest power-of-two N for which every strip certifies.
    const double cell_h = std::min(side, 0.25);
    const int pieces = std::max(1, static_cast<int>(std::ceil((dec.depth - Y) / cell_h)));
    std::vector<Brick> strips;
    for (int N = 1;; N *= 2) {
        strips.clear();
        const double tail = detail::tail_shift(dec.constants, n0, dec.depth);
        const bool tail_ok = tail > 1.0 / N;
        bool all_free = true;
        for (int upper = 0; upper < 2; ++upper) {
            for (int n = 0; n < N; ++n) {
                Brick b;
                b.kind = upper ? BrickKind::upper_strip : BrickKind::lower_strip;
                b.strip_index = n;
                const double x0 = static_cast<double>(n) / N;
                const double x1 = static_cast<double>(n + 1) / N;
                b.rect = upper ? Rect{x0, Y, x1, dec.depth} : Rect{x0, -dec.depth, x1, -Y};
                for (int p = 0; p < pieces; ++p) {
                    const double lo = Y + (dec.depth - Y) * p / pieces;
                    const double hi = Y + (dec.depth - Y) * (p + 1) / pieces;
                    b.cells.push_back(upper ? Rect{x0, lo, x1, hi} : Rect{x0, -hi, x1, -lo});
                }
                const Rect region = b.region();
                bool free = tail_ok;
                for (const auto& piece : b.cells) {
                    if (!free) break;
                    free = detail::enclosure_misses(g, piece, region);
                }
                if (free) {
                    b.status = Freeness::certified_free;
                } else {
                    bool hit = false;
                    for (const auto& piece : b.cells) hit = hit || detail::sampled_hit(g, piece, region, 8);
                    b.status = hit ? Freeness::not_free : Freeness::free_sampled;
                    all_free = false;
                }
                strips.push_back(std::move(b));
            }
        }
        dec.N = N;
        if (all_free) break;
        if (2 * N > opt.max_strip_subdivisions) {
            dec.notes.push_back("strips not certified free up to N = " + std::to_string(N));
            break;
        }
    }
    for (auto& s : strips) dec.bricks.push_back(std::move(s));
    return dec;
}

// ---------------------------------------------------------------------------

enum class GraphMode { certified, sampled };
enum class EdgeLabel { certified_present, sampled_present, certified_absent };

inline const char* to_string(EdgeLabel l) {
    switch (l) {
        case EdgeLabel::certified_present: return "certified_present";
        case EdgeLabel::sampled_present: return "sampled_present";
        case EdgeLabel::certified_absent: return "certified_absent";
    }
    return "?";
}

/// Edge i -> (j, s): g~(D_i) meets D_j + (s, 0).
struct Edge {
    int src = 0;
    int dst = 0;
    long shift = 0;
    EdgeLabel label = EdgeLabel::sampled_present;
    PlanePoint witness;  ///< point of D_i (certified: interior with margin)
    PlanePoint image;    ///< g~(witness), inside D_j + (s, 0)
};

struct GraphNode {
    BrickKind kind = BrickKind::fine;
    Freeness status = Freeness::not_free;
    Rect rect;
    int strip_index = -1;
};

struct TransitionGraph {
    GraphMode mode = GraphMode::certified;
    int N = 1;
    std::vector<GraphNode> nodes;
    std::vector<Edge> edges;  ///< present edges only; absent pairs are implicit
    std::size_t undetermined_pairs = 0;
    bool has_not_free = false;
    /// Smallest K with certified strip edges F_n^+ -> F_m^+ for all m >= n + K and
    /// F_n^- -> F_m^- for all m <= n - K.
    std::optional<long> k_crit_estimate;
    std::optional<long> k_crit_upper;
    std::optional<long> k_crit_lower;
};

/// Three-valued test of the pair (i, j, s) from enclosures alone: certified_absent
/// if every enclosure piece of D_i misses D_j + (s, 0), otherwise nullopt.
inline std::optional<EdgeLabel> classify_by_enclosure(const BrickDecomposition& dec, const MapSpec& spec, int i,
                                                      int j, long s) {
    const PlanePowerMap g{&spec, dec.n0, dec.m0};
    const Brick& src = dec.bricks[i];
    const Rect target = dec.bricks[j].region().translated(static_cast<double>(s));
    if (src.kind != BrickKind::fine) {
        // the part of the strip beyond the working depth maps to |y| >= reach
        const double reach = dec.depth - dec.n0 * dec.constants.A_f - std::abs(static_cast<double>(dec.m0));
        const bool tail_may_hit = src.kind == BrickKind::upper_strip ? target.y1 >= reach : target.y0 <= -reach;
        if (tail_may_hit) return std::nullopt;
    }
    for (const auto& piece : src.cells)
        if (image_enclosure(g, piece).intersects(target)) return std::nullopt;
    return EdgeLabel::certified_absent;
}

namespace detail {

/// Points of the source piece whose image is checked against the target.
/// Candidates come from two routes: a forward grid over the piece and
/// preimages of a grid over (enclosure  intersect  target).
inline std::optional<std::pair<PlanePoint, PlanePoint>> find_witness(const PlanePowerMap& g, const Brick& src,
                                                                    const Rect& piece, const Brick& dst, long s,
                                                                    const Rect& overlap, int m) {
    const double sx = static_cast<double>(s);
    auto accept = [&](PlanePoint w) -> std::optional<std::pair<PlanePoint, PlanePoint>> {
        if (!src.interior_contains(w, eval_margin(w))) return std::nullopt;
        const PlanePoint img = g(w);
        const PlanePoint local{img.x - sx, img.y};
        if (!dst.interior_contains(local, eval_margin(img))) return std::nullopt;
        return std::make_pair(w, img);
    };
    Rect ov = overlap;
    if (!std::isfinite(ov.y1)) ov.y1 = ov.y0 + 1.0;
    if (!std::isfinite(ov.y0)) ov.y0 = ov.y1 - 1.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const PlanePoint t{ov.x0 + (a + 0.5) / m * ov.width(), ov.y0 + (b + 0.5) / m * ov.height()};
            if (auto w = accept(g.inverse(t))) return w;
        }
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const PlanePoint z{piece.x0 + (a + 0.5) / m * piece.width(), piece.y0 + (b + 0.5) / m * piece.height()};
            if (auto w = accept(z)) return w;
        }
    return std::nullopt;
}

}  // namespace detail

inline TransitionGraph build_transition_graph(const BrickDecomposition& dec, const MapSpec& spec,
                                              GraphMode mode = GraphMode::certified, unsigned threads = 1) {
    const PlanePowerMap g{&spec, dec.n0, dec.m0};
    TransitionGraph graph;
    graph.mode = mode;
    graph.N = dec.N;
    for (const auto& b : dec.bricks) {
        graph.nodes.push_back({b.kind, b.status, b.rect, b.strip_index});
        if (b.status == Freeness::not_free) graph.has_not_free = true;
    }

    // Fine bricks sorted by y0 for range lookup.
    const std::size_t nfine = dec.fine_count();
    std::vector<int> by_y(nfine);
    for (std::size_t i = 0; i < nfine; ++i) by_y[i] = static_cast<int>(i);
    std::sort(by_y.begin(), by_y.end(), [&](int a, int b) { return dec.bricks[a].rect.y0 < dec.bricks[b].rect.y0; });
    double max_h = 0.0;
    for (std::size_t i = 0; i < nfine; ++i) max_h = std::max(max_h, dec.bricks[i].rect.height());

    auto targets_for = [&](const Rect& e, auto&& visit) {
        // fine bricks with y-range meeting [e.y0, e.y1]
        auto lo = std::lower_bound(by_y.begin(), by_y.end(), e.y0 - max_h,
                                   [&](int id, double v) { return dec.bricks[id].rect.y0 < v; });
        for (auto it = lo; it != by_y.end() && dec.bricks[*it].rect.y0 <= e.y1; ++it) visit(*it);
        for (int n = 0; n < dec.N; ++n) {
            if (e.y0 <= -dec.band) visit(dec.lower_strip(n));
            if (e.y1 >= dec.band) visit(dec.upper_strip(n));
        }
    };

    const std::size_t nb = dec.bricks.size();
    std::vector<std::vector<Edge>> out(nb);
    std::vector<std::size_t> undetermined(nb, 0);
    parallel_for(nb, threads, [&](std::size_t si) {
        const int i = static_cast<int>(si);
        const Brick& src = dec.bricks[i];
        std::vector<std::pair<int, long>> done;   // (dst, shift) already stored
        std::vector<std::pair<int, long>> maybe;  // enclosure-overlapping, no witness yet
        for (const auto& piece : src.cells) {
            const Rect e = image_enclosure(g, piece);
            targets_for(e, [&](int j) {
                const Brick& dst = dec.bricks[j];
                const Rect reg = dst.region();
                const auto s_lo = static_cast<long>(std::floor(e.x0 - reg.x1));
                const auto s_hi = static_cast<long>(std::ceil(e.x1 - reg.x0));
                for (long s = s_lo; s <= s_hi; ++s) {
                    const Rect tgt = reg.translated(static_cast<double>(s));
                    if (!e.intersects(tgt)) continue;
                    const std::pair<int, long> key{j, s};
                    if (std::find(done.begin(), done.end(), key) != done.end()) continue;
                    if (mode == GraphMode::certified) {
                        if (auto w = detail::find_witness(g, src, piece, dst, s, e.intersection(tgt), 8)) {
                            out[si].push_back({i, j, s, EdgeLabel::certified_present, w->first, w->second});
                            done.push_back(key);
                        } else if (std::find(maybe.begin(), maybe.end(), key) == maybe.end()) {
                            maybe.push_back(key);
                        }
                    } else {
                        constexpr int m = 8;
                        for (int a = 0; a < m && std::find(done.begin(), done.end(), key) == done.end(); ++a)
                            for (int b = 0; b < m; ++b) {
                                const PlanePoint z{piece.x0 + (a + 0.5) / m * piece.width(),
                                                   piece.y0 + (b + 0.5) / m * piece.height()};
                                const PlanePoint img = g(z);
                                if (tgt.contains(img)) {
                                    out[si].push_back({i, j, s, EdgeLabel::sampled_present, z, img});
                                    done.push_back(key);
                                    break;
                                }
                            }
                    }
                }
            });
        }
        for (const auto& key : maybe)
            if (std::find(done.begin(), done.end(), key) == done.end()) ++undetermined[si];
    });
    for (std::size_t i = 0; i < nb; ++i) {
        std::sort(out[i].begin(), out[i].end(),
                  [](const Edge& a, const Edge& b) { return std::tie(a.dst, a.shift) < std::tie(b.dst, b.shift); });
        for (auto& e : out[i]) graph.edges.push_back(e);
        graph.undetermined_pairs += undetermined[i];
    }

    if (mode != GraphMode::certified) return graph;

    // K_crit: certified strip-to-strip offsets plus the unbounded tail. A
    // vertical ray above y_a maps to a connected curve staying above the band
    // and running off to +infinity, so it crosses every later strip.
    const auto& c = dec.constants;
    const double lift = c.A_f * dec.n0 + std::abs(static_cast<double>(dec.m0)) + 0.5;
    const double y_a = dec.band + lift;
    std::optional<long> k_up = 0;
    std::optional<long> k_lo = 0;
    for (int upper = 0; upper < 2; ++upper) {
        for (int n = 0; n < dec.N; ++n) {
            const int id = upper ? dec.upper_strip(n) : dec.lower_strip(n);
            const double xc = (n + 0.5) / dec.N;
            const PlanePoint start = g({xc, upper ? y_a : -y_a});
            const double eps = eval_margin(start);
            // offsets d = |m - n| covered by the tail
            long tail_from;
            if (upper) {
                tail_from = static_cast<long>(std::floor(dec.N * (start.x + eps) - 0.5)) + 1 - n;
            } else {
                tail_from = n - (static_cast<long>(std::ceil(dec.N * (start.x - eps) - 0.5)) - 1);
            }
            std::vector<long> offsets;
            for (const auto& e : graph.edges) {
                if (e.src != id || e.label != EdgeLabel::certified_present) continue;
                const auto& dn = dec.bricks[e.dst];
                if (dn.kind != dec.bricks[id].kind) continue;
                const long m = dn.strip_index + e.shift * dec.N;
                offsets.push_back(upper ? m - n : n - m);
            }
            std::sort(offsets.begin(), offsets.end());
            long k = tail_from;
            while (std::binary_search(offsets.begin(), offsets.end(), k - 1)) --k;
            auto& slot = upper ? k_up : k_lo;
            slot = std::max(*slot, std::max(k, 1L));
        }
    }
    graph.k_crit_upper = k_up;
    graph.k_crit_lower = k_lo;
    graph.k_crit_estimate = std::max(*k_up, *k_lo);
    return graph;
}

// ---------------------------------------------------------------------------

struct ChainLink {
    int node = 0;
    long shift = 0;       ///< shift of the edge leaving this node
    PlanePoint witness;
    PlanePoint image;
};

struct ChainCertificate {
    std::vector<ChainLink> cycle;
    long total_shift = 0;
    std::string conclusion;
};

struct ChainSearchResult {
    std::optional<ChainCertificate> certificate;
    std::vector<std::string> warnings;
};

struct ChainSearchOptions {
    /// Bound on the accumulated shift for components carrying cycles of both
    /// signs; 0 picks max|edge shift| * component size.
    long shift_bound = 0;
    int n0 = 1;
    long m0 = 0;
};

namespace detail {

struct Arc {
    int to;
    long w;
    std::size_t edge;
};

/// Tarjan SCC; returns component id per node.
inline std::vector<int> strongly_connected(const std::vector<std::vector<Arc>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on(n, 0);
    std::vector<int> stack;
    int counter = 0, ncomp = 0;
    struct Frame { int v; std::size_t next; };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = 1;
        while (!call.empty()) {
            auto& f = call.back();
            if (f.next < adj[f.v].size()) {
                const int w = adj[f.v][f.next++].to;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = 1;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                const int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
                if (low[v] == index[v]) {
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on[w] = 0;
                        comp[w] = ncomp;
                    } while (w != v);
                    ++ncomp;
                }
            }
        }
    }
    return comp;
}

/// Finds a directed cycle among arcs accepted by `use`; returns the arcs of the cycle.
template <typename Use>
std::optional<std::vector<Arc>> find_cycle(const std::vector<int>& members, const std::vector<std::vector<Arc>>& adj,
                                           Use&& use) {
    const int n = static_cast<int>(adj.size());
    std::vector<char> color(n, 0);  // 0 white, 1 grey, 2 black
    std::vector<Arc> via(n, Arc{-1, 0, 0});
    for (int root : members) {
        if (color[root]) continue;
        std::vector<std::pair<int, std::size_t>> st{{root, 0}};
        color[root] = 1;
        while (!st.empty()) {
            auto& [v, next] = st.back();
            if (next < adj[v].size()) {
                const Arc a = adj[v][next++];
                if (!use(v, a)) continue;
                if (color[a.to] == 1) {
                    // closing arc first, then tree arcs walking back; via[u].to is u's parent
                    std::vector<Arc> cyc{a};
                    for (int u = v; u != a.to; u = via[u].to) cyc.push_back(via[u]);
                    return cyc;
                }
                if (color[a.to] == 0) {
                    color[a.to] = 1;
                    via[a.to] = Arc{v, a.w, a.edge};
                    st.push_back({a.to, 0});
                }
            } else {
                color[v] = 2;
                st.pop_back();
            }
        }
    }
    return std::nullopt;
}

/// Bellman-Ford potentials over one component; nullopt if a negative cycle exists.
inline std::optional<std::vector<long>> potentials(const std::vector<int>& members,
                                                   const std::vector<std::vector<Arc>>& adj,
                                                   const std::vector<int>& comp, int cid, long sign) {
    std::vector<long> d(adj.size(), 0);
    for (std::size_t round = 0; round <= members.size(); ++round) {
        bool changed = false;
        for (int u : members)
            for (const auto& a : adj[u]) {
                if (comp[a.to] != cid) continue;
                if (d[u] + sign * a.w < d[a.to]) {
                    d[a.to] = d[u] + sign * a.w;
                    changed = true;
                }
            }
        if (!changed) return d;
    }
    return std::nullopt;
}

}  // namespace detail

/// Searches for a closed chain of certified-free bricks with zero total shift
/// (closed in the plane) along certified_present edges.
///
/// Per strongly connected component: if every cycle has shift sum of one
/// sign, Bellman-Ford potentials reduce the question to finding a cycle of
/// zero reduced cost, which is exact. Components with cycles of both signs
/// fall back to cycle detection in the product graph node x accumulated
/// shift, truncated at the shift bound; a truncated, unsuccessful search
/// throws InconclusiveError.
inline ChainSearchResult find_closed_chain(const TransitionGraph& graph, const ChainSearchOptions& opt = {}) {
    ChainSearchResult res;
    if (graph.mode != GraphMode::certified) {
        res.warnings.emplace_back("sampled-mode graph: closed-chain certificates need certified edges");
        return res;
    }
    if (graph.has_not_free) {
        res.warnings.emplace_back("decomposition has bricks that are not free; chain conclusions suppressed");
        return res;
    }
    const int n = static_cast<int>(graph.nodes.size());
    std::vector<std::vector<detail::Arc>> adj(n);
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& ed = graph.edges[e];
        if (ed.label != EdgeLabel::certified_present) continue;
        if (graph.nodes[ed.src].status != Freeness::certified_free ||
            graph.nodes[ed.dst].status != Freeness::certified_free)
            continue;
        adj[ed.src].push_back({ed.dst, ed.shift, e});
    }
    const auto comp = detail::strongly_connected(adj);
    const int ncomp = n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<std::vector<int>> members(ncomp);
    for (int v = 0; v < n; ++v) members[comp[v]].push_back(v);

    auto make_certificate = [&](const std::vector<detail::Arc>& arcs_rev) {
        // arcs_rev: closing arc first, then arcs walking backwards
        std::vector<std::size_t> edges;
        for (const auto& a : arcs_rev) edges.push_back(a.edge);
        std::reverse(edges.begin(), edges.end());
        ChainCertificate cert;
        for (auto e : edges) {
            const auto& ed = graph.edges[e];
            cert.cycle.push_back({ed.src, ed.shift, ed.witness, ed.image});
            cert.total_shift += ed.shift;
        }
        cert.conclusion = "closed chain of free bricks: g~ = f~^" + std::to_string(opt.n0) + " - (0," +
                          std::to_string(opt.m0) + ") has a fixed point, so " + std::to_string(opt.m0) + "/" +
                          std::to_string(opt.n0) + " lies in the vertical rotation set";
        return cert;
    };

    bool truncated = false;
    for (int cid = 0; cid < ncomp; ++cid) {
        const auto& mem = members[cid];
        bool has_arc = false;
        for (int u : mem)
            for (const auto& a : adj[u]) has_arc = has_arc || comp[a.to] == cid;
        if (!has_arc) continue;

        for (long sign : {1L, -1L}) {
            auto d = detail::potentials(mem, adj, comp, cid, sign);
            if (!d) continue;
            auto cyc = detail::find_cycle(mem, adj, [&](int u, const detail::Arc& a) {
                return comp[a.to] == cid && (*d)[u] + sign * a.w == (*d)[a.to];
            });
            if (cyc) {
                res.certificate = make_certificate(*cyc);
                return res;
            }
            goto next_component;  // one-signed component: exact answer is "none"
        }
        {
            // Cycles of both signs: product graph search.
            long max_w = 1;
            for (int u : mem)
                for (const auto& a : adj[u]) max_w = std::max(max_w, std::abs(a.w));
            const long S = opt.shift_bound > 0 ? opt.shift_bound : max_w * static_cast<long>(mem.size());
            const long width = 2 * S + 1;
            std::vector<int> local(n, -1);
            for (std::size_t k = 0; k < mem.size(); ++k) local[mem[k]] = static_cast<int>(k);
            const auto states = static_cast<std::size_t>(mem.size()) * static_cast<std::size_t>(width);
            std::vector<char> color(states, 0);
            struct Back { std::size_t from; std::size_t edge; };
            std::vector<Back> via(states, Back{0, 0});
            auto state = [&](int node, long acc) {
                return static_cast<std::size_t>(local[node]) * width + static_cast<std::size_t>(acc + S);
            };
            for (int root : mem) {
                const std::size_t rs = state(root, 0);
                if (color[rs]) continue;
                std::vector<std::tuple<int, long, std::size_t>> st{{root, 0L, 0}};
                color[rs] = 1;
                while (!st.empty()) {
                    auto& [v, acc, next] = st.back();
                    if (next < adj[v].size()) {
                        const auto a = adj[v][next++];
                        if (comp[a.to] != cid) continue;
                        const long nacc = acc + a.w;
                        if (std::abs(nacc) > S) {
                            truncated = true;
                            continue;
                        }
                        const std::size_t ts = state(a.to, nacc);
                        const std::size_t vs = state(v, acc);
                        if (color[ts] == 1) {
                            std::vector<detail::Arc> arcs{a};
                            for (std::size_t u = vs; u != ts; u = via[u].from) {
                                const auto& ed = graph.edges[via[u].edge];
                                arcs.push_back({ed.dst, ed.shift, via[u].edge});
                            }
                            res.certificate = make_certificate(arcs);
                            return res;
                        }
                        if (color[ts] == 0) {
                            color[ts] = 1;
                            via[ts] = {vs, a.edge};
                            st.emplace_back(a.to, nacc, 0);
                        }
                    } else {
                        color[state(v, acc)] = 2;
                        st.pop_back();
                    }
                }
            }
        }
    next_component:;
    }
    if (truncated)
        throw InconclusiveError("closed-chain search truncated at the shift-accumulator bound without a cycle");
    return res;
}

// ---------------------------------------------------------------------------

/// CSV `id,x0,y0,x1,y1,status`; strips report their truncated extent.
inline void write_bricks_csv(std::ostream& out, const BrickDecomposition& dec) {
    out << "id,x0,y0,x1,y1,status\n";
    for (std::size_t i = 0; i < dec.bricks.size(); ++i) {
        const auto& b = dec.bricks[i];
        out << i << ',' << fmt_double(b.rect.x0) << ',' << fmt_double(b.rect.y0) << ',' << fmt_double(b.rect.x1)
            << ',' << fmt_double(b.rect.y1) << ',' << to_string(b.status) << '\n';
    }
}

/// Edge list `src,dst,shift,label`.
inline void write_edges_csv(std::ostream& out, const TransitionGraph& graph) {
    out << "src,dst,shift,label\n";
    for (const auto& e : graph.edges) out << e.src << ',' << e.dst << ',' << e.shift << ',' << to_string(e.label) << '\n';
}

inline void write_chain_certificate(std::ostream& out, const ChainSearchResult& res) {
    out << "[chain]\n";
    for (const auto& w : res.warnings) out << "warning: " << w << '\n';
    if (!res.certificate) {
        out << "result: none\n";
        return;
    }
    const auto& c = *res.certificate;
    out << "result: closed_chain\n";
    out << "length: " << c.cycle.size() << '\n';
    out << "total_shift: " << c.total_shift << '\n';
    for (const auto& l : c.cycle)
        out << "link: node=" << l.node << " shift=" << l.shift << " witness=(" << fmt_double(l.witness.x) << ','
            << fmt_double(l.witness.y) << ") image=(" << fmt_double(l.image.x) << ',' << fmt_double(l.image.y)
            << ")\n";
    out << "conclusion: " << c.conclusion << '\n';
}

}  // namespace dtrot
