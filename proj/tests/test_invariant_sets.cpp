#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dtrot/constants.hpp"
#include "dtrot/invariant_sets.hpp"
#include "test_util.hpp"

using namespace dtrot;
using dtrot::testing::chirikov;

namespace {

// Rows centred on multiples of 1/64 with the top (or bottom) centre exactly on y = 0.
constexpr Window lower_window{-63.5 / 64, 0.5 / 64};
constexpr Window upper_window{-0.5 / 64, 63.5 / 64};

}  // namespace

TEST(BasinMask, PureTwistKeepsClosedHalf) {
    const auto s = parse_map_spec("k_dehn=1");
    for (long long horizon : {0LL, 10LL, 1000LL}) {
        const auto m = compute_basin_mask(s, HalfSign::lower, horizon, {-2, 2}, 32, 64);
        for (int j = 0; j < m.ny; ++j)
            for (int i = 0; i < m.nx; ++i) EXPECT_EQ(m.at(i, j), m.y_center(j) <= 0.0);
    }
    const auto prof = compute_height_profile(compute_basin_mask(s, HalfSign::lower, 100, lower_window, 32, 64));
    EXPECT_TRUE(prof.defined_everywhere);
    EXPECT_EQ(prof.oscillation, 0.0);
    for (double v : prof.values) EXPECT_EQ(v, 0.0);
    const auto up = compute_height_profile(compute_basin_mask(s, HalfSign::upper, 100, upper_window, 32, 64));
    for (double v : up.values) EXPECT_EQ(v, 0.0);
}

TEST(BasinMask, DriftEmptiesLowerHalf) {
    const auto s = parse_map_spec("k_dehn=1\nv.const=0.25");
    const auto m = compute_basin_mask(s, HalfSign::lower, 100, {-2, 2}, 32, 32);
    EXPECT_TRUE(m.empty());
    EXPECT_THROW(compute_height_profile(m), EmptyMaskError);
    // the upper half is kept entire
    const auto u = compute_basin_mask(s, HalfSign::upper, 100, {-2, 2}, 32, 32);
    EXPECT_EQ(u.count(), 32u * 16u);
}

TEST(BasinMask, MatchesDirectSimulation) {
    const double K = 0.5;
    const auto s = chirikov(K);
    const int n = 64;
    const long long horizon = 1000;
    const auto m = compute_basin_mask(s, HalfSign::lower, horizon, {-2, 2}, n, n);
    std::size_t mismatches = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double x = (i + 0.5) / n, y = -2 + (j + 0.5) * 4.0 / n;
            bool inside = y <= 0;
            for (long long t = 0; inside && t < horizon; ++t) {
                x += y;
                x -= std::floor(x);
                y += K / (2 * M_PI) * std::sin(2 * M_PI * x);
                inside = y <= 0;
            }
            if (inside != m.at(i, j)) ++mismatches;
        }
    // the library reduces x + k frac(y) rather than x + y; rounding may flip chaotic border cells
    EXPECT_LE(mismatches, static_cast<std::size_t>(n * n / 200));
    const auto prof = compute_height_profile(m);
    EXPECT_TRUE(prof.defined_everywhere);
}

TEST(BasinMask, HorizonMonotone) {
    const auto s = chirikov(2.0);
    const auto a = compute_basin_mask(s, HalfSign::lower, 50, {-3, 1}, 48, 48);
    const auto b = compute_basin_mask(s, HalfSign::lower, 400, {-3, 1}, 48, 48);
    for (std::size_t c = 0; c < a.cells.size(); ++c)
        if (b.cells[c]) EXPECT_TRUE(a.cells[c]);
    EXPECT_LE(b.count(), a.count());
}

TEST(BasinMask, TwoSidedIsSubsetOfOneSided) {
    const auto s = chirikov(1.2);
    const auto one = compute_basin_mask(s, HalfSign::upper, 300, {-1, 3}, 48, 48);
    const auto two = compute_basin_mask(s, HalfSign::upper, 300, {-1, 3}, 48, 48, true);
    for (std::size_t c = 0; c < one.cells.size(); ++c)
        if (two.cells[c]) EXPECT_TRUE(one.cells[c]);
}

TEST(BasinMask, PositiveInvarianceProxy) {
    const auto s = chirikov(0.8);
    const int n = 96;
    const auto now = compute_basin_mask(s, HalfSign::lower, 500, {-2, 1}, n, n);
    const auto prev = compute_basin_mask(s, HalfSign::lower, 499, {-2, 1}, n, n);
    std::size_t total = 0, ok = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!now.at(i, j)) continue;
            ++total;
            const auto img = step_cylinder(s, {now.x_center(i), now.y_center(j)});
            const auto c = prev.cell_of(img);
            if (c < 0) {
                ++ok;  // left through the bottom of the window
                continue;
            }
            const int ci = static_cast<int>(c % n), cj = static_cast<int>(c / n);
            bool hit = false;
            for (int dj = -1; dj <= 1 && !hit; ++dj)
                for (int di = -1; di <= 1 && !hit; ++di) {
                    const int nj = cj + dj;
                    if (nj < 0 || nj >= n) continue;
                    hit = prev.at((ci + di + n) % n, nj);
                }
            if (hit) ++ok;
        }
    ASSERT_GT(total, 0u);
    EXPECT_GE(static_cast<double>(ok) / total, 0.99);
}

TEST(HeightProfile, OscillationBoundedInBoundedRegime) {
    const auto s = chirikov(0.5);
    const auto c = compute_constants(s);
    const auto prof = compute_height_profile(compute_basin_mask(s, HalfSign::lower, 2000, {-2, 2}, 128, 128));
    EXPECT_TRUE(prof.defined_everywhere);
    EXPECT_LE(prof.oscillation, 2 * c.M_f);
}

TEST(HeightProfile, TranslationOffset) {
    const auto s = parse_map_spec("k_dehn=1");
    const auto c = compute_constants(s);
    const auto lower = compute_height_profile(compute_basin_mask(s, HalfSign::lower, 10, lower_window, 16, 64));
    const long n = translation_offset(lower, c);
    EXPECT_EQ(n, 6);  // floor(0 + 3 + 2) + 1
    EXPECT_GT(lower.extreme() + n, c.M_Dehn);
    const auto upper = compute_height_profile(compute_basin_mask(s, HalfSign::upper, 10, upper_window, 16, 64));
    EXPECT_EQ(translation_offset(upper, c), -6);
    const auto moved = shifted(compute_basin_mask(s, HalfSign::lower, 10, lower_window, 16, 64), n);
    EXPECT_EQ(moved.shift, 6);
    EXPECT_DOUBLE_EQ(moved.window.y_max, lower_window.y_max + 6);
}

TEST(HeightProfile, UndefinedColumnsAreNan) {
    BasinMask m;
    m.window = {-1, 1};
    m.nx = 2;
    m.ny = 2;
    m.cells = {1, 0, 0, 0};
    const auto prof = compute_height_profile(m);
    EXPECT_FALSE(prof.defined_everywhere);
    EXPECT_EQ(prof.values[0], -0.5);
    EXPECT_TRUE(std::isnan(prof.values[1]));
    std::ostringstream out;
    write_profile_csv(out, prof);
    EXPECT_EQ(out.str(), "column,x,value\n0,0.25,-0.5\n1,0.75,nan\n");
}

TEST(SelectUnbounded, DropsIslands) {
    BasinMask m;
    m.window = {-1, 0};
    m.nx = 4;
    m.ny = 4;
    m.sign = HalfSign::lower;
    // bottom row full, an island at (2, 3), a column stub at (0, 1)
    m.cells = {1, 1, 1, 1,
               1, 0, 0, 0,
               0, 0, 0, 0,
               0, 0, 1, 0};
    const auto kept = select_unbounded_components(m);
    EXPECT_TRUE(kept.heuristic_unbounded);
    EXPECT_EQ(kept.count(), 5u);
    EXPECT_FALSE(kept.at(2, 3));
    EXPECT_TRUE(kept.at(0, 1));
}

TEST(BasinMask, Errors) {
    const auto s = parse_map_spec("k_dehn=1");
    EXPECT_THROW(compute_basin_mask(s, HalfSign::lower, 10, {0.5, 2}, 8, 8), ConfigError);
    EXPECT_THROW(compute_basin_mask(s, HalfSign::lower, 10, {-2, -0.5}, 8, 8), ConfigError);
    EXPECT_THROW(compute_basin_mask(s, HalfSign::lower, -1, {-2, 2}, 8, 8), ConfigError);
    EXPECT_THROW(compute_basin_mask(s, HalfSign::lower, 10, {-2, 2}, 0, 8), ConfigError);
}

TEST(BasinMask, PgmLayout) {
    const auto m = compute_basin_mask(parse_map_spec("k_dehn=1"), HalfSign::lower, 1, {-1, 1}, 2, 2);
    std::ostringstream out;
    write_mask_pgm(out, m);
    const std::string expected = std::string("P5\n2 2\n255\n") + std::string(2, '\0') + std::string(2, '\xff');
    EXPECT_EQ(out.str(), expected);
}
