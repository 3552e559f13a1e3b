#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dtrot/rotation.hpp"
#include "test_util.hpp"

using namespace dtrot;
using dtrot::testing::chirikov;
using dtrot::testing::random_spec;

TEST(Rotation, Checkpoints) {
    EXPECT_EQ(rotation_checkpoints(10000), (std::vector<long long>{100, 1000, 10000}));
    EXPECT_EQ(rotation_checkpoints(50), (std::vector<long long>{50}));
    EXPECT_EQ(rotation_checkpoints(2500), (std::vector<long long>{100, 1000, 2500}));
}

TEST(Rotation, GridSeedsAreCellCentres) {
    const auto seeds = grid_seeds(16);
    ASSERT_EQ(seeds.size(), 16u);
    EXPECT_DOUBLE_EQ(seeds[0].x, 0.125);
    EXPECT_DOUBLE_EQ(seeds[0].y, 0.125);
    EXPECT_DOUBLE_EQ(seeds[5].x, 0.375);
    EXPECT_DOUBLE_EQ(seeds[5].y, 0.375);
    EXPECT_EQ(grid_seeds(10).size(), 10u);
}

TEST(Rotation, PureTwistIsZero) {
    for (int k = 1; k <= 3; ++k) {
        MapSpec s;
        s.k_dehn = k;
        const auto est = estimate_rotation_interval(s, 64, 2000);
        EXPECT_EQ(est.lower, 0.0);
        EXPECT_EQ(est.upper, 0.0);
    }
}

TEST(Rotation, RigidDriftIsExact) {
    for (int k = 1; k <= 3; ++k) {
        MapSpec s;
        s.k_dehn = k;
        s.v_const = 0.25;
        const auto est = estimate_rotation_interval(s, 64, 2000);
        EXPECT_NEAR(est.lower, 0.25, 1e-12);
        EXPECT_NEAR(est.upper, 0.25, 1e-12);
        for (const auto& [lo, hi] : est.envelope) {
            EXPECT_NEAR(lo, 0.25, 1e-12);
            EXPECT_NEAR(hi, 0.25, 1e-12);
        }
    }
}

TEST(Rotation, PowerAndShiftTransformInterval) {
    // rho(f^m + (0, n)) = m rho(f) + n, within the 2 / n_iter averaging error
    const long long n_iter = 2000;
    const MapSpec drift = parse_map_spec("k_dehn=1\nv.const=0.25");
    for (const MapSpec& s : {parse_map_spec("k_dehn=1"), drift, chirikov(0.5)}) {
        const auto base = estimate_rotation_interval(s, 64, n_iter);
        for (int m = 1; m <= 3; ++m)
            for (long n = -1; n <= 1; ++n) {
                const auto g = estimate_rotation_interval(s, 64, n_iter, {1, m, n});
                EXPECT_NEAR(g.lower, m * base.lower + n, 2.0 / n_iter) << "m=" << m << " n=" << n;
                EXPECT_NEAR(g.upper, m * base.upper + n, 2.0 / n_iter) << "m=" << m << " n=" << n;
            }
    }
}

TEST(Rotation, BoundedRegimeAveragesShrink) {
    // K = 0.5: displacement stays bounded, so averages are O(1/n)
    const auto est = estimate_rotation_interval(chirikov(0.5), 256, 10000);
    EXPECT_LE(std::max(std::abs(est.lower), std::abs(est.upper)), 1e-3);
    EXPECT_LE(est.envelope.back().second - est.envelope.back().first,
              est.envelope.front().second - est.envelope.front().first);
}

TEST(Rotation, ThreadCountDoesNotChangeResult) {
    const auto s = chirikov(5.0);
    const auto a = estimate_rotation_interval(s, 100, 3000, {1});
    const auto b = estimate_rotation_interval(s, 100, 3000, {4});
    EXPECT_EQ(a.averages, b.averages);
}

TEST(Rotation, CsvLayout) {
    const auto est = estimate_rotation_interval(parse_map_spec("k_dehn=1\nv.const=0.5"), 4, 10);
    std::ostringstream out;
    write_rotation_csv(out, est);
    EXPECT_EQ(out.str(), "seed,x,y,average\n0,0.25,0.25,0.5\n1,0.75,0.25,0.5\n2,0.25,0.75,0.5\n3,0.75,0.75,0.5\n");
}

TEST(Rotation, Errors) {
    const auto s = parse_map_spec("k_dehn=1");
    EXPECT_THROW(estimate_rotation_interval(s, 4, 0), ConfigError);
    EXPECT_THROW(estimate_rotation_interval(s, 4, 10, {1, 0, 0}), ConfigError);
    EXPECT_THROW(lebesgue_rotation_number(s, MeasureMethod::quadrature, 15), ConfigError);
}

namespace {

// Independent midpoint rule with a non-power-of-two grid and direct trig calls.
double oracle_mean(const MapSpec& s, int n) {
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const double y = (j + 0.5) / n;
        double hy = 0.0;
        for (const auto& t : s.h.terms())
            hy += t.sin_amp * std::sin(2 * M_PI * t.frequency * y) + t.cos_amp * std::cos(2 * M_PI * t.frequency * y);
        for (int i = 0; i < n; ++i) {
            const double u = (i + 0.5) / n + s.k_dehn * y + hy;
            double v = s.v_const;
            for (const auto& t : s.v.terms())
                v += t.sin_amp * std::sin(2 * M_PI * t.frequency * u) + t.cos_amp * std::cos(2 * M_PI * t.frequency * u);
            total += v;
        }
    }
    return total / (static_cast<double>(n) * n);
}

}  // namespace

TEST(LebesgueRotation, PureTwistIsZero) {
    const auto r = lebesgue_rotation_number(parse_map_spec("k_dehn=1"), MeasureMethod::quadrature, 64);
    EXPECT_EQ(r.value, 0.0);
}

TEST(LebesgueRotation, DriftOfSineMap) {
    const auto s = parse_map_spec("k_dehn=1\nv.sin.1=0.5\nv.const=0.1");
    const auto q = lebesgue_rotation_number(s, MeasureMethod::quadrature, 1024);
    EXPECT_NEAR(q.value, 0.1, 1e-3);
    EXPECT_NEAR(oracle_mean(s, 1000), 0.1, 1e-3);
    EXPECT_LE(std::abs(q.value - 0.1), q.std_error + 1e-15);
}

TEST(LebesgueRotation, MonteCarloZeroMean) {
    const auto s = parse_map_spec("k_dehn=2\nh.sin.1=0.3\nv.sin.1=0.5");
    const auto mc = lebesgue_rotation_number(s, MeasureMethod::monte_carlo, 1000000, 7);
    EXPECT_LE(std::abs(mc.value), 3 * mc.std_error);
    EXPECT_GT(mc.std_error, 0.0);
    const auto again = lebesgue_rotation_number(s, MeasureMethod::monte_carlo, 1000000, 7);
    EXPECT_EQ(mc.value, again.value);
}

TEST(LebesgueRotation, QuadratureRecoversConstantTerm) {
    // the oscillating part integrates to zero over the torus
    std::mt19937_64 rng(31);
    for (int t = 0; t < 10; ++t) {
        const auto s = random_spec(rng);
        const auto q = lebesgue_rotation_number(s, MeasureMethod::quadrature, 128);
        EXPECT_LE(std::abs(q.value - s.v_const), q.std_error + 1e-12) << to_map_text(s);
        EXPECT_NEAR(q.value, oracle_mean(s, 100), 1e-9);
    }
}

TEST(VerticalDisplacement, MatchesStep) {
    const auto s = parse_map_spec("k_dehn=2\nh.cos.1=0.2\nv.sin.1=0.4\nv.const=0.05");
    for (double x : {0.1, 0.4, 0.9})
        for (double y : {-1.3, 0.0, 0.7})
            EXPECT_NEAR(vertical_displacement(s, x, y), step_cylinder(s, {x, y}).y - y, 1e-12);
}
