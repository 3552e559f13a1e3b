#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dtrot/constants.hpp"
#include "test_util.hpp"

using namespace dtrot;
using dtrot::testing::random_spec;

namespace {

void expect_ledger(const ConstantsReport& r, double A, double B, double V, double Mf, double Md, double Mp, double mD,
                   double M0, double M1, double M) {
    EXPECT_NEAR(r.A_f, A, 1e-12);
    EXPECT_NEAR(r.B_f, B, 1e-12);
    EXPECT_NEAR(r.V_f, V, 1e-12);
    EXPECT_NEAR(r.M_f, Mf, 1e-12);
    EXPECT_NEAR(r.M_Dehn, Md, 1e-12);
    EXPECT_NEAR(r.M_prime, Mp, 1e-12);
    EXPECT_NEAR(r.m_D, mD, 1e-12);
    EXPECT_NEAR(r.M0, M0, 1e-12);
    EXPECT_NEAR(r.M1, M1, 1e-12);
    EXPECT_NEAR(r.M_thm3, M, 1e-12);
    EXPECT_NEAR(r.bound_displacement, 2 * Mp + 8, 1e-12);
    EXPECT_NEAR(r.bound_band, 4 * Mp + 20, 1e-12);
}

}  // namespace

TEST(Constants, PureTwist) {
    const auto r = compute_constants(parse_map_spec("k_dehn=1"));
    expect_ledger(r, 0, 0, 3, 3, 2, 7, 10, 30, 22, 30);
    EXPECT_EQ(r.bound_displacement, 22);
    EXPECT_EQ(r.bound_band, 48);
    EXPECT_FALSE(r.notes.empty());
}

TEST(Constants, SingleHarmonicShear) {
    const auto s = parse_map_spec("k_dehn=2\nh.sin.1=0.3\nv.sin.1=0.5");
    expect_ledger(compute_constants(s), 0.5, 0.3, 1.8, 2.3, 1.15, 5.45, 5.15, 20.3, 18.9, 20.3);
    const auto grid = compute_constants(s, ConstantsMode::grid);
    EXPECT_GE(grid.A_f, 0.5 - 1e-9);
    EXPECT_GE(grid.B_f, 0.3 - 1e-9);
    EXPECT_LT(grid.A_f, 0.6);
}

TEST(Constants, VerticalOnlyK3) {
    const auto s = parse_map_spec("k_dehn=3\nv.cos.1=1.0");
    expect_ledger(compute_constants(s), 1, 0, 1, 2, 2.0 / 3, 14.0 / 3, 10.0 / 3, 50.0 / 3, 52.0 / 3, 52.0 / 3);
    EXPECT_GE(compute_constants(s, ConstantsMode::grid).A_f, 1 - 1e-9);
}

TEST(Constants, FormulaClosureAndBound) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const auto s = random_spec(rng);
        const auto r = compute_constants(s);
        const double A = r.A_f, B = r.B_f, k = s.k_dehn;
        EXPECT_NEAR(r.V_f, (3 + 2 * B) / k, 1e-12);
        EXPECT_NEAR(r.M_f, (3 + 2 * B) / k + A, 1e-12);
        EXPECT_NEAR(r.M_Dehn, (2 + B) / k, 1e-12);
        EXPECT_NEAR(r.M_prime, (5 + 3 * B) / k + A + 2, 1e-12);
        EXPECT_NEAR(r.m_D, (10 + B) / k, 1e-12);
        EXPECT_NEAR(r.M0, (20 + 2 * B) / k + 10, 1e-12);
        EXPECT_NEAR(r.M1, (10 + 6 * B) / k + 2 * A + 12, 1e-12);
        EXPECT_NEAR(r.M_thm3, std::max(r.M0, r.M1), 1e-12);
        EXPECT_LE(r.M_thm3, (20 + 6 * B) / k + 2 * A + 12 + 1e-12);
    }
}

TEST(Constants, GridDominatesClosedForm) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto s = random_spec(rng);
        const auto closed = compute_constants(s);
        const auto grid = compute_constants(s, ConstantsMode::grid);
        EXPECT_GE(grid.A_f, closed.A_f - 1e-9) << to_map_text(s);
        EXPECT_GE(grid.B_f, closed.B_f - 1e-9) << to_map_text(s);
    }
    EXPECT_THROW(compute_constants(parse_map_spec("k_dehn=1"), ConstantsMode::grid, 1), ConfigError);
}

TEST(Constants, DefectsBoundedByReportedConstants) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(-20.0, 20.0);
    for (int t = 0; t < 10; ++t) {
        const auto s = random_spec(rng);
        const auto r = compute_constants(s);
        for (int i = 0; i < 20000; ++i) {
            const PlanePoint z{ux(rng), uy(rng)};
            const auto fz = eval_lift(s, z);
            ASSERT_LE(std::abs(fz.y - z.y), r.A_f + 1e-12);
            ASSERT_LE(std::abs(fz.x - z.x - s.k_dehn * z.y), r.B_f + 1e-12);
        }
    }
}

TEST(Constants, SupBoundAgainstDenseSampling) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto s = random_spec(rng);
        if (s.v.empty()) continue;
        double dense = 0.0;
        for (int i = 0; i < 200000; ++i) dense = std::max(dense, std::abs(s.v(i / 200000.0)));
        const double bound = sup_abs_bound(s.v);
        EXPECT_GE(bound, dense - 1e-12);
        EXPECT_LE(bound, dense + s.v.lipschitz() / 4096.0 + 1e-12);
    }
}

TEST(Constants, MonotoneInDefectsAndTwist) {
    const double grid[] = {0.0, 0.3, 1.0, 2.5};
    for (double A : grid)
        for (double B : grid)
            for (int k = 1; k <= 4; ++k) {
                const auto base = derive_constants(A, B, k);
                for (const auto& bigger : {derive_constants(A + 0.1, B, k), derive_constants(A, B + 0.1, k)}) {
                    EXPECT_GE(bigger.M_thm3, base.M_thm3);
                    EXPECT_GE(bigger.M_prime, base.M_prime);
                    EXPECT_GE(bigger.M_f, base.M_f);
                    EXPECT_GE(bigger.m_D, base.m_D);
                    EXPECT_GE(bigger.M0, base.M0);
                }
                const auto twisted = derive_constants(A, B, k + 1);
                EXPECT_LE(twisted.M_thm3, base.M_thm3);
                EXPECT_LE(twisted.M_prime, base.M_prime);
                EXPECT_LE(twisted.V_f, base.V_f);
                EXPECT_LE(twisted.M_Dehn, base.M_Dehn);
            }
}

TEST(Constants, PowerMapConstantsBoundPowerDefects) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-5.0, 5.0);
    for (int t = 0; t < 10; ++t) {
        const auto s = random_spec(rng);
        for (int q = 1; q <= 3; ++q) {
            const long p = static_cast<long>(t % 3) - 1;
            const auto r = power_map_constants(s, q, p);
            EXPECT_EQ(r.k, q * s.k_dehn);
            const PlanePowerMap g{&s, q, p};
            for (int i = 0; i < 2000; ++i) {
                const PlanePoint z{ux(rng), uy(rng)};
                const auto gz = g(z);
                ASSERT_LE(std::abs(gz.y - z.y), r.A_f + 1e-9);
                ASSERT_LE(std::abs(gz.x - z.x - q * s.k_dehn * z.y), r.B_f + 1e-9);
            }
        }
    }
    // exact drift cancels: f^2 - (0,1) for v.const = 1/2
    const auto half = power_map_constants(parse_map_spec("k_dehn=1\nv.const=0.5"), 2, 1);
    EXPECT_EQ(half.A_f, 0.0);
    EXPECT_THROW(power_map_constants(parse_map_spec("k_dehn=1"), 0, 0), ConfigError);
}

TEST(Constants, TableEndsWithThreshold) {
    std::ostringstream out;
    write_constants_table(out, compute_constants(parse_map_spec("k_dehn=1")));
    const auto text = out.str();
    EXPECT_NE(text.find("# M_prime := "), std::string::npos);
    EXPECT_EQ(text.substr(text.size() - 10), "M_thm3 30\n");
}
