#include <gtest/gtest.h>

#include <cmath>

#include "relent/constitutive.hpp"
#include "relent/errors.hpp"

using namespace relent;

TEST(GammaLaw, EnergyAtThreeIsNine) {
    const auto law = make_gamma_law(1.0, 2.0);
    EXPECT_DOUBLE_EQ(law.energy.h(3.0), 9.0);
}

TEST(GammaLaw, IsothermalEnergyVanishesAtOne) {
    const auto law = make_gamma_law(1.0, 1.0);
    EXPECT_DOUBLE_EQ(law.energy.h(1.0), 0.0);
}

TEST(GammaLaw, SecondDerivativeOfEnergy) {
    // k=2, gamma=3: h'' = p'/rho = 2*3*rho^2/rho, so h''(2) = 12
    const auto law = make_gamma_law(2.0, 3.0);
    EXPECT_DOUBLE_EQ(law.energy.d2h(2.0), 12.0);
}

TEST(GammaLaw, RejectsBadParameters) {
    EXPECT_THROW(make_gamma_law(0.0, 2.0), DomainError);
    EXPECT_THROW(make_gamma_law(1.0, 0.5), DomainError);
}

TEST(GammaLaw, EnergyIdentityRhoDhEqualsPPlusH) {
    for (double gamma : {1.0, 1.4, 2.0, 3.0}) {
        const auto law = make_gamma_law(1.3, gamma);
        for (double rho : {0.1, 0.7, 2.0, 9.0}) {
            const double lhs = rho * law.energy.dh(rho);
            const double rhs = law.pressure.p(rho) + law.energy.h(rho);
            EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs)) << "gamma=" << gamma << " rho=" << rho;
        }
    }
}

TEST(GammaLaw, RelativePressureEqualsGammaMinusOneTimesRelativeEnergy) {
    const auto law = make_gamma_law(1.0, 2.0);
    for (double rb : {0.5, 1.0, 3.0}) {
        for (double r : {0.01, 0.4, 1.1, 7.0}) {
            EXPECT_NEAR(law.pressure.relative(r, rb), law.energy.relative(r, rb), 1e-12);
        }
    }
}

TEST(TabulatedPressure, QuadratureEnergyMatchesClosedForm) {
    // p = rho^2 with e(1) = 0: h = rho^2 - rho
    const auto law = make_tabulated_pressure(
        {"square", [](double r) { return r * r; }, [](double r) { return 2 * r; }, [](double) { return 2.0; }});
    EXPECT_EQ(law.energy.derivation(), InternalEnergy::Derivation::Quadrature);
    for (double rho : {0.2, 1.0, 2.5, 6.0}) {
        EXPECT_NEAR(law.energy.h(rho), rho * rho - rho, 1e-10);
        EXPECT_NEAR(law.energy.dh(rho), 2 * rho - 1, 1e-10);
    }
}

TEST(TabulatedPressure, RejectsInconsistentDerivative) {
    TabulatedPressure bad{"bad", [](double r) { return r * r; }, [](double r) { return 3 * r; },
                          [](double) { return 3.0; }};
    EXPECT_THROW(make_tabulated_pressure(bad), DomainError);
}

TEST(RelativeEnergy, ApproachesHalfSecondDerivative) {
    const auto law = make_gamma_law(1.0, 1.4);
    const double rb = 1.7;
    for (double d : {1e-2, 1e-4, 1e-6}) {
        const double ratio = law.energy.relative(rb + d, rb) / (d * d);
        EXPECT_NEAR(ratio, law.energy.d2h(rb) / 2, 2 * d);
    }
}

TEST(RelativeEnergy, NonNegativeAndZeroOnDiagonal) {
    const auto law = make_gamma_law(2.0, 1.4);
    EXPECT_EQ(law.energy.relative(1.3, 1.3), 0.0);
    for (double rb : {0.3, 1.0, 4.0}) {
        for (double r : {0.0, 1e-3, 0.5, 2.0, 100.0}) EXPECT_GE(law.energy.relative(r, rb), 0.0);
    }
}

TEST(HypothesisA, QuadraticLawHoldsWithConstantOne) {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.1 * i);
    const auto r = check_hypothesis_A(make_gamma_law(1.0, 2.0).pressure, grid);
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(r.constant, 1.0, 1e-12);
}

TEST(HypothesisA, IsothermalLawHasZeroConstant) {
    const auto r = check_hypothesis_A(make_gamma_law(1.0, 1.0).pressure, default_density_grid());
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.constant, 0.0);
}

TEST(HypothesisA, ExponentialPressureFailsWithWitness) {
    const auto law = make_tabulated_pressure({"exp", [](double r) { return std::exp(r); },
                                              [](double r) { return std::exp(r); },
                                              [](double r) { return std::exp(r); }});
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(i);
    const auto r = check_hypothesis_A(law.pressure, grid);
    EXPECT_FALSE(r.holds);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_GT(*r.witness, kHypothesisACap);
}

TEST(HypothesisB, ExactClaimHolds) {
    const auto r = check_hypothesis_B(make_gamma_law(2.0, 3.0).pressure, 3.0, 2.0, default_tail_grid());
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(r.residual, 0.0, 1e-12);
}

TEST(HypothesisB, WrongExponentFails) {
    const auto r = check_hypothesis_B(make_gamma_law(1.0, 2.0).pressure, 3.0, 1.0, default_tail_grid());
    EXPECT_FALSE(r.holds);
}

TEST(HypothesisB, LowerOrderTermDecaysOnTail) {
    const auto law = make_tabulated_pressure({"rho2+rho", [](double r) { return r * r + r; },
                                              [](double r) { return 2 * r + 1; }, [](double) { return 2.0; }});
    const auto tail = default_tail_grid();
    const auto r = check_hypothesis_B(law.pressure, 2.0, 1.0, tail);
    EXPECT_TRUE(r.holds);
    // ratio (2 rho + 1) / (2 rho)
    EXPECT_NEAR(r.residual, 1.0 / (2.0 * tail.back()), 1e-12);
    for (std::size_t i = 1; i < r.residuals.size(); ++i) EXPECT_LE(r.residuals[i], r.residuals[i - 1]);
}

TEST(GrowthH, CubicStress) {
    const auto cubic = make_polynomial_stress({0, 0, 0, 1}, 3.0);
    EXPECT_TRUE(check_growth_H(cubic, default_tail_grid()).holds);
    const auto wrong = make_polynomial_stress({0, 0, 0, 1}, 2.0);
    EXPECT_FALSE(check_growth_H(wrong, default_tail_grid()).holds);
}

TEST(GrowthH, LinearPlusArctan) {
    const StressLaw s(TabulatedStress{"u+atan", [](double u) { return u + std::atan(u); },
                                      [](double u) { return 1 + 1 / (1 + u * u); },
                                      [](double u) { return -2 * u / ((1 + u * u) * (1 + u * u)); }},
                      1.0);
    EXPECT_TRUE(check_growth_H(s, default_tail_grid()).holds);
}

TEST(StressLaw, StoredEnergyIsAntiderivative) {
    const auto tau = make_polynomial_stress({0, 1, 0, 1}, 3.0);
    EXPECT_DOUBLE_EQ(tau.energy(2.0), 2.0 + 4.0);
    EXPECT_DOUBLE_EQ(tau.tau(2.0), 10.0);
    EXPECT_DOUBLE_EQ(tau.dtau(2.0), 13.0);
    // W(2|0) for u^3 is 2^4/4
    EXPECT_DOUBLE_EQ(make_polynomial_stress({0, 0, 0, 1}, 3.0).relative_energy(2.0, 0.0), 4.0);
}
