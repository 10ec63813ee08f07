#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "relent/relaxation_systems.hpp"

using namespace relent;

namespace {

RelaxationSystem euler() { return build_system(SystemKind::EulerFriction, make_gamma_law(1.0, 2.0)); }
RelaxationSystem psystem(std::vector<double> c = {0, 1, 0, 1}) {
    return build_system(SystemKind::PSystemDamping, make_polynomial_stress(std::move(c), 3.0));
}
RelaxationSystem visco() { return build_system(SystemKind::ViscoMemory, make_polynomial_stress({0, 1, 0, 1}, 3.0), 1.0); }

Grid torus(int n) { return Grid(n, 0.0, 2 * std::numbers::pi); }

GridField profile_of(const Grid& g, int dim, const std::function<std::vector<double>(double)>& f) {
    GridField out(g, dim);
    for (int i = 0; i < g.cells(); ++i) {
        const auto v = f(g.center(i));
        for (int c = 0; c < dim; ++c) out(c, i) = v[static_cast<std::size_t>(c)];
    }
    return out;
}

}  // namespace

TEST(RelaxationSystem, FluxPointValues) {
    const auto e = euler().flux({1.0, 1.0});
    EXPECT_DOUBLE_EQ(e[0], 1.0);
    EXPECT_DOUBLE_EQ(e[1], 2.0);
    const auto p = psystem({0, 0, 0, 1}).flux({2.0, 0.0});
    EXPECT_DOUBLE_EQ(p[0], 0.0);
    EXPECT_DOUBLE_EQ(p[1], -8.0);
}

TEST(RelaxationSystem, SourceVanishesOnEquilibrium) {
    for (double v : euler().stiff_source({1.7, 0.0})) EXPECT_EQ(v, 0.0);
    for (double v : psystem().stiff_source({0.3, 0.0})) EXPECT_EQ(v, 0.0);
    for (double v : visco().stiff_source({0.3, -0.2, 0.0})) EXPECT_EQ(v, 0.0);
}

TEST(RelaxationSystem, RejectsWrongConstitutiveLaw) {
    EXPECT_THROW(build_system(SystemKind::EulerFriction, make_polynomial_stress({0, 1}, 1.0)), DomainError);
    EXPECT_THROW(build_system(SystemKind::PSystemDamping, make_gamma_law(1.0, 2.0)), DomainError);
    EXPECT_THROW(build_system(SystemKind::ViscoMemory, make_polynomial_stress({0, 1}, 1.0), 0.0), DomainError);
}

TEST(RelaxationSystem, VacuumIsInadmissible) {
    EXPECT_THROW(euler().check_admissible({0.0, 1.0}, 1e-10), DomainError);
    EXPECT_NO_THROW(euler().check_admissible({1.0, 1.0}, 1e-10));
}

TEST(RelaxationSystem, WaveSpeedsAreJacobianEigenvalues) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(0.2, 3.0), b(-1.5, 1.5);
    for (const auto& sys : {euler(), psystem(), visco()}) {
        for (int k = 0; k < 50; ++k) {
            State U{a(rng), b(rng)};
            if (sys.state_dim() == 3) U = {b(rng), b(rng), b(rng)};
            const double eps = 0.3;
            Eigen::EigenSolver<Eigen::MatrixXd> es(sys.flux_jacobian(U, eps));
            std::vector<double> ev;
            for (int i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()[i].real());
            std::sort(ev.begin(), ev.end());
            const auto speeds = sys.wave_speeds(U, eps);
            ASSERT_EQ(speeds.size(), ev.size());
            for (std::size_t i = 0; i < ev.size(); ++i) {
                EXPECT_NEAR(speeds[i], ev[i], 1e-9 * (1 + std::abs(ev[i]))) << sys.name();
            }
        }
    }
}

TEST(RelaxationSystem, JacobianMatchesFiniteDifferenceOfFlux) {
    const double eps = 0.25, h = 1e-6;
    for (const auto& sys : {euler(), psystem(), visco()}) {
        const State U = sys.state_dim() == 3 ? State{0.3, -0.4, 0.2} : State{1.3, 0.4};
        const auto J = sys.flux_jacobian(U, eps);
        for (int k = 0; k < sys.state_dim(); ++k) {
            State up = U, um = U;
            up[static_cast<std::size_t>(k)] += h;
            um[static_cast<std::size_t>(k)] -= h;
            const auto fp = sys.total_flux(up, eps), fm = sys.total_flux(um, eps);
            for (int j = 0; j < sys.state_dim(); ++j) {
                const auto ju = static_cast<std::size_t>(j);
                EXPECT_NEAR(J(j, k), (fp[ju] - fm[ju]) / (2 * h), 1e-6) << sys.name();
            }
        }
    }
}

TEST(Reconstruction, ConstantProfileHasZeroMomentum) {
    const LimitSystem limit(euler());
    const auto prof = profile_of(Grid(32, 0, 1), 1, [](double) { return std::vector<double>{2.0}; });
    const auto bar = limit.reconstruct_bar_state(prof, 0.1);
    for (int i = 0; i < 32; ++i) EXPECT_EQ(bar(1, i), 0.0);
    const auto src = limit.bar_error_source(prof, 0.1);
    for (int i = 0; i < 32; ++i) EXPECT_EQ(src(1, i), 0.0);
}

namespace {

double darcy_deviation(int n, double eps) {
    const LimitSystem limit(euler());
    const Grid g = torus(n);
    const auto prof = profile_of(g, 1, [](double x) { return std::vector<double>{2.0 + std::sin(x)}; });
    const auto bar = limit.reconstruct_bar_state(prof, eps);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = g.center(i);
        // mb = -eps d/dx (rhob^2) = -2 eps rhob cos x
        worst = std::max(worst, std::abs(bar(1, i) + 2 * eps * (2.0 + std::sin(x)) * std::cos(x)));
    }
    return worst;
}

}  // namespace

TEST(Reconstruction, DarcyMomentumSecondOrder) {
    const double eps = 0.1;
    const double coarse = darcy_deviation(64, eps), fine = darcy_deviation(128, eps);
    EXPECT_LT(coarse, 4 * eps * 1e-2);
    EXPECT_NEAR(coarse / fine, 4.0, 0.2);
}

TEST(Reconstruction, LinearInEps) {
    const LimitSystem limit(euler());
    const auto prof = profile_of(torus(40), 1, [](double x) { return std::vector<double>{2.0 + std::sin(x)}; });
    const auto a = limit.reconstruct_bar_state(prof, 0.05);
    const auto b = limit.reconstruct_bar_state(prof, 0.1);
    for (int i = 0; i < 40; ++i) EXPECT_EQ(b(1, i), 2.0 * a(1, i));
}

namespace {

double psystem_source_deviation(int n, double eps) {
    const LimitSystem limit(psystem({0, 1}));
    const Grid g = torus(n);
    const auto prof = profile_of(g, 1, [](double x) { return std::vector<double>{std::sin(x)}; });
    const auto src = limit.bar_error_source(prof, eps);
    double worst = 0.0;
    // tau(u) = u: vb_t = eps d/dx (u_xx) = -eps cos x
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(src(1, i) + eps * std::cos(g.center(i))));
    return worst;
}

}  // namespace

TEST(ErrorSource, PSystemLinearStressSymbolicOracle) {
    const double coarse = psystem_source_deviation(64, 0.1), fine = psystem_source_deviation(128, 0.1);
    EXPECT_LT(coarse, 1e-2);
    EXPECT_NEAR(coarse / fine, 4.0, 0.2);
}

TEST(ErrorSource, BarStateSatisfiesConservedEquationExactly) {
    // the first component of the bar state solves its equation with no defect
    for (const auto& sys : {euler(), psystem()}) {
        const LimitSystem limit(sys);
        const Grid g(64, 0, 1);
        const bool is_euler = sys.kind() == SystemKind::EulerFriction;
        const auto prof = profile_of(g, 1, [&](double x) {
            return std::vector<double>{(is_euler ? 2.0 : 0.0) + 0.5 * std::sin(2 * std::numbers::pi * x)};
        });
        const double eps = 0.07;
        const auto bar = limit.reconstruct_bar_state(prof, eps);
        const auto res = semi_discrete_residual(sys, bar, limit.bar_time_derivative(prof, eps), eps);
        for (int i = 0; i < 64; ++i) EXPECT_NEAR(res(0, i), 0.0, 1e-10) << sys.name();
    }
}

TEST(Limit, ComponentNames) {
    EXPECT_EQ(LimitSystem(euler()).state_dim(), 1);
    EXPECT_EQ(LimitSystem(visco()).state_dim(), 2);
    EXPECT_EQ(euler().component_names().size(), 2u);
    EXPECT_EQ(visco().relaxing_component(), 2);
}
