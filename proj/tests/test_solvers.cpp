#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "relent/solvers.hpp"

using namespace relent;

namespace {

const double kTwoPi = 2 * std::numbers::pi;

RelaxationSystem euler() { return build_system(SystemKind::EulerFriction, make_gamma_law(1.0, 2.0)); }
RelaxationSystem psystem() { return build_system(SystemKind::PSystemDamping, make_polynomial_stress({0, 1, 0, 1}, 3.0)); }
RelaxationSystem visco() { return build_system(SystemKind::ViscoMemory, make_polynomial_stress({0, 1, 0, 1}, 3.0), 1.0); }

GridField constant_state(const Grid& g, const State& U) {
    GridField f(g, static_cast<int>(U.size()));
    for (int i = 0; i < g.cells(); ++i) {
        for (std::size_t c = 0; c < U.size(); ++c) f(static_cast<int>(c), i) = U[c];
    }
    return f;
}

GridField sine_profile(const Grid& g, double mean, double amp) {
    GridField f(g, 1);
    for (int i = 0; i < g.cells(); ++i) f(0, i) = mean + amp * std::sin(kTwoPi * g.center(i));
    return f;
}

}  // namespace

TEST(SchemeNames, RoundTrip) {
    for (auto s : {FluxScheme::Rusanov, FluxScheme::HLL, FluxScheme::ApRusanov}) {
        EXPECT_EQ(parse_flux_scheme(to_string(s)), s);
    }
    for (auto s : {SourceScheme::ExactExponential, SourceScheme::ImplicitEuler}) {
        EXPECT_EQ(parse_source_scheme(to_string(s)), s);
    }
    for (auto s : {FluxIntegrator::ForwardEuler, FluxIntegrator::SspRk2}) {
        EXPECT_EQ(parse_flux_integrator(to_string(s)), s);
    }
    for (auto s : {LimitScheme::BackwardEuler, LimitScheme::CrankNicolson}) {
        EXPECT_EQ(parse_limit_scheme(to_string(s)), s);
    }
    EXPECT_THROW(parse_flux_scheme("roe"), ConfigError);
}

TEST(StepRelaxation, ConstantEquilibriumIsFixedOverManySteps) {
    const auto sys = euler();
    const Grid g(64, 0, 1);
    SolverConfig cfg;
    GridField U = constant_state(g, {1.7, 0.0});
    const double eps = 0.05;
    const double dt = stable_dt(U, sys, eps, cfg);
    for (int k = 0; k < 1000; ++k) U = step_relaxation(U, sys, eps, cfg, dt);
    for (int i = 0; i < 64; ++i) {
        EXPECT_NEAR(U(0, i), 1.7, 1e-13 * 1.7);
        EXPECT_EQ(U(1, i), 0.0);
    }
}

TEST(StepRelaxation, ConstantMomentumDecaysExponentially) {
    const auto sys = euler();
    const Grid g(32, 0, 1);
    const double eps = 0.1, m0 = 0.3;
    for (auto flux : {FluxScheme::Rusanov, FluxScheme::HLL, FluxScheme::ApRusanov}) {
        SolverConfig cfg;
        cfg.flux_scheme = flux;
        const GridField U0 = constant_state(g, {2.0, m0});
        const double dt = 0.5 * stable_dt(U0, sys, eps, cfg);
        const GridField U1 = step_relaxation(U0, sys, eps, cfg, dt);
        for (int i = 0; i < 32; ++i) {
            EXPECT_NEAR(U1(0, i), 2.0, 1e-14);
            EXPECT_NEAR(U1(1, i), m0 * std::exp(-dt / (eps * eps)), 1e-14) << to_string(flux);
        }
    }
}

TEST(StepRelaxation, ImplicitEulerSourceFactor) {
    const auto sys = psystem();
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    cfg.source_scheme = SourceScheme::ImplicitEuler;
    const double eps = 0.2;
    const GridField U0 = constant_state(g, {0.1, 1.0});
    const double dt = stable_dt(U0, sys, eps, cfg);
    const GridField U1 = step_relaxation(U0, sys, eps, cfg, dt);
    const double half = 1.0 / (1.0 + dt / (2 * eps * eps));
    EXPECT_NEAR(U1(1, 0), half * half, 1e-14);
}

TEST(StepRelaxation, ConservesMassOnTheTorus) {
    const Grid g(128, 0, 1);
    for (const auto& sys : {euler(), psystem(), visco()}) {
        GridField U(g, sys.state_dim());
        for (int i = 0; i < 128; ++i) {
            const double x = g.center(i);
            U(0, i) = (sys.kind() == SystemKind::EulerFriction ? 2.0 : 0.0) + 0.5 * std::sin(kTwoPi * x);
            U(1, i) = 0.3 * std::cos(kTwoPi * x);
            if (sys.state_dim() == 3) U(2, i) = 0.1 * std::sin(2 * kTwoPi * x);
        }
        const double eps = 0.05;
        SolverConfig cfg;
        for (int k = 0; k < 20; ++k) {
            const double dt = stable_dt(U, sys, eps, cfg);
            const GridField next = step_relaxation(U, sys, eps, cfg, dt);
            for (int c : sys.conserved_components()) {
                const double before = U.integral(c), after = next.integral(c);
                double scale = 0.0;
                for (double v : U.data(c)) scale += std::abs(v) * g.dx();
                EXPECT_LE(std::abs(after - before), 1e-13 * scale) << sys.name() << " component " << c;
            }
            U = next;
        }
    }
}

TEST(StepRelaxation, AbortsAboveCflLimit) {
    const auto sys = euler();
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    const GridField U = constant_state(g, {1.0, 0.0});
    const double dt = stable_dt(U, sys, 0.1, cfg);
    EXPECT_THROW(step_relaxation(U, sys, 0.1, cfg, 1.5 * dt), SolverAbort);
}

TEST(StepRelaxation, AbortsOnVacuum) {
    const auto sys = euler();
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.01;
    GridField U = constant_state(g, {1.0, 0.0});
    for (int i = 0; i < 16; ++i) U(0, i) = 0.0;
    for (int i = 0; i < 32; ++i) U(1, i) = 1.0;
    EXPECT_THROW(run_to(U, sys, 0.1, cfg), SolverAbort);
}

TEST(StableDt, ScalesWithEps) {
    const auto sys = euler();
    const Grid g(64, 0, 1);
    SolverConfig cfg;
    const GridField U = constant_state(g, {2.0, 0.0});
    // Euler speeds are +-sqrt(p'(rho))/eps
    EXPECT_NEAR(stable_dt(U, sys, 0.1, cfg), cfg.cfl * g.dx() * 0.1 / 2.0, 1e-15);
    EXPECT_NEAR(stable_dt(U, sys, 0.05, cfg), 0.5 * stable_dt(U, sys, 0.1, cfg), 1e-15);
}

TEST(EntropyResidual, VanishesAtConstantEquilibrium) {
    const auto sys = euler();
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    const GridField U = constant_state(g, {1.3, 0.0});
    const double dt = stable_dt(U, sys, 0.1, cfg);
    const GridField next = step_relaxation(U, sys, 0.1, cfg, dt);
    for (double r : entropy_residual(U, next, sys, 0.1, dt, cfg)) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(StepLimit, ConstantProfileUnchanged) {
    SolverConfig cfg;
    const Grid g(32, 0, 1);
    const LimitSystem pme(euler());
    const GridField p = constant_state(g, {2.5});
    const GridField q = step_limit(p, pme, cfg, 0.01);
    for (int i = 0; i < 32; ++i) EXPECT_NEAR(q(0, i), 2.5, 1e-15);
    const LimitSystem rate(visco());
    const GridField pv = constant_state(g, {0.1, -0.2});
    const GridField qv = step_limit(pv, rate, cfg, 0.01);
    for (int i = 0; i < 32; ++i) {
        EXPECT_NEAR(qv(0, i), 0.1, 1e-15);
        EXPECT_NEAR(qv(1, i), -0.2, 1e-15);
    }
}

TEST(StepLimit, SmallModeKeepsDecayingBelowNewtonTolerance) {
    // linearised about rho = 2 the sine mode is an eigenvector of the wide stencil,
    // so the amplitude follows the Crank-Nicolson factor down to about 1e-10
    SolverConfig cfg;
    const Grid g(64, 0, 1);
    const LimitSystem pme(euler());
    const double amp0 = 1e-3, dt = 1e-4;
    const int steps = 1000;
    GridField p = sine_profile(g, 2.0, amp0);
    for (int k = 0; k < steps; ++k) p = step_limit(p, pme, cfg, dt);

    const double dx = g.dx();
    const double a = dt * 4.0 * std::pow(std::sin(kTwoPi * dx) / dx, 2);
    const double expected = amp0 * std::pow((1 - a / 2) / (1 + a / 2), steps);
    double amp = 0.0;
    for (int i = 0; i < g.cells(); ++i) amp += 2.0 / g.cells() * (p(0, i) - 2.0) * std::sin(kTwoPi * g.center(i));
    ASSERT_LT(expected, 1e-9);
    EXPECT_NEAR(amp / expected, 1.0, 1e-3);
}

TEST(StepLimit, ConservesMass) {
    SolverConfig cfg;
    const Grid g(64, 0, 1);
    for (auto scheme : {LimitScheme::BackwardEuler, LimitScheme::CrankNicolson}) {
        cfg.limit_scheme = scheme;
        const LimitSystem pme(euler());
        GridField p = sine_profile(g, 2.0, 0.5);
        const double m0 = p.integral(0);
        for (int k = 0; k < 10; ++k) p = step_limit(p, pme, cfg, 1e-3);
        EXPECT_NEAR(p.integral(0), m0, 1e-13 * m0);
    }
}

namespace {

// Independent reference for rho_t = (rho^2)_xx: compact three-point stencil,
// classical RK4 with a small step, on a finer grid; averaged back.
std::vector<double> pme_reference(int coarse, int refine, double t) {
    const int n = coarse * refine;
    const double dx = 1.0 / n;
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = 2.0 + 0.5 * std::sin(kTwoPi * (i + 0.5) * dx);
    auto rhs = [&](const std::vector<double>& v) {
        std::vector<double> out(v.size());
        for (int i = 0; i < n; ++i) {
            const double pl = v[static_cast<std::size_t>((i + n - 1) % n)], pc = v[static_cast<std::size_t>(i)],
                         pr = v[static_cast<std::size_t>((i + 1) % n)];
            out[static_cast<std::size_t>(i)] = (pl * pl - 2 * pc * pc + pr * pr) / (dx * dx);
        }
        return out;
    };
    const int steps = static_cast<int>(std::ceil(t / (0.05 * dx * dx)));
    const double h = t / steps;
    for (int k = 0; k < steps; ++k) {
        auto add = [&](const std::vector<double>& a, const std::vector<double>& b, double s) {
            std::vector<double> o(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] + s * b[i];
            return o;
        };
        const auto k1 = rhs(r), k2 = rhs(add(r, k1, h / 2)), k3 = rhs(add(r, k2, h / 2)), k4 = rhs(add(r, k3, h));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    std::vector<double> point(static_cast<std::size_t>(coarse));
    // sample the reference at the coarse centres (average of the two fine cells around each)
    for (int i = 0; i < coarse; ++i) {
        const int j = i * refine + refine / 2;
        point[static_cast<std::size_t>(i)] = 0.5 * (r[static_cast<std::size_t>(j - 1)] + r[static_cast<std::size_t>(j)]);
    }
    return point;
}

double pme_step_error(int cells, double dt) {
    SolverConfig cfg;
    const LimitSystem pme(euler());
    const Grid g(cells, 0, 1);
    const GridField p = step_limit(sine_profile(g, 2.0, 0.5), pme, cfg, dt);
    const auto ref = pme_reference(cells, 8, dt);
    double worst = 0.0;
    for (int i = 0; i < cells; ++i) worst = std::max(worst, std::abs(p(0, i) - ref[static_cast<std::size_t>(i)]));
    return worst;
}

}  // namespace

TEST(StepLimit, PorousMediaStepMatchesFineExplicitReference) {
    // step small enough that the spatial error dominates
    const double dt = 1e-4;
    const double coarse = pme_step_error(32, dt), fine = pme_step_error(64, dt);
    EXPECT_LT(coarse, 5e-4);
    EXPECT_NEAR(coarse / fine, 4.0, 0.5);
}

TEST(SolveStride2, MatchesDenseSolve) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> off(-1.0, 0.0);
    for (bool periodic : {true, false}) {
        for (int n : {8, 9, 16}) {
            std::vector<double> a(n), b(n), c(n), x(n), r(n);
            for (int i = 0; i < n; ++i) {
                a[i] = off(rng);
                c[i] = off(rng);
                b[i] = 3.0;
                x[i] = std::sin(i + 1.0);
            }
            auto at = [&](int j) -> double {
                if (periodic) return x[(j % n + n) % n];
                return j < 0 || j >= n ? 0.0 : x[j];
            };
            for (int i = 0; i < n; ++i) r[i] = a[i] * at(i - 2) + b[i] * x[i] + c[i] * at(i + 2);
            if (!periodic) {
                for (int i = 0; i < n; ++i) {
                    if (i < 2) a[i] = 0.0;
                    if (i + 2 >= n) c[i] = 0.0;
                }
            }
            const auto sol = solve_stride2(a, b, c, r, periodic);
            for (int i = 0; i < n; ++i) EXPECT_NEAR(sol[i], x[i], 1e-12) << "n=" << n << " periodic=" << periodic;
        }
    }
}

TEST(RunTo, ObserverCountIsCeilStepsOverStride) {
    const auto sys = euler();
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.02;
    cfg.output_stride = 3;
    int calls = 0;
    const auto out = run_to(constant_state(g, {2.0, 0.1}), sys, 0.1, cfg, {[&](const Observation&) { ++calls; }});
    EXPECT_EQ(calls, (out.steps + 2) / 3);
}

TEST(RunTo, ObserversDoNotChangeTheResult) {
    const auto sys = psystem();
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.01;
    GridField U(g, 2);
    for (int i = 0; i < 32; ++i) U(0, i) = 0.3 * std::sin(kTwoPi * g.center(i));
    const auto plain = run_to(U, sys, 0.1, cfg);
    const auto watched = run_to(U, sys, 0.1, cfg, {[](const Observation&) {}});
    GridField manual = U;
    double t = 0.0;
    while (t < cfg.t_end) {
        double dt = stable_dt(manual, sys, 0.1, cfg);
        if (t + dt * (1 + 1e-9) >= cfg.t_end) dt = cfg.t_end - t;
        manual = step_relaxation(manual, sys, 0.1, cfg, dt);
        t += dt;
    }
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 32; ++i) {
            EXPECT_EQ(plain.state(c, i), watched.state(c, i));
            EXPECT_EQ(plain.state(c, i), manual(c, i));
        }
    }
}

TEST(RunPaired, TimesMatchAndStopTimesAreHit) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.01;
    cfg.output_stride = 1000000;
    cfg.stop_times = {0.00337};
    const GridField prof = sine_profile(g, 2.0, 0.5);
    std::vector<double> seen;
    const auto out = run_paired(limit.reconstruct_bar_state(prof, 0.1), prof, limit, 0.1, cfg,
                                {[&](const Observation& o) {
                                    ASSERT_NE(o.limit, nullptr);
                                    EXPECT_EQ(o.state.time(), o.limit->time());
                                    seen.push_back(o.t);
                                }});
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[0], 0.00337);
    EXPECT_EQ(seen[1], 0.01);
    EXPECT_EQ(out.ledger.times.back(), 0.01);
}

TEST(RunPaired, WellPreparedDataStartsAtZeroDistance) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    const Grid g(64, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.005;
    const GridField prof = sine_profile(g, 2.0, 0.5);
    const auto out = run_paired(limit.reconstruct_bar_state(prof, 0.1), prof, limit, 0.1, cfg);
    EXPECT_EQ(out.ledger.phi.front(), 0.0);
    EXPECT_GT(out.ledger.phi_max, 0.0);
    EXPECT_TRUE(out.ledger.consistent());
}
