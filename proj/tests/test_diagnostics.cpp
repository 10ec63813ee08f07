#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "relent/diagnostics.hpp"
#include "relent/solvers.hpp"

using namespace relent;

namespace {

RelaxationSystem euler() { return build_system(SystemKind::EulerFriction, make_gamma_law(1.0, 2.0)); }

GridField sine_profile(const Grid& g, double mean, double amp) {
    GridField f(g, 1);
    for (int i = 0; i < g.cells(); ++i) f(0, i) = mean + amp * std::sin(2 * std::numbers::pi * g.center(i));
    return f;
}

EntropyLedger synthetic_ledger(double eps, const std::function<double(double)>& phi, int rows, double T) {
    EntropyLedger L;
    L.eps = eps;
    for (int k = 0; k <= rows; ++k) {
        const double t = T * k / rows;
        L.times.push_back(t);
        L.phi.push_back(phi(t));
        L.diss_cum.push_back(0.0);
        L.Q_cum.push_back(0.0);
        L.E_cum.push_back(0.0);
        L.res_max.push_back(0.0);
        L.mass_err.push_back(0.0);
    }
    return L;
}

}  // namespace

TEST(Phi, ZeroAtBarState) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    const auto prof = sine_profile(Grid(64, 0, 1), 2.0, 0.5);
    const auto bar = limit.reconstruct_bar_state(prof, 0.1);
    EXPECT_EQ(compute_phi(bar, bar, sys), 0.0);
}

TEST(Phi, SinglePerturbedCell) {
    const auto sys = euler();
    const Grid g(32, 0, 1);
    GridField bar(g, 2), state(g, 2);
    for (int i = 0; i < 32; ++i) {
        bar(0, i) = state(0, i) = 1.0;
        bar(1, i) = state(1, i) = 0.0;
    }
    state(0, 7) = 2.0;
    // eta((2,0)|(1,0)) = 4 - 1 - 2 = 1
    EXPECT_DOUBLE_EQ(compute_phi(state, bar, sys), g.dx());
}

TEST(Gronwall, ZeroLedger) {
    const auto L = synthetic_ledger(0.1, [](double) { return 0.0; }, 10, 1.0);
    const auto r = gronwall_audit(L, 0.1);
    EXPECT_EQ(r.C, 0.0);
    EXPECT_TRUE(r.satisfied);
}

TEST(Gronwall, ExponentialGrowthLedger) {
    // phi = eps^4 e^t: phi(0) + eps^4 = 2 eps^4, so the smallest C is e / 2
    const double eps = 0.1;
    const auto L = synthetic_ledger(eps, [eps](double t) { return std::pow(eps, 4) * std::exp(t); }, 1000, 1.0);
    const auto r = gronwall_audit(L, eps);
    EXPECT_NEAR(r.C, std::numbers::e / 2, 1e-12);
    EXPECT_TRUE(r.satisfied);
    EXPECT_FALSE(gronwall_audit(L, eps, 1.0).satisfied);
}

TEST(Gronwall, WindowRestrictsTimes) {
    const auto L = synthetic_ledger(1.0, [](double t) { return t; }, 10, 1.0);
    EXPECT_NEAR(gronwall_audit(L, 1.0, kGronwallCap, std::make_pair(0.0, 0.5)).C, 0.5, 1e-15);
}

TEST(Gronwall, Uniformity) {
    EXPECT_DOUBLE_EQ(gronwall_uniformity({1.0, 1.5, 0.9}), 1.5 / 0.9);
    EXPECT_EQ(gronwall_uniformity({2.0}), 1.0);
    EXPECT_TRUE(std::isinf(gronwall_uniformity({1.0, 0.0})));
}

TEST(FitRate, PureQuarticGivesFour) {
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> v;
    for (double e : eps) v.push_back(std::pow(e, 4));
    const auto f = fit_rate(eps, v);
    EXPECT_NEAR(f.rate, 4.0, 1e-12);
    EXPECT_NEAR(f.constant, 1.0, 1e-10);
}

TEST(FitRate, HigherOrderPerturbation) {
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> v;
    for (double e : eps) v.push_back(3 * std::pow(e, 4) + std::pow(e, 6));
    // Independent least squares in long double. The eps^6 term grows with
    // eps, so the slope sits just above 4.
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double e : eps) {
        const long double x = std::log(static_cast<long double>(e));
        const long double y = std::log(3 * std::pow(static_cast<long double>(e), 4) + std::pow(static_cast<long double>(e), 6));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const long double n = eps.size();
    const double oracle = static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
    const double rate = fit_rate(eps, v).rate;
    EXPECT_NEAR(rate, oracle, 1e-10);
    EXPECT_GT(rate, 4.0);
    EXPECT_LT(rate, 4.01);
}

TEST(FitRate, InvariantUnderRescaling) {
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    const std::vector<double> v{3e-3, 2.2e-4, 1.7e-5, 1.2e-6};
    std::vector<double> w;
    for (double x : v) w.push_back(17.0 * x);
    EXPECT_NEAR(fit_rate(eps, v).rate, fit_rate(eps, w).rate, 1e-12);
}

TEST(FitRate, RejectsTooFewOrNonPositive) {
    EXPECT_THROW(fit_rate({0.1, 0.05, 0.025}, {1, 2, 3}), DomainError);
    EXPECT_THROW(fit_rate({0.1, 0.05, 0.025, 0.0125}, {1, 0, 3, 4}), DomainError);
}

TEST(Hilbert, RegressionRecoversFirstOrderTerm) {
    const std::vector<double> eps{0.1, 0.05, 0.025};
    const std::vector<double> g{1.0, -2.0, 0.5}, h{3.0, 1.0, -1.0};
    std::vector<std::vector<double>> m;
    for (double e : eps) {
        std::vector<double> row;
        for (std::size_t i = 0; i < g.size(); ++i) row.push_back(e * g[i] + e * e * h[i]);
        m.push_back(row);
    }
    const auto m1 = regress_first_order(eps, m);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(m1[i], g[i], 0.1 * std::abs(h[i]) + 1e-15);
}

TEST(Hilbert, ExactBarStatesHaveZeroResidual) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    std::vector<HilbertRun> runs;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto prof = sine_profile(Grid(64, 0, 1), 2.0, 0.5);
        runs.push_back({eps, limit.reconstruct_bar_state(prof, eps), prof});
    }
    const auto rep = hilbert_check(limit, runs, 3);
    for (double r : rep.pointwise_residuals) EXPECT_NEAR(r, 0.0, 1e-12);
    EXPECT_NEAR(rep.window_residuals.back(), 0.0, 1e-12);
    EXPECT_GT(rep.target_norm, 0.0);
}

TEST(Inequality, ConstantBarProfileHasNoQorE) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    const Grid g(32, 0, 1);
    GridField prof(g, 1), state(g, 2);
    for (int i = 0; i < 32; ++i) {
        prof(0, i) = 2.0;
        state(0, i) = 2.0 + 0.1 * std::sin(2 * std::numbers::pi * g.center(i));
        state(1, i) = 0.05;
    }
    const auto I = inequality_integrals(limit, state, prof, 0.1);
    EXPECT_EQ(I.Q, 0.0);
    EXPECT_EQ(I.E, 0.0);
    EXPECT_GT(I.R, 0.0);
    const auto J = inequality_integrals(limit, limit.reconstruct_bar_state(prof, 0.1), prof, 0.1);
    EXPECT_EQ(J.phi, 0.0);
    EXPECT_EQ(J.R, 0.0);
}

TEST(Inequality, AuditOnShortPairedRun) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    const Grid g(64, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.02;
    const auto prof = sine_profile(g, 2.0, 0.5);
    const auto out = run_paired(limit.reconstruct_bar_state(prof, 0.1), prof, limit, 0.1, cfg);
    const auto audit = inequality_audit(out.ledger, 1e-8);
    EXPECT_EQ(audit.residual.size(), out.ledger.size());
    EXPECT_EQ(audit.residual.front(), 0.0);
}

TEST(LedgerCsv, RoundTrip) {
    const auto sys = euler();
    const LimitSystem limit(sys);
    const Grid g(32, 0, 1);
    SolverConfig cfg;
    cfg.t_end = 0.01;
    cfg.output_stride = 5;
    const auto prof = sine_profile(g, 2.0, 0.5);
    const auto L = run_paired(limit.reconstruct_bar_state(prof, 0.1), prof, limit, 0.1, cfg).ledger;
    std::stringstream ss;
    write_ledger_csv(ss, L);
    const auto R = read_ledger_csv(ss);
    EXPECT_GT(L.steps, 0);
    EXPECT_LE(L.mass_step_max, 1e-13);
    EXPECT_EQ(R.system, L.system);
    EXPECT_EQ(R.cells, L.cells);
    EXPECT_EQ(R.steps, L.steps);
    EXPECT_EQ(R.eps, L.eps);
    EXPECT_EQ(R.phi_max, L.phi_max);
    EXPECT_EQ(R.entropy_C, L.entropy_C);
    EXPECT_EQ(R.mass_step_max, L.mass_step_max);
    EXPECT_EQ(R.times, L.times);
    EXPECT_EQ(R.phi, L.phi);
    EXPECT_EQ(R.diss_cum, L.diss_cum);
    EXPECT_EQ(R.Q_cum, L.Q_cum);
    EXPECT_EQ(R.E_cum, L.E_cum);
    EXPECT_EQ(R.res_max, L.res_max);
    EXPECT_EQ(R.mass_err, L.mass_err);
}

TEST(SweepReportText, RoundTripIncludingNaN) {
    SweepReport r;
    r.system = "psystem";
    r.epsilons = {0.1, 0.05};
    r.cells = {32, 128};
    r.phi_T = {1.25e-3, std::numeric_limits<double>::quiet_NaN()};
    r.phi_sup = {2e-3, 3e-4};
    r.gronwall_C = {0.5, 0.6};
    r.entropy_C = {0.0, 1e-3};
    r.exit_codes = {0, 3};
    r.fit = {3.8, 1.5};
    r.fit_sup = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    r.uniformity = 1.2;
    r.partial = true;
    std::stringstream ss;
    write_sweep_report(ss, r);
    const auto s = read_sweep_report(ss);
    EXPECT_EQ(s.system, r.system);
    EXPECT_EQ(s.epsilons, r.epsilons);
    EXPECT_EQ(s.cells, r.cells);
    EXPECT_EQ(s.phi_T[0], r.phi_T[0]);
    EXPECT_TRUE(std::isnan(s.phi_T[1]));
    EXPECT_TRUE(std::isnan(s.fit_sup.rate));
    EXPECT_EQ(s.exit_codes, r.exit_codes);
    EXPECT_EQ(s.fit.rate, 3.8);
    EXPECT_TRUE(s.partial);
}
