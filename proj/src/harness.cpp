#include "relent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "relent/errors.hpp"

namespace relent {

namespace fs = std::filesystem;

PointResult run_point(const RunConfig& cfg, double eps, int cells, const std::vector<Observer>& observers) {
    PointResult out;
    out.eps = eps;
    out.cells = cells;
    try {
        const RelaxationSystem sys = build_system(cfg);
        const LimitSystem limit(sys);
        InitialData init = build_initial_data(cfg, limit, eps, cells);
        out.run = run_paired(std::move(init.state), std::move(init.profile), limit, eps, cfg.solver, observers);
        const EntropyLedger& L = out.run->ledger;
        out.gronwall_C = gronwall_audit(L, eps).C;
        if (!(L.entropy_C <= cfg.entropy_cap)) {
            out.exit_code = kExitCertification;
            std::ostringstream os;
            os << "entropy residual constant " << L.entropy_C << " exceeds the cap " << cfg.entropy_cap;
            out.message = os.str();
        }
    } catch (const ConfigError& e) {
        out.exit_code = kExitConfig;
        out.message = e.what();
    } catch (const SolverAbort& e) {
        out.exit_code = kExitAbort;
        out.message = e.what();
    } catch (const DomainError& e) {
        out.exit_code = kExitAbort;
        out.message = e.what();
    }
    return out;
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
    return f;
}

void write_summary(std::ostream& out, const RunConfig& cfg, const PointResult& p) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "system=" << to_string(cfg.system) << "\neps=" << p.eps << "\ncells=" << p.cells
        << "\nt_end=" << cfg.solver.t_end << "\nexit=" << p.exit_code << "\n";
    if (p.run) {
        const auto& L = p.run->ledger;
        double mass = 0.0;
        for (double m : L.mass_err) mass = std::max(mass, m);
        out << "steps=" << p.run->steps << "\nphi_0=" << L.phi.front() << "\nphi_T=" << L.phi.back()
            << "\nphi_max=" << L.phi_max << "\ngronwall_C=" << p.gronwall_C << "\nentropy_C=" << L.entropy_C
            << "\nres_int_max=" << L.res_int_max << "\nK1=" << L.K1 << "\nK2=" << L.K2 << "\nmass_err_max=" << mass << "\nmass_step_max=" << L.mass_step_max
            << "\n";
    }
    if (!p.message.empty()) out << "message=" << p.message << "\n";
}

}  // namespace

RunOutcome cmd_run(const RunConfig& cfg, const std::string& out_dir) {
    RunOutcome out;
    const double eps = cfg.epsilons.front();
    out.point = run_point(cfg, eps, cfg.grid.cells);
    out.exit_code = out.point.exit_code;
    out.message = out.point.message;
    ensure_dir(out_dir);
    if (out.point.run) {
        const RelaxationSystem sys = build_system(cfg);
        const LimitSystem limit(sys);
        const InitialData init = build_initial_data(cfg, limit, eps, cfg.grid.cells);
        write_snapshot((fs::path(out_dir) / "state_initial.csv").string(), init.state, sys.component_names());
        write_snapshot((fs::path(out_dir) / "state_final.csv").string(), out.point.run->state, sys.component_names());
        write_snapshot((fs::path(out_dir) / "limit_final.csv").string(), *out.point.run->limit,
                       limit.component_names());
        auto f = open_out(out_dir, "ledger.csv");
        write_ledger_csv(f, out.point.run->ledger);
    }
    auto s = open_out(out_dir, "summary.txt");
    write_summary(s, cfg, out.point);
    return out;
}

std::vector<PointResult> sweep_points(const RunConfig& cfg, int workers) {
    const std::size_t n = cfg.epsilons.size();
    std::vector<PointResult> points(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            const double eps = cfg.epsilons[k];
            points[k] = run_point(cfg, eps, sweep_cells(cfg, eps));
        }
    };
    const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return points;
}

SweepReport summarize_sweep(const RunConfig& cfg, const std::vector<PointResult>& points) {
    SweepReport r;
    r.system = to_string(cfg.system);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> fit_eps, fit_T, fit_sup;
    for (const auto& p : points) {
        r.epsilons.push_back(p.eps);
        r.cells.push_back(p.cells);
        r.exit_codes.push_back(p.exit_code);
        if (p.exit_code == kExitAbort || p.exit_code == kExitConfig) r.partial = true;
        if (p.run) {
            const auto& L = p.run->ledger;
            r.phi_T.push_back(L.phi.back());
            r.phi_sup.push_back(L.phi_max);
            r.gronwall_C.push_back(p.gronwall_C);
            r.entropy_C.push_back(L.entropy_C);
            r.ledgers.push_back(L);
            fit_eps.push_back(p.eps);
            fit_T.push_back(L.phi.back());
            fit_sup.push_back(L.phi_max);
        } else {
            r.phi_T.push_back(nan);
            r.phi_sup.push_back(nan);
            r.gronwall_C.push_back(nan);
            r.entropy_C.push_back(nan);
        }
    }
    auto fit_or_nan = [&](const std::vector<double>& v) {
        try {
            return fit_rate(fit_eps, v);
        } catch (const DomainError&) {
            return RateFit{nan, nan};
        }
    };
    r.fit = fit_or_nan(fit_T);
    r.fit_sup = fit_or_nan(fit_sup);
    std::vector<double> Cs;
    for (const auto& p : points) {
        if (p.run) Cs.push_back(p.gronwall_C);
    }
    r.uniformity = gronwall_uniformity(Cs);
    return r;
}

SweepOutcome cmd_sweep(const RunConfig& cfg, const std::string& out_dir, int workers) {
    SweepOutcome out;
    if (cfg.epsilons.size() < 4) {
        out.exit_code = kExitConfig;
        out.message = "a sweep needs at least four eps values for the rate fit";
        return out;
    }
    out.points = sweep_points(cfg, workers);
    out.report = summarize_sweep(cfg, out.points);
    ensure_dir(out_dir);
    for (std::size_t k = 0; k < out.points.size(); ++k) {
        if (!out.points[k].run) continue;
        auto f = open_out(out_dir, "ledger_" + std::to_string(k) + ".csv");
        write_ledger_csv(f, out.points[k].run->ledger);
    }
    auto f = open_out(out_dir, "sweep_report.txt");
    write_sweep_report(f, out.report);

    bool abort = false, cert = false;
    for (const auto& p : out.points) {
        abort = abort || p.exit_code == kExitAbort || p.exit_code == kExitConfig;
        cert = cert || p.exit_code == kExitCertification;
        if (p.exit_code != kExitOk && out.message.empty()) {
            std::ostringstream os;
            os << "eps=" << p.eps << ": " << p.message;
            out.message = os.str();
        }
    }
    out.exit_code = abort ? kExitAbort : cert ? kExitCertification : kExitOk;
    return out;
}

// ---------------------------------------------------------------------------

bool CheckReport::passed() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed || !i.asserted; });
}

const CheckItem& CheckReport::find(const std::string& name) const {
    for (const auto& i : items) {
        if (i.name == name) return i;
    }
    throw DomainError("no check item named " + name);
}

namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

constexpr const char* kCheckHeader = "name,value,threshold,status,kind";
constexpr double kIdentityTolerance = 1e-12;
constexpr double kConsistencyTolerance = 1e-6;
constexpr double kHessianTolerance = 1e-8;

// |a - b| / scale with a zero scale counted as exact agreement only when a == b.
double rel_error(double closed, double oracle, double scale) {
    const double diff = std::abs(closed - oracle);
    if (scale == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / scale;
}

class Sampler {
  public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    /// A value near `base`: base (1 + delta) with |delta| log-uniform in [1e-6, 1e-1].
    double near(double base) {
        const double mag = std::pow(10.0, uniform(-6.0, -1.0));
        return base * (1.0 + (uniform(0.0, 1.0) < 0.5 ? -mag : mag));
    }

    bool coin() { return uniform(0.0, 1.0) < 0.5; }

  private:
    std::mt19937_64 rng_;
};

void add(CheckReport& r, std::string name, double value, double threshold, bool asserted = true) {
    r.items.push_back({std::move(name), value, threshold, value <= threshold, asserted});
}

std::vector<std::vector<double>> euler_jacobian(const PressureLaw& p, const std::vector<double>& U) {
    const double u = U[1] / U[0];
    return {{0.0, 1.0}, {p.dp(U[0]) - u * u, 2.0 * u}};
}

}  // namespace

CheckReport run_check_suite(const CheckConfig& cfg) {
    CheckReport report;
    Sampler S(cfg.seed);
    const auto gamma2 = make_gamma_law(1.0, 2.0);
    const auto gamma14 = make_gamma_law(1.0, 1.4);
    const StressLaw tau = make_polynomial_stress({0.0, 1.0, 0.0, 1.0}, 3.0);
    const double mu = 1.0, eps_visco = 0.5;
    const auto& h = gamma2.energy;

    double e_eta = 0, e_q = 0, e_f = 0, e_ps_e = 0, e_ps_q = 0, e_ve_e = 0, e_ve_q = 0, e_gam2 = 0, e_gam14 = 0;
    std::vector<EulerState> euler_states;
    std::vector<std::vector<double>> ps_states, ve_states, euler_vec;
    for (int k = 0; k < cfg.samples; ++k) {
        const double rb = S.uniform(0.5, 4.0), mb = S.uniform(-5.0, 5.0);
        const bool close = S.coin();
        const double r = close ? S.near(rb) : S.uniform(0.5, 4.0);
        const double m = close ? S.near(mb) : S.uniform(-5.0, 5.0);
        const EulerState s{r, m}, sb{rb, mb};
        euler_states.push_back(s);
        euler_vec.push_back({r, m});

        const double eta = euler_relative_entropy(s, sb, h);
        const double eta_o = static_cast<double>(euler_relative_entropy_taylor<Quad>(s, sb, h));
        e_eta = std::max(e_eta, rel_error(eta, eta_o, std::abs(eta_o)));

        const double u = m / r, ub = mb / rb;
        const double q = euler_relative_flux(s, sb, h);
        const double q_o = static_cast<double>(euler_relative_flux_taylor<Quad>(s, sb, h));
        const double q_scale = 0.5 * std::abs(m) * (u - ub) * (u - ub) +
                               std::abs(r * (h.dh(r) - h.dh(rb)) * (u - ub)) + std::abs(ub) * h.relative(r, rb);
        e_q = std::max(e_q, rel_error(q, q_o, q_scale));

        const double f = euler_relative_flux_tensor(s, sb, h.pressure());
        const double f_o = static_cast<double>(euler_relative_flux_tensor_taylor<Quad>(s, sb, h.pressure()));
        e_f = std::max(e_f, rel_error(f, f_o, std::abs(f_o)));

        const double p2 = gamma2.pressure.relative(r, rb), h2 = gamma2.energy.relative(r, rb);
        e_gam2 = std::max(e_gam2, rel_error(p2, (2.0 - 1.0) * h2, std::abs(p2)));
        const double p14 = gamma14.pressure.relative(r, rb), h14 = gamma14.energy.relative(r, rb);
        e_gam14 = std::max(e_gam14, rel_error(p14, (1.4 - 1.0) * h14, std::abs(p14)));

        const double ubar = S.uniform(-2.0, 2.0), vbar = S.uniform(-2.0, 2.0), zbar = S.uniform(-2.0, 2.0);
        const double uu = close ? S.near(ubar) : S.uniform(-2.0, 2.0);
        const double vv = close ? S.near(vbar) : S.uniform(-2.0, 2.0);
        const double zz = close ? S.near(zbar) : S.uniform(-2.0, 2.0);
        ps_states.push_back({uu, vv});
        ve_states.push_back({uu, vv, zz});

        const auto ps = psystem_relative({uu, vv}, {ubar, vbar}, tau);
        const auto ps_o = psystem_relative_taylor<Quad>({uu, vv}, {ubar, vbar}, tau);
        e_ps_e = std::max(e_ps_e, rel_error(ps.energy, static_cast<double>(ps_o[0]), std::abs(ps.energy)));
        e_ps_q = std::max(e_ps_q, rel_error(ps.flux, static_cast<double>(ps_o[1]), std::abs(ps.flux)));

        const auto ve = visco_relative({uu, vv, zz}, {ubar, vbar, zbar}, tau, mu, eps_visco);
        const auto ve_o = visco_relative_taylor<Quad>({uu, vv, zz}, {ubar, vbar, zbar}, tau, mu, eps_visco);
        const double ve_scale = std::abs(vv - vbar) *
                                (eps_visco * std::abs(tau.tau(uu) - tau.tau(ubar)) + std::abs(zz - zbar));
        e_ve_e = std::max(e_ve_e, rel_error(ve.energy, static_cast<double>(ve_o[0]), std::abs(ve.energy)));
        e_ve_q = std::max(e_ve_q, rel_error(ve.flux, static_cast<double>(ve_o[1]), ve_scale));
    }
    add(report, "euler.relative_entropy", e_eta, kIdentityTolerance);
    add(report, "euler.relative_flux", e_q, kIdentityTolerance);
    add(report, "euler.relative_flux_tensor", e_f, kIdentityTolerance);
    add(report, "gamma2.pressure_energy_equality", e_gam2, kIdentityTolerance);
    add(report, "gamma1.4.pressure_energy_equality", e_gam14, kIdentityTolerance);
    add(report, "psystem.relative_energy", e_ps_e, kIdentityTolerance);
    add(report, "psystem.relative_flux", e_ps_q, kIdentityTolerance);
    add(report, "visco.relative_energy", e_ve_e, kIdentityTolerance);
    add(report, "visco.relative_flux", e_ve_q, kIdentityTolerance);

    // Entropy-flux consistency: grad q = grad eta . DF.
    add(report, "euler.entropy_consistency", euler_entropy_consistency(h, euler_states).max_relative_error,
        kConsistencyTolerance);

    ModifiedPair pair(1.0, 3.0, h);
    pair.inject_flux_sign_fault(cfg.inject_flux_fault);
    const auto modified = entropy_consistency([&](const std::vector<double>& U) { return pair.eta({U[0], U[1]}); },
                                              [&](const std::vector<double>& U) { return pair.q({U[0], U[1]}); },
                                              [&](const std::vector<double>& U) { return euler_jacobian(h.pressure(), U); },
                                              euler_vec);
    add(report, "euler.modified_pair_consistency", modified.max_relative_error, kConsistencyTolerance);

    const auto ps_cons = entropy_consistency(
        [&](const std::vector<double>& U) { return psystem_energies({U[0], U[1]}, tau).energy; },
        [&](const std::vector<double>& U) { return psystem_energies({U[0], U[1]}, tau).flux; },
        [&](const std::vector<double>& U) {
            return std::vector<std::vector<double>>{{0.0, -1.0}, {-tau.dtau(U[0]), 0.0}};
        },
        ps_states);
    add(report, "psystem.entropy_consistency", ps_cons.max_relative_error, kConsistencyTolerance);

    const auto ve_cons = entropy_consistency(
        [&](const std::vector<double>& U) { return visco_energies({U[0], U[1], U[2]}, tau, mu, eps_visco).energy; },
        [&](const std::vector<double>& U) { return visco_energies({U[0], U[1], U[2]}, tau, mu, eps_visco).flux; },
        [&](const std::vector<double>& U) {
            return std::vector<std::vector<double>>{
                {0.0, -eps_visco, 0.0}, {-eps_visco * tau.dtau(U[0]), 0.0, -1.0}, {0.0, -mu, 0.0}};
        },
        ve_states);
    add(report, "visco.entropy_consistency", ve_cons.max_relative_error, kConsistencyTolerance);

    // Hessian of R in (rho, m), one and three space dimensions.
    double e_hess = 0.0;
    for (int k = 0; k < std::min(cfg.samples, 2000); ++k) {
        const double rho = S.uniform(0.2, 5.0);
        const bool three = k % 2 == 1;
        std::vector<double> m{S.uniform(-3.0, 3.0)};
        if (three) {
            m.push_back(S.uniform(-3.0, 3.0));
            m.push_back(S.uniform(-3.0, 3.0));
        }
        const auto num = hessian_R_eigenvalues(rho, m);
        const auto exact = hessian_R_eigenvalues_closed_form(rho, m);
        for (std::size_t i = 0; i < num.size(); ++i) {
            e_hess = std::max(e_hess, std::abs(num[i] - exact[i]) / std::max(1.0, std::abs(exact[i])));
        }
    }
    add(report, "euler.hessian_R_eigenvalues", e_hess, kHessianTolerance);

    // Hypotheses on the constitutive laws; the exponential pressure is reported, not asserted.
    const auto grid = default_density_grid();
    const auto hyp_a = check_hypothesis_A(gamma2.pressure, grid);
    add(report, "gamma2.hypothesis_A", hyp_a.holds ? 0.0 : 1.0, 0.0);
    const auto exp_law =
        make_tabulated_pressure({"exp", [](double r) { return std::exp(r); }, [](double r) { return std::exp(r); },
                                 [](double r) { return std::exp(r); }});
    const auto hyp_a_exp = check_hypothesis_A(exp_law.pressure, grid);
    add(report, "exp.hypothesis_A", hyp_a_exp.holds ? 0.0 : 1.0, 0.0, false);
    const auto hyp_b = check_hypothesis_B(gamma2.pressure, 2.0, 1.0, default_tail_grid());
    add(report, "gamma2.hypothesis_B", hyp_b.residual, kTailTolerance);
    const auto hyp_h = check_growth_H(tau, default_tail_grid());
    add(report, "stress.growth_H", hyp_h.residual, kTailTolerance);

    LemmaBoundConfig lb;
    lb.seed = cfg.seed;
    lb.samples = static_cast<std::uint64_t>(cfg.samples);
    const auto lemma = lemma_bound_checks(gamma2, lb);
    add(report, "gamma2.lemma_bounds_violated", lemma.violated ? 1.0 : 0.0, 0.0);
    add(report, "gamma2.lemma_c_pressure", lemma.c_pressure, std::numeric_limits<double>::infinity(), false);
    add(report, "gamma2.lemma_C_flux", lemma.C_flux, std::numeric_limits<double>::infinity(), false);
    add(report, "gamma2.lemma_C1", lemma.C1, std::numeric_limits<double>::infinity(), false);
    add(report, "gamma2.lemma_C2", lemma.C2, std::numeric_limits<double>::infinity(), false);
    const auto scan = stress_bound_scan(tau, -1.0, 1.0);
    add(report, "stress.sup_relative_ratio", scan.sup_ratio, std::numeric_limits<double>::infinity(), false);
    return report;
}

void write_check_report(std::ostream& out, const CheckReport& report) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << kCheckHeader << "\n";
    for (const auto& i : report.items) {
        out << i.name << "," << i.value << "," << i.threshold << "," << (i.passed ? "pass" : "fail") << ","
            << (i.asserted ? "asserted" : "reported") << "\n";
    }
}

CheckReport read_check_report(std::istream& in) {
    CheckReport r;
    std::string line;
    if (!std::getline(in, line) || line != kCheckHeader) {
        throw std::runtime_error("check report header missing");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> c;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) c.push_back(cell);
        if (c.size() != 5) throw std::runtime_error("check row needs 5 columns: " + line);
        CheckItem i;
        i.name = c[0];
        i.value = std::strtod(c[1].c_str(), nullptr);
        i.threshold = std::strtod(c[2].c_str(), nullptr);
        i.passed = c[3] == "pass";
        i.asserted = c[4] == "asserted";
        r.items.push_back(i);
    }
    return r;
}

int cmd_check(const CheckConfig& cfg, const std::string& out_dir, CheckReport* report) {
    CheckReport r = run_check_suite(cfg);
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        auto f = open_out(out_dir, "check_report.csv");
        write_check_report(f, r);
    }
    const int code = r.passed() ? kExitOk : 1;
    if (report) *report = std::move(r);
    return code;
}

}  // namespace relent
