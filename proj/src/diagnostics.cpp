#include "relent/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

namespace {

void load_cell(const GridField& f, int i, State& s) {
    s.resize(static_cast<std::size_t>(f.dim()));
    for (int c = 0; c < f.dim(); ++c) s[static_cast<std::size_t>(c)] = f(c, i);
}

void require_matched(const GridField& a, const GridField& b) {
    if (!a.grid().same_as(b.grid())) throw DomainError("state and bar state live on different grids");
    if (a.time() != b.time()) throw DomainError("state and bar state are at different times");
}

double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

}  // namespace

bool EntropyLedger::consistent() const {
    const std::size_t n = times.size();
    return phi.size() == n && diss_cum.size() == n && Q_cum.size() == n && E_cum.size() == n &&
           res_max.size() == n && mass_err.size() == n;
}

double compute_phi(const GridField& state, const GridField& bar, const RelaxationSystem& sys) {
    require_matched(state, bar);
    double sum = 0.0;
    State U, Ub;
    for (int i = 0; i < state.cells(); ++i) {
        load_cell(state, i, U);
        load_cell(bar, i, Ub);
        sum += sys.relative_entropy(U, Ub);
    }
    return sum * state.grid().dx();
}

InequalityIntegrals inequality_integrals(const LimitSystem& limit, const GridField& state, const GridField& profile,
                                         double eps) {
    require_matched(state, profile);
    const RelaxationSystem& sys = limit.relaxation();
    const GridField bar = limit.reconstruct_bar_state(profile, eps);
    const GridField src = limit.bar_error_source(profile, eps);
    const Grid& g = state.grid();
    const int n = g.cells();

    // Coefficient multiplying the relative nonlinear flux in Q.
    std::vector<double> coef;
    switch (sys.kind()) {
        case SystemKind::EulerFriction: coef = dxx_dh_bar(profile, sys.euler_law().energy); break;
        case SystemKind::PSystemDamping: coef = limit.limit_rhs(profile).data(0); break;
        case SystemKind::ViscoMemory: {
            const auto gl = limit.far_field(g, false), gr = limit.far_field(g, true);
            coef = centered_difference(g, profile.data(1), gl.empty() ? 0.0 : gl[1], gr.empty() ? 0.0 : gr[1]);
            break;
        }
    }

    InequalityIntegrals out;
    const int r = sys.relaxing_component();
    State U, Ub;
    for (int i = 0; i < n; ++i) {
        load_cell(state, i, U);
        load_cell(bar, i, Ub);
        out.phi += sys.relative_entropy(U, Ub);
        out.R += sys.relative_dissipation(U, Ub);
        const auto iu = static_cast<std::size_t>(i);
        switch (sys.kind()) {
            case SystemKind::EulerFriction: {
                const EulerState s{U[0], U[1]}, sb{Ub[0], Ub[1]};
                out.Q += euler_Q(s, sb, coef[iu], sys.euler_law().pressure);
                out.E += euler_E(s, sb, src(r, i));
                break;
            }
            case SystemKind::PSystemDamping:
                out.Q += -coef[iu] * sys.stress_law().relative_stress(U[0], Ub[0]);
                out.E += src(r, i) * (U[1] - Ub[1]);
                break;
            case SystemKind::ViscoMemory:
                out.Q += -coef[iu] * sys.stress_law().relative_stress(U[0], Ub[0]);
                out.E += src(r, i) / sys.mu() * (U[2] - Ub[2]);
                break;
        }
    }
    const double dx = g.dx();
    out.phi *= dx;
    out.R *= dx;
    out.Q *= dx;
    out.E *= dx;
    return out;
}

// ---------------------------------------------------------------------------

LedgerBuilder::LedgerBuilder(const LimitSystem& limit, double eps, const GridField& state0, const GridField& profile0)
    : limit_(limit), eps_(eps), dx_(state0.grid().dx()) {
    ledger_.system = limit.relaxation().name();
    ledger_.eps = eps;
    ledger_.cells = state0.cells();
    mass0_ = state0.integral(0);
    mass_last_ = mass0_;
    double abs_mass = 0.0;
    for (double x : state0.data(0)) abs_mass += std::abs(x);
    mass_scale_ = std::max({std::abs(mass0_), abs_mass * dx_, std::numeric_limits<double>::min()});
    last_ = inequality_integrals(limit, state0, profile0, eps);
    ledger_.phi_max = last_.phi;
    push_row(state0.time(), 0.0, state0);
}

void LedgerBuilder::push_row(double t, double res_max, const GridField& state) {
    ledger_.times.push_back(t);
    ledger_.phi.push_back(last_.phi);
    ledger_.diss_cum.push_back(diss_);
    ledger_.Q_cum.push_back(Q_);
    ledger_.E_cum.push_back(E_);
    ledger_.res_max.push_back(res_max);
    ledger_.mass_err.push_back(std::abs(state.integral(0) - mass0_) / mass_scale_);
}

void LedgerBuilder::on_step(double t, double dt, const GridField& after, const GridField& profile_after,
                            const std::vector<double>& residual, bool record) {
    const InequalityIntegrals now = inequality_integrals(limit_, after, profile_after, eps_);
    diss_ += dt * 0.5 * (last_.R + now.R) / (eps_ * eps_);
    Q_ += dt * 0.5 * (last_.Q + now.Q);
    E_ += dt * 0.5 * (last_.E + now.E);
    last_ = now;

    auto& L = ledger_;
    L.phi_max = std::max(L.phi_max, now.phi);
    double abs_mass = 0.0;
    for (double x : after.data(0)) abs_mass += std::abs(x);
    L.K1 = std::max(L.K1, abs_mass * dx_);
    double energy = 0.0;
    const RelaxationSystem& sys = limit_.relaxation();
    State U;
    for (int i = 0; i < after.cells(); ++i) {
        load_cell(after, i, U);
        energy += sys.entropy(U);
    }
    L.K2 = std::max(L.K2, energy * dx_);

    double rmax = 0.0, rint = 0.0;
    for (double r : residual) {
        rmax = std::max(rmax, std::abs(r));
        rint += r;
    }
    rint *= dx_;
    L.res_int_max = L.steps == 0 ? rint : std::max(L.res_int_max, rint);
    L.entropy_C = std::max(L.entropy_C, std::max(0.0, rint) / (dx_ + dt));
    L.dt_max = std::max(L.dt_max, dt);
    const double mass = after.integral(0);
    L.mass_step_max = std::max(L.mass_step_max, std::abs(mass - mass_last_) / mass_scale_);
    mass_last_ = mass;
    ++L.steps;
    if (record) push_row(t, rmax, after);
}

// ---------------------------------------------------------------------------

GronwallResult gronwall_audit(const EntropyLedger& ledger, double eps, double cap,
                              std::optional<std::pair<double, double>> window) {
    GronwallResult r;
    r.cap = cap;
    if (ledger.phi.empty()) return r;
    const double denom = ledger.phi.front() + std::pow(eps, 4);
    for (std::size_t k = 0; k < ledger.phi.size(); ++k) {
        if (window && (ledger.times[k] < window->first || ledger.times[k] > window->second)) continue;
        const double phi = ledger.phi[k];
        if (!std::isfinite(phi)) {
            r.C = std::numeric_limits<double>::infinity();
            break;
        }
        r.C = std::max(r.C, phi / denom);
    }
    r.satisfied = r.C <= cap;
    return r;
}

double gronwall_uniformity(const std::vector<double>& constants) {
    double worst = 1.0;
    for (std::size_t k = 0; k + 1 < constants.size(); ++k) {
        const double a = constants[k], b = constants[k + 1];
        const double hi = std::max(a, b), lo = std::min(a, b);
        if (hi == 0.0) continue;
        worst = std::max(worst, lo > 0 ? hi / lo : std::numeric_limits<double>::infinity());
    }
    return worst;
}

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values) {
    if (eps.size() != values.size()) throw DomainError("fit_rate: eps and values differ in length");
    if (eps.size() < 4) throw DomainError("fit_rate needs at least four eps values");
    const double n = static_cast<double>(eps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0) || !(values[k] > 0) || !std::isfinite(values[k])) {
            throw DomainError("fit_rate needs positive finite eps and values");
        }
        const double x = std::log(eps[k]), y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    RateFit fit;
    fit.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.constant = std::exp((sy - fit.rate * sx) / n);
    return fit;
}

RateFit fit_rate(const SweepReport& report) { return fit_rate(report.epsilons, report.phi_T); }

// ---------------------------------------------------------------------------

std::vector<double> regress_first_order(const std::vector<double>& eps,
                                        const std::vector<std::vector<double>>& values) {
    if (eps.empty() || eps.size() != values.size()) throw DomainError("regression needs one value row per eps");
    const std::size_t n = values.front().size();
    double see = 0.0;
    for (double e : eps) see += e * e;
    std::vector<double> m1(n, 0.0);
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (values[k].size() != n) throw DomainError("regression rows differ in length");
        for (std::size_t i = 0; i < n; ++i) m1[i] += eps[k] * values[k][i];
    }
    for (double& x : m1) x /= see;
    return m1;
}

HilbertReport hilbert_check(const LimitSystem& limit, const std::vector<HilbertRun>& runs, int window) {
    if (runs.size() < 3) throw DomainError("hilbert_check needs at least three eps values");
    if (window < 2 || static_cast<std::size_t>(window) > runs.size()) throw DomainError("bad regression window");
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        if (!(runs[k + 1].eps < runs[k].eps)) throw DomainError("hilbert_check needs strictly decreasing eps");
    }
    const int r = limit.relaxation().relaxing_component();
    HilbertReport rep;
    rep.coarse_cells = runs.front().state.cells();
    for (const auto& run : runs) rep.coarse_cells = std::min(rep.coarse_cells, run.state.cells());

    std::vector<double> eps;
    std::vector<std::vector<double>> w, target;
    for (const auto& run : runs) {
        eps.push_back(run.eps);
        w.push_back(restrict_average(run.state.data(r), rep.coarse_cells));
        // relaxing component of the bar state at eps = 1 is the first-order closure
        const GridField closure = limit.reconstruct_bar_state(run.profile, 1.0);
        target.push_back(restrict_average(closure.data(r), rep.coarse_cells));
        std::vector<double> gap(static_cast<std::size_t>(run.state.cells()));
        for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = run.state.data(0)[i] - run.profile.data(0)[i];
        rep.density_gaps.push_back(sup_abs(gap));
    }
    rep.target_norm = sup_abs(target.back());

    for (std::size_t k = 0; k < runs.size(); ++k) {
        std::vector<double> d(w[k].size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = w[k][i] / eps[k] - target[k][i];
        rep.pointwise_residuals.push_back(sup_abs(d));
    }
    const auto win = static_cast<std::size_t>(window);
    for (std::size_t s = 0; s + win <= runs.size(); ++s) {
        const std::vector<double> e(eps.begin() + static_cast<long>(s), eps.begin() + static_cast<long>(s + win));
        const std::vector<std::vector<double>> v(w.begin() + static_cast<long>(s),
                                                 w.begin() + static_cast<long>(s + win));
        const auto m1 = regress_first_order(e, v);
        const auto& t = target[s + win - 1];
        std::vector<double> d(m1.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = m1[i] - t[i];
        rep.window_finest_eps.push_back(e.back());
        rep.window_residuals.push_back(sup_abs(d));
    }
    auto strictly_decreasing = [](const std::vector<double>& v) {
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            if (!(v[k + 1] < v[k])) return false;
        }
        return true;
    };
    rep.decreasing = strictly_decreasing(rep.window_residuals) && strictly_decreasing(rep.pointwise_residuals);
    rep.finest_relative = rep.target_norm > 0 ? rep.window_residuals.back() / rep.target_norm
                                              : std::numeric_limits<double>::infinity();
    return rep;
}

InequalityAudit inequality_audit(const EntropyLedger& ledger, double tol) {
    if (!ledger.consistent()) throw DomainError("ledger arrays differ in length");
    InequalityAudit a;
    a.tolerance = tol;
    if (ledger.size() == 0) return a;
    const double phi0 = ledger.phi.front();
    const double t0 = ledger.times.front();
    for (std::size_t k = 0; k < ledger.size(); ++k) {
        const double res = ledger.phi[k] - phi0 + ledger.diss_cum[k] + ledger.Q_cum[k] + ledger.E_cum[k];
        a.residual.push_back(res);
        const double scale = std::abs(ledger.phi[k]) + std::abs(phi0) + std::abs(ledger.diss_cum[k]) +
                             std::abs(ledger.Q_cum[k]) + std::abs(ledger.E_cum[k]);
        const double allowed = tol * (ledger.times[k] - t0) + 64 * std::numeric_limits<double>::epsilon() * scale;
        if (res > allowed) a.passed = false;
        a.max_residual = k == 0 ? res : std::max(a.max_residual, res);
    }
    a.diss_total = ledger.diss_cum.back();
    a.Q_total = ledger.Q_cum.back();
    a.E_total = ledger.E_cum.back();
    return a;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kLedgerHeader = "t,phi,diss_cum,Q_cum,E_cum,res_max,mass_err";
constexpr const char* kSweepHeader = "epsilon,N,phi_T,phi_sup,C,entropy_C,exit";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double to_double(const std::string& s) {
    // stod rejects "inf"/"nan" spellings from some streams; strtod accepts them
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::runtime_error("not a number: '" + s + "'");
    return v;
}

}  // namespace

void write_ledger_csv(std::ostream& out, const EntropyLedger& L) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "# system=" << L.system << "\n# eps=" << L.eps << "\n# cells=" << L.cells << "\n# steps=" << L.steps
        << "\n# phi_max=" << L.phi_max << "\n# K1=" << L.K1 << "\n# K2=" << L.K2 << "\n# entropy_C=" << L.entropy_C
        << "\n# res_int_max=" << L.res_int_max << "\n# mass_step_max=" << L.mass_step_max << "\n# dt_max=" << L.dt_max << "\n";
    out << kLedgerHeader << "\n";
    for (std::size_t k = 0; k < L.size(); ++k) {
        out << L.times[k] << "," << L.phi[k] << "," << L.diss_cum[k] << "," << L.Q_cum[k] << "," << L.E_cum[k] << ","
            << L.res_max[k] << "," << L.mass_err[k] << "\n";
    }
}

EntropyLedger read_ledger_csv(std::istream& in) {
    EntropyLedger L;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
            if (key == "system") L.system = value;
            else if (key == "eps") L.eps = to_double(value);
            else if (key == "cells") L.cells = std::stoi(value);
            else if (key == "steps") L.steps = std::stol(value);
            else if (key == "phi_max") L.phi_max = to_double(value);
            else if (key == "K1") L.K1 = to_double(value);
            else if (key == "K2") L.K2 = to_double(value);
            else if (key == "entropy_C") L.entropy_C = to_double(value);
            else if (key == "mass_step_max") L.mass_step_max = to_double(value);
            else if (key == "res_int_max") L.res_int_max = to_double(value);
            else if (key == "dt_max") L.dt_max = to_double(value);
            continue;
        }
        if (!header) {
            if (line != kLedgerHeader) throw std::runtime_error("unexpected ledger header: " + line);
            header = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 7) throw std::runtime_error("ledger row needs 7 columns: " + line);
        L.times.push_back(to_double(cells[0]));
        L.phi.push_back(to_double(cells[1]));
        L.diss_cum.push_back(to_double(cells[2]));
        L.Q_cum.push_back(to_double(cells[3]));
        L.E_cum.push_back(to_double(cells[4]));
        L.res_max.push_back(to_double(cells[5]));
        L.mass_err.push_back(to_double(cells[6]));
    }
    if (!header) throw std::runtime_error("ledger header missing");
    return L;
}

void write_sweep_report(std::ostream& out, const SweepReport& r) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "system=" << r.system << "\n";
    out << "rate=" << r.fit.rate << "\nconstant=" << r.fit.constant << "\n";
    out << "rate_sup=" << r.fit_sup.rate << "\nconstant_sup=" << r.fit_sup.constant << "\n";
    out << "uniformity=" << r.uniformity << "\npartial=" << (r.partial ? 1 : 0) << "\n\n";
    out << kSweepHeader << "\n";
    for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
        out << r.epsilons[k] << "," << r.cells[k] << "," << r.phi_T[k] << "," << r.phi_sup[k] << ","
            << r.gronwall_C[k] << "," << r.entropy_C[k] << "," << r.exit_codes[k] << "\n";
    }
}

SweepReport read_sweep_report(std::istream& in) {
    SweepReport r;
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(in, line) && !line.empty()) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("malformed sweep header line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const char* key : {"system", "rate", "constant", "rate_sup", "constant_sup", "uniformity", "partial"}) {
        if (!kv.count(key)) throw std::runtime_error(std::string("sweep report lacks ") + key);
    }
    r.system = kv["system"];
    r.fit = {to_double(kv["rate"]), to_double(kv["constant"])};
    r.fit_sup = {to_double(kv["rate_sup"]), to_double(kv["constant_sup"])};
    r.uniformity = to_double(kv["uniformity"]);
    r.partial = kv["partial"] == "1";
    if (!std::getline(in, line) || line != kSweepHeader) throw std::runtime_error("sweep table header missing");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 7) throw std::runtime_error("sweep row needs 7 columns: " + line);
        r.epsilons.push_back(to_double(c[0]));
        r.cells.push_back(std::stoi(c[1]));
        r.phi_T.push_back(to_double(c[2]));
        r.phi_sup.push_back(to_double(c[3]));
        r.gronwall_C.push_back(to_double(c[4]));
        r.entropy_C.push_back(to_double(c[5]));
        r.exit_codes.push_back(std::stoi(c[6]));
    }
    return r;
}

}  // namespace relent
