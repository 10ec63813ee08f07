#include "relent/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

std::string to_string(FluxScheme s) {
    switch (s) {
        case FluxScheme::Rusanov: return "rusanov";
        case FluxScheme::HLL: return "hll";
        case FluxScheme::ApRusanov: return "ap-rusanov";
    }
    return "unknown";
}

FluxScheme parse_flux_scheme(const std::string& name) {
    if (name == "rusanov") return FluxScheme::Rusanov;
    if (name == "hll") return FluxScheme::HLL;
    if (name == "ap-rusanov") return FluxScheme::ApRusanov;
    throw ConfigError("unknown flux scheme '" + name + "' (expected rusanov, hll or ap-rusanov)");
}

std::string to_string(SourceScheme s) {
    return s == SourceScheme::ExactExponential ? "exponential" : "implicit-euler";
}

SourceScheme parse_source_scheme(const std::string& name) {
    if (name == "exponential") return SourceScheme::ExactExponential;
    if (name == "implicit-euler") return SourceScheme::ImplicitEuler;
    throw ConfigError("unknown source scheme '" + name + "' (expected exponential or implicit-euler)");
}

std::string to_string(FluxIntegrator s) { return s == FluxIntegrator::ForwardEuler ? "forward-euler" : "ssp-rk2"; }

FluxIntegrator parse_flux_integrator(const std::string& name) {
    if (name == "forward-euler") return FluxIntegrator::ForwardEuler;
    if (name == "ssp-rk2") return FluxIntegrator::SspRk2;
    throw ConfigError("unknown flux integrator '" + name + "' (expected forward-euler or ssp-rk2)");
}

std::string to_string(LimitScheme s) {
    return s == LimitScheme::BackwardEuler ? "backward-euler" : "crank-nicolson";
}

LimitScheme parse_limit_scheme(const std::string& name) {
    if (name == "backward-euler") return LimitScheme::BackwardEuler;
    if (name == "crank-nicolson") return LimitScheme::CrankNicolson;
    throw ConfigError("unknown limit scheme '" + name + "' (expected backward-euler or crank-nicolson)");
}

void SolverConfig::validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and non-negative");
    if (output_stride < 1) throw ConfigError("output_stride must be at least 1");
    if (!(vacuum_floor > 0.0) || !(bar_floor > 0.0)) throw ConfigError("vacuum floors must be positive");
    if (!(newton_tolerance > 0.0) || newton_max_iterations < 1) throw ConfigError("invalid Newton settings");
    if (!(far_field_tolerance > 0.0)) throw ConfigError("far_field_tolerance must be positive");
    for (double s : stop_times) {
        if (!std::isfinite(s)) throw ConfigError("stop times must be finite");
    }
}

namespace {

using Cell = std::array<double, 3>;

Cell load(const GridField& f, int i) {
    Cell c{0.0, 0.0, 0.0};
    for (int k = 0; k < f.dim(); ++k) c[static_cast<std::size_t>(k)] = f(k, i);
    return c;
}

Cell to_cell(const State& s) {
    Cell c{0.0, 0.0, 0.0};
    std::copy(s.begin(), s.end(), c.begin());
    return c;
}

// Pointwise evaluations on fixed-size cells, so the inner loops do not allocate.
class Kernel {
  public:
    Kernel(const RelaxationSystem& sys, double eps) : sys_(sys), eps_(eps), dim_(sys.state_dim()) {
        buf_.resize(static_cast<std::size_t>(dim_));
    }

    int dim() const { return dim_; }

    Cell flux(const Cell& U) const {
        switch (sys_.kind()) {
            case SystemKind::EulerFriction:
                return {U[1] / eps_, (U[1] * U[1] / U[0] + sys_.euler_law().pressure.p(U[0])) / eps_, 0.0};
            case SystemKind::PSystemDamping:
                return {-U[1] / eps_, -sys_.stress_law().tau(U[0]) / eps_, 0.0};
            case SystemKind::ViscoMemory:
                return {-U[1], -sys_.stress_law().tau(U[0]) - U[2] / eps_, -sys_.mu() * U[1] / eps_};
        }
        return {};
    }

    /// Smallest and largest characteristic speed.
    std::pair<double, double> speeds(const Cell& U) const {
        switch (sys_.kind()) {
            case SystemKind::EulerFriction: {
                const double u = U[1] / U[0];
                const double c = std::sqrt(sys_.euler_law().pressure.dp(U[0]));
                return {(u - c) / eps_, (u + c) / eps_};
            }
            case SystemKind::PSystemDamping: {
                const double c = std::sqrt(sys_.stress_law().dtau(U[0])) / eps_;
                return {-c, c};
            }
            case SystemKind::ViscoMemory: {
                const double c = std::sqrt(sys_.stress_law().dtau(U[0]) + sys_.mu() / (eps_ * eps_));
                return {-c, c};
            }
        }
        return {0.0, 0.0};
    }

    double max_speed(const Cell& U) const {
        const auto [lo, hi] = speeds(U);
        return std::max(std::abs(lo), std::abs(hi));
    }

    double entropy(const Cell& U) const { return sys_.entropy(as_state(U)); }
    double entropy_flux(const Cell& U) const { return sys_.entropy_flux(as_state(U), eps_); }
    double dissipation(const Cell& U) const { return sys_.dissipation(as_state(U)); }
    double relaxing_entropy(const Cell& U) const { return sys_.relaxing_entropy(as_state(U)); }

  private:
    const State& as_state(const Cell& U) const {
        for (int k = 0; k < dim_; ++k) buf_[static_cast<std::size_t>(k)] = U[static_cast<std::size_t>(k)];
        return buf_;
    }

    const RelaxationSystem& sys_;
    double eps_;
    int dim_;
    mutable State buf_;
};

struct Interface {
    Cell flux;
    double entropy_flux;
};

Interface numerical_flux(const Kernel& K, FluxScheme scheme, int relaxing, const Cell& L, const Cell& R) {
    const Cell FL = K.flux(L), FR = K.flux(R);
    const double GL = K.entropy_flux(L), GR = K.entropy_flux(R);
    Interface out{};
    const int n = K.dim();
    switch (scheme) {
        case FluxScheme::Rusanov:
        case FluxScheme::ApRusanov: {
            const double a = std::max(K.max_speed(L), K.max_speed(R));
            for (int k = 0; k < n; ++k) {
                const auto s = static_cast<std::size_t>(k);
                out.flux[s] = 0.5 * (FL[s] + FR[s]);
                if (scheme == FluxScheme::Rusanov || k == relaxing) out.flux[s] -= 0.5 * a * (R[s] - L[s]);
            }
            if (scheme == FluxScheme::Rusanov) {
                out.entropy_flux = 0.5 * (GL + GR) - 0.5 * a * (K.entropy(R) - K.entropy(L));
            } else {
                out.entropy_flux = 0.5 * (GL + GR) - 0.5 * a * (K.relaxing_entropy(R) - K.relaxing_entropy(L));
            }
            break;
        }
        case FluxScheme::HLL: {
            const auto [lminL, lmaxL] = K.speeds(L);
            const auto [lminR, lmaxR] = K.speeds(R);
            const double sL = std::min(lminL, lminR), sR = std::max(lmaxL, lmaxR);
            if (sL >= 0.0) return {FL, GL};
            if (sR <= 0.0) return {FR, GR};
            const double inv = 1.0 / (sR - sL);
            for (int k = 0; k < n; ++k) {
                const auto s = static_cast<std::size_t>(k);
                out.flux[s] = (sR * FL[s] - sL * FR[s] + sL * sR * (R[s] - L[s])) * inv;
            }
            out.entropy_flux = (sR * GL - sL * GR + sL * sR * (K.entropy(R) - K.entropy(L))) * inv;
            break;
        }
    }
    return out;
}

double source_factor(SourceScheme scheme, double dt, double eps) {
    const double tau = dt / (2.0 * eps * eps);
    return scheme == SourceScheme::ExactExponential ? std::exp(-tau) : 1.0 / (1.0 + tau);
}

void apply_half_source(GridField& U, int relaxing, double factor) {
    for (double& w : U.data(relaxing)) w *= factor;
}

void require_state(const GridField& state, const RelaxationSystem& sys, double eps) {
    if (state.dim() != sys.state_dim()) throw DomainError("state has the wrong number of components");
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
}

void check_after_step(const GridField& U, const RelaxationSystem& sys, const SolverConfig& cfg) {
    if (!U.all_finite()) throw SolverAbort("non-finite value in the relaxation state");
    if (sys.kind() == SystemKind::EulerFriction) {
        for (int i = 0; i < U.cells(); ++i) {
            if (!(U(0, i) >= cfg.vacuum_floor)) {
                std::ostringstream os;
                os << "density " << U(0, i) << " below the vacuum floor at cell " << i;
                throw SolverAbort(os.str());
            }
        }
    }
}

// Equilibrium components of the boundary cells must stay at their far-field values.
void check_far_field(const GridField& U, const RelaxationSystem& sys, const SolverConfig& cfg) {
    const Grid& g = U.grid();
    if (g.periodic()) return;
    const State left = far_field_state(sys, g, false), right = far_field_state(sys, g, true);
    const int last = U.cells() - 1;
    for (int k = 0; k < U.dim(); ++k) {
        if (k == sys.relaxing_component()) continue;
        const auto s = static_cast<std::size_t>(k);
        const double dl = std::abs(U(k, 0) - left[s]), dr = std::abs(U(k, last) - right[s]);
        if (dl > cfg.far_field_tolerance * (1.0 + std::abs(left[s])) ||
            dr > cfg.far_field_tolerance * (1.0 + std::abs(right[s]))) {
            throw SolverAbort("disturbance reached the far-field boundary; enlarge the domain");
        }
    }
}

}  // namespace

double stable_dt(const GridField& state, const RelaxationSystem& sys, double eps, const SolverConfig& cfg) {
    require_state(state, sys, eps);
    const Kernel K(sys, eps);
    double lam = 0.0;
    for (int i = 0; i < state.cells(); ++i) lam = std::max(lam, K.max_speed(load(state, i)));
    const Grid& g = state.grid();
    if (!g.periodic()) {
        lam = std::max(lam, K.max_speed(to_cell(far_field_state(sys, g, false))));
        lam = std::max(lam, K.max_speed(to_cell(far_field_state(sys, g, true))));
    }
    if (!(lam > 0.0) || !std::isfinite(lam)) throw SolverAbort("cannot determine a finite wave speed");
    return cfg.cfl * g.dx() / lam;
}

GridField step_relaxation(const GridField& state, const RelaxationSystem& sys, double eps, const SolverConfig& cfg,
                          double dt, StepDetail* detail) {
    require_state(state, sys, eps);
    const double limit = stable_dt(state, sys, eps, cfg);
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "time step " << dt << " violates the CFL bound " << limit;
        throw SolverAbort(os.str());
    }
    const Grid& g = state.grid();
    const int n = g.cells();
    const int dim = sys.state_dim();
    const int relaxing = sys.relaxing_component();
    const double half = source_factor(cfg.source_scheme, dt, eps);

    GridField star = state;
    apply_half_source(star, relaxing, half);

    const Kernel K(sys, eps);
    Cell ghost_l{}, ghost_r{};
    if (!g.periodic()) {
        ghost_l = to_cell(far_field_state(sys, g, false));
        ghost_r = to_cell(far_field_state(sys, g, true));
    }
    std::vector<Cell> flux(static_cast<std::size_t>(n + 1));
    std::vector<double> gflux(static_cast<std::size_t>(n + 1));
    auto interfaces = [&](const GridField& U, double weight) {
        for (int j = 0; j <= n; ++j) {
            const Cell L = j == 0 ? (g.periodic() ? load(U, n - 1) : ghost_l) : load(U, j - 1);
            const Cell R = j == n ? (g.periodic() ? load(U, 0) : ghost_r) : load(U, j);
            const Interface f = numerical_flux(K, cfg.flux_scheme, relaxing, L, R);
            const auto jj = static_cast<std::size_t>(j);
            for (int k = 0; k < dim; ++k) {
                const auto s = static_cast<std::size_t>(k);
                flux[jj][s] = weight == 1.0 ? f.flux[s] : flux[jj][s] + weight * f.flux[s];
            }
            gflux[jj] = weight == 1.0 ? f.entropy_flux : gflux[jj] + weight * f.entropy_flux;
        }
    };
    const double r = dt / g.dx();
    auto update = [&](const GridField& from) {
        GridField out = from;
        for (int k = 0; k < dim; ++k) {
            auto& u = out.data(k);
            const auto s = static_cast<std::size_t>(k);
            for (int i = 0; i < n; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                u[ii] -= r * (flux[ii + 1][s] - flux[ii][s]);
            }
        }
        return out;
    };

    interfaces(star, 1.0);
    if (cfg.flux_integrator == FluxIntegrator::SspRk2) {
        // Heun: the step uses the average of the fluxes at U* and at the Euler predictor.
        const GridField predictor = update(star);
        if (!predictor.all_finite()) throw SolverAbort("non-finite value in the flux predictor");
        if (sys.kind() == SystemKind::EulerFriction) {
            for (double rho : predictor.data(0)) {
                if (!(rho > 0.0)) throw SolverAbort("predictor density is not positive");
            }
        }
        for (auto& f : flux) {
            for (double& x : f) x *= 0.5;
        }
        for (double& x : gflux) x *= 0.5;
        interfaces(predictor, 0.5);
    }
    GridField next = update(star);
    apply_half_source(next, relaxing, half);
    next.set_time(state.time() + dt);
    check_after_step(next, sys, cfg);

    if (detail) {
        detail->after_first_source = std::move(star);
        detail->entropy_flux = std::move(gflux);
    }
    return next;
}

std::vector<double> entropy_residual(const GridField& before, const GridField& after, const StepDetail& detail,
                                     const RelaxationSystem& sys, double eps, double dt) {
    const int n = before.cells();
    if (detail.entropy_flux.size() != static_cast<std::size_t>(n + 1)) {
        throw DomainError("step detail does not match the grid");
    }
    const Kernel K(sys, eps);
    const double dx = before.grid().dx();
    const double e2 = eps * eps;
    std::vector<double> r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Cell b = load(before, i), a = load(after, i);
        const auto ii = static_cast<std::size_t>(i);
        r[ii] = (K.entropy(a) - K.entropy(b)) / dt + (detail.entropy_flux[ii + 1] - detail.entropy_flux[ii]) / dx +
                0.5 * (K.dissipation(b) + K.dissipation(a)) / e2;
    }
    return r;
}

std::vector<double> entropy_residual(const GridField& before, const GridField& after, const RelaxationSystem& sys,
                                     double eps, double dt, const SolverConfig& cfg) {
    StepDetail detail;
    step_relaxation(before, sys, eps, cfg, dt, &detail);
    return entropy_residual(before, after, detail, sys, eps, dt);
}

// ---------------------------------------------------------------------------

namespace {

// Thomas algorithm on one chain; alpha[0] and gamma[m-1] are ignored.
void thomas(std::vector<double>& alpha, std::vector<double>& beta, std::vector<double>& gamma,
            std::vector<double>& rhs) {
    const std::size_t m = beta.size();
    for (std::size_t k = 1; k < m; ++k) {
        if (beta[k - 1] == 0.0) throw SolverAbort("singular tridiagonal system");
        const double w = alpha[k] / beta[k - 1];
        beta[k] -= w * gamma[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    if (beta[m - 1] == 0.0) throw SolverAbort("singular tridiagonal system");
    rhs[m - 1] /= beta[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) rhs[k] = (rhs[k] - gamma[k] * rhs[k + 1]) / beta[k];
}

// Cyclic system via Sherman-Morrison: alpha[0] couples to x[m-1], gamma[m-1] to x[0].
std::vector<double> cyclic_thomas(const std::vector<double>& alpha, const std::vector<double>& beta,
                                  const std::vector<double>& gamma, const std::vector<double>& rhs) {
    const std::size_t m = beta.size();
    if (m < 3) throw DomainError("cyclic solve needs at least three unknowns");
    const double corner_lo = alpha[0], corner_hi = gamma[m - 1];
    const double s = -beta[0];
    std::vector<double> b = beta;
    b[0] -= s;
    b[m - 1] -= corner_lo * corner_hi / s;
    std::vector<double> a1 = alpha, c1 = gamma, b1 = b, y = rhs;
    thomas(a1, b1, c1, y);
    std::vector<double> u(m, 0.0);
    u[0] = s;
    u[m - 1] = corner_hi;
    std::vector<double> a2 = alpha, c2 = gamma, b2 = b;
    thomas(a2, b2, c2, u);
    const double fac = (y[0] + corner_lo * y[m - 1] / s) / (1.0 + u[0] + corner_lo * u[m - 1] / s);
    for (std::size_t k = 0; k < m; ++k) y[k] -= fac * u[k];
    return y;
}

}  // namespace

std::vector<double> solve_stride2(const std::vector<double>& a, const std::vector<double>& b,
                                  const std::vector<double>& c, const std::vector<double>& r, bool periodic) {
    const std::size_t n = b.size();
    if (a.size() != n || c.size() != n || r.size() != n) throw DomainError("stride-2 system size mismatch");
    std::vector<double> x(n, 0.0);
    std::vector<char> seen(n, 0);
    for (std::size_t start = 0; start < std::min<std::size_t>(n, 2); ++start) {
        if (seen[start]) continue;
        std::vector<std::size_t> orbit;
        if (periodic) {
            std::size_t cur = start;
            do {
                orbit.push_back(cur);
                seen[cur] = 1;
                cur = (cur + 2) % n;
            } while (cur != start);
        } else {
            for (std::size_t cur = start; cur < n; cur += 2) orbit.push_back(cur);
        }
        const std::size_t m = orbit.size();
        std::vector<double> al(m), be(m), ga(m), rh(m);
        for (std::size_t k = 0; k < m; ++k) {
            al[k] = a[orbit[k]];
            be[k] = b[orbit[k]];
            ga[k] = c[orbit[k]];
            rh[k] = r[orbit[k]];
        }
        if (periodic) {
            rh = cyclic_thomas(al, be, ga, rh);
        } else {
            thomas(al, be, ga, rh);
        }
        for (std::size_t k = 0; k < m; ++k) x[orbit[k]] = rh[k];
    }
    return x;
}

namespace {

// Stride-2 stencil weights of wide_second_difference for cell i, times 4 dx^2.
struct Stencil {
    double left, centre, right;
};

Stencil wide_stencil(int i, int n, bool periodic) {
    if (periodic) return {1.0, -2.0, 1.0};
    return {i >= 2 ? 1.0 : 0.0, -((i <= n - 2 ? 1.0 : 0.0) + (i >= 1 ? 1.0 : 0.0)), i + 2 <= n - 1 ? 1.0 : 0.0};
}

double theta(const SolverConfig& cfg) { return cfg.limit_scheme == LimitScheme::BackwardEuler ? 1.0 : 0.5; }

// Theta scheme for x_t = D0 D0 phi(x), solved by Newton with a damped update.
template <class Phi, class DPhi>
std::vector<double> implicit_diffusion(const Grid& g, const std::vector<double>& x_old, double gl, double gr,
                                       double dt, Phi phi, DPhi dphi, const SolverConfig& cfg, double floor) {
    const int n = g.cells();
    const bool periodic = g.periodic();
    const double th = theta(cfg);
    const double kappa = th * dt / (4.0 * g.dx() * g.dx());
    const double phil = periodic ? 0.0 : phi(gl), phir = periodic ? 0.0 : phi(gr);
    std::vector<double> explicit_part(x_old.size(), 0.0);
    if (th < 1.0) {
        std::vector<double> ph_old(x_old.size());
        for (std::size_t i = 0; i < x_old.size(); ++i) ph_old[i] = phi(x_old[i]);
        explicit_part = wide_second_difference(g, ph_old, phil, phir);
        for (double& e : explicit_part) e *= (1.0 - th) * dt;
    }
    double scale = 1.0;
    for (double v : x_old) scale = std::max(scale, std::abs(v));
    const double tol = cfg.newton_tolerance * scale;

    std::vector<double> x = x_old, ph(x.size()), a(x.size()), b(x.size()), c(x.size()), res(x.size()), trial;
    for (int it = 0; it <= cfg.newton_max_iterations; ++it) {
        for (std::size_t i = 0; i < x.size(); ++i) ph[i] = phi(x[i]);
        const auto w = wide_second_difference(g, ph, phil, phir);
        double norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            res[i] = -(x[i] - x_old[i] - th * dt * w[i] - explicit_part[i]);
            norm = std::max(norm, std::abs(res[i]));
        }
        if (!std::isfinite(norm)) throw SolverAbort("non-finite Newton residual in the limit solver");
        // the first update is always taken: a small residual at x_old only means the
        // step itself is small, and skipping it would freeze a decaying profile
        if (it > 0 && norm <= tol) return x;
        if (it == cfg.newton_max_iterations) break;
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const Stencil s = wide_stencil(i, n, periodic);
            const auto im = static_cast<std::size_t>((i - 2 + n) % n), ip = static_cast<std::size_t>((i + 2) % n);
            a[ii] = -kappa * s.left * dphi(x[im]);
            b[ii] = 1.0 - kappa * s.centre * dphi(x[ii]);
            c[ii] = -kappa * s.right * dphi(x[ip]);
        }
        const auto delta = solve_stride2(a, b, c, res, periodic);
        double lambda = 1.0;
        for (int halvings = 0;; ++halvings) {
            trial = x;
            bool ok = true;
            for (std::size_t i = 0; i < x.size(); ++i) {
                trial[i] += lambda * delta[i];
                if (!std::isfinite(trial[i]) || trial[i] < floor) ok = false;
            }
            if (ok) break;
            if (halvings == 30) throw SolverAbort("limit solver left the admissible region");
            lambda *= 0.5;
        }
        x.swap(trial);
    }
    std::ostringstream os;
    os << "Newton iteration did not converge in " << cfg.newton_max_iterations << " steps";
    throw SolverAbort(os.str());
}

}  // namespace

GridField step_limit(const GridField& profile, const LimitSystem& limit, const SolverConfig& cfg, double dt) {
    if (profile.dim() != limit.state_dim()) throw DomainError("limit profile has the wrong number of components");
    if (!(dt > 0.0)) throw DomainError("limit time step must be positive");
    const Grid& g = profile.grid();
    const RelaxationSystem& sys = limit.relaxation();
    const auto gl = limit.far_field(g, false), gr = limit.far_field(g, true);
    const auto ghost = [](const std::vector<double>& v, std::size_t k) { return v.empty() ? 0.0 : v[k]; };
    GridField next(g, limit.state_dim(), profile.time() + dt);
    switch (limit.kind()) {
        case LimitKind::PorousMedia: {
            const auto& p = sys.euler_law().pressure;
            next.data(0) = implicit_diffusion(
                g, profile.data(0), ghost(gl, 0), ghost(gr, 0), dt, [&p](double r) { return p.p(r); },
                [&p](double r) { return p.dp(r); }, cfg, cfg.bar_floor);
            break;
        }
        case LimitKind::TauDiffusion: {
            const auto& t = sys.stress_law();
            next.data(0) = implicit_diffusion(
                g, profile.data(0), ghost(gl, 0), ghost(gr, 0), dt, [&t](double u) { return t.tau(u); },
                [&t](double u) { return t.dtau(u); }, cfg, -std::numeric_limits<double>::infinity());
            break;
        }
        case LimitKind::RateTypeVisco: {
            // u^{n+1/2} = u^n + dt/2 D0 v^n;
            // v^{n+1} - th dt mu D0D0 v^{n+1} = v^n + (1 - th) dt mu D0D0 v^n + dt D0 sigma(u^{n+1/2});
            // u^{n+1} = u^{n+1/2} + dt/2 D0 v^{n+1}.
            const auto& t = sys.stress_law();
            const double mu = sys.mu();
            const double th = theta(cfg);
            const int n = g.cells();
            const auto nn = static_cast<std::size_t>(n);
            const auto& v = profile.data(1);
            const double vl = ghost(gl, 1), vr = ghost(gr, 1);
            const auto dv_old = centered_difference(g, v, vl, vr);
            std::vector<double> u_half(nn), sig(nn);
            for (std::size_t i = 0; i < nn; ++i) {
                u_half[i] = profile.data(0)[i] + 0.5 * dt * dv_old[i];
                sig[i] = t.tau(u_half[i]);
            }
            const double sl = gl.empty() ? 0.0 : t.tau(gl[0]), sr = gr.empty() ? 0.0 : t.tau(gr[0]);
            const auto dsig = centered_difference(g, sig, sl, sr);
            const auto w_old = wide_second_difference(g, v, vl, vr);
            const auto offset = wide_second_difference(g, std::vector<double>(nn, 0.0), vl, vr);
            const double kappa = th * dt * mu / (4.0 * g.dx() * g.dx());
            std::vector<double> a(nn), b(nn), c(nn), rhs(nn);
            for (int i = 0; i < n; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                const Stencil s = wide_stencil(i, n, g.periodic());
                a[ii] = -kappa * s.left;
                b[ii] = 1.0 - kappa * s.centre;
                c[ii] = -kappa * s.right;
                rhs[ii] = v[ii] + (1.0 - th) * dt * mu * w_old[ii] + dt * dsig[ii] + th * dt * mu * offset[ii];
            }
            auto v_new = solve_stride2(a, b, c, rhs, g.periodic());
            const auto dv = centered_difference(g, v_new, vl, vr);
            auto& u_new = next.data(0);
            u_new.resize(nn);
            for (std::size_t i = 0; i < nn; ++i) u_new[i] = u_half[i] + 0.5 * dt * dv[i];
            next.data(1) = std::move(v_new);
            break;
        }
    }
    if (!next.all_finite()) throw SolverAbort("non-finite value in the limit profile");
    return next;
}

// ---------------------------------------------------------------------------

namespace {

// Drives the time loop: picks each step so that stop times and t_end are hit
// exactly, and decides which steps are recorded.
class Clock {
  public:
    Clock(double t0, const SolverConfig& cfg) : t_(t0), end_(cfg.t_end), stride_(cfg.output_stride) {
        for (double s : cfg.stop_times) {
            if (s > t0 && s < end_) stops_.push_back(s);
        }
        std::sort(stops_.begin(), stops_.end());
    }

    bool done() const { return !(t_ < end_); }

    double clip(double dt) {
        double target = end_;
        for (double s : stops_) {
            if (s > t_) {
                target = std::min(target, s);
                break;
            }
        }
        landed_ = false;
        if (t_ + dt * (1.0 + 1e-9) >= target) {
            dt = target - t_;
            landed_ = true;
            landing_ = target;
        }
        return dt;
    }

    void advance(double dt) {
        t_ = landed_ ? landing_ : t_ + dt;
        ++step_;
    }

    double t() const { return t_; }
    long step() const { return step_; }
    bool final() const { return done(); }
    bool record() const { return step_ % stride_ == 0 || final() || landed_; }

  private:
    double t_;
    double end_;
    long stride_;
    std::vector<double> stops_;
    long step_ = 0;
    bool landed_ = false;
    double landing_ = 0.0;
};

void notify(const std::vector<Observer>& observers, const Observation& obs) {
    for (const auto& o : observers) o(obs);
}

}  // namespace

RunResult run_to(GridField state, const RelaxationSystem& sys, double eps, const SolverConfig& cfg,
                 const std::vector<Observer>& observers) {
    cfg.validate();
    require_state(state, sys, eps);
    const Kernel K(sys, eps);
    const double dx = state.grid().dx();
    EntropyLedger L;
    L.system = sys.name();
    L.eps = eps;
    L.cells = state.cells();
    const double mass0 = state.integral(0);
    double scale = std::numeric_limits<double>::min();
    for (double x : state.data(0)) scale += std::abs(x) * dx;
    scale = std::max(scale, std::abs(mass0));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto push = [&](double t, double rmax, const GridField& U) {
        L.times.push_back(t);
        L.phi.push_back(nan);
        L.diss_cum.push_back(nan);
        L.Q_cum.push_back(nan);
        L.E_cum.push_back(nan);
        L.res_max.push_back(rmax);
        L.mass_err.push_back(std::abs(U.integral(0) - mass0) / scale);
    };
    L.phi_max = nan;
    push(state.time(), 0.0, state);

    Clock clock(state.time(), cfg);
    while (!clock.done()) {
        const double dt = clock.clip(stable_dt(state, sys, eps, cfg));
        StepDetail detail;
        GridField next = step_relaxation(state, sys, eps, cfg, dt, &detail);
        check_far_field(next, sys, cfg);
        const auto r = entropy_residual(state, next, detail, sys, eps, dt);
        clock.advance(dt);
        next.set_time(clock.t());

        double rmax = 0.0, rint = 0.0, k1 = 0.0, k2 = 0.0;
        for (double x : r) {
            rmax = std::max(rmax, std::abs(x));
            rint += x * dx;
        }
        for (int i = 0; i < next.cells(); ++i) {
            const Cell U = load(next, i);
            k1 += std::abs(U[0]) * dx;
            k2 += K.entropy(U) * dx;
        }
        L.K1 = std::max(L.K1, k1);
        L.K2 = std::max(L.K2, k2);
        L.res_int_max = L.steps == 0 ? rint : std::max(L.res_int_max, rint);
        L.entropy_C = std::max(L.entropy_C, std::max(0.0, rint) / (dx + dt));
        L.dt_max = std::max(L.dt_max, dt);
        L.mass_step_max = std::max(L.mass_step_max, std::abs(next.integral(0) - state.integral(0)) / scale);
        ++L.steps;

        state = std::move(next);
        if (clock.record()) {
            push(clock.t(), rmax, state);
            notify(observers, {clock.step(), clock.t(), clock.final(), state, nullptr, nullptr});
        }
    }
    RunResult out{std::move(state), std::nullopt, clock.step(), std::move(L)};
    return out;
}

RunResult run_limit_to(GridField profile, const LimitSystem& limit, const SolverConfig& cfg, double dt,
                       const std::vector<Observer>& observers) {
    cfg.validate();
    if (!(dt > 0.0)) throw DomainError("limit time step must be positive");
    Clock clock(profile.time(), cfg);
    EntropyLedger L;
    L.system = limit.relaxation().name();
    L.cells = profile.cells();
    L.times.push_back(profile.time());
    while (!clock.done()) {
        const double h = clock.clip(dt);
        GridField next = step_limit(profile, limit, cfg, h);
        clock.advance(h);
        next.set_time(clock.t());
        profile = std::move(next);
        L.dt_max = std::max(L.dt_max, h);
        ++L.steps;
        if (clock.record()) {
            L.times.push_back(clock.t());
            notify(observers, {clock.step(), clock.t(), clock.final(), profile, &profile, nullptr});
        }
    }
    RunResult out{profile, profile, clock.step(), std::move(L)};
    return out;
}

RunResult run_paired(GridField state, GridField profile, const LimitSystem& limit, double eps, const SolverConfig& cfg,
                     const std::vector<Observer>& observers) {
    cfg.validate();
    const RelaxationSystem& sys = limit.relaxation();
    require_state(state, sys, eps);
    if (!profile.grid().same_as(state.grid())) throw DomainError("state and limit profile live on different grids");
    LedgerBuilder builder(limit, eps, state, profile);
    Clock clock(state.time(), cfg);
    while (!clock.done()) {
        const double dt = clock.clip(stable_dt(state, sys, eps, cfg));
        StepDetail detail;
        GridField next = step_relaxation(state, sys, eps, cfg, dt, &detail);
        check_far_field(next, sys, cfg);
        GridField next_profile = step_limit(profile, limit, cfg, dt);
        const auto r = entropy_residual(state, next, detail, sys, eps, dt);
        clock.advance(dt);
        next.set_time(clock.t());
        next_profile.set_time(clock.t());
        state = std::move(next);
        profile = std::move(next_profile);
        const bool record = clock.record();
        builder.on_step(clock.t(), dt, state, profile, r, record);
        if (record && !observers.empty()) {
            const GridField bar = limit.reconstruct_bar_state(profile, eps);
            notify(observers, {clock.step(), clock.t(), clock.final(), state, &profile, &bar});
        }
    }
    RunResult out{std::move(state), std::move(profile), clock.step(), builder.take()};
    return out;
}

}  // namespace relent
