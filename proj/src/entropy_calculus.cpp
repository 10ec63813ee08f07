#include "relent/entropy_calculus.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace relent {

namespace {

void require_bar(const EulerState& sb) {
    if (!(sb.rho >= kBarVacuumFloor)) {
        std::ostringstream os;
        os << "bar density " << sb.rho << " is below the vacuum floor " << kBarVacuumFloor;
        throw DomainError(os.str());
    }
}

void require_state(const EulerState& s) {
    if (s.rho < 0 || (s.rho == 0 && s.m != 0)) throw DomainError("vacuum state with nonzero momentum");
}

template <class Real>
Real relative_h(const InternalEnergy& h, Real rho, Real rhob) {
    using std::abs;
    if (rho > 0 && abs(rho - rhob) <= rhob / 2) {
        return taylor_remainder_integral<Real>(rho, rhob, [&h](Real r) { return h.d2h<Real>(r); });
    }
    return h.h<Real>(rho) - h.h<Real>(rhob) - h.dh<Real>(rhob) * (rho - rhob);
}

}  // namespace

double euler_entropy(const EulerState& s, const InternalEnergy& h) {
    require_state(s);
    if (s.rho == 0) return h.h(0.0);
    return 0.5 * s.m * s.m / s.rho + h.h(s.rho);
}

double euler_entropy_flux(const EulerState& s, const InternalEnergy& h) {
    if (!(s.rho > 0)) throw DomainError("entropy flux requires positive density");
    return 0.5 * s.m * s.m * s.m / (s.rho * s.rho) + s.m * h.dh(s.rho);
}

double euler_relative_entropy(const EulerState& s, const EulerState& sb, const InternalEnergy& h) {
    require_bar(sb);
    require_state(s);
    const long double rho = s.rho, rhob = sb.rho;
    const long double ub = sb.m / rhob;
    if (s.rho == 0) return static_cast<double>(relative_h<long double>(h, 0.0L, rhob));
    const long double du = s.m / rho - ub;
    return static_cast<double>(0.5L * rho * du * du + relative_h<long double>(h, rho, rhob));
}

double euler_relative_flux(const EulerState& s, const EulerState& sb, const InternalEnergy& h) {
    require_bar(sb);
    if (!(s.rho > 0)) throw DomainError("relative entropy flux requires positive density");
    const long double rho = s.rho, rhob = sb.rho, m = s.m;
    const long double ub = sb.m / rhob;
    const long double du = m / rho - ub;
    const long double dh_diff =
        std::abs(s.rho - sb.rho) <= 0.5 * sb.rho
            ? mean_value_integral<long double>(rho, rhob, [&h](long double r) { return h.d2h<long double>(r); })
            : h.dh<long double>(rho) - h.dh<long double>(rhob);
    const long double value = 0.5L * m * du * du + rho * dh_diff * du + ub * relative_h<long double>(h, rho, rhob);
    return static_cast<double>(value);
}

double euler_relative_flux_tensor(const EulerState& s, const EulerState& sb, const PressureLaw& p) {
    require_bar(sb);
    require_state(s);
    const long double ub = static_cast<long double>(sb.m) / sb.rho;
    const long double du = s.rho > 0 ? s.m / static_cast<long double>(s.rho) - ub : 0.0L;
    return static_cast<double>(s.rho * du * du) + p.relative(s.rho, sb.rho);
}

double euler_R(const EulerState& s, const EulerState& sb) {
    require_bar(sb);
    require_state(s);
    if (s.rho == 0) return 0.0;
    const double du = s.m / s.rho - sb.m / sb.rho;
    return s.rho * du * du;
}

double euler_Q(const EulerState& s, const EulerState& sb, double dxx_dh_bar, const PressureLaw& p) {
    return -dxx_dh_bar * euler_relative_flux_tensor(s, sb, p);
}

double euler_E(const EulerState& s, const EulerState& sb, double ebar) {
    require_bar(sb);
    require_state(s);
    if (s.rho == 0) return 0.0;
    return ebar * (s.rho / sb.rho) * (s.m / s.rho - sb.m / sb.rho);
}

namespace {

void require_profile(const GridField& rho_bar) {
    for (double r : rho_bar.data(0)) {
        if (!(r >= kBarVacuumFloor)) {
            std::ostringstream os;
            os << "limit profile reaches vacuum (rho = " << r << ")";
            throw DomainError(os.str());
        }
    }
}

std::pair<double, double> far_field_values(const Grid& g, const std::function<double(double)>& f) {
    if (g.periodic()) return {0.0, 0.0};
    return {f(g.boundary().left[0]), f(g.boundary().right[0])};
}

}  // namespace

std::vector<double> dxx_dh_bar(const GridField& rho_bar, const InternalEnergy& h) {
    // D( D p(rhob) / rhob ): equals d_xx h'(rhob) in the continuum since h'' = p'/rho,
    // and matches (1/eps) D(mb / rhob) for the discrete Darcy closure.
    require_profile(rho_bar);
    const auto& g = rho_bar.grid();
    const auto& rb = rho_bar.data(0);
    const auto& p = h.pressure();
    std::vector<double> pv(rb.size());
    for (std::size_t i = 0; i < rb.size(); ++i) pv[i] = p.p(rb[i]);
    const auto [pl, pr] = far_field_values(g, [&p](double r) { return p.p(r); });
    auto dp = centered_difference(g, pv, pl, pr);
    for (std::size_t i = 0; i < rb.size(); ++i) dp[i] /= rb[i];
    return centered_difference(g, dp, 0.0, 0.0);
}

GridField euler_error_term(const GridField& rho_bar, const PressureLaw& p, double eps) {
    require_profile(rho_bar);
    const auto& g = rho_bar.grid();
    const auto& rb = rho_bar.data(0);
    const std::size_t n = rb.size();
    std::vector<double> pv(n);
    for (std::size_t i = 0; i < n; ++i) pv[i] = p.p(rb[i]);
    const auto [pl, pr] = far_field_values(g, [&p](double r) { return p.p(r); });
    const auto px = centered_difference(g, pv, pl, pr);
    const auto pxx = centered_difference(g, px, 0.0, 0.0);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = px[i] * px[i] / rb[i];
        b[i] = p.dp(rb[i]) * pxx[i];
    }
    const auto da = centered_difference(g, a, 0.0, 0.0);
    const auto db = centered_difference(g, b, 0.0, 0.0);
    GridField out(g, 1, rho_bar.time());
    for (std::size_t i = 0; i < n; ++i) out.data(0)[i] = eps * (da[i] - db[i]);
    return out;
}

std::vector<double> hessian_R_eigenvalues(double rho, const std::vector<double>& m) {
    if (!(rho > 0)) throw DomainError("Hessian of R requires positive density");
    const auto d = static_cast<Eigen::Index>(m.size());
    if (d != 1 && d != 3) throw DomainError("Hessian of R is available for d = 1 or d = 3");
    double m2 = 0.0;
    for (double mi : m) m2 += mi * mi;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d + 1, d + 1);
    H(0, 0) = 2 * m2 / (rho * rho * rho);
    for (Eigen::Index i = 0; i < d; ++i) {
        H(0, i + 1) = H(i + 1, 0) = -2 * m[static_cast<std::size_t>(i)] / (rho * rho);
        H(i + 1, i + 1) = 2 / rho;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> hessian_R_eigenvalues_closed_form(double rho, const std::vector<double>& m) {
    double m2 = 0.0;
    for (double mi : m) m2 += mi * mi;
    std::vector<double> ev{0.0};
    for (std::size_t i = 1; i < m.size(); ++i) ev.push_back(2 / rho);
    ev.push_back(2 / rho + 2 * m2 / (rho * rho * rho));
    return ev;
}

ModifiedPair::ModifiedPair(double rho_minus, double rho_plus, InternalEnergy h)
    : rho_minus_(rho_minus), rho_plus_(rho_plus), h_(std::move(h)) {
    if (!(rho_minus > 0 && rho_plus > 0)) throw DomainError("far-field densities must be positive");
    const double hm = h_.h(rho_minus), hp = h_.h(rho_plus);
    slope_ = rho_plus == rho_minus ? h_.dh(rho_plus) : (hp - hm) / (rho_plus - rho_minus);
    offset_ = 0.5 * (hp + hm) - slope_ * 0.5 * (rho_plus + rho_minus);
}

double ModifiedPair::eta(const EulerState& s) const { return euler_entropy(s, h_) - slope_ * s.rho - offset_; }

double ModifiedPair::q(const EulerState& s) const {
    const double v = euler_entropy_flux(s, h_) - slope_ * s.m;
    return flip_flux_ ? -v : v;
}

double ModifiedPair::relative_entropy(const EulerState& s, const EulerState& sb) const {
    require_bar(sb);
    // literal remainder of eta~; the affine part drops out
    const long double ub = static_cast<long double>(sb.m) / sb.rho;
    auto eta_t = [this](long double r, long double m) {
        return euler_entropy_t(r, m, h_) - slope_ * r - offset_;
    };
    const long double d_rho = -ub * ub / 2 + h_.dh<long double>(sb.rho) - slope_;
    const long double d_m = ub;
    return static_cast<double>(eta_t(s.rho, s.m) - eta_t(sb.rho, sb.m) - d_rho * (s.rho - sb.rho) -
                               d_m * (s.m - sb.m));
}

ConsistencyReport entropy_consistency(const StateFn& eta, const StateFn& q, const JacobianFn& flux_jacobian,
                                      const std::vector<std::vector<double>>& states, double fd_step) {
    ConsistencyReport report;
    for (const auto& x : states) {
        const std::size_t n = x.size();
        std::vector<double> grad_eta(n), grad_q(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double step = fd_step * std::max(1.0, std::abs(x[k]));
            auto xp = x, xm = x;
            xp[k] += step;
            xm[k] -= step;
            grad_eta[k] = (eta(xp) - eta(xm)) / (2 * step);
            grad_q[k] = (q(xp) - q(xm)) / (2 * step);
        }
        // Normwise over the components: a single component may vanish at
        // sonic states while its finite-difference noise does not.
        const auto J = flux_jacobian(x);
        double diff = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double combined = 0.0, mag = std::abs(grad_q[j]);
            for (std::size_t k = 0; k < n; ++k) {
                combined += grad_eta[k] * J[k][j];
                mag += std::abs(grad_eta[k] * J[k][j]);
            }
            diff = std::max(diff, std::abs(grad_q[j] - combined));
            scale = std::max(scale, mag);
        }
        const double err = diff / std::max(scale, 1e-300);
        if (err > report.max_relative_error) {
            report.max_relative_error = err;
            std::array<double, 3> w{0, 0, 0};
            for (std::size_t k = 0; k < std::min<std::size_t>(3, n); ++k) w[k] = x[k];
            report.worst_state = w;
        }
    }
    return report;
}

ConsistencyReport euler_entropy_consistency(const InternalEnergy& h, const std::vector<EulerState>& states) {
    std::vector<std::vector<double>> xs;
    xs.reserve(states.size());
    for (const auto& s : states) xs.push_back({s.rho, s.m});
    const auto& p = h.pressure();
    return entropy_consistency(
        [&h](const std::vector<double>& x) { return euler_entropy({x[0], x[1]}, h); },
        [&h](const std::vector<double>& x) { return euler_entropy_flux({x[0], x[1]}, h); },
        [&p](const std::vector<double>& x) {
            const double u = x[1] / x[0];
            return std::vector<std::vector<double>>{{0.0, 1.0}, {p.dp(x[0]) - u * u, 2 * u}};
        },
        xs);
}

namespace {

// tau(u) - tau(ub) as (u - ub) times the mean of tau', free of cancellation near ub.
double stress_difference(const StressLaw& tau, double u, double ub) {
    return static_cast<double>(
        mean_value_integral<long double>(u, ub, [&tau](long double x) { return tau.dtau<long double>(x); }));
}

}  // namespace

EnergyPair psystem_energies(const PSystemState& s, const StressLaw& tau) {
    return {0.5 * s.v * s.v + tau.energy(s.u), -s.v * tau.tau(s.u)};
}

EnergyPair psystem_relative(const PSystemState& s, const PSystemState& sb, const StressLaw& tau) {
    const double dv = s.v - sb.v;
    return {0.5 * dv * dv + tau.relative_energy(s.u, sb.u), -dv * stress_difference(tau, s.u, sb.u)};
}

EnergyPair visco_energies(const ViscoState& s, const StressLaw& sigma, double mu, double eps) {
    if (!(mu > 0)) throw DomainError("viscoelastic system requires mu > 0");
    return {sigma.energy(s.u) + 0.5 * s.v * s.v + s.z * s.z / (2 * mu),
            -(eps * sigma.tau(s.u) * s.v + s.v * s.z)};
}

EnergyPair visco_relative(const ViscoState& s, const ViscoState& sb, const StressLaw& sigma, double mu, double eps) {
    if (!(mu > 0)) throw DomainError("viscoelastic system requires mu > 0");
    const double dv = s.v - sb.v, dz = s.z - sb.z;
    return {sigma.relative_energy(s.u, sb.u) + 0.5 * dv * dv + dz * dz / (2 * mu),
            -eps * stress_difference(sigma, s.u, sb.u) * dv - dv * dz};
}

LemmaBoundReport lemma_bound_checks(const ConstitutivePair& law, const LemmaBoundConfig& cfg) {
    LemmaBoundReport r;
    r.samples = cfg.samples;
    const auto* g = law.pressure.gamma_law();
    r.gamma = g ? g->gamma : cfg.growth_gamma;
    r.R0 = 2 * cfg.bar_max;
    r.C1 = std::numeric_limits<double>::infinity();
    r.C2 = r.gamma > 1 ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> bar(cfg.bar_min, cfg.bar_max);
    std::uniform_real_distribution<double> log_rho(std::log(1e-3), std::log(cfg.rho_max));
    std::uniform_real_distribution<double> mom(-cfg.momentum_scale, cfg.momentum_scale);

    for (std::uint64_t k = 0; k < cfg.samples; ++k) {
        const EulerState sb{bar(rng), mom(rng)};
        const double rho = std::exp(log_rho(rng));
        const EulerState s{rho, mom(rng) * rho};
        const double hrel = law.energy.relative(rho, sb.rho);
        const double prel = law.pressure.relative(rho, sb.rho);
        const double eta = euler_relative_entropy(s, sb, law.energy);
        const double f = euler_relative_flux_tensor(s, sb, law.pressure);
        if (hrel > 0) {
            const double ratio = prel / hrel;
            if (!std::isfinite(ratio)) r.violated = true;
            r.c_pressure = std::max(r.c_pressure, ratio);
            const double d = std::abs(rho - sb.rho);
            if (rho <= r.R0) {
                r.C1 = std::min(r.C1, hrel / (d * d));
            } else if (r.gamma > 1) {
                r.C2 = std::min(r.C2, hrel / std::pow(d, r.gamma));
            }
        }
        if (eta > 0) {
            const double ratio = std::abs(f) / eta;
            if (!std::isfinite(ratio)) r.violated = true;
            r.C_flux = std::max(r.C_flux, ratio);
        }
    }
    if (!(r.C1 > 0)) r.violated = true;
    if (r.gamma > 1 && !(r.C2 > 0)) r.violated = true;
    return r;
}

StressBoundReport stress_bound_scan(const StressLaw& tau, double ub_min, double ub_max, double u_max, int points,
                                    int bar_points) {
    StressBoundReport r;
    r.sup_ratio = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < bar_points; ++j) {
        const double ub = bar_points == 1 ? ub_min : ub_min + (ub_max - ub_min) * j / (bar_points - 1);
        for (int i = 0; i < points; ++i) {
            const double u = -u_max + 2 * u_max * i / (points - 1);
            const double w = tau.relative_energy(u, ub);
            if (!(w > 0)) continue;
            const double ratio = tau.relative_stress(u, ub) / w;
            if (!std::isfinite(ratio)) {
                r.finite = false;
                continue;
            }
            if (ratio > r.sup_ratio) {
                r.sup_ratio = ratio;
                r.u_at_sup = u;
                r.ub_at_sup = ub;
            }
        }
    }
    return r;
}

}  // namespace relent
