#include "relent/relaxation_systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::EulerFriction: return "euler";
        case SystemKind::PSystemDamping: return "psystem";
        case SystemKind::ViscoMemory: return "visco";
    }
    return "unknown";
}

std::string to_string(LimitKind kind) {
    switch (kind) {
        case LimitKind::PorousMedia: return "porous-media";
        case LimitKind::TauDiffusion: return "tau-diffusion";
        case LimitKind::RateTypeVisco: return "rate-type-visco";
    }
    return "unknown";
}

SystemKind parse_system_kind(const std::string& name) {
    if (name == "euler") return SystemKind::EulerFriction;
    if (name == "psystem") return SystemKind::PSystemDamping;
    if (name == "visco") return SystemKind::ViscoMemory;
    throw ConfigError("unknown system '" + name + "' (expected euler, psystem or visco)");
}

RelaxationSystem::RelaxationSystem(SystemKind kind, Constitutive c, double mu)
    : kind_(kind), constitutive_(std::move(c)), mu_(mu) {}

RelaxationSystem build_system(SystemKind kind, Constitutive constitutive, double mu) {
    const bool is_pressure = std::holds_alternative<ConstitutivePair>(constitutive);
    if (kind == SystemKind::EulerFriction && !is_pressure) {
        throw DomainError("the Euler system needs a pressure law");
    }
    if (kind != SystemKind::EulerFriction && is_pressure) {
        throw DomainError(to_string(kind) + " needs a stress law");
    }
    if (kind == SystemKind::ViscoMemory && !(mu > 0)) throw DomainError("viscoelastic system requires mu > 0");
    return RelaxationSystem(kind, std::move(constitutive), mu);
}

const ConstitutivePair& RelaxationSystem::euler_law() const { return std::get<ConstitutivePair>(constitutive_); }
const StressLaw& RelaxationSystem::stress_law() const { return std::get<StressLaw>(constitutive_); }

State RelaxationSystem::flux(const State& U) const {
    switch (kind_) {
        case SystemKind::EulerFriction:
            return {U[1], U[1] * U[1] / U[0] + euler_law().pressure.p(U[0])};
        case SystemKind::PSystemDamping:
            return {-U[1], -stress_law().tau(U[0])};
        case SystemKind::ViscoMemory:
            return {0.0, -U[2], -mu_ * U[1]};
    }
    return {};
}

State RelaxationSystem::flux_order0(const State& U) const {
    if (kind_ == SystemKind::ViscoMemory) return {-U[1], -stress_law().tau(U[0]), 0.0};
    return State(static_cast<std::size_t>(state_dim()), 0.0);
}

State RelaxationSystem::total_flux(const State& U, double eps) const {
    State f = flux(U);
    const State f0 = flux_order0(U);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = f0[k] + f[k] / eps;
    return f;
}

State RelaxationSystem::stiff_source(const State& U) const {
    State s(static_cast<std::size_t>(state_dim()), 0.0);
    const auto r = static_cast<std::size_t>(relaxing_component());
    s[r] = -U[r];
    return s;
}

Eigen::MatrixXd RelaxationSystem::flux_jacobian(const State& U, double eps) const {
    const int n = state_dim();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    switch (kind_) {
        case SystemKind::EulerFriction: {
            const double u = U[1] / U[0];
            J << 0.0, 1.0, euler_law().pressure.dp(U[0]) - u * u, 2 * u;
            J /= eps;
            break;
        }
        case SystemKind::PSystemDamping:
            J << 0.0, -1.0, -stress_law().dtau(U[0]), 0.0;
            J /= eps;
            break;
        case SystemKind::ViscoMemory:
            J << 0.0, -1.0, 0.0, -stress_law().dtau(U[0]), 0.0, -1.0 / eps, 0.0, -mu_ / eps, 0.0;
            break;
    }
    return J;
}

std::vector<double> RelaxationSystem::wave_speeds(const State& U, double eps) const {
    switch (kind_) {
        case SystemKind::EulerFriction: {
            const double u = U[1] / U[0];
            const double c = std::sqrt(euler_law().pressure.dp(U[0]));
            return {(u - c) / eps, (u + c) / eps};
        }
        case SystemKind::PSystemDamping: {
            const double c = std::sqrt(stress_law().dtau(U[0])) / eps;
            return {-c, c};
        }
        case SystemKind::ViscoMemory: {
            const double c = std::sqrt(stress_law().dtau(U[0]) + mu_ / (eps * eps));
            return {-c, 0.0, c};
        }
    }
    return {};
}

double RelaxationSystem::max_wave_speed(const State& U, double eps) const {
    const auto s = wave_speeds(U, eps);
    return std::max(std::abs(s.front()), std::abs(s.back()));
}

double RelaxationSystem::entropy(const State& U) const {
    switch (kind_) {
        case SystemKind::EulerFriction: return euler_entropy({U[0], U[1]}, euler_law().energy);
        case SystemKind::PSystemDamping: return psystem_energies({U[0], U[1]}, stress_law()).energy;
        case SystemKind::ViscoMemory: return visco_energies({U[0], U[1], U[2]}, stress_law(), mu_, 1.0).energy;
    }
    return 0.0;
}

double RelaxationSystem::entropy_flux(const State& U, double eps) const {
    switch (kind_) {
        case SystemKind::EulerFriction: return euler_entropy_flux({U[0], U[1]}, euler_law().energy) / eps;
        case SystemKind::PSystemDamping: return psystem_energies({U[0], U[1]}, stress_law()).flux / eps;
        case SystemKind::ViscoMemory:
            return visco_energies({U[0], U[1], U[2]}, stress_law(), mu_, eps).flux / eps;
    }
    return 0.0;
}

double RelaxationSystem::dissipation(const State& U) const {
    switch (kind_) {
        case SystemKind::EulerFriction: return U[0] > 0 ? U[1] * U[1] / U[0] : 0.0;
        case SystemKind::PSystemDamping: return U[1] * U[1];
        case SystemKind::ViscoMemory: return U[2] * U[2] / mu_;
    }
    return 0.0;
}

double RelaxationSystem::relaxing_entropy(const State& U) const {
    switch (kind_) {
        case SystemKind::EulerFriction: return U[0] > 0 ? 0.5 * U[1] * U[1] / U[0] : 0.0;
        case SystemKind::PSystemDamping: return 0.5 * U[1] * U[1];
        case SystemKind::ViscoMemory: return 0.5 * U[2] * U[2] / mu_;
    }
    return 0.0;
}

double RelaxationSystem::relative_entropy(const State& U, const State& Ub) const {
    switch (kind_) {
        case SystemKind::EulerFriction:
            return euler_relative_entropy({U[0], U[1]}, {Ub[0], Ub[1]}, euler_law().energy);
        case SystemKind::PSystemDamping:
            return psystem_relative({U[0], U[1]}, {Ub[0], Ub[1]}, stress_law()).energy;
        case SystemKind::ViscoMemory:
            return visco_relative({U[0], U[1], U[2]}, {Ub[0], Ub[1], Ub[2]}, stress_law(), mu_, 1.0).energy;
    }
    return 0.0;
}

double RelaxationSystem::relative_entropy_flux(const State& U, const State& Ub, double eps) const {
    switch (kind_) {
        case SystemKind::EulerFriction:
            return euler_relative_flux({U[0], U[1]}, {Ub[0], Ub[1]}, euler_law().energy) / eps;
        case SystemKind::PSystemDamping:
            return psystem_relative({U[0], U[1]}, {Ub[0], Ub[1]}, stress_law()).flux / eps;
        case SystemKind::ViscoMemory:
            return visco_relative({U[0], U[1], U[2]}, {Ub[0], Ub[1], Ub[2]}, stress_law(), mu_, eps).flux / eps;
    }
    return 0.0;
}

double RelaxationSystem::relative_dissipation(const State& U, const State& Ub) const {
    switch (kind_) {
        case SystemKind::EulerFriction: return euler_R({U[0], U[1]}, {Ub[0], Ub[1]});
        case SystemKind::PSystemDamping: return (U[1] - Ub[1]) * (U[1] - Ub[1]);
        case SystemKind::ViscoMemory: return (U[2] - Ub[2]) * (U[2] - Ub[2]) / mu_;
    }
    return 0.0;
}

State RelaxationSystem::lift_equilibrium(const std::vector<double>& eq) const {
    if (kind_ == SystemKind::ViscoMemory) {
        if (eq.size() != 2) throw DomainError("visco equilibrium states are (u, v)");
        return {eq[0], eq[1], 0.0};
    }
    if (eq.size() != 1) throw DomainError(name() + " equilibrium states have one component");
    return {eq[0], 0.0};
}

std::vector<std::string> RelaxationSystem::component_names() const {
    switch (kind_) {
        case SystemKind::EulerFriction: return {"rho", "m"};
        case SystemKind::PSystemDamping: return {"u", "v"};
        case SystemKind::ViscoMemory: return {"u", "v", "z"};
    }
    return {};
}

std::vector<int> RelaxationSystem::conserved_components() const {
    switch (kind_) {
        case SystemKind::EulerFriction: return {0};
        case SystemKind::PSystemDamping: return {0};
        case SystemKind::ViscoMemory: return {0, 1};
    }
    return {};
}

void RelaxationSystem::check_admissible(const State& U, double floor) const {
    for (double x : U) {
        if (!std::isfinite(x)) throw DomainError("non-finite state component");
    }
    if (kind_ == SystemKind::EulerFriction && !(U[0] >= floor)) {
        std::ostringstream os;
        os << "density " << U[0] << " below the vacuum floor " << floor;
        throw DomainError(os.str());
    }
}

State far_field_state(const RelaxationSystem& sys, const Grid& g, bool right) {
    return sys.lift_equilibrium(right ? g.boundary().right : g.boundary().left);
}

// ---------------------------------------------------------------------------

LimitSystem::LimitSystem(const RelaxationSystem& sys)
    : sys_(sys),
      kind_(sys.kind() == SystemKind::EulerFriction    ? LimitKind::PorousMedia
            : sys.kind() == SystemKind::PSystemDamping ? LimitKind::TauDiffusion
                                                        : LimitKind::RateTypeVisco) {}

std::vector<std::string> LimitSystem::component_names() const {
    switch (kind_) {
        case LimitKind::PorousMedia: return {"rho_bar"};
        case LimitKind::TauDiffusion: return {"u_bar"};
        case LimitKind::RateTypeVisco: return {"u_bar", "v_bar"};
    }
    return {};
}

std::vector<double> LimitSystem::far_field(const Grid& g, bool right) const {
    if (g.periodic()) return {};
    return right ? g.boundary().right : g.boundary().left;
}

namespace {

// Applies f pointwise to component c of the profile and returns the values
// with far-field ghost values f(ghost).
struct Mapped {
    std::vector<double> values;
    double left = 0.0;
    double right = 0.0;
};

template <class F>
Mapped map_component(const GridField& profile, int c, const std::vector<double>& gl, const std::vector<double>& gr,
                     F f) {
    Mapped out;
    const auto& v = profile.data(c);
    out.values.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.values[i] = f(v[i]);
    if (!gl.empty()) {
        out.left = f(gl[static_cast<std::size_t>(c)]);
        out.right = f(gr[static_cast<std::size_t>(c)]);
    }
    return out;
}

void check_profile(const LimitSystem& L, const GridField& profile) {
    if (profile.dim() != L.state_dim()) throw DomainError("limit profile has the wrong number of components");
    if (L.kind() == LimitKind::PorousMedia) {
        for (double r : profile.data(0)) {
            if (!(r >= kBarVacuumFloor)) {
                std::ostringstream os;
                os << "limit density " << r << " below the bar vacuum floor";
                throw DomainError(os.str());
            }
        }
    }
}

std::vector<double> D(const Grid& g, const Mapped& m) { return centered_difference(g, m.values, m.left, m.right); }
std::vector<double> D(const Grid& g, const std::vector<double>& v) { return centered_difference(g, v, 0.0, 0.0); }

}  // namespace

GridField LimitSystem::reconstruct_bar_state(const GridField& profile, double eps) const {
    check_profile(*this, profile);
    const Grid& g = profile.grid();
    const auto gl = far_field(g, false), gr = far_field(g, true);
    GridField bar(g, sys_.state_dim(), profile.time());
    const std::size_t n = static_cast<std::size_t>(g.cells());
    switch (kind_) {
        case LimitKind::PorousMedia: {
            const auto& p = sys_.euler_law().pressure;
            const auto dp = D(g, map_component(profile, 0, gl, gr, [&p](double r) { return p.p(r); }));
            for (std::size_t i = 0; i < n; ++i) {
                bar.data(0)[i] = profile.data(0)[i];
                bar.data(1)[i] = -eps * dp[i];
            }
            break;
        }
        case LimitKind::TauDiffusion: {
            const auto& t = sys_.stress_law();
            const auto dt = D(g, map_component(profile, 0, gl, gr, [&t](double u) { return t.tau(u); }));
            for (std::size_t i = 0; i < n; ++i) {
                bar.data(0)[i] = profile.data(0)[i];
                bar.data(1)[i] = eps * dt[i];
            }
            break;
        }
        case LimitKind::RateTypeVisco: {
            const auto dv = D(g, map_component(profile, 1, gl, gr, [](double v) { return v; }));
            for (std::size_t i = 0; i < n; ++i) {
                bar.data(0)[i] = profile.data(0)[i];
                bar.data(1)[i] = profile.data(1)[i];
                bar.data(2)[i] = eps * sys_.mu() * dv[i];
            }
            break;
        }
    }
    return bar;
}

GridField LimitSystem::limit_rhs(const GridField& profile) const {
    check_profile(*this, profile);
    const Grid& g = profile.grid();
    const auto gl = far_field(g, false), gr = far_field(g, true);
    GridField rhs(g, state_dim(), profile.time());
    switch (kind_) {
        case LimitKind::PorousMedia: {
            const auto& p = sys_.euler_law().pressure;
            rhs.data(0) = D(g, D(g, map_component(profile, 0, gl, gr, [&p](double r) { return p.p(r); })));
            break;
        }
        case LimitKind::TauDiffusion: {
            const auto& t = sys_.stress_law();
            rhs.data(0) = D(g, D(g, map_component(profile, 0, gl, gr, [&t](double u) { return t.tau(u); })));
            break;
        }
        case LimitKind::RateTypeVisco: {
            const auto& t = sys_.stress_law();
            const auto v = map_component(profile, 1, gl, gr, [](double x) { return x; });
            rhs.data(0) = D(g, v);
            const auto ds = D(g, map_component(profile, 0, gl, gr, [&t](double u) { return t.tau(u); }));
            const auto dvv = D(g, D(g, v));
            auto& out = rhs.data(1);
            out.resize(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds[i] + sys_.mu() * dvv[i];
            break;
        }
    }
    return rhs;
}

GridField LimitSystem::bar_time_derivative(const GridField& profile, double eps) const {
    const GridField rhs = limit_rhs(profile);
    const Grid& g = profile.grid();
    const std::size_t n = static_cast<std::size_t>(g.cells());
    GridField dt(g, sys_.state_dim(), profile.time());
    switch (kind_) {
        case LimitKind::PorousMedia: {
            // mb = -eps D p(rhob)  =>  mb_t = -eps D (p'(rhob) rhob_t)
            const auto& p = sys_.euler_law().pressure;
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = p.dp(profile.data(0)[i]) * rhs.data(0)[i];
            const auto dw = D(g, w);
            for (std::size_t i = 0; i < n; ++i) {
                dt.data(0)[i] = rhs.data(0)[i];
                dt.data(1)[i] = -eps * dw[i];
            }
            break;
        }
        case LimitKind::TauDiffusion: {
            const auto& t = sys_.stress_law();
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = t.dtau(profile.data(0)[i]) * rhs.data(0)[i];
            const auto dw = D(g, w);
            for (std::size_t i = 0; i < n; ++i) {
                dt.data(0)[i] = rhs.data(0)[i];
                dt.data(1)[i] = eps * dw[i];
            }
            break;
        }
        case LimitKind::RateTypeVisco: {
            const auto dvt = D(g, rhs.data(1));
            for (std::size_t i = 0; i < n; ++i) {
                dt.data(0)[i] = rhs.data(0)[i];
                dt.data(1)[i] = rhs.data(1)[i];
                dt.data(2)[i] = eps * sys_.mu() * dvt[i];
            }
            break;
        }
    }
    return dt;
}

GridField LimitSystem::bar_error_source(const GridField& profile, double eps) const {
    check_profile(*this, profile);
    const Grid& g = profile.grid();
    const std::size_t n = static_cast<std::size_t>(g.cells());
    GridField src(g, sys_.state_dim(), profile.time());
    switch (kind_) {
        case LimitKind::PorousMedia: {
            const GridField e = euler_error_term(profile, sys_.euler_law().pressure, eps);
            src.data(1) = e.data(0);
            break;
        }
        case LimitKind::TauDiffusion: {
            // vb_t = eps D(tau'(ub) DD tau(ub))
            const GridField rhs = limit_rhs(profile);
            const auto& t = sys_.stress_law();
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = t.dtau(profile.data(0)[i]) * rhs.data(0)[i];
            const auto dw = D(g, w);
            for (std::size_t i = 0; i < n; ++i) src.data(1)[i] = eps * dw[i];
            break;
        }
        case LimitKind::RateTypeVisco: {
            // zb_t = eps mu D(D sigma(ub) + mu DD vb)
            const GridField rhs = limit_rhs(profile);
            const auto dvt = D(g, rhs.data(1));
            for (std::size_t i = 0; i < n; ++i) src.data(2)[i] = eps * sys_.mu() * dvt[i];
            break;
        }
    }
    return src;
}

GridField semi_discrete_residual(const RelaxationSystem& sys, const GridField& U, const GridField& U_t, double eps) {
    const Grid& g = U.grid();
    const int dim = sys.state_dim();
    const std::size_t n = static_cast<std::size_t>(g.cells());
    std::vector<std::vector<double>> F(static_cast<std::size_t>(dim), std::vector<double>(n));
    State cell(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < dim; ++c) cell[static_cast<std::size_t>(c)] = U.data(c)[i];
        const State f = sys.total_flux(cell, eps);
        for (int c = 0; c < dim; ++c) F[static_cast<std::size_t>(c)][i] = f[static_cast<std::size_t>(c)];
    }
    State fl(static_cast<std::size_t>(dim), 0.0), fr(static_cast<std::size_t>(dim), 0.0);
    if (!g.periodic()) {
        fl = sys.total_flux(far_field_state(sys, g, false), eps);
        fr = sys.total_flux(far_field_state(sys, g, true), eps);
    }
    GridField res(g, dim, U.time());
    for (int c = 0; c < dim; ++c) {
        const auto c_ = static_cast<std::size_t>(c);
        const auto dF = centered_difference(g, F[c_], fl[c_], fr[c_]);
        for (std::size_t i = 0; i < n; ++i) res.data(c)[i] = U_t.data(c)[i] + dF[i];
    }
    const auto r = sys.relaxing_component();
    for (std::size_t i = 0; i < n; ++i) res.data(r)[i] += U.data(r)[i] / (eps * eps);
    return res;
}

}  // namespace relent
