// Entropy pairs, relative entropies and relative fluxes, the dissipation
// splitting R / Q / E, and sampled lemma bounds for the three relaxation
// systems (Euler with friction, damped p-system, viscoelasticity with memory).
//
// Relative quantities come in two flavours: the closed forms used everywhere
// in the solvers, and `*_taylor` versions that evaluate the literal defining
// combination  F(U) - F(Ubar) - dF(Ubar)(U - Ubar)  in a caller-chosen
// floating-point type. The latter exist to be compared against.

#ifndef RELENT_ENTROPY_CALCULUS_HPP
#define RELENT_ENTROPY_CALCULUS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "relent/constitutive.hpp"
#include "relent/errors.hpp"
#include "relent/grid.hpp"

namespace relent {

/// Bar states must stay at least this far from vacuum.
inline constexpr double kBarVacuumFloor = 1e-6;

struct EulerState {
    double rho;
    double m;
};

struct PSystemState {
    double u;
    double v;
};

struct ViscoState {
    double u;
    double v;
    double z;
};

// ---------------------------------------------------------------------------
// Euler with friction

double euler_entropy(const EulerState& s, const InternalEnergy& h);
double euler_entropy_flux(const EulerState& s, const InternalEnergy& h);

/// 1/2 rho (m/rho - mb/rhob)^2 + h(rho | rhob). The state may sit at vacuum
/// only with zero momentum.
double euler_relative_entropy(const EulerState& s, const EulerState& sb, const InternalEnergy& h);

/// 1/2 m (u - ub)^2 + rho (h'(rho) - h'(rhob)) (u - ub) + ub h(rho | rhob).
double euler_relative_flux(const EulerState& s, const EulerState& sb, const InternalEnergy& h);

/// rho (u - ub)^2 + p(rho | rhob), the 1-D relative momentum flux.
double euler_relative_flux_tensor(const EulerState& s, const EulerState& sb, const PressureLaw& p);

/// rho (u - ub)^2.
double euler_R(const EulerState& s, const EulerState& sb);

/// -(d_xx h'(rhob)) * f(rho, m | rhob, mb); the caller supplies d_xx h'(rhob).
double euler_Q(const EulerState& s, const EulerState& sb, double dxx_dh_bar, const PressureLaw& p);

/// ebar * (rho / rhob) * (u - ub).
double euler_E(const EulerState& s, const EulerState& sb, double ebar);

/// Literal definitions, evaluated in Real.
template <class Real>
Real euler_entropy_t(Real rho, Real m, const InternalEnergy& h) {
    return m * m / (2 * rho) + h.h<Real>(rho);
}

template <class Real>
Real euler_flux_t(Real rho, Real m, const InternalEnergy& h, int component) {
    return component == 0 ? m : m * m / rho + h.pressure().p<Real>(rho);
}

template <class Real>
Real euler_entropy_flux_t(Real rho, Real m, const InternalEnergy& h) {
    return m * m * m / (2 * rho * rho) + m * h.dh<Real>(rho);
}

/// eta(U) - eta(Ub) - d eta(Ub) . (U - Ub)
template <class Real>
Real euler_relative_entropy_taylor(const EulerState& s, const EulerState& sb, const InternalEnergy& h) {
    const Real r = s.rho, m = s.m, rb = sb.rho, mb = sb.m;
    const Real ub = mb / rb;
    const Real d_rho = -ub * ub / 2 + h.dh<Real>(rb);
    const Real d_m = ub;
    return euler_entropy_t(r, m, h) - euler_entropy_t(rb, mb, h) - d_rho * (r - rb) - d_m * (m - mb);
}

/// q(U) - q(Ub) - d eta(Ub) . (F(U) - F(Ub))
template <class Real>
Real euler_relative_flux_taylor(const EulerState& s, const EulerState& sb, const InternalEnergy& h) {
    const Real r = s.rho, m = s.m, rb = sb.rho, mb = sb.m;
    const Real ub = mb / rb;
    const Real d_rho = -ub * ub / 2 + h.dh<Real>(rb);
    const Real d_m = ub;
    return euler_entropy_flux_t(r, m, h) - euler_entropy_flux_t(rb, mb, h) -
           d_rho * (euler_flux_t(r, m, h, 0) - euler_flux_t(rb, mb, h, 0)) -
           d_m * (euler_flux_t(r, m, h, 1) - euler_flux_t(rb, mb, h, 1));
}

/// f(U) - f(Ub) - df(Ub)(U - Ub) for the momentum flux f = m^2/rho + p.
template <class Real>
Real euler_relative_flux_tensor_taylor(const EulerState& s, const EulerState& sb, const PressureLaw& p) {
    const Real r = s.rho, m = s.m, rb = sb.rho, mb = sb.m;
    const Real ub = mb / rb;
    const Real f = m * m / r + p.p<Real>(r);
    const Real fb = mb * mb / rb + p.p<Real>(rb);
    const Real df_rho = -ub * ub + p.dp<Real>(rb);
    const Real df_m = 2 * ub;
    return f - fb - df_rho * (r - rb) - df_m * (m - mb);
}

/// d_xx h'(rhob) on the grid from the same centred stencils the solvers use.
std::vector<double> dxx_dh_bar(const GridField& rho_bar, const InternalEnergy& h);

/// ebar = eps [ D((D p)^2 / rhob) - D(p'(rhob) DD p) ] on the grid, one component.
GridField euler_error_term(const GridField& rho_bar, const PressureLaw& p, double eps);

/// Hessian of m -> |m|^2 / rho part of R with the bar fixed, in (rho, m) for
/// d = 1 (2x2) or d = 3 (4x4). Eigenvalues come back sorted ascending.
std::vector<double> hessian_R_eigenvalues(double rho, const std::vector<double>& m);

/// Closed form {0, 2/rho, ..., 2/rho + 2|m|^2/rho^3} for comparison.
std::vector<double> hessian_R_eigenvalues_closed_form(double rho, const std::vector<double>& m);

/// Far-field modified pair: eta~ = eta - s (rho - (rho+ + rho-)/2) - (h+ + h-)/2,
/// q~ = q - s m, with s the chord slope of h between rho- and rho+.
class ModifiedPair {
  public:
    ModifiedPair(double rho_minus, double rho_plus, InternalEnergy h);

    double eta(const EulerState& s) const;
    double q(const EulerState& s) const;
    double relative_entropy(const EulerState& s, const EulerState& sb) const;
    double slope() const { return slope_; }

    /// Test hook: flips the sign of q~ so consistency checks can be seen to fail.
    void inject_flux_sign_fault(bool on) { flip_flux_ = on; }

  private:
    double rho_minus_;
    double rho_plus_;
    InternalEnergy h_;
    double slope_;
    double offset_;
    bool flip_flux_ = false;
};

/// Finite-difference consistency of an entropy pair: returns the max relative
/// mismatch between grad q and grad eta . DF over the given states.
struct ConsistencyReport {
    double max_relative_error = 0.0;
    std::optional<std::array<double, 3>> worst_state;
};

using StateFn = std::function<double(const std::vector<double>&)>;
using JacobianFn = std::function<std::vector<std::vector<double>>(const std::vector<double>&)>;

ConsistencyReport entropy_consistency(const StateFn& eta, const StateFn& q, const JacobianFn& flux_jacobian,
                                      const std::vector<std::vector<double>>& states, double fd_step = 1e-5);

/// The Euler pair against the Euler flux Jacobian.
ConsistencyReport euler_entropy_consistency(const InternalEnergy& h, const std::vector<EulerState>& states);

// ---------------------------------------------------------------------------
// p-system with damping

struct EnergyPair {
    double energy;
    double flux;
};

/// (1/2 v^2 + W(u), -v tau(u))
EnergyPair psystem_energies(const PSystemState& s, const StressLaw& tau);
/// (1/2 (v - vb)^2 + W(u | ub), -(v - vb)(tau(u) - tau(ub)))
EnergyPair psystem_relative(const PSystemState& s, const PSystemState& sb, const StressLaw& tau);

template <class Real>
std::array<Real, 2> psystem_relative_taylor(const PSystemState& s, const PSystemState& sb, const StressLaw& tau) {
    const Real u = s.u, v = s.v, ub = sb.u, vb = sb.v;
    auto E = [&](Real a, Real b) { return b * b / 2 + tau.energy<Real>(a); };
    auto F = [&](Real a, Real b) { return -b * tau.tau<Real>(a); };
    const Real dE_u = tau.tau<Real>(ub), dE_v = vb;
    const Real rel_e = E(u, v) - E(ub, vb) - dE_u * (u - ub) - dE_v * (v - vb);
    // flux of the system is (-v, -tau(u))
    const Real rel_f = F(u, v) - F(ub, vb) - dE_u * (-v + vb) - dE_v * (-tau.tau<Real>(u) + tau.tau<Real>(ub));
    return {rel_e, rel_f};
}

// ---------------------------------------------------------------------------
// Viscoelasticity with memory

/// (Sigma(u) + 1/2 v^2 + z^2/(2 mu), -(eps sigma(u) v + v z))
EnergyPair visco_energies(const ViscoState& s, const StressLaw& sigma, double mu, double eps);
/// (Sigma(u|ub) + 1/2 (v-vb)^2 + (z-zb)^2/(2 mu), -eps (sigma - sigmab)(v - vb) - (v - vb)(z - zb))
EnergyPair visco_relative(const ViscoState& s, const ViscoState& sb, const StressLaw& sigma, double mu, double eps);

template <class Real>
std::array<Real, 2> visco_relative_taylor(const ViscoState& s, const ViscoState& sb, const StressLaw& sigma,
                                          double mu_d, double eps_d) {
    const Real u = s.u, v = s.v, z = s.z, ub = sb.u, vb = sb.v, zb = sb.z;
    const Real mu = mu_d, eps = eps_d;
    auto E = [&](Real a, Real b, Real c) { return sigma.energy<Real>(a) + b * b / 2 + c * c / (2 * mu); };
    auto F = [&](Real a, Real b, Real c) { return -(eps * sigma.tau<Real>(a) * b + b * c); };
    // eps-scaled flux of the system: (-eps v, -eps sigma(u) - z, -mu v)
    auto G = [&](Real a, Real b, Real c) {
        return std::array<Real, 3>{-eps * b, -eps * sigma.tau<Real>(a) - c, -mu * b};
    };
    const std::array<Real, 3> dE{sigma.tau<Real>(ub), vb, zb / mu};
    const auto g = G(u, v, z);
    const auto gb = G(ub, vb, zb);
    const Real rel_e = E(u, v, z) - E(ub, vb, zb) - dE[0] * (u - ub) - dE[1] * (v - vb) - dE[2] * (z - zb);
    const Real rel_f =
        F(u, v, z) - F(ub, vb, zb) - dE[0] * (g[0] - gb[0]) - dE[1] * (g[1] - gb[1]) - dE[2] * (g[2] - gb[2]);
    return {rel_e, rel_f};
}

// ---------------------------------------------------------------------------
// Lemma bounds

struct LemmaBoundReport {
    std::uint64_t samples = 0;
    double c_pressure = 0.0;  ///< sup p(rho|rhob) / h(rho|rhob)
    double C_flux = 0.0;      ///< sup |f(.|.)| / eta(.|.)
    double R0 = 0.0;
    double C1 = 0.0;  ///< inf h(rho|rhob) / |rho - rhob|^2 for rho <= R0
    double C2 = 0.0;  ///< inf h(rho|rhob) / |rho - rhob|^gamma for rho > R0 (NaN when gamma == 1)
    double gamma = 1.0;
    bool violated = false;  ///< a ratio was non-finite or a lower bound vanished
};

struct LemmaBoundConfig {
    double bar_min = 0.5;  ///< K = [bar_min, bar_max]
    double bar_max = 4.0;
    double rho_max = 1e3;
    double momentum_scale = 5.0;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 12345;
    double growth_gamma = 0.0;  ///< growth exponent for tabulated laws; gamma laws use their own
};

LemmaBoundReport lemma_bound_checks(const ConstitutivePair& law, const LemmaBoundConfig& cfg = {});

struct StressBoundReport {
    double sup_ratio = 0.0;  ///< sup tau(u|ub) / W(u|ub) over the scan
    double u_at_sup = 0.0;
    double ub_at_sup = 0.0;
    bool finite = true;
};

/// Brute-force scan of tau(u|ub) / W(u|ub) on a u-grid of `points` nodes on
/// [-u_max, u_max] against `bar_points` values of ub in [ub_min, ub_max].
StressBoundReport stress_bound_scan(const StressLaw& tau, double ub_min, double ub_max, double u_max = 1e3,
                                    int points = 10000, int bar_points = 21);

}  // namespace relent

#endif  // RELENT_ENTROPY_CALCULUS_HPP
