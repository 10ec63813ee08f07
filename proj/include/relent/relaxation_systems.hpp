// Descriptors for the three relaxation systems and their parabolic limits.
//
// Every system is written as
//     U_t + D( F0(U) + F1(U) / eps ) = S(U) / eps^2
// with F0 the O(1) flux (non-zero only for the viscoelastic system), F1 the
// 1/eps-scaled flux, and S linear in the single relaxing component.

#ifndef RELENT_RELAXATION_SYSTEMS_HPP
#define RELENT_RELAXATION_SYSTEMS_HPP

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "relent/constitutive.hpp"
#include "relent/entropy_calculus.hpp"
#include "relent/grid.hpp"

namespace relent {

enum class SystemKind { EulerFriction, PSystemDamping, ViscoMemory };
enum class LimitKind { PorousMedia, TauDiffusion, RateTypeVisco };

std::string to_string(SystemKind kind);
std::string to_string(LimitKind kind);
SystemKind parse_system_kind(const std::string& name);

using State = std::vector<double>;
using Constitutive = std::variant<ConstitutivePair, StressLaw>;

class RelaxationSystem {
  public:
    SystemKind kind() const { return kind_; }
    std::string name() const { return to_string(kind_); }
    int state_dim() const { return kind_ == SystemKind::ViscoMemory ? 3 : 2; }
    /// Index of the damped (non-equilibrium) component: m, v, z.
    int relaxing_component() const { return kind_ == SystemKind::ViscoMemory ? 2 : 1; }
    double mu() const { return mu_; }
    const Constitutive& constitutive() const { return constitutive_; }
    const ConstitutivePair& euler_law() const;
    const StressLaw& stress_law() const;

    /// The 1/eps-scaled convective flux F1.
    State flux(const State& U) const;
    /// The O(1) flux F0.
    State flux_order0(const State& U) const;
    State total_flux(const State& U, double eps) const;
    /// S, the coefficient of 1/eps^2.
    State stiff_source(const State& U) const;

    /// Jacobian of F0 + F1/eps.
    Eigen::MatrixXd flux_jacobian(const State& U, double eps) const;
    /// Closed-form eigenvalues of flux_jacobian, ascending.
    std::vector<double> wave_speeds(const State& U, double eps) const;
    double max_wave_speed(const State& U, double eps) const;

    double entropy(const State& U) const;
    /// G with eta_t + G_x + dissipation / eps^2 = 0 for smooth solutions.
    double entropy_flux(const State& U, double eps) const;
    /// m^2/rho, v^2, z^2/mu.
    double dissipation(const State& U) const;
    /// The part of eta that depends on the relaxing component.
    double relaxing_entropy(const State& U) const;

    double relative_entropy(const State& U, const State& Ub) const;
    double relative_entropy_flux(const State& U, const State& Ub, double eps) const;
    /// R, (v - vb)^2, (z - zb)^2 / mu.
    double relative_dissipation(const State& U, const State& Ub) const;

    /// Lift an equilibrium state (rho | u | u, v) to the full state with the
    /// relaxing component set to zero.
    State lift_equilibrium(const std::vector<double>& equilibrium) const;

    /// Names of the state components, for file headers.
    std::vector<std::string> component_names() const;
    /// Components conserved under periodic boundaries.
    std::vector<int> conserved_components() const;

    /// Throws DomainError when the state is outside the admissible region.
    void check_admissible(const State& U, double floor) const;

  private:
    friend RelaxationSystem build_system(SystemKind, Constitutive, double);
    RelaxationSystem(SystemKind kind, Constitutive c, double mu);

    SystemKind kind_;
    Constitutive constitutive_;
    double mu_;
};

/// Rejects a constitutive law of the wrong type for the system and mu <= 0.
RelaxationSystem build_system(SystemKind kind, Constitutive constitutive, double mu = 1.0);

class LimitSystem {
  public:
    explicit LimitSystem(const RelaxationSystem& sys);

    LimitKind kind() const { return kind_; }
    const RelaxationSystem& relaxation() const { return sys_; }
    /// 1 for the porous media and tau-diffusion equations, 2 for (u, v).
    int state_dim() const { return kind_ == LimitKind::RateTypeVisco ? 2 : 1; }
    std::vector<std::string> component_names() const;

    /// Bar state on the same grid: (rhob, -eps D p), (ub, eps D tau), (ub, vb, eps mu D vb).
    GridField reconstruct_bar_state(const GridField& profile, double eps) const;

    /// Residual of the relaxation system at the bar state with time
    /// derivatives replaced through the limit equation.
    GridField bar_error_source(const GridField& profile, double eps) const;

    /// Semi-discrete right-hand side of the limit equation.
    GridField limit_rhs(const GridField& profile) const;

    /// d/dt of the bar state, obtained from the limit equation (no time differencing).
    GridField bar_time_derivative(const GridField& profile, double eps) const;

    /// Far-field ghost values of the limit profile, empty when periodic.
    std::vector<double> far_field(const Grid& g, bool right) const;

  private:
    RelaxationSystem sys_;
    LimitKind kind_;
};

/// U_t + D(F0 + F1/eps) - S/eps^2 with a supplied U_t, using the solver's
/// centred differences and far-field ghost fluxes.
GridField semi_discrete_residual(const RelaxationSystem& sys, const GridField& U, const GridField& U_t, double eps);

/// Ghost state of a far-field grid (left or right), lifted to the full system.
State far_field_state(const RelaxationSystem& sys, const Grid& g, bool right);

}  // namespace relent

#endif  // RELENT_RELAXATION_SYSTEMS_HPP
