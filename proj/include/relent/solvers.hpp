// Time steppers: a Strang-split finite-volume scheme for the relaxation
// systems and implicit centred-difference schemes for their limits, plus the
// run drivers that keep both in lockstep and feed the entropy ledger.

#ifndef RELENT_SOLVERS_HPP
#define RELENT_SOLVERS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relent/diagnostics.hpp"
#include "relent/grid.hpp"
#include "relent/relaxation_systems.hpp"

namespace relent {

enum class FluxScheme {
    Rusanov,    ///< local Lax-Friedrichs viscosity on every component
    HLL,        ///< two-wave HLL with Davis speed estimates
    ApRusanov,  ///< centred flux, Rusanov viscosity only on the relaxing component
};

enum class SourceScheme { ExactExponential, ImplicitEuler };

/// Time integrator of the hyperbolic sub-step.
enum class FluxIntegrator { ForwardEuler, SspRk2 };

/// Time discretisation of the limit diffusion: backward Euler or Crank-Nicolson.
enum class LimitScheme { BackwardEuler, CrankNicolson };

std::string to_string(FluxScheme s);
FluxScheme parse_flux_scheme(const std::string& name);
std::string to_string(SourceScheme s);
SourceScheme parse_source_scheme(const std::string& name);
std::string to_string(FluxIntegrator s);
FluxIntegrator parse_flux_integrator(const std::string& name);
std::string to_string(LimitScheme s);
LimitScheme parse_limit_scheme(const std::string& name);

inline constexpr double kRelaxationVacuumFloor = 1e-10;

struct SolverConfig {
    double cfl = 0.4;
    FluxScheme flux_scheme = FluxScheme::ApRusanov;
    SourceScheme source_scheme = SourceScheme::ExactExponential;
    FluxIntegrator flux_integrator = FluxIntegrator::SspRk2;
    LimitScheme limit_scheme = LimitScheme::CrankNicolson;
    double t_end = 0.0;
    int output_stride = 1;

    double vacuum_floor = kRelaxationVacuumFloor;
    double bar_floor = kBarVacuumFloor;
    double newton_tolerance = 1e-10;
    int newton_max_iterations = 50;
    /// Times the stepper lands on exactly; observers and the ledger fire there too.
    std::vector<double> stop_times;
    /// Far-field runs abort once a boundary cell drifts this far (relative) from its far-field value.
    double far_field_tolerance = 1e-8;

    void validate() const;
};

/// Largest admissible step cfl * dx / lambda_max, lambda_max including the 1/eps factor.
double stable_dt(const GridField& state, const RelaxationSystem& sys, double eps, const SolverConfig& cfg);

/// By-products of one relaxation step.
struct StepDetail {
    std::optional<GridField> after_first_source;  ///< the state entering the flux sub-step
    std::vector<double> entropy_flux;             ///< numerical entropy flux at the N+1 interfaces
};

/// One Strang step: half source, flux update, half source. Aborts when dt
/// exceeds the CFL bound or the density drops below the vacuum floor. With
/// SspRk2 the interface fluxes are the average of the two stages.
GridField step_relaxation(const GridField& state, const RelaxationSystem& sys, double eps, const SolverConfig& cfg,
                          double dt, StepDetail* detail = nullptr);

/// One implicit step of the limit equation. The rate-type system treats its
/// O(1) flux explicitly in a half-kick/drift/half-kick arrangement.
GridField step_limit(const GridField& profile, const LimitSystem& limit, const SolverConfig& cfg, double dt);

/// Per-cell discrete entropy residual of the step before -> after.
std::vector<double> entropy_residual(const GridField& before, const GridField& after, const RelaxationSystem& sys,
                                     double eps, double dt, const SolverConfig& cfg);

/// Residual from a recorded step detail, without recomputing the flux step.
std::vector<double> entropy_residual(const GridField& before, const GridField& after, const StepDetail& detail,
                                     const RelaxationSystem& sys, double eps, double dt);

struct Observation {
    long step;
    double t;
    bool final;
    const GridField& state;
    const GridField* limit;  ///< null for relaxation-only runs
    const GridField* bar;    ///< reconstructed bar state, null for relaxation-only runs
};

using Observer = std::function<void(const Observation&)>;

struct RunResult {
    GridField state;
    std::optional<GridField> limit;
    long steps = 0;
    EntropyLedger ledger;
};

/// Relaxation system alone to cfg.t_end. Ledger columns that need a bar
/// state are NaN.
RunResult run_to(GridField state, const RelaxationSystem& sys, double eps, const SolverConfig& cfg,
                 const std::vector<Observer>& observers = {});

/// Limit equation alone with a fixed step (the last step is shortened).
RunResult run_limit_to(GridField profile, const LimitSystem& limit, const SolverConfig& cfg, double dt,
                       const std::vector<Observer>& observers = {});

/// Relaxation and limit in lockstep with the relaxation CFL step; the ledger
/// tracks the relative-entropy inequality between the state and the bar state.
RunResult run_paired(GridField state, GridField profile, const LimitSystem& limit, double eps, const SolverConfig& cfg,
                     const std::vector<Observer>& observers = {});

/// Solves a_i x_{i-2} + b_i x_i + c_i x_{i+2} = r_i, cyclically when periodic.
std::vector<double> solve_stride2(const std::vector<double>& a, const std::vector<double>& b,
                                  const std::vector<double>& c, const std::vector<double>& r, bool periodic);

}  // namespace relent

#endif  // RELENT_SOLVERS_HPP
