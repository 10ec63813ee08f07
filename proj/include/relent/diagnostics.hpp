// Distance functionals, relative-entropy inequality bookkeeping, Gronwall
// audits, convergence-rate fits and the Hilbert-expansion (Darcy) check.

#ifndef RELENT_DIAGNOSTICS_HPP
#define RELENT_DIAGNOSTICS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relent/grid.hpp"
#include "relent/relaxation_systems.hpp"

namespace relent {

/// Time series for one paired run. Row k is the state after the k-th
/// recorded step (row 0 is the initial state).
struct EntropyLedger {
    std::string system;
    double eps = 0.0;
    int cells = 0;
    std::vector<double> times;
    std::vector<double> phi;
    std::vector<double> diss_cum;  ///< int_0^t (1/eps^2) int R dx ds
    std::vector<double> Q_cum;     ///< int_0^t int Q dx ds
    std::vector<double> E_cum;     ///< int_0^t int E dx ds
    std::vector<double> res_max;   ///< max_i |r_i| of the step that produced the row
    std::vector<double> mass_err;  ///< relative drift of the first conserved component

    double phi_max = 0.0;        ///< sup of phi over every step, not only recorded rows
    double K1 = 0.0;             ///< sup_t int |U_0| dx
    double K2 = 0.0;             ///< sup_t int eta(U) dx
    double entropy_C = 0.0;      ///< max over steps of max(0, int r dx) / (dx + dt)
    double res_int_max = 0.0;    ///< max over steps of int r dx
    double mass_step_max = 0.0;  ///< max over steps of |M(t_n+1) - M(t_n)|, relative like mass_err
    double dt_max = 0.0;
    long steps = 0;

    std::size_t size() const { return times.size(); }
    bool consistent() const;
};

/// Midpoint-rule integral of the relative entropy between a state and its bar state.
double compute_phi(const GridField& state, const GridField& bar, const RelaxationSystem& sys);

/// Space integrals at one instant of the terms in the relative-entropy inequality.
struct InequalityIntegrals {
    double phi = 0.0;
    double R = 0.0;  ///< int relative dissipation (without the 1/eps^2)
    double Q = 0.0;
    double E = 0.0;
};

InequalityIntegrals inequality_integrals(const LimitSystem& limit, const GridField& state, const GridField& profile,
                                         double eps);

/// Builds an EntropyLedger step by step during a paired run.
class LedgerBuilder {
  public:
    LedgerBuilder(const LimitSystem& limit, double eps, const GridField& state0, const GridField& profile0);

    /// Accumulates one step; records a row when `record` is set.
    void on_step(double t, double dt, const GridField& after, const GridField& profile_after,
                 const std::vector<double>& residual, bool record);

    const EntropyLedger& ledger() const { return ledger_; }
    EntropyLedger take() { return std::move(ledger_); }

  private:
    void push_row(double t, double res_max, const GridField& state);

    const LimitSystem& limit_;
    double eps_;
    double mass0_;
    double mass_scale_;
    double mass_last_;
    InequalityIntegrals last_;
    double diss_ = 0.0, Q_ = 0.0, E_ = 0.0;
    double dx_;
    EntropyLedger ledger_;
};

struct GronwallResult {
    double C = 0.0;
    bool satisfied = true;
    double cap = 0.0;
};

/// Default cap on the Gronwall constant.
inline constexpr double kGronwallCap = 1e4;

/// Smallest C with phi(t) <= C (phi(0) + eps^4) over recorded t in [t_lo, t_hi].
GronwallResult gronwall_audit(const EntropyLedger& ledger, double eps, double cap = kGronwallCap,
                              std::optional<std::pair<double, double>> window = std::nullopt);

/// Largest ratio max(C_k, C_{k+1}) / min(C_k, C_{k+1}) between consecutive entries.
double gronwall_uniformity(const std::vector<double>& constants);

struct RateFit {
    double rate = 0.0;
    double constant = 0.0;  ///< prefactor in value ~ constant * eps^rate
};

/// Least-squares slope of log(value) against log(eps); needs four or more points.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values);

struct SweepReport {
    std::string system;
    std::vector<double> epsilons;
    std::vector<int> cells;
    std::vector<double> phi_T;
    std::vector<double> phi_sup;
    std::vector<double> gronwall_C;
    std::vector<double> entropy_C;
    std::vector<int> exit_codes;
    RateFit fit;
    RateFit fit_sup;
    double uniformity = 0.0;
    bool partial = false;
    std::vector<EntropyLedger> ledgers;
};

RateFit fit_rate(const SweepReport& report);

struct HilbertRun {
    double eps;
    GridField state;    ///< relaxation state at T
    GridField profile;  ///< limit profile at T, same grid
};

struct HilbertReport {
    int coarse_cells = 0;
    double target_norm = 0.0;                ///< ||D p(rhob)||_inf on the coarse grid
    std::vector<double> window_finest_eps;   ///< smallest eps of each regression window
    std::vector<double> window_residuals;    ///< ||m1 + D p(rhob)||_inf per window
    std::vector<double> pointwise_residuals; ///< ||m/eps + D p(rhob)||_inf per eps
    std::vector<double> density_gaps;        ///< ||rho - rhob||_inf per eps
    bool decreasing = false;
    double finest_relative = 0.0;            ///< last window residual / target_norm
};

/// Per-cell through-origin regression m(eps) ~ eps m1 over windows of
/// `window` consecutive eps values, after averaging every run onto the
/// coarsest grid. Only the Euler system has a Darcy closure to check.
HilbertReport hilbert_check(const LimitSystem& limit, const std::vector<HilbertRun>& runs, int window = 3);

/// Synthetic form: regression of given per-eps first-order components against a target.
std::vector<double> regress_first_order(const std::vector<double>& eps, const std::vector<std::vector<double>>& values);

struct InequalityAudit {
    std::vector<double> residual;  ///< phi(t) - phi(0) + diss + Q + E per recorded time
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    double diss_total = 0.0, Q_total = 0.0, E_total = 0.0;
};

/// Certifies phi(t) - phi(0) <= -(diss + Q + E) + tol * t at every recorded time.
InequalityAudit inequality_audit(const EntropyLedger& ledger, double tol);

/// CSV with header `t,phi,diss_cum,Q_cum,E_cum,res_max,mass_err`.
void write_ledger_csv(std::ostream& out, const EntropyLedger& ledger);
EntropyLedger read_ledger_csv(std::istream& in);

/// `key=value` header lines, a blank line, then CSV rows `epsilon,N,phi_T,phi_sup,C,entropy_C,exit`.
void write_sweep_report(std::ostream& out, const SweepReport& report);
SweepReport read_sweep_report(std::istream& in);

}  // namespace relent

#endif  // RELENT_DIAGNOSTICS_HPP
