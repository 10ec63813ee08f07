// Run orchestration behind the command-line tool: single paired runs,
// eps-sweeps with one worker per eps value, and the randomized identity suite.

#ifndef RELENT_HARNESS_HPP
#define RELENT_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relent/config.hpp"
#include "relent/diagnostics.hpp"
#include "relent/solvers.hpp"

namespace relent {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAbort = 3;
inline constexpr int kExitCertification = 4;

/// One paired run at one eps.
struct PointResult {
    double eps = 0.0;
    int cells = 0;
    int exit_code = kExitOk;
    std::string message;
    std::optional<RunResult> run;
    double gronwall_C = 0.0;
};

/// Runs the relaxation system and its limit side by side; never throws for
/// solver or domain failures, which come back as exit codes.
PointResult run_point(const RunConfig& cfg, double eps, int cells, const std::vector<Observer>& observers = {});

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;
    PointResult point;
};

/// `run`: the first eps of the config at grid.cells. Writes ledger.csv,
/// state_initial.csv, state_final.csv, limit_final.csv and summary.txt into out_dir.
RunOutcome cmd_run(const RunConfig& cfg, const std::string& out_dir);

struct SweepOutcome {
    int exit_code = kExitOk;
    std::string message;
    SweepReport report;
    std::vector<PointResult> points;
};

/// All eps points of the config, `workers` at a time, with N from sweep_cells.
/// Results do not depend on the worker count.
std::vector<PointResult> sweep_points(const RunConfig& cfg, int workers);

/// `sweep`: needs four or more eps values. Writes ledger_<k>.csv per point and sweep_report.txt.
SweepOutcome cmd_sweep(const RunConfig& cfg, const std::string& out_dir, int workers);

/// Builds the report (fits, Gronwall constants, uniformity) from finished points.
SweepReport summarize_sweep(const RunConfig& cfg, const std::vector<PointResult>& points);

struct CheckConfig {
    std::uint64_t seed = 20240611;
    int samples = 10000;
    bool inject_flux_fault = false;
};

struct CheckItem {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = true;
    bool asserted = true;  ///< false for properties that are only reported
};

struct CheckReport {
    std::vector<CheckItem> items;
    bool passed() const;
    const CheckItem& find(const std::string& name) const;
};

/// Randomized identity, consistency, Hessian, hypothesis and lemma checks.
CheckReport run_check_suite(const CheckConfig& cfg);

/// `check`: runs the suite and writes check_report.csv; exit 0 iff every asserted item passed.
int cmd_check(const CheckConfig& cfg, const std::string& out_dir, CheckReport* report = nullptr);

void write_check_report(std::ostream& out, const CheckReport& report);
CheckReport read_check_report(std::istream& in);

}  // namespace relent

#endif  // RELENT_HARNESS_HPP
