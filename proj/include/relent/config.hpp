// Run configuration: a flat INI file with one section per concern.
//
//   [system]    name, mu
//   [law]       kind (gamma | exp | polynomial), k, gamma, coefficients, growth
//   [grid]      cells, x_min, x_max, boundary (periodic | far-field), left, right
//   [initial]   profile, amplitude, mean, wavenumber, center, width, left, right,
//               v_amplitude, momentum (well-prepared | ill-prepared),
//               ill_kind (zero | sine), ill_amplitude
//   [epsilon]   values (one value or a strictly decreasing list)
//   [solver]    t_end, cfl, flux, source, integrator, limit_scheme,
//               output_stride, stop_times
//   [sweep]     cells_base, workers
//   [certify]   entropy_cap
//   [output]    dir

#ifndef RELENT_CONFIG_HPP
#define RELENT_CONFIG_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "relent/relaxation_systems.hpp"
#include "relent/solvers.hpp"

namespace relent {

struct LawSpec {
    std::string kind = "gamma";
    double k = 1.0;
    double gamma = 2.0;
    std::vector<double> coefficients{0.0, 1.0, 0.0, 1.0};
    double growth = 3.0;
};

struct GridSpec {
    int cells = 256;
    double x_min = 0.0;
    double x_max = 1.0;
    Boundary boundary;
};

enum class Momentum { WellPrepared, IllPrepared };

struct InitialSpec {
    std::string profile = "sine";
    double amplitude = 0.5;
    double mean = 2.0;
    double wavenumber = 1.0;
    double center = 0.5;
    double width = 0.1;
    double left = 1.0;   ///< two-state plateau values
    double right = 1.0;
    double v_amplitude = 0.0;  ///< rate-type system: vb0 = v_amplitude sin(2 pi k x)
    Momentum momentum = Momentum::WellPrepared;
    std::string ill_kind = "zero";
    double ill_amplitude = 1.0;
};

/// Default cap on the entropy-residual constant for certification.
inline constexpr double kEntropyCertificationCap = 1e2;

struct RunConfig {
    SystemKind system = SystemKind::EulerFriction;
    double mu = 1.0;
    LawSpec law;
    GridSpec grid;
    InitialSpec initial;
    std::vector<double> epsilons{0.1};
    SolverConfig solver;
    int cells_base = 0;  ///< sweep grid at the largest eps; 0 means grid.cells
    int workers = 1;
    double entropy_cap = kEntropyCertificationCap;
    std::string output_dir = "out";

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
/// Writes every field so that parse_run_config reproduces the configuration.
void write_run_config(std::ostream& out, const RunConfig& cfg);

Constitutive build_constitutive(const RunConfig& cfg);
RelaxationSystem build_system(const RunConfig& cfg);
Grid build_grid(const RunConfig& cfg, int cells);

/// Initial limit profile and relaxation state on `cells` cells for one eps.
struct InitialData {
    GridField state;
    GridField profile;
};

InitialData build_initial_data(const RunConfig& cfg, const LimitSystem& limit, double eps, int cells);

/// Sweep resolution N = cells_base (eps_0 / eps)^2, rounded to the nearest integer.
int sweep_cells(const RunConfig& cfg, double eps);

}  // namespace relent

#endif  // RELENT_CONFIG_HPP
