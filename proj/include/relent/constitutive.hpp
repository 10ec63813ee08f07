// Constitutive closures for the relaxation systems: barotropic pressure laws
// p(rho) with their internal-energy potential h(rho), and stress laws tau(u) /
// sigma(u) with stored energy W(u) = int_0^u tau.
//
// All objects are immutable after construction and safe to share between
// threads.

#ifndef RELENT_CONSTITUTIVE_HPP
#define RELENT_CONSTITUTIVE_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace relent {

namespace detail {
// 8-point Gauss-Legendre nodes/weights on [0, 1]
inline constexpr long double kGaussNodes[8] = {
    0.0198550717512318841582195657152635L, 0.1016667612931866302042230317620848L,
    0.2372337950418355070911304754053768L, 0.4082826787521750975302619288199080L,
    0.5917173212478249024697380711800920L, 0.7627662049581644929088695245946232L,
    0.8983332387068133697957769682379152L, 0.9801449282487681158417804342847365L};
inline constexpr long double kGaussWeights[8] = {
    0.0506142681451881295762656771549811L, 0.1111905172266872352721779972131204L,
    0.1568533229389436436689811009933007L, 0.1813418916891809914825752246385978L,
    0.1813418916891809914825752246385978L, 0.1568533229389436436689811009933007L,
    0.1111905172266872352721779972131204L, 0.0506142681451881295762656771549811L};
/// rho^e, by repeated multiplication when e is a small non-negative integer.
template <class Real>
Real real_pow(Real rho, double e) {
    using std::pow;
    if (e >= 0.0 && e <= 4.0 && e == static_cast<double>(static_cast<int>(e))) {
        Real acc = 1;
        for (int j = 0; j < static_cast<int>(e); ++j) acc *= rho;
        return acc;
    }
    return pow(rho, static_cast<Real>(e));
}
}  // namespace detail

/// Gauss-Legendre evaluation of (d)^2 * int_0^1 (1-s) f''(xb + s d) ds, the
/// cancellation-free form of f(x) - f(xb) - f'(xb)(x - xb).
template <class Real, class SecondDerivative>
Real taylor_remainder_integral(Real x, Real xb, const SecondDerivative& f2) {
    const Real d = x - xb;
    Real acc = 0;
    for (int q = 0; q < 8; ++q) {
        const Real s = static_cast<Real>(detail::kGaussNodes[q]);
        acc += static_cast<Real>(detail::kGaussWeights[q]) * (1 - s) * f2(xb + s * d);
    }
    return d * d * acc;
}

/// d * int_0^1 f'(xb + s d) ds, the cancellation-free form of f(x) - f(xb).
template <class Real, class FirstDerivative>
Real mean_value_integral(Real x, Real xb, const FirstDerivative& f1) {
    const Real d = x - xb;
    Real acc = 0;
    for (int q = 0; q < 8; ++q) {
        const Real s = static_cast<Real>(detail::kGaussNodes[q]);
        acc += static_cast<Real>(detail::kGaussWeights[q]) * f1(xb + s * d);
    }
    return d * acc;
}

struct GammaLaw {
    double k;
    double gamma;
};

/// User-supplied pressure with its first two derivatives on rho > 0.
struct TabulatedPressure {
    std::string name;
    std::function<double(double)> p;
    std::function<double(double)> dp;
    std::function<double(double)> d2p;
};

class PressureLaw {
  public:
    explicit PressureLaw(GammaLaw law);
    explicit PressureLaw(TabulatedPressure law);

    template <class Real = double>
    Real p(Real rho) const {
        if (const auto* g = std::get_if<GammaLaw>(&law_)) {
            return static_cast<Real>(g->k) * detail::real_pow(rho, g->gamma);
        }
        return static_cast<Real>(std::get<TabulatedPressure>(law_).p(static_cast<double>(rho)));
    }

    template <class Real = double>
    Real dp(Real rho) const {
        if (const auto* g = std::get_if<GammaLaw>(&law_)) {
            const Real gm = static_cast<Real>(g->gamma);
            return static_cast<Real>(g->k) * gm * detail::real_pow(rho, g->gamma - 1.0);
        }
        return static_cast<Real>(std::get<TabulatedPressure>(law_).dp(static_cast<double>(rho)));
    }

    template <class Real = double>
    Real d2p(Real rho) const {
        if (const auto* g = std::get_if<GammaLaw>(&law_)) {
            const Real gm = static_cast<Real>(g->gamma);
            if (g->gamma == 1.0) return Real(0);
            return static_cast<Real>(g->k) * gm * (gm - 1) * detail::real_pow(rho, g->gamma - 2.0);
        }
        return static_cast<Real>(std::get<TabulatedPressure>(law_).d2p(static_cast<double>(rho)));
    }

    /// p(rho | rhob) = p(rho) - p(rhob) - p'(rhob)(rho - rhob).
    double relative(double rho, double rhob) const;

    bool is_gamma_law() const { return std::holds_alternative<GammaLaw>(law_); }
    const GammaLaw* gamma_law() const { return std::get_if<GammaLaw>(&law_); }
    std::string describe() const;

  private:
    std::variant<GammaLaw, TabulatedPressure> law_;
};

/// h(rho) = rho e(rho) with e' = p / rho^2, so that h'' = p'/rho and
/// rho h' = p + h.
class InternalEnergy {
  public:
    enum class Derivation { ClosedForm, Quadrature };

    explicit InternalEnergy(PressureLaw pressure, double quadrature_tolerance = 1e-12);

    template <class Real = double>
    Real h(Real rho) const {
        using std::log;
        if (const auto* g = pressure_.gamma_law()) {
            const Real k = static_cast<Real>(g->k);
            if (g->gamma == 1.0) return rho > 0 ? k * rho * log(rho) : Real(0);
            const Real gm = static_cast<Real>(g->gamma);
            return k / (gm - 1) * detail::real_pow(rho, g->gamma);
        }
        return static_cast<Real>(rho * specific_energy(static_cast<double>(rho)));
    }

    template <class Real = double>
    Real dh(Real rho) const {
        using std::log;
        if (const auto* g = pressure_.gamma_law()) {
            const Real k = static_cast<Real>(g->k);
            if (g->gamma == 1.0) return k * (log(rho) + 1);
            const Real gm = static_cast<Real>(g->gamma);
            return k * gm / (gm - 1) * detail::real_pow(rho, g->gamma - 1.0);
        }
        const double r = static_cast<double>(rho);
        return static_cast<Real>(specific_energy(r) + pressure_.p(r) / r);
    }

    template <class Real = double>
    Real d2h(Real rho) const {
        return pressure_.dp(rho) / rho;
    }

    /// h(rho | rhob), evaluated without cancellation when rho is close to rhob.
    double relative(double rho, double rhob) const;

    Derivation derivation() const { return derivation_; }
    double tolerance() const { return tolerance_; }
    const PressureLaw& pressure() const { return pressure_; }

  private:
    double specific_energy(double rho) const;

    PressureLaw pressure_;
    Derivation derivation_;
    double tolerance_;
};

/// Reference density at which the quadrature-built specific energy vanishes.
inline constexpr double kEnergyReferenceDensity = 1.0;

struct ConstitutivePair {
    PressureLaw pressure;
    InternalEnergy energy;
};

/// Closed-form gamma law p = k rho^gamma; rejects k <= 0 or gamma < 1.
ConstitutivePair make_gamma_law(double k, double gamma);

/// Wraps user callables; p' is validated against finite differences and
/// required positive on the sample grid.
ConstitutivePair make_tabulated_pressure(TabulatedPressure law);

/// Odd-or-general polynomial stress sum_j c_j u^j.
struct PolynomialStress {
    std::vector<double> coefficients;
};

struct TabulatedStress {
    std::string name;
    std::function<double(double)> tau;
    std::function<double(double)> dtau;
    std::function<double(double)> d2tau;
};

/// Stress law tau(u) (p-system) or sigma(u) (viscoelastic) with stored energy
/// W(u) = int_0^u tau(s) ds.
class StressLaw {
  public:
    StressLaw(PolynomialStress law, double growth_exponent);
    StressLaw(TabulatedStress law, double growth_exponent);

    template <class Real = double>
    Real tau(Real u) const {
        if (const auto* poly = std::get_if<PolynomialStress>(&law_)) {
            return horner(poly->coefficients, u);
        }
        return static_cast<Real>(std::get<TabulatedStress>(law_).tau(static_cast<double>(u)));
    }

    template <class Real = double>
    Real dtau(Real u) const {
        if (const auto* poly = std::get_if<PolynomialStress>(&law_)) {
            return horner(derivative_, u);
        }
        return static_cast<Real>(std::get<TabulatedStress>(law_).dtau(static_cast<double>(u)));
    }

    template <class Real = double>
    Real d2tau(Real u) const {
        if (std::holds_alternative<PolynomialStress>(law_)) {
            return horner(second_derivative_, u);
        }
        return static_cast<Real>(std::get<TabulatedStress>(law_).d2tau(static_cast<double>(u)));
    }

    template <class Real = double>
    Real energy(Real u) const {
        if (std::holds_alternative<PolynomialStress>(law_)) {
            return horner(antiderivative_, u);
        }
        return static_cast<Real>(quadrature_energy(static_cast<double>(u)));
    }

    /// tau(u | ub) and W(u | ub), both cancellation-free near ub.
    double relative_stress(double u, double ub) const;
    double relative_energy(double u, double ub) const;

    double growth_exponent() const { return growth_exponent_; }
    std::string describe() const;

  private:
    template <class Real>
    static Real horner(const std::vector<double>& c, Real u) {
        Real acc = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + static_cast<Real>(*it);
        return acc;
    }
    double quadrature_energy(double u) const;

    std::variant<PolynomialStress, TabulatedStress> law_;
    std::vector<double> derivative_;
    std::vector<double> second_derivative_;
    std::vector<double> antiderivative_;
    double growth_exponent_;
};

/// tau(u) = u + u^3 style helper: coefficients listed from u^0 upward.
StressLaw make_polynomial_stress(std::vector<double> coefficients, double growth_exponent);

// ---------------------------------------------------------------------------
// Hypothesis checks. All are sampling-based over a reported grid.

/// 512 log-spaced points on [1e-3, 1e3].
std::vector<double> default_density_grid();
std::vector<double> log_grid(double lo, double hi, int count);

struct HypothesisAReport {
    bool holds = true;
    std::optional<double> witness;  ///< first density where the ratio exceeds the cap
    double constant = 0.0;          ///< smallest A with p'' <= A p'/rho on the grid
    double cap = 0.0;
    std::vector<double> grid;
};

/// Default cap on rho p''/p' beyond which the ratio is reported unbounded.
inline constexpr double kHypothesisACap = 20.0;

HypothesisAReport check_hypothesis_A(const PressureLaw& p, const std::vector<double>& sample_grid,
                                     double cap = kHypothesisACap);

struct TailReport {
    bool holds = false;
    double residual = 0.0;  ///< |ratio - 1| at the largest tail point
    std::vector<double> residuals;
};

/// Tail tolerance: |ratio - 1| at the end of the tail grid.
inline constexpr double kTailTolerance = 1e-2;

/// 64 log-spaced points on [1e3, 1e6].
std::vector<double> default_tail_grid();

/// p'(rho) / (k gamma rho^(gamma-1)) -> 1 on the tail.
TailReport check_hypothesis_B(const PressureLaw& p, double gamma_claim, double k_claim,
                              const std::vector<double>& tail_grid,
                              double tolerance = kTailTolerance);

/// tau(u) / (sgn(u) |u|^p) -> 1 as u -> +-infinity, with p the law's growth exponent.
TailReport check_growth_H(const StressLaw& s, const std::vector<double>& tail_grid,
                          double tolerance = kTailTolerance);

}  // namespace relent

#endif  // RELENT_CONSTITUTIVE_HPP
