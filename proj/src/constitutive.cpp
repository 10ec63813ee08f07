#include "relent/constitutive.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

namespace {

// The integral form is used when the two points are within this fraction of
// the bar value; further apart there is no cancellation to speak of.
constexpr double kNearFraction = 0.5;

}  // namespace

PressureLaw::PressureLaw(GammaLaw law) : law_(law) {}
PressureLaw::PressureLaw(TabulatedPressure law) : law_(std::move(law)) {}

double PressureLaw::relative(double rho, double rhob) const {
    if (rho > 0 && std::abs(rho - rhob) <= kNearFraction * rhob) {
        return taylor_remainder_integral(rho, rhob, [this](double r) { return d2p(r); });
    }
    return p(rho) - p(rhob) - dp(rhob) * (rho - rhob);
}

std::string PressureLaw::describe() const {
    std::ostringstream os;
    if (const auto* g = gamma_law()) {
        os << "gamma-law(k=" << g->k << ", gamma=" << g->gamma << ")";
    } else {
        os << "tabulated(" << std::get<TabulatedPressure>(law_).name << ")";
    }
    return os.str();
}

InternalEnergy::InternalEnergy(PressureLaw pressure, double quadrature_tolerance)
    : pressure_(std::move(pressure)),
      derivation_(pressure_.is_gamma_law() ? Derivation::ClosedForm : Derivation::Quadrature),
      tolerance_(quadrature_tolerance) {}

double InternalEnergy::specific_energy(double rho) const {
    // e(rho) = int_{rho_ref}^{rho} p(s)/s^2 ds
    if (rho == kEnergyReferenceDensity) return 0.0;
    if (!(rho > 0)) throw DomainError("internal energy requested at non-positive density");
    auto integrand = [this](double s) { return pressure_.p(s) / (s * s); };
    const double lo = std::min(rho, kEnergyReferenceDensity);
    const double hi = std::max(rho, kEnergyReferenceDensity);
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, lo, hi, 15, tolerance_, &err);
    return rho < kEnergyReferenceDensity ? -value : value;
}

double InternalEnergy::relative(double rho, double rhob) const {
    if (rho > 0 && std::abs(rho - rhob) <= kNearFraction * rhob) {
        return taylor_remainder_integral(rho, rhob, [this](double r) { return d2h(r); });
    }
    return h(rho) - h(rhob) - dh(rhob) * (rho - rhob);
}

ConstitutivePair make_gamma_law(double k, double gamma) {
    if (!(k > 0)) throw DomainError("gamma law requires k > 0");
    if (!(gamma >= 1)) throw DomainError("gamma law requires gamma >= 1");
    PressureLaw p{GammaLaw{k, gamma}};
    return {p, InternalEnergy{p}};
}

ConstitutivePair make_tabulated_pressure(TabulatedPressure law) {
    if (!law.p || !law.dp || !law.d2p) throw DomainError("tabulated pressure needs p, p', p''");
    for (double rho : default_density_grid()) {
        const double d = law.dp(rho);
        if (!(d > 0)) {
            std::ostringstream os;
            os << "tabulated pressure '" << law.name << "' is not strictly increasing at rho=" << rho;
            throw DomainError(os.str());
        }
    }
    // Finite-difference consistency of p' on [0.1, 10].
    for (double rho : log_grid(0.1, 10.0, 64)) {
        const double step = 1e-5 * rho;
        const double fd = (law.p(rho + step) - law.p(rho - step)) / (2 * step);
        const double exact = law.dp(rho);
        if (std::abs(fd - exact) > 1e-6 * std::abs(exact)) {
            std::ostringstream os;
            os << "tabulated pressure '" << law.name << "': p' disagrees with finite differences at rho="
               << rho;
            throw DomainError(os.str());
        }
    }
    PressureLaw p{std::move(law)};
    return {p, InternalEnergy{p}};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> differentiate(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t j = 1; j < c.size(); ++j) d.push_back(static_cast<double>(j) * c[j]);
    return d;
}

std::vector<double> integrate_from_zero(const std::vector<double>& c) {
    std::vector<double> w(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) w[j + 1] = c[j] / static_cast<double>(j + 1);
    return w;
}

}  // namespace

StressLaw::StressLaw(PolynomialStress law, double growth_exponent)
    : law_(law),
      derivative_(differentiate(law.coefficients)),
      second_derivative_(differentiate(derivative_)),
      antiderivative_(integrate_from_zero(law.coefficients)),
      growth_exponent_(growth_exponent) {
    if (!(growth_exponent >= 1)) throw DomainError("stress growth exponent must be >= 1");
}

StressLaw::StressLaw(TabulatedStress law, double growth_exponent)
    : law_(std::move(law)), growth_exponent_(growth_exponent) {
    if (!(growth_exponent >= 1)) throw DomainError("stress growth exponent must be >= 1");
    const auto& t = std::get<TabulatedStress>(law_);
    if (!t.tau || !t.dtau || !t.d2tau) throw DomainError("tabulated stress needs tau, tau', tau''");
    for (double u : {-10.0, -1.0, -0.1, 0.1, 1.0, 10.0}) {
        if (!(t.dtau(u) > 0)) {
            std::ostringstream os;
            os << "stress law '" << t.name << "' is not strictly increasing at u=" << u;
            throw DomainError(os.str());
        }
    }
}

double StressLaw::quadrature_energy(double u) const {
    if (u == 0.0) return 0.0;
    const auto& t = std::get<TabulatedStress>(law_).tau;
    double err = 0.0;
    const double lo = std::min(0.0, u);
    const double hi = std::max(0.0, u);
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(t, lo, hi, 15, 1e-13,
                                                                                 &err);
    return u < 0 ? -v : v;
}

double StressLaw::relative_stress(double u, double ub) const {
    if (std::holds_alternative<PolynomialStress>(law_) ||
        std::abs(u - ub) <= kNearFraction * (1.0 + std::abs(ub))) {
        return taylor_remainder_integral(u, ub, [this](double s) { return d2tau(s); });
    }
    return tau(u) - tau(ub) - dtau(ub) * (u - ub);
}

double StressLaw::relative_energy(double u, double ub) const {
    if (std::holds_alternative<PolynomialStress>(law_) ||
        std::abs(u - ub) <= kNearFraction * (1.0 + std::abs(ub))) {
        return taylor_remainder_integral(u, ub, [this](double s) { return dtau(s); });
    }
    return energy(u) - energy(ub) - tau(ub) * (u - ub);
}

std::string StressLaw::describe() const {
    std::ostringstream os;
    if (const auto* poly = std::get_if<PolynomialStress>(&law_)) {
        os << "polynomial(";
        for (std::size_t j = 0; j < poly->coefficients.size(); ++j) {
            os << (j ? ", " : "") << poly->coefficients[j];
        }
        os << ")";
    } else {
        os << "tabulated(" << std::get<TabulatedStress>(law_).name << ")";
    }
    return os.str();
}

StressLaw make_polynomial_stress(std::vector<double> coefficients, double growth_exponent) {
    StressLaw law{PolynomialStress{std::move(coefficients)}, growth_exponent};
    // tau' > 0 on a symmetric sample
    for (double u : log_grid(1e-3, 1e3, 128)) {
        for (double s : {u, -u}) {
            if (!(law.dtau(s) > 0)) {
                std::ostringstream os;
                os << "polynomial stress is not strictly increasing at u=" << s;
                throw DomainError(os.str());
            }
        }
    }
    return law;
}

// ---------------------------------------------------------------------------

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < count; ++i) {
        g[static_cast<std::size_t>(i)] = count == 1 ? lo : std::exp(a + (b - a) * i / (count - 1));
    }
    return g;
}

std::vector<double> default_density_grid() { return log_grid(1e-3, 1e3, 512); }

std::vector<double> default_tail_grid() { return log_grid(1e3, 1e6, 64); }

HypothesisAReport check_hypothesis_A(const PressureLaw& p, const std::vector<double>& sample_grid,
                                     double cap) {
    HypothesisAReport report;
    report.cap = cap;
    report.grid = sample_grid;
    double sup = 0.0;
    for (double rho : sample_grid) {
        const double ratio = rho * p.d2p(rho) / p.dp(rho);
        if (!std::isfinite(ratio) || ratio > cap) {
            report.holds = false;
            report.witness = rho;
            break;
        }
        sup = std::max(sup, ratio);
    }
    report.constant = report.holds ? sup : std::numeric_limits<double>::infinity();
    return report;
}

namespace {

TailReport summarize_tail(std::vector<double> residuals, double tolerance) {
    TailReport r;
    r.residuals = std::move(residuals);
    if (r.residuals.empty()) return r;
    r.residual = r.residuals.back();
    const bool finite = std::all_of(r.residuals.begin(), r.residuals.end(),
                                    [](double x) { return std::isfinite(x); });
    r.holds = finite && r.residual <= tolerance && r.residual <= r.residuals.front() + 1e-15;
    return r;
}

}  // namespace

TailReport check_hypothesis_B(const PressureLaw& p, double gamma_claim, double k_claim,
                              const std::vector<double>& tail_grid, double tolerance) {
    std::vector<double> res;
    res.reserve(tail_grid.size());
    for (double rho : tail_grid) {
        const double model = k_claim * gamma_claim * std::pow(rho, gamma_claim - 1.0);
        res.push_back(std::abs(p.dp(rho) / model - 1.0));
    }
    return summarize_tail(std::move(res), tolerance);
}

TailReport check_growth_H(const StressLaw& s, const std::vector<double>& tail_grid, double tolerance) {
    const double pw = s.growth_exponent();
    std::vector<double> res;
    res.reserve(tail_grid.size());
    for (double u : tail_grid) {
        const double model = std::pow(u, pw);
        const double up = std::abs(s.tau(u) / model - 1.0);
        const double down = std::abs(s.tau(-u) / -model - 1.0);
        res.push_back(std::max(up, down));
    }
    return summarize_tail(std::move(res), tolerance);
}

}  // namespace relent
