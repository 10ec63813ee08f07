#include "relent/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "relent/errors.hpp"

namespace relent {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"system", {"name", "mu"}},
        {"law", {"kind", "k", "gamma", "coefficients", "growth"}},
        {"grid", {"cells", "x_min", "x_max", "boundary", "left", "right"}},
        {"initial",
         {"profile", "amplitude", "mean", "wavenumber", "center", "width", "left", "right", "v_amplitude", "momentum",
          "ill_kind", "ill_amplitude"}},
        {"epsilon", {"values"}},
        {"solver",
         {"t_end", "cfl", "flux", "source", "integrator", "limit_scheme", "output_stride", "stop_times"}},
        {"sweep", {"cells_base", "workers"}},
        {"certify", {"entropy_cap"}},
        {"output", {"dir"}},
    };
    return keys;
}

double to_number(const std::string& key, const std::string& text) {
    const std::string s = boost::algorithm::trim_copy(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
    }
    if (used != s.size()) throw ConfigError("'" + key + "': trailing characters in '" + text + "'");
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const double v = to_number(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("'" + key + "': expected an integer");
    return static_cast<int>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts) {
        if (boost::algorithm::trim_copy(p).empty()) continue;
        out.push_back(to_number(key, p));
    }
    return out;
}

std::string format(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string format(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format(v[i]);
    return out;
}

class Reader {
  public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    template <class F>
    void with(const std::string& path, F f) const {
        if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'))) f(path, *v);
    }

  private:
    const pt::ptree& tree_;
};

}  // namespace

void RunConfig::validate() const {
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (epsilons.empty()) throw ConfigError("at least one eps value is required");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i])) throw ConfigError("eps values must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ConfigError("eps list must be strictly decreasing");
    }
    if (grid.cells < kMinCells) throw ConfigError("grid needs at least 16 cells");
    if (!(grid.x_max > grid.x_min)) throw ConfigError("grid needs x_max > x_min");
    if (cells_base < 0) throw ConfigError("cells_base must be non-negative");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (!(entropy_cap > 0.0)) throw ConfigError("entropy_cap must be positive");
    const std::set<std::string> profiles{"constant", "sine", "gauss-bump", "two-state"};
    if (!profiles.count(initial.profile)) throw ConfigError("unknown initial profile '" + initial.profile + "'");
    if (initial.ill_kind != "zero" && initial.ill_kind != "sine") {
        throw ConfigError("ill_kind must be zero or sine");
    }
    if ((initial.profile == "gauss-bump" || initial.profile == "two-state") && !(initial.width > 0.0)) {
        throw ConfigError("profile width must be positive");
    }
    const std::set<std::string> laws{"gamma", "exp", "polynomial"};
    if (!laws.count(law.kind)) throw ConfigError("unknown law kind '" + law.kind + "'");
    if (!grid.boundary.is_periodic()) {
        const std::size_t dim = system == SystemKind::ViscoMemory ? 2 : 1;
        if (grid.boundary.left.size() != dim || grid.boundary.right.size() != dim) {
            throw ConfigError("far-field states need one value per equilibrium component");
        }
    }
    solver.validate();
}

RunConfig parse_run_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("unknown section [" + section + "]");
        for (const auto& kv : body) {
            if (!it->second.count(kv.first)) throw ConfigError("unknown key '" + kv.first + "' in [" + section + "]");
        }
    }

    RunConfig c;
    const Reader r(tree);
    r.with("system.name", [&](auto&, auto& v) { c.system = parse_system_kind(boost::algorithm::trim_copy(v)); });
    r.with("system.mu", [&](auto& k, auto& v) { c.mu = to_number(k, v); });

    r.with("law.kind", [&](auto&, auto& v) { c.law.kind = boost::algorithm::trim_copy(v); });
    r.with("law.k", [&](auto& k, auto& v) { c.law.k = to_number(k, v); });
    r.with("law.gamma", [&](auto& k, auto& v) { c.law.gamma = to_number(k, v); });
    r.with("law.coefficients", [&](auto& k, auto& v) { c.law.coefficients = to_list(k, v); });
    r.with("law.growth", [&](auto& k, auto& v) { c.law.growth = to_number(k, v); });

    r.with("grid.cells", [&](auto& k, auto& v) { c.grid.cells = to_int(k, v); });
    r.with("grid.x_min", [&](auto& k, auto& v) { c.grid.x_min = to_number(k, v); });
    r.with("grid.x_max", [&](auto& k, auto& v) { c.grid.x_max = to_number(k, v); });
    std::string boundary = "periodic";
    r.with("grid.boundary", [&](auto&, auto& v) { boundary = boost::algorithm::trim_copy(v); });
    if (boundary == "far-field") {
        std::vector<double> left, right;
        r.with("grid.left", [&](auto& k, auto& v) { left = to_list(k, v); });
        r.with("grid.right", [&](auto& k, auto& v) { right = to_list(k, v); });
        c.grid.boundary = Boundary::far_field(left, right);
    } else if (boundary != "periodic") {
        throw ConfigError("boundary must be periodic or far-field");
    }

    auto& ini = c.initial;
    r.with("initial.profile", [&](auto&, auto& v) { ini.profile = boost::algorithm::trim_copy(v); });
    r.with("initial.amplitude", [&](auto& k, auto& v) { ini.amplitude = to_number(k, v); });
    r.with("initial.mean", [&](auto& k, auto& v) { ini.mean = to_number(k, v); });
    r.with("initial.wavenumber", [&](auto& k, auto& v) { ini.wavenumber = to_number(k, v); });
    r.with("initial.center", [&](auto& k, auto& v) { ini.center = to_number(k, v); });
    r.with("initial.width", [&](auto& k, auto& v) { ini.width = to_number(k, v); });
    r.with("initial.left", [&](auto& k, auto& v) { ini.left = to_number(k, v); });
    r.with("initial.right", [&](auto& k, auto& v) { ini.right = to_number(k, v); });
    r.with("initial.v_amplitude", [&](auto& k, auto& v) { ini.v_amplitude = to_number(k, v); });
    r.with("initial.momentum", [&](auto&, auto& v) {
        const auto s = boost::algorithm::trim_copy(v);
        if (s == "well-prepared") {
            ini.momentum = Momentum::WellPrepared;
        } else if (s == "ill-prepared") {
            ini.momentum = Momentum::IllPrepared;
        } else {
            throw ConfigError("momentum must be well-prepared or ill-prepared");
        }
    });
    r.with("initial.ill_kind", [&](auto&, auto& v) { ini.ill_kind = boost::algorithm::trim_copy(v); });
    r.with("initial.ill_amplitude", [&](auto& k, auto& v) { ini.ill_amplitude = to_number(k, v); });

    r.with("epsilon.values", [&](auto& k, auto& v) { c.epsilons = to_list(k, v); });

    auto& s = c.solver;
    r.with("solver.t_end", [&](auto& k, auto& v) { s.t_end = to_number(k, v); });
    r.with("solver.cfl", [&](auto& k, auto& v) { s.cfl = to_number(k, v); });
    r.with("solver.flux", [&](auto&, auto& v) { s.flux_scheme = parse_flux_scheme(boost::algorithm::trim_copy(v)); });
    r.with("solver.source",
           [&](auto&, auto& v) { s.source_scheme = parse_source_scheme(boost::algorithm::trim_copy(v)); });
    r.with("solver.integrator",
           [&](auto&, auto& v) { s.flux_integrator = parse_flux_integrator(boost::algorithm::trim_copy(v)); });
    r.with("solver.limit_scheme",
           [&](auto&, auto& v) { s.limit_scheme = parse_limit_scheme(boost::algorithm::trim_copy(v)); });
    r.with("solver.output_stride", [&](auto& k, auto& v) { s.output_stride = to_int(k, v); });
    r.with("solver.stop_times", [&](auto& k, auto& v) { s.stop_times = to_list(k, v); });

    r.with("sweep.cells_base", [&](auto& k, auto& v) { c.cells_base = to_int(k, v); });
    r.with("sweep.workers", [&](auto& k, auto& v) { c.workers = to_int(k, v); });
    r.with("certify.entropy_cap", [&](auto& k, auto& v) { c.entropy_cap = to_number(k, v); });
    r.with("output.dir", [&](auto&, auto& v) { c.output_dir = boost::algorithm::trim_copy(v); });

    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_run_config(in);
}

void write_run_config(std::ostream& out, const RunConfig& c) {
    out << "[system]\nname = " << to_string(c.system) << "\nmu = " << format(c.mu) << "\n\n";
    out << "[law]\nkind = " << c.law.kind << "\nk = " << format(c.law.k) << "\ngamma = " << format(c.law.gamma)
        << "\ncoefficients = " << format(c.law.coefficients) << "\ngrowth = " << format(c.law.growth) << "\n\n";
    out << "[grid]\ncells = " << c.grid.cells << "\nx_min = " << format(c.grid.x_min)
        << "\nx_max = " << format(c.grid.x_max) << "\nboundary = " << (c.grid.boundary.is_periodic() ? "periodic" : "far-field")
        << "\n";
    if (!c.grid.boundary.is_periodic()) {
        out << "left = " << format(c.grid.boundary.left) << "\nright = " << format(c.grid.boundary.right) << "\n";
    }
    const auto& i = c.initial;
    out << "\n[initial]\nprofile = " << i.profile << "\namplitude = " << format(i.amplitude)
        << "\nmean = " << format(i.mean) << "\nwavenumber = " << format(i.wavenumber)
        << "\ncenter = " << format(i.center) << "\nwidth = " << format(i.width) << "\nleft = " << format(i.left)
        << "\nright = " << format(i.right) << "\nv_amplitude = " << format(i.v_amplitude) << "\nmomentum = "
        << (i.momentum == Momentum::WellPrepared ? "well-prepared" : "ill-prepared") << "\nill_kind = " << i.ill_kind
        << "\nill_amplitude = " << format(i.ill_amplitude) << "\n\n";
    out << "[epsilon]\nvalues = " << format(c.epsilons) << "\n\n";
    const auto& s = c.solver;
    out << "[solver]\nt_end = " << format(s.t_end) << "\ncfl = " << format(s.cfl)
        << "\nflux = " << to_string(s.flux_scheme) << "\nsource = " << to_string(s.source_scheme)
        << "\nintegrator = " << to_string(s.flux_integrator) << "\nlimit_scheme = " << to_string(s.limit_scheme)
        << "\noutput_stride = " << s.output_stride << "\n";
    if (!s.stop_times.empty()) out << "stop_times = " << format(s.stop_times) << "\n";
    out << "\n[sweep]\ncells_base = " << c.cells_base << "\nworkers = " << c.workers << "\n\n";
    out << "[certify]\nentropy_cap = " << format(c.entropy_cap) << "\n\n";
    out << "[output]\ndir = " << c.output_dir << "\n";
}

Constitutive build_constitutive(const RunConfig& cfg) {
    if (cfg.law.kind == "gamma") return make_gamma_law(cfg.law.k, cfg.law.gamma);
    if (cfg.law.kind == "exp") {
        const auto e = [](double r) { return std::exp(r); };
        return make_tabulated_pressure({"exp", e, e, e});
    }
    return make_polynomial_stress(cfg.law.coefficients, cfg.law.growth);
}

RelaxationSystem build_system(const RunConfig& cfg) {
    try {
        return build_system(cfg.system, build_constitutive(cfg), cfg.mu);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

Grid build_grid(const RunConfig& cfg, int cells) {
    return Grid(cells, cfg.grid.x_min, cfg.grid.x_max, cfg.grid.boundary);
}

int sweep_cells(const RunConfig& cfg, double eps) {
    const int base = cfg.cells_base > 0 ? cfg.cells_base : cfg.grid.cells;
    const double ratio = cfg.epsilons.front() / eps;
    return static_cast<int>(std::lround(base * ratio * ratio));
}

InitialData build_initial_data(const RunConfig& cfg, const LimitSystem& limit, double eps, int cells) {
    const Grid g = build_grid(cfg, cells);
    const auto& in = cfg.initial;
    const double two_pi = 2.0 * std::acos(-1.0);
    const double L = g.length();
    auto wave = [&](double x) { return std::sin(two_pi * in.wavenumber * (x - g.x_min()) / L); };
    auto shape = [&](double x) {
        if (in.profile == "constant") return in.mean;
        if (in.profile == "sine") return in.mean + in.amplitude * wave(x);
        if (in.profile == "gauss-bump") {
            const double s = (x - in.center) / in.width;
            return in.mean + in.amplitude * std::exp(-s * s);
        }
        // two-state: smoothed step between the plateaus
        return in.left + (in.right - in.left) * 0.5 * (1.0 + std::tanh((x - in.center) / in.width));
    };

    GridField profile(g, limit.state_dim());
    for (int i = 0; i < cells; ++i) {
        profile(0, i) = shape(g.center(i));
        if (limit.state_dim() == 2) profile(1, i) = in.v_amplitude * wave(g.center(i));
    }
    GridField state = limit.reconstruct_bar_state(profile, eps);
    if (in.momentum == Momentum::IllPrepared) {
        const int r = limit.relaxation().relaxing_component();
        for (int i = 0; i < cells; ++i) {
            state(r, i) = in.ill_kind == "zero" ? 0.0 : in.ill_amplitude * wave(g.center(i));
        }
    }
    return {std::move(state), std::move(profile)};
}

}  // namespace relent
