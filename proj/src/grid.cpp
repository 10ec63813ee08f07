#include "relent/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

Grid::Grid(int cells, double x_min, double x_max, Boundary boundary)
    : cells_(cells), x_min_(x_min), x_max_(x_max), dx_((x_max - x_min) / cells), boundary_(std::move(boundary)) {
    if (cells < kMinCells) throw DomainError("grid needs at least 16 cells");
    if (!(x_max > x_min)) throw DomainError("grid needs x_max > x_min");
    if (!boundary_.is_periodic() && (boundary_.left.empty() || boundary_.left.size() != boundary_.right.size())) {
        throw DomainError("far-field boundary needs matching left/right states");
    }
}

bool Grid::same_as(const Grid& other) const {
    return cells_ == other.cells_ && x_min_ == other.x_min_ && x_max_ == other.x_max_ &&
           boundary_.kind == other.boundary_.kind;
}

GridField::GridField(Grid grid, int dim, double t)
    : grid_(std::move(grid)), t_(t),
      components_(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(grid_.cells()), 0.0)) {}

double GridField::integral(int c) const {
    double s = 0.0;
    for (double v : data(c)) s += v;
    return s * grid_.dx();
}

bool GridField::all_finite() const {
    for (const auto& comp : components_) {
        for (double v : comp) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

namespace {

// Value at index i in [-2, N+1] with the boundary rule.
inline double at(const Grid& g, std::span<const double> v, int i, double gl, double gr) {
    const int n = g.cells();
    if (i >= 0 && i < n) return v[static_cast<std::size_t>(i)];
    if (g.periodic()) return v[static_cast<std::size_t>((i % n + n) % n)];
    return i < 0 ? gl : gr;
}

}  // namespace

std::vector<double> centered_difference(const Grid& grid, std::span<const double> v, double left_ghost,
                                        double right_ghost) {
    const int n = grid.cells();
    const double inv = 1.0 / (2.0 * grid.dx());
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 1; i + 1 < n; ++i) {
        out[static_cast<std::size_t>(i)] = (v[static_cast<std::size_t>(i + 1)] - v[static_cast<std::size_t>(i - 1)]) * inv;
    }
    out[0] = (at(grid, v, 1, left_ghost, right_ghost) - at(grid, v, -1, left_ghost, right_ghost)) * inv;
    out[static_cast<std::size_t>(n - 1)] =
        (at(grid, v, n, left_ghost, right_ghost) - at(grid, v, n - 2, left_ghost, right_ghost)) * inv;
    return out;
}

std::vector<double> wide_second_difference(const Grid& grid, std::span<const double> v, double left_ghost,
                                           double right_ghost) {
    const auto d = centered_difference(grid, v, left_ghost, right_ghost);
    // derivatives of a constant far-field state vanish
    return centered_difference(grid, d, 0.0, 0.0);
}

std::vector<double> restrict_average(std::span<const double> fine, int coarse_cells) {
    const auto n = static_cast<int>(fine.size());
    if (coarse_cells <= 0 || n % coarse_cells != 0) {
        throw DomainError("restriction needs the coarse cell count to divide the fine one");
    }
    const int r = n / coarse_cells;
    std::vector<double> out(static_cast<std::size_t>(coarse_cells), 0.0);
    for (int i = 0; i < coarse_cells; ++i) {
        double s = 0.0;
        for (int j = 0; j < r; ++j) s += fine[static_cast<std::size_t>(i * r + j)];
        out[static_cast<std::size_t>(i)] = s / r;
    }
    return out;
}

void write_snapshot(const std::string& path, const GridField& field,
                    const std::vector<std::string>& component_names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open snapshot file " + path);
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "# t=" << field.time() << "\n# x";
    for (const auto& name : component_names) out << "," << name;
    out << "\n";
    for (int i = 0; i < field.cells(); ++i) {
        out << field.grid().center(i);
        for (int c = 0; c < field.dim(); ++c) out << "," << field(c, i);
        out << "\n";
    }
}

GridField read_snapshot(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot file " + path);
    std::string line;
    double t = 0.0;
    int dim = -1;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.rfind("# t=", 0) == 0) {
            t = std::stod(line.substr(4));
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (dim < 0) dim = static_cast<int>(row.size()) - 1;
        if (static_cast<int>(row.size()) != dim + 1) throw std::runtime_error("ragged snapshot row in " + path);
        rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) != grid.cells()) throw std::runtime_error("snapshot cell count mismatch");
    GridField f(grid, dim, t);
    for (int i = 0; i < grid.cells(); ++i) {
        for (int c = 0; c < dim; ++c) f(c, i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c + 1)];
    }
    return f;
}

}  // namespace relent
