// Uniform 1-D cell-centred grids, cell-average fields, and the centred
// difference operator shared by every solver and diagnostic.

#ifndef RELENT_GRID_HPP
#define RELENT_GRID_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace relent {

enum class BoundaryKind { Periodic, FarField };

/// Far-field states are given in the equilibrium (limit) variables; the
/// relaxation solver lifts them with a zero non-equilibrium component.
struct Boundary {
    BoundaryKind kind = BoundaryKind::Periodic;
    std::vector<double> left;
    std::vector<double> right;

    static Boundary periodic() { return {}; }
    static Boundary far_field(std::vector<double> left, std::vector<double> right) {
        return {BoundaryKind::FarField, std::move(left), std::move(right)};
    }
    bool is_periodic() const { return kind == BoundaryKind::Periodic; }
};

inline constexpr int kMinCells = 16;

class Grid {
  public:
    Grid(int cells, double x_min, double x_max, Boundary boundary = Boundary::periodic());

    int cells() const { return cells_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double dx() const { return dx_; }
    double length() const { return x_max_ - x_min_; }
    double center(int i) const { return x_min_ + (i + 0.5) * dx_; }
    const Boundary& boundary() const { return boundary_; }
    bool periodic() const { return boundary_.is_periodic(); }

    /// Same extent and boundary, different resolution.
    Grid with_cells(int cells) const { return Grid(cells, x_min_, x_max_, boundary_); }

    bool same_as(const Grid& other) const;

  private:
    int cells_;
    double x_min_;
    double x_max_;
    double dx_;
    Boundary boundary_;
};

/// Cell averages of a state with `dim` components at time t.
class GridField {
  public:
    GridField(Grid grid, int dim, double t = 0.0);

    const Grid& grid() const { return grid_; }
    int dim() const { return static_cast<int>(components_.size()); }
    int cells() const { return grid_.cells(); }
    double time() const { return t_; }
    void set_time(double t) { t_ = t; }

    std::span<double> component(int c) { return components_[static_cast<std::size_t>(c)]; }
    std::span<const double> component(int c) const { return components_[static_cast<std::size_t>(c)]; }
    std::vector<double>& data(int c) { return components_[static_cast<std::size_t>(c)]; }
    const std::vector<double>& data(int c) const { return components_[static_cast<std::size_t>(c)]; }

    double& operator()(int c, int i) { return components_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]; }
    double operator()(int c, int i) const {
        return components_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
    }

    /// sum_i v_i dx for one component.
    double integral(int c) const;
    bool all_finite() const;

  private:
    Grid grid_;
    double t_;
    std::vector<std::vector<double>> components_;
};

/// Centred difference (v_{i+1} - v_{i-1}) / (2 dx). On far-field grids the
/// values outside the domain are the given constants; on periodic grids they
/// wrap and the ghost arguments are ignored.
std::vector<double> centered_difference(const Grid& grid, std::span<const double> v,
                                        double left_ghost = 0.0, double right_ghost = 0.0);

/// D0 D0 v: the wide second difference (v_{i+2} - 2 v_i + v_{i-2}) / (4 dx^2).
std::vector<double> wide_second_difference(const Grid& grid, std::span<const double> v,
                                           double left_ghost = 0.0, double right_ghost = 0.0);

/// Average a fine field onto a coarser grid whose cell count divides the fine one.
std::vector<double> restrict_average(std::span<const double> fine, int coarse_cells);

/// Writes one row per cell: x followed by each component, preceded by a
/// `# x,<names...>` header and a `# t=<time>` line.
void write_snapshot(const std::string& path, const GridField& field,
                    const std::vector<std::string>& component_names);

GridField read_snapshot(const std::string& path, const Grid& grid);

}  // namespace relent

#endif  // RELENT_GRID_HPP
