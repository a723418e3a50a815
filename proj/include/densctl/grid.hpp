#pragma once

#include <stdexcept>

namespace densctl {

/// Boundary handling shared by every spatial operator.
enum class BoundaryKind { Periodic, Reflective };

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Uniform cell-centered grid on [-a, a].
///
/// Cell centers sit at x_j = -a + (j + 1/2) dx, j = 0..n-1, so both
/// boundary faces coincide with the domain ends and mass bookkeeping
/// telescopes exactly.
class Grid1D {
public:
    Grid1D(double half_width, int n_cells, BoundaryKind boundary)
        : a_(half_width), n_(n_cells), bc_(boundary), dx_(2.0 * half_width / n_cells) {
        require(half_width > 0.0, "Grid1D: half_width must be positive");
        require(n_cells >= 4, "Grid1D: need at least 4 cells");
    }

    double half_width() const noexcept { return a_; }
    int n_cells() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    BoundaryKind boundary() const noexcept { return bc_; }
    double length() const noexcept { return 2.0 * a_; }
    double center(int j) const noexcept { return -a_ + (j + 0.5) * dx_; }

private:
    double a_;
    int n_;
    BoundaryKind bc_;
    double dx_;
};

/// Tensor product of two 1D layouts on [-a, a]^2; both axes share the
/// boundary kind. Axis 0 is x1, axis 1 is x2.
class Grid2D {
public:
    Grid2D(double half_width, int n_cells_1, int n_cells_2, BoundaryKind boundary)
        : a_(half_width), n1_(n_cells_1), n2_(n_cells_2), bc_(boundary),
          dx1_(2.0 * half_width / n_cells_1), dx2_(2.0 * half_width / n_cells_2) {
        require(half_width > 0.0, "Grid2D: half_width must be positive");
        require(n_cells_1 >= 4 && n_cells_2 >= 4, "Grid2D: need at least 4 cells per axis");
    }

    double half_width() const noexcept { return a_; }
    int n_cells(int axis) const noexcept { return axis == 0 ? n1_ : n2_; }
    double dx(int axis) const noexcept { return axis == 0 ? dx1_ : dx2_; }
    BoundaryKind boundary() const noexcept { return bc_; }
    double length() const noexcept { return 2.0 * a_; }
    double area() const noexcept { return length() * length(); }
    double cell_area() const noexcept { return dx1_ * dx2_; }
    double center(int axis, int j) const noexcept {
        return -a_ + (j + 0.5) * dx(axis);
    }
    long cell_count() const noexcept { return static_cast<long>(n1_) * n2_; }

private:
    double a_;
    int n1_, n2_;
    BoundaryKind bc_;
    double dx1_, dx2_;
};

}  // namespace densctl
