#pragma once

#include <array>
#include <span>
#include <vector>

#include "densctl/grid.hpp"

namespace densctl {

/// Cell values on a Grid1D. Fields reference their grid by identity:
/// two fields interoperate only if they were built on the same grid object.
class ScalarField1D {
public:
    explicit ScalarField1D(const Grid1D& g) : grid_(&g), v_(g.n_cells(), 0.0) {}
    ScalarField1D(const Grid1D& g, std::vector<double> values)
        : grid_(&g), v_(std::move(values)) {
        require(static_cast<int>(v_.size()) == g.n_cells(),
                "ScalarField1D: value count does not match grid");
    }

    template <class Fn>
    static ScalarField1D from_function(const Grid1D& g, Fn f) {
        ScalarField1D out(g);
        for (int j = 0; j < g.n_cells(); ++j) out[j] = f(g.center(j));
        return out;
    }

    const Grid1D& grid() const noexcept { return *grid_; }
    int size() const noexcept { return static_cast<int>(v_.size()); }
    double operator[](int j) const noexcept { return v_[j]; }
    double& operator[](int j) noexcept { return v_[j]; }
    std::span<const double> values() const noexcept { return v_; }
    std::vector<double>& data() noexcept { return v_; }

private:
    const Grid1D* grid_;
    std::vector<double> v_;
};

/// Cell values on a Grid2D, stored row-major with axis 1 (x2) fastest:
/// flat index = i1 * n2 + i2.
class ScalarField2D {
public:
    explicit ScalarField2D(const Grid2D& g)
        : grid_(&g), v_(static_cast<std::size_t>(g.cell_count()), 0.0) {}
    ScalarField2D(const Grid2D& g, std::vector<double> values)
        : grid_(&g), v_(std::move(values)) {
        require(static_cast<long>(v_.size()) == g.cell_count(),
                "ScalarField2D: value count does not match grid");
    }

    template <class Fn>
    static ScalarField2D from_function(const Grid2D& g, Fn f) {
        ScalarField2D out(g);
        for (int i = 0; i < g.n_cells(0); ++i)
            for (int j = 0; j < g.n_cells(1); ++j)
                out(i, j) = f(g.center(0, i), g.center(1, j));
        return out;
    }

    const Grid2D& grid() const noexcept { return *grid_; }
    long size() const noexcept { return static_cast<long>(v_.size()); }
    double operator()(int i1, int i2) const noexcept {
        return v_[static_cast<std::size_t>(i1) * grid_->n_cells(1) + i2];
    }
    double& operator()(int i1, int i2) noexcept {
        return v_[static_cast<std::size_t>(i1) * grid_->n_cells(1) + i2];
    }
    double operator[](std::size_t k) const noexcept { return v_[k]; }
    double& operator[](std::size_t k) noexcept { return v_[k]; }
    std::span<const double> values() const noexcept { return v_; }
    std::vector<double>& data() noexcept { return v_; }

private:
    const Grid2D* grid_;
    std::vector<double> v_;
};

/// Two scalar components on one grid; component(i) follows axis i.
struct VectorField2D {
    explicit VectorField2D(const Grid2D& g) : c{ScalarField2D(g), ScalarField2D(g)} {}
    VectorField2D(ScalarField2D c1, ScalarField2D c2);

    const Grid2D& grid() const noexcept { return c[0].grid(); }
    ScalarField2D& component(int axis) noexcept { return c[axis]; }
    const ScalarField2D& component(int axis) const noexcept { return c[axis]; }

    std::array<ScalarField2D, 2> c;
};

inline bool same_grid(const ScalarField1D& f, const ScalarField1D& g) {
    return &f.grid() == &g.grid();
}
inline bool same_grid(const ScalarField2D& f, const ScalarField2D& g) {
    return &f.grid() == &g.grid();
}

// --- quadrature and norms (midpoint rule throughout) ---

double integrate(const ScalarField1D& f);
double integrate(const ScalarField2D& f);

/// Continuum L2 norm sqrt(sum f^2 * cell volume).
double l2_norm(const ScalarField1D& f);
double l2_norm(const ScalarField2D& f);

/// max |f|; rejects empty input.
double sup_norm(std::span<const double> v);
double sup_norm(const ScalarField1D& f);
double sup_norm(const ScalarField2D& f);

// --- stencil operators ---
// Central differences in the interior. Periodic grids wrap; reflective grids
// use one-sided stencils at the boundary cells (second order for first
// derivatives, first order for second derivatives).

ScalarField1D gradient(const ScalarField1D& f);
ScalarField1D second_derivative(const ScalarField1D& f);
ScalarField1D laplacian(const ScalarField1D& f);

ScalarField2D derivative(const ScalarField2D& f, int axis);
ScalarField2D second_derivative(const ScalarField2D& f, int axis);
VectorField2D gradient(const ScalarField2D& f);
ScalarField2D divergence(const VectorField2D& f);
ScalarField2D laplacian(const ScalarField2D& f);

}  // namespace densctl
