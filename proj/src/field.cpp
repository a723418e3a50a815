#include "densctl/field.hpp"

#include <cmath>

namespace densctl {

VectorField2D::VectorField2D(ScalarField2D c1, ScalarField2D c2)
    : c{std::move(c1), std::move(c2)} {
    require(&c[0].grid() == &c[1].grid(), "VectorField2D: components on different grids");
}

double integrate(const ScalarField1D& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().dx();
}

double integrate(const ScalarField2D& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_area();
}

double l2_norm(const ScalarField1D& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().dx());
}

double l2_norm(const ScalarField2D& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell_area());
}

double sup_norm(std::span<const double> v) {
    require(!v.empty(), "sup_norm: empty field");
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_norm(const ScalarField1D& f) { return sup_norm(f.values()); }
double sup_norm(const ScalarField2D& f) { return sup_norm(f.values()); }

ScalarField1D gradient(const ScalarField1D& f) {
    const Grid1D& g = f.grid();
    const int n = g.n_cells();
    const double inv2dx = 1.0 / (2.0 * g.dx());
    ScalarField1D out(g);
    for (int j = 1; j < n - 1; ++j) out[j] = (f[j + 1] - f[j - 1]) * inv2dx;
    if (g.boundary() == BoundaryKind::Periodic) {
        out[0] = (f[1] - f[n - 1]) * inv2dx;
        out[n - 1] = (f[0] - f[n - 2]) * inv2dx;
    } else {
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2dx;
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2dx;
    }
    return out;
}

ScalarField1D second_derivative(const ScalarField1D& f) {
    const Grid1D& g = f.grid();
    const int n = g.n_cells();
    const double inv = 1.0 / (g.dx() * g.dx());
    ScalarField1D out(g);
    for (int j = 1; j < n - 1; ++j) out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) * inv;
    if (g.boundary() == BoundaryKind::Periodic) {
        out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * inv;
        out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * inv;
    } else {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
    }
    return out;
}

ScalarField1D laplacian(const ScalarField1D& f) { return second_derivative(f); }

namespace {

template <class Get, class Set>
void axis_first_derivative(int n, double dx, BoundaryKind bc, Get get, Set set) {
    const double inv2dx = 1.0 / (2.0 * dx);
    for (int i = 1; i < n - 1; ++i) set(i, (get(i + 1) - get(i - 1)) * inv2dx);
    if (bc == BoundaryKind::Periodic) {
        set(0, (get(1) - get(n - 1)) * inv2dx);
        set(n - 1, (get(0) - get(n - 2)) * inv2dx);
    } else {
        set(0, (-3.0 * get(0) + 4.0 * get(1) - get(2)) * inv2dx);
        set(n - 1, (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) * inv2dx);
    }
}

template <class Get, class Set>
void axis_second_derivative(int n, double dx, BoundaryKind bc, Get get, Set set) {
    const double inv = 1.0 / (dx * dx);
    for (int i = 1; i < n - 1; ++i) set(i, (get(i + 1) - 2.0 * get(i) + get(i - 1)) * inv);
    if (bc == BoundaryKind::Periodic) {
        set(0, (get(1) - 2.0 * get(0) + get(n - 1)) * inv);
        set(n - 1, (get(0) - 2.0 * get(n - 1) + get(n - 2)) * inv);
    } else {
        set(0, (2.0 * get(0) - 5.0 * get(1) + 4.0 * get(2) - get(3)) * inv);
        set(n - 1,
            (2.0 * get(n - 1) - 5.0 * get(n - 2) + 4.0 * get(n - 3) - get(n - 4)) * inv);
    }
}

}  // namespace

ScalarField2D derivative(const ScalarField2D& f, int axis) {
    require(axis == 0 || axis == 1, "derivative: axis must be 0 or 1");
    const Grid2D& g = f.grid();
    ScalarField2D out(g);
    const int n1 = g.n_cells(0), n2 = g.n_cells(1);
    if (axis == 0) {
        for (int j = 0; j < n2; ++j)
            axis_first_derivative(
                n1, g.dx(0), g.boundary(), [&](int i) { return f(i, j); },
                [&](int i, double v) { out(i, j) = v; });
    } else {
        for (int i = 0; i < n1; ++i)
            axis_first_derivative(
                n2, g.dx(1), g.boundary(), [&](int j) { return f(i, j); },
                [&](int j, double v) { out(i, j) = v; });
    }
    return out;
}

ScalarField2D second_derivative(const ScalarField2D& f, int axis) {
    require(axis == 0 || axis == 1, "second_derivative: axis must be 0 or 1");
    const Grid2D& g = f.grid();
    ScalarField2D out(g);
    const int n1 = g.n_cells(0), n2 = g.n_cells(1);
    if (axis == 0) {
        for (int j = 0; j < n2; ++j)
            axis_second_derivative(
                n1, g.dx(0), g.boundary(), [&](int i) { return f(i, j); },
                [&](int i, double v) { out(i, j) = v; });
    } else {
        for (int i = 0; i < n1; ++i)
            axis_second_derivative(
                n2, g.dx(1), g.boundary(), [&](int j) { return f(i, j); },
                [&](int j, double v) { out(i, j) = v; });
    }
    return out;
}

VectorField2D gradient(const ScalarField2D& f) {
    return VectorField2D(derivative(f, 0), derivative(f, 1));
}

ScalarField2D divergence(const VectorField2D& f) {
    ScalarField2D d1 = derivative(f.component(0), 0);
    const ScalarField2D d2 = derivative(f.component(1), 1);
    for (std::size_t k = 0; k < d1.values().size(); ++k) d1[k] += d2[k];
    return d1;
}

ScalarField2D laplacian(const ScalarField2D& f) {
    ScalarField2D d1 = second_derivative(f, 0);
    const ScalarField2D d2 = second_derivative(f, 1);
    for (std::size_t k = 0; k < d1.values().size(); ++k) d1[k] += d2[k];
    return d1;
}

}  // namespace densctl
