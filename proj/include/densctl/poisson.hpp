#pragma once

#include <vector>

#include "densctl/control.hpp"
#include "densctl/field.hpp"

namespace densctl {

/// Coefficients of a field in the solver's basis. Reflective grids use the
/// cosine basis cos(h pi (x+a)/2a) per axis with h, k >= 0; periodic grids
/// use the complex exponential basis with signed frequencies (stored as
/// real/imaginary planes). Truncation order equals the grid resolution.
struct SpectralCoeffs {
    BoundaryKind basis = BoundaryKind::Reflective;
    int n1 = 0, n2 = 0;
    std::vector<double> re;
    std::vector<double> im;  // empty for the cosine basis

    double real_at(int h, int k) const { return re[static_cast<std::size_t>(h) * n2 + k]; }
};

/// Zero-curl flux recovery: solve lap(xi) = -q spectrally and return
/// Phi = -grad(xi), evaluated by differentiating in coefficient space so the
/// boundary conditions of the basis hold exactly.
class SpectralPoisson2D {
public:
    explicit SpectralPoisson2D(const Grid2D& g);
    ~SpectralPoisson2D();
    SpectralPoisson2D(SpectralPoisson2D&&) noexcept;
    SpectralPoisson2D& operator=(SpectralPoisson2D&&) noexcept;
    SpectralPoisson2D(const SpectralPoisson2D&) = delete;
    SpectralPoisson2D& operator=(const SpectralPoisson2D&) = delete;

    const Grid2D& grid() const noexcept { return *grid_; }

    SpectralCoeffs forward(const ScalarField2D& f) const;
    ScalarField2D inverse(const SpectralCoeffs& c) const;

    /// Potential xi with zero mean. `strict` rejects a source whose integral
    /// exceeds the compatibility tolerance; otherwise the mean is subtracted
    /// and a warning is emitted once per solver.
    ScalarField2D solve(const ScalarField2D& q, bool strict = false) const;

    /// Phi = -grad(xi), spectral derivative of the given potential field.
    VectorField2D flux_from_potential(const ScalarField2D& xi) const;

    /// Fused solve + flux, skipping the intermediate xi grid evaluation.
    VectorField2D solve_flux(const ScalarField2D& q, bool strict = false) const;

    /// d1 Phi2 - d2 Phi1 with each term computed by an independent
    /// forward-transform/differentiate/evaluate pass.
    ScalarField2D residual_curl(const VectorField2D& phi) const;

    /// Net outward flux through the domain boundary, by series evaluation of
    /// the normal component along each edge and midpoint quadrature.
    double boundary_net_flux(const VectorField2D& phi) const;

    static constexpr double kCompatTol = 1e-8;

private:
    struct AxisTables;
    SpectralCoeffs solve_coeffs(const ScalarField2D& q, bool strict) const;
    const Grid2D* grid_;
    std::vector<AxisTables> axes_;
    mutable bool warned_ = false;
};

// One-shot wrappers that build a solver internally; fine for tests, drivers
// should hold a SpectralPoisson2D.
SpectralCoeffs cosine_transform_2d(const ScalarField2D& f);
ScalarField2D inverse_cosine_transform_2d(const SpectralCoeffs& c, const Grid2D& g);
ScalarField2D solve_poisson(const ScalarField2D& q, bool strict = false);
VectorField2D flux_from_potential(const ScalarField2D& xi);

}  // namespace densctl
