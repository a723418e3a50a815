#pragma once

#include <functional>
#include <optional>
#include <span>

#include "densctl/field.hpp"
#include "densctl/image.hpp"

namespace densctl {

/// Nonnegative scalar field with unit mass (within 1e-9), i.e. a probability
/// density sampled at cell centers.
class Density1D {
public:
    /// Normalizes `values` to unit mass. Negative entries beyond roundoff
    /// dust are rejected; dust is clamped to zero.
    static Density1D normalized(ScalarField1D values);

    const ScalarField1D& field() const noexcept { return f_; }
    const Grid1D& grid() const noexcept { return f_.grid(); }
    double operator[](int j) const noexcept { return f_[j]; }

private:
    explicit Density1D(ScalarField1D f) : f_(std::move(f)) {}
    ScalarField1D f_;
};

class Density2D {
public:
    static Density2D normalized(ScalarField2D values);

    const ScalarField2D& field() const noexcept { return f_; }
    const Grid2D& grid() const noexcept { return f_.grid(); }
    double operator()(int i, int j) const noexcept { return f_(i, j); }

private:
    explicit Density2D(ScalarField2D f) : f_(std::move(f)) {}
    ScalarField2D f_;
};

/// values proportional to exp(kappa cos(x - mu)), normalized on the grid.
/// Periodic grids only.
Density1D von_mises_1d(double kappa, double mu, const Grid1D& g);

/// values proportional to exp(k1 cos(x1-mu) + k2 cos(x2-nu)
///   + cos(x1-mu) cos(x2-nu) + sin(x1-mu) sin(x2-nu)), normalized.
Density2D bivariate_von_mises(double kappa1, double kappa2, double mu, double nu,
                              const Grid2D& g);

/// Grayscale image resampled bilinearly onto the grid, optionally inverted,
/// Gaussian-smoothed (std smoothing_sigma in domain units), shifted to be
/// nonnegative and normalized.
Density2D density_from_image(const GrayImage& img, const Grid2D& g,
                             double smoothing_sigma, bool invert);

/// Histogram of agent positions on the grid cells, convolved with a Gaussian
/// kernel (periodic wrap or reflective padding per the grid), normalized.
/// Deterministic and permutation-invariant in the position list.
Density1D estimate_density(std::span<const double> positions, const Grid1D& g,
                           double bandwidth_sigma);
Density2D estimate_density(std::span<const double> x1, std::span<const double> x2,
                           const Grid2D& g, double bandwidth_sigma);

/// Discrete Gaussian filter, kernel truncated at 4 sigma and renormalized.
/// sigma = 0 is the identity.
ScalarField1D gaussian_filter(const ScalarField1D& f, double sigma);
ScalarField2D gaussian_filter(const ScalarField2D& f, double sigma);

/// Desired density with cached discrete derivative sup norms; optionally
/// time-varying (rigidly translating von Mises profile) for tracking runs.
class Reference1D {
public:
    static Reference1D fixed(Density1D profile);
    static Reference1D moving_von_mises(double kappa, double mu0, double mu_rate,
                                        const Grid1D& g);

    bool time_varying() const noexcept { return mu_rate_ != 0.0; }
    const Grid1D& grid() const noexcept { return grid_; }
    Density1D profile(double t) const;
    /// d/dt of the profile; zero field when fixed. Mass-free by construction.
    ScalarField1D time_derivative(double t) const;
    double sup_gradient() const noexcept { return sup_d1_; }
    double sup_second_derivative() const noexcept { return sup_d2_; }

private:
    Reference1D(const Grid1D& g, std::optional<Density1D> fixed_profile, double kappa,
                double mu0, double mu_rate);
    const Grid1D& grid_;
    std::optional<Density1D> fixed_;
    double kappa_ = 0.0, mu0_ = 0.0, mu_rate_ = 0.0;
    double sup_d1_ = 0.0, sup_d2_ = 0.0;
};

class Reference2D {
public:
    static Reference2D fixed(Density2D profile);

    const Grid2D& grid() const noexcept { return profile_.grid(); }
    const Density2D& profile() const noexcept { return profile_; }
    double sup_gradient(int axis) const noexcept { return sup_d1_[axis]; }
    double sup_second_derivative(int axis) const noexcept { return sup_d2_[axis]; }

private:
    explicit Reference2D(Density2D p);
    Density2D profile_;
    double sup_d1_[2], sup_d2_[2];
};

}  // namespace densctl
