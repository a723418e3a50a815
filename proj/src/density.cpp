#include "densctl/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace densctl {

namespace {

constexpr double kNegativeDust = -1e-12;

template <class Field>
void normalize_in_place(Field& f, double cell_volume) {
    double mass = 0.0;
    for (std::size_t k = 0; k < f.values().size(); ++k) {
        double& v = f.data()[k];
        if (v < 0.0) {
            require(v >= kNegativeDust, "density: negative values");
            v = 0.0;
        }
        mass += v;
    }
    mass *= cell_volume;
    require(mass > 0.0, "density: zero total mass, cannot normalize");
    const double inv = 1.0 / mass;
    for (double& v : f.data()) v *= inv;
}

// Symmetric kernel weights for a grid-aligned Gaussian, truncated at
// 4 sigma and normalized to unit sum.
std::vector<double> kernel_weights(double sigma, double dx) {
    const int m = static_cast<int>(std::ceil(4.0 * sigma / dx));
    std::vector<double> w(static_cast<std::size_t>(m) + 1);
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double z = j * dx / sigma;
        w[j] = std::exp(-0.5 * z * z);
        sum += (j == 0 ? 1.0 : 2.0) * w[j];
    }
    for (double& x : w) x /= sum;
    return w;
}

inline int wrap(int i, int n) { return (i % n + n) % n; }

// Mirror index for reflective padding: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

template <class Get, class Set>
void convolve_axis(int n, BoundaryKind bc, const std::vector<double>& w, Get get, Set set) {
    const int m = static_cast<int>(w.size()) - 1;
    for (int i = 0; i < n; ++i) {
        double acc = w[0] * get(i);
        for (int j = 1; j <= m; ++j) {
            const int lo = bc == BoundaryKind::Periodic ? wrap(i - j, n) : reflect(i - j, n);
            const int hi = bc == BoundaryKind::Periodic ? wrap(i + j, n) : reflect(i + j, n);
            acc += w[j] * (get(lo) + get(hi));
        }
        set(i, acc);
    }
}

}  // namespace

Density1D Density1D::normalized(ScalarField1D values) {
    normalize_in_place(values, values.grid().dx());
    return Density1D(std::move(values));
}

Density2D Density2D::normalized(ScalarField2D values) {
    normalize_in_place(values, values.grid().cell_area());
    return Density2D(std::move(values));
}

Density1D von_mises_1d(double kappa, double mu, const Grid1D& g) {
    require(kappa >= 0.0, "von_mises_1d: kappa must be nonnegative");
    require(g.boundary() == BoundaryKind::Periodic,
            "von_mises_1d: target requires a periodic grid");
    ScalarField1D f = ScalarField1D::from_function(
        g, [&](double x) { return std::exp(kappa * std::cos(x - mu)); });
    return Density1D::normalized(std::move(f));
}

Density2D bivariate_von_mises(double kappa1, double kappa2, double mu, double nu,
                              const Grid2D& g) {
    require(kappa1 >= 0.0 && kappa2 >= 0.0, "bivariate_von_mises: kappa must be nonnegative");
    require(g.boundary() == BoundaryKind::Periodic,
            "bivariate_von_mises: target requires a periodic grid");
    ScalarField2D f = ScalarField2D::from_function(g, [&](double x1, double x2) {
        const double c1 = std::cos(x1 - mu), c2 = std::cos(x2 - nu);
        const double s1 = std::sin(x1 - mu), s2 = std::sin(x2 - nu);
        return std::exp(kappa1 * c1 + kappa2 * c2 + c1 * c2 + s1 * s2);
    });
    return Density2D::normalized(std::move(f));
}

ScalarField1D gaussian_filter(const ScalarField1D& f, double sigma) {
    require(sigma >= 0.0, "gaussian_filter: sigma must be nonnegative");
    if (sigma == 0.0) return f;
    const Grid1D& g = f.grid();
    const auto w = kernel_weights(sigma, g.dx());
    ScalarField1D out(g);
    convolve_axis(
        g.n_cells(), g.boundary(), w, [&](int i) { return f[i]; },
        [&](int i, double v) { out[i] = v; });
    return out;
}

ScalarField2D gaussian_filter(const ScalarField2D& f, double sigma) {
    require(sigma >= 0.0, "gaussian_filter: sigma must be nonnegative");
    if (sigma == 0.0) return f;
    const Grid2D& g = f.grid();
    const int n1 = g.n_cells(0), n2 = g.n_cells(1);
    ScalarField2D tmp(g), out(g);
    const auto w1 = kernel_weights(sigma, g.dx(0));
    for (int j = 0; j < n2; ++j)
        convolve_axis(
            n1, g.boundary(), w1, [&](int i) { return f(i, j); },
            [&](int i, double v) { tmp(i, j) = v; });
    const auto w2 = kernel_weights(sigma, g.dx(1));
    for (int i = 0; i < n1; ++i)
        convolve_axis(
            n2, g.boundary(), w2, [&](int j) { return tmp(i, j); },
            [&](int j, double v) { out(i, j) = v; });
    return out;
}

namespace {

inline int cell_of(double x, double a, double dx, int n) {
    int j = static_cast<int>(std::floor((x + a) / dx));
    // positions exactly on the upper boundary belong to the last cell
    if (j == n) j = n - 1;
    require(j >= 0 && j < n, "estimate_density: position outside the domain");
    return j;
}

}  // namespace

Density1D estimate_density(std::span<const double> positions, const Grid1D& g,
                           double bandwidth_sigma) {
    require(!positions.empty(), "estimate_density: empty position list");
    require(bandwidth_sigma >= 0.0, "estimate_density: bandwidth must be nonnegative");
    std::vector<double> counts(static_cast<std::size_t>(g.n_cells()), 0.0);
    for (double x : positions)
        counts[cell_of(x, g.half_width(), g.dx(), g.n_cells())] += 1.0;
    ScalarField1D h(g, std::move(counts));
    if (bandwidth_sigma > 0.0) h = gaussian_filter(h, bandwidth_sigma);
    return Density1D::normalized(std::move(h));
}

Density2D estimate_density(std::span<const double> x1, std::span<const double> x2,
                           const Grid2D& g, double bandwidth_sigma) {
    require(!x1.empty() && x1.size() == x2.size(),
            "estimate_density: empty or mismatched position lists");
    require(bandwidth_sigma >= 0.0, "estimate_density: bandwidth must be nonnegative");
    ScalarField2D h(g);
    for (std::size_t k = 0; k < x1.size(); ++k) {
        const int i = cell_of(x1[k], g.half_width(), g.dx(0), g.n_cells(0));
        const int j = cell_of(x2[k], g.half_width(), g.dx(1), g.n_cells(1));
        h(i, j) += 1.0;
    }
    if (bandwidth_sigma > 0.0) h = gaussian_filter(h, bandwidth_sigma);
    return Density2D::normalized(std::move(h));
}

Density2D density_from_image(const GrayImage& img, const Grid2D& g, double smoothing_sigma,
                             bool invert) {
    require(img.width > 0 && img.height > 0, "density_from_image: empty image");
    require(smoothing_sigma >= 0.0, "density_from_image: sigma must be nonnegative");

    // Bilinear resample. Column c spans x1 in [-a, a]; row r spans x2 from
    // +a (top row) down to -a.
    const double a = g.half_width();
    ScalarField2D f(g);
    for (int i = 0; i < g.n_cells(0); ++i) {
        const double u = (g.center(0, i) + a) / g.length() * (img.width - 1);
        const int c0 = std::min(static_cast<int>(std::floor(u)), img.width - 2);
        const double wu = std::clamp(u - c0, 0.0, 1.0);
        for (int j = 0; j < g.n_cells(1); ++j) {
            const double v = (a - g.center(1, j)) / g.length() * (img.height - 1);
            const int r0 = std::min(static_cast<int>(std::floor(v)), img.height - 2);
            const double wv = std::clamp(v - r0, 0.0, 1.0);
            double s = (1 - wu) * (1 - wv) * img.at(r0, c0) +
                       wu * (1 - wv) * img.at(r0, c0 + 1) +
                       (1 - wu) * wv * img.at(r0 + 1, c0) +
                       wu * wv * img.at(r0 + 1, c0 + 1);
            if (invert) s = 1.0 - s;
            f(i, j) = s;
        }
    }
    if (smoothing_sigma > 0.0) f = gaussian_filter(f, smoothing_sigma);

    double mn = f[0];
    for (double x : f.values()) mn = std::min(mn, x);
    if (mn < 0.0)
        for (double& x : f.data()) x -= mn;

    double total = 0.0;
    for (double x : f.values()) total += x;
    if (total <= 0.0)
        throw std::invalid_argument("density_from_image: image is zero after processing");
    return Density2D::normalized(std::move(f));
}

Reference1D::Reference1D(const Grid1D& g, std::optional<Density1D> fixed_profile, double kappa,
                         double mu0, double mu_rate)
    : grid_(g), fixed_(std::move(fixed_profile)), kappa_(kappa), mu0_(mu0), mu_rate_(mu_rate) {
    const Density1D p0 = profile(0.0);
    sup_d1_ = sup_norm(gradient(p0.field()));
    sup_d2_ = sup_norm(second_derivative(p0.field()));
}

Reference1D Reference1D::fixed(Density1D profile) {
    const Grid1D& g = profile.grid();
    return Reference1D(g, std::move(profile), 0.0, 0.0, 0.0);
}

Reference1D Reference1D::moving_von_mises(double kappa, double mu0, double mu_rate,
                                          const Grid1D& g) {
    return Reference1D(g, std::nullopt, kappa, mu0, mu_rate);
}

Density1D Reference1D::profile(double t) const {
    if (fixed_) return *fixed_;
    return von_mises_1d(kappa_, mu0_ + mu_rate_ * t, grid_);
}

ScalarField1D Reference1D::time_derivative(double t) const {
    if (!time_varying()) return ScalarField1D(grid_);
    // rigid translation: d/dt rho(x - mu(t)) = -mu_rate * d/dx rho
    ScalarField1D d = gradient(profile(t).field());
    for (double& v : d.data()) v *= -mu_rate_;
    return d;
}

Reference2D::Reference2D(Density2D p) : profile_(std::move(p)) {
    for (int axis = 0; axis < 2; ++axis) {
        sup_d1_[axis] = sup_norm(derivative(profile_.field(), axis));
        sup_d2_[axis] = sup_norm(second_derivative(profile_.field(), axis));
    }
}

Reference2D Reference2D::fixed(Density2D profile) { return Reference2D(std::move(profile)); }

}  // namespace densctl
