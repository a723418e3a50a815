#include "densctl/poisson.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace densctl {

namespace {

// out (m x c) = M (m x r) * F (r x c)
void mul_axis0(const double* M, int m, int r, int c, const double* F, double* out) {
    for (int h = 0; h < m; ++h) {
        double* row = out + static_cast<std::size_t>(h) * c;
        for (int j = 0; j < c; ++j) row[j] = 0.0;
        for (int i = 0; i < r; ++i) {
            const double a = M[static_cast<std::size_t>(h) * r + i];
            if (a == 0.0) continue;
            const double* src = F + static_cast<std::size_t>(i) * c;
            for (int j = 0; j < c; ++j) row[j] += a * src[j];
        }
    }
}

// out (r x m) = F (r x c) * M^T, with M (m x c): out[i][k] = sum_j F[i][j] M[k][j]
void mul_axis1(const double* M, int m, int c, int r, const double* F, double* out) {
    for (int i = 0; i < r; ++i) {
        const double* src = F + static_cast<std::size_t>(i) * c;
        double* row = out + static_cast<std::size_t>(i) * m;
        for (int k = 0; k < m; ++k) {
            const double* mk = M + static_cast<std::size_t>(k) * c;
            double s = 0.0;
            for (int j = 0; j < c; ++j) s += src[j] * mk[j];
            row[k] = s;
        }
    }
}

using Plane = std::vector<double>;

}  // namespace

struct SpectralPoisson2D::AxisTables {
    int n = 0;
    double length = 0.0;
    // forward rows [h][j] (orthogonality weights included), evaluation rows [j][h]
    Plane cos_f, sin_f, cos_e, sin_e;
    Plane deriv;      // derivative magnitude per mode (periodic: Nyquist zeroed)
    Plane lam;        // eigenvalue of -d^2/dx^2 per mode
    Plane edge_sin;   // reflective: sin(u_h * x~) at x~ = 0 and L, interleaved lo/hi

    AxisTables(int n_, double length_, BoundaryKind bc) : n(n_), length(length_) {
        const double pi = std::numbers::pi;
        cos_f.resize(static_cast<std::size_t>(n) * n);
        sin_f.resize(static_cast<std::size_t>(n) * n);
        cos_e.resize(static_cast<std::size_t>(n) * n);
        sin_e.resize(static_cast<std::size_t>(n) * n);
        deriv.resize(n);
        lam.resize(n);
        if (bc == BoundaryKind::Reflective) {
            edge_sin.resize(2 * static_cast<std::size_t>(n));
            for (int h = 0; h < n; ++h) {
                const double u = h * pi / length;
                deriv[h] = u;
                lam[h] = u * u;
                const double wf = (h == 0 ? 1.0 : 2.0) / n;
                for (int j = 0; j < n; ++j) {
                    const double th = pi * h * (j + 0.5) / n;
                    cos_f[static_cast<std::size_t>(h) * n + j] = wf * std::cos(th);
                    sin_f[static_cast<std::size_t>(h) * n + j] = (2.0 / n) * std::sin(th);
                    cos_e[static_cast<std::size_t>(j) * n + h] = std::cos(th);
                    sin_e[static_cast<std::size_t>(j) * n + h] = std::sin(th);
                }
                edge_sin[2 * h] = std::sin(0.0);
                edge_sin[2 * h + 1] = std::sin(h * pi);
            }
            // h = 0 sine rows carry no information
            for (int j = 0; j < n; ++j) sin_f[j] = 0.0;
        } else {
            for (int h = 0; h < n; ++h) {
                const int signed_h = h <= n / 2 ? h : h - n;
                const double nu = 2.0 * pi * signed_h / length;
                lam[h] = nu * nu;
                // the cosine Nyquist wave vanishes at the half-shifted
                // centers, so its derivative contribution is exactly zero
                deriv[h] = (2 * h == n) ? 0.0 : nu;
                for (int j = 0; j < n; ++j) {
                    const double th = 2.0 * pi * h * (j + 0.5) / n;
                    cos_f[static_cast<std::size_t>(h) * n + j] = std::cos(th) / n;
                    sin_f[static_cast<std::size_t>(h) * n + j] = std::sin(th) / n;
                    cos_e[static_cast<std::size_t>(j) * n + h] = std::cos(th);
                    sin_e[static_cast<std::size_t>(j) * n + h] = std::sin(th);
                }
            }
        }
    }
};

SpectralPoisson2D::SpectralPoisson2D(const Grid2D& g) : grid_(&g) {
    axes_.reserve(2);
    axes_.emplace_back(g.n_cells(0), g.length(), g.boundary());
    axes_.emplace_back(g.n_cells(1), g.length(), g.boundary());
}

SpectralPoisson2D::~SpectralPoisson2D() = default;
SpectralPoisson2D::SpectralPoisson2D(SpectralPoisson2D&&) noexcept = default;
SpectralPoisson2D& SpectralPoisson2D::operator=(SpectralPoisson2D&&) noexcept = default;

SpectralCoeffs SpectralPoisson2D::forward(const ScalarField2D& f) const {
    require(&f.grid() == grid_, "spectral forward: field from another grid");
    const auto& a0 = axes_[0];
    const auto& a1 = axes_[1];
    const int n1 = a0.n, n2 = a1.n;
    SpectralCoeffs c;
    c.basis = grid_->boundary();
    c.n1 = n1;
    c.n2 = n2;
    c.re.resize(static_cast<std::size_t>(n1) * n2);
    if (grid_->boundary() == BoundaryKind::Reflective) {
        Plane tmp(c.re.size());
        mul_axis0(a0.cos_f.data(), n1, n1, n2, f.values().data(), tmp.data());
        mul_axis1(a1.cos_f.data(), n2, n2, n1, tmp.data(), c.re.data());
    } else {
        c.im.resize(c.re.size());
        Plane are(c.re.size()), aim(c.re.size()), t1(c.re.size()), t2(c.re.size());
        mul_axis0(a0.cos_f.data(), n1, n1, n2, f.values().data(), are.data());
        mul_axis0(a0.sin_f.data(), n1, n1, n2, f.values().data(), aim.data());
        for (double& v : aim) v = -v;
        // (are + i aim) * (cos - i sin) along axis 1
        mul_axis1(a1.cos_f.data(), n2, n2, n1, are.data(), t1.data());
        mul_axis1(a1.sin_f.data(), n2, n2, n1, aim.data(), t2.data());
        for (std::size_t k = 0; k < c.re.size(); ++k) c.re[k] = t1[k] + t2[k];
        mul_axis1(a1.cos_f.data(), n2, n2, n1, aim.data(), t1.data());
        mul_axis1(a1.sin_f.data(), n2, n2, n1, are.data(), t2.data());
        for (std::size_t k = 0; k < c.re.size(); ++k) c.im[k] = t1[k] - t2[k];
    }
    return c;
}

ScalarField2D SpectralPoisson2D::inverse(const SpectralCoeffs& c) const {
    require(c.basis == grid_->boundary() && c.n1 == axes_[0].n && c.n2 == axes_[1].n,
            "spectral inverse: coefficient layout does not match the grid");
    const auto& a0 = axes_[0];
    const auto& a1 = axes_[1];
    const int n1 = a0.n, n2 = a1.n;
    ScalarField2D out(*grid_);
    if (c.basis == BoundaryKind::Reflective) {
        Plane tmp(c.re.size());
        mul_axis1(a1.cos_e.data(), n2, n2, n1, c.re.data(), tmp.data());
        mul_axis0(a0.cos_e.data(), n1, n1, n2, tmp.data(), out.data().data());
    } else {
        Plane gre(c.re.size()), gim(c.re.size()), t1(c.re.size()), t2(c.re.size());
        // (re + i im) * (cos + i sin) along axis 1
        mul_axis1(a1.cos_e.data(), n2, n2, n1, c.re.data(), t1.data());
        mul_axis1(a1.sin_e.data(), n2, n2, n1, c.im.data(), t2.data());
        for (std::size_t k = 0; k < gre.size(); ++k) gre[k] = t1[k] - t2[k];
        mul_axis1(a1.cos_e.data(), n2, n2, n1, c.im.data(), t1.data());
        mul_axis1(a1.sin_e.data(), n2, n2, n1, c.re.data(), t2.data());
        for (std::size_t k = 0; k < gim.size(); ++k) gim[k] = t1[k] + t2[k];
        // real part of (gre + i gim) * (cos + i sin) along axis 0
        Plane u1(c.re.size()), u2(c.re.size());
        mul_axis0(a0.cos_e.data(), n1, n1, n2, gre.data(), u1.data());
        mul_axis0(a0.sin_e.data(), n1, n1, n2, gim.data(), u2.data());
        for (std::size_t k = 0; k < u1.size(); ++k) out.data()[k] = u1[k] - u2[k];
    }
    return out;
}

SpectralCoeffs SpectralPoisson2D::solve_coeffs(const ScalarField2D& q, bool strict) const {
    SpectralCoeffs c = forward(q);
    const double mean = c.re[0];
    const double total = mean * grid_->area();
    if (std::abs(total) > kCompatTol) {
        if (strict)
            throw CompatibilityError(
                "solve_poisson: source integral violates the compatibility condition");
        if (!warned_) {
            std::cerr << "densctl: poisson source integral " << total
                      << " exceeds tolerance; subtracting mean\n";
            warned_ = true;
        }
    }
    const auto& l0 = axes_[0].lam;
    const auto& l1 = axes_[1].lam;
    const bool complex = !c.im.empty();
    for (int h = 0; h < c.n1; ++h) {
        for (int k = 0; k < c.n2; ++k) {
            const std::size_t idx = static_cast<std::size_t>(h) * c.n2 + k;
            const double lam = l0[h] + l1[k];
            const double inv = (h == 0 && k == 0) ? 0.0 : 1.0 / lam;
            c.re[idx] *= inv;
            if (complex) c.im[idx] *= inv;
        }
    }
    return c;
}

ScalarField2D SpectralPoisson2D::solve(const ScalarField2D& q, bool strict) const {
    return inverse(solve_coeffs(q, strict));
}

namespace {

// scale coefficient plane rows (axis 0) or columns (axis 1) by a factor table
void scale_axis0(Plane& p, const Plane& fac, int n1, int n2) {
    for (int h = 0; h < n1; ++h)
        for (int k = 0; k < n2; ++k) p[static_cast<std::size_t>(h) * n2 + k] *= fac[h];
}
void scale_axis1(Plane& p, const Plane& fac, int n1, int n2) {
    for (int h = 0; h < n1; ++h)
        for (int k = 0; k < n2; ++k) p[static_cast<std::size_t>(h) * n2 + k] *= fac[k];
}

}  // namespace

VectorField2D SpectralPoisson2D::flux_from_potential(const ScalarField2D& xi) const {
    const SpectralCoeffs c = forward(xi);
    const auto& a0 = axes_[0];
    const auto& a1 = axes_[1];
    const int n1 = a0.n, n2 = a1.n;
    VectorField2D phi(*grid_);
    if (c.basis == BoundaryKind::Reflective) {
        // Phi_1 = sum a_hk u_h sin(u_h x1~) cos(u_k x2~); Phi_2 symmetric
        Plane b = c.re, tmp(c.re.size());
        scale_axis0(b, a0.deriv, n1, n2);
        mul_axis1(a1.cos_e.data(), n2, n2, n1, b.data(), tmp.data());
        mul_axis0(a0.sin_e.data(), n1, n1, n2, tmp.data(), phi.component(0).data().data());
        b = c.re;
        scale_axis1(b, a1.deriv, n1, n2);
        mul_axis1(a1.sin_e.data(), n2, n2, n1, b.data(), tmp.data());
        mul_axis0(a0.cos_e.data(), n1, n1, n2, tmp.data(), phi.component(1).data().data());
    } else {
        // Phi_axis = inverse of -(i nu) * xi_hat
        for (int axis = 0; axis < 2; ++axis) {
            SpectralCoeffs d = c;
            const Plane& nu = axes_[axis].deriv;
            for (int h = 0; h < n1; ++h)
                for (int k = 0; k < n2; ++k) {
                    const std::size_t idx = static_cast<std::size_t>(h) * n2 + k;
                    const double f = axis == 0 ? nu[h] : nu[k];
                    const double re = d.re[idx], im = d.im[idx];
                    d.re[idx] = f * im;
                    d.im[idx] = -f * re;
                }
            phi.component(axis) = inverse(d);
        }
    }
    return phi;
}

VectorField2D SpectralPoisson2D::solve_flux(const ScalarField2D& q, bool strict) const {
    const SpectralCoeffs xi = solve_coeffs(q, strict);
    // same evaluation as flux_from_potential, starting from coefficients
    const auto& a0 = axes_[0];
    const auto& a1 = axes_[1];
    const int n1 = a0.n, n2 = a1.n;
    VectorField2D phi(*grid_);
    if (xi.basis == BoundaryKind::Reflective) {
        Plane b = xi.re, tmp(xi.re.size());
        scale_axis0(b, a0.deriv, n1, n2);
        mul_axis1(a1.cos_e.data(), n2, n2, n1, b.data(), tmp.data());
        mul_axis0(a0.sin_e.data(), n1, n1, n2, tmp.data(), phi.component(0).data().data());
        b = xi.re;
        scale_axis1(b, a1.deriv, n1, n2);
        mul_axis1(a1.sin_e.data(), n2, n2, n1, b.data(), tmp.data());
        mul_axis0(a0.cos_e.data(), n1, n1, n2, tmp.data(), phi.component(1).data().data());
    } else {
        for (int axis = 0; axis < 2; ++axis) {
            SpectralCoeffs d = xi;
            const Plane& nu = axes_[axis].deriv;
            for (int h = 0; h < n1; ++h)
                for (int k = 0; k < n2; ++k) {
                    const std::size_t idx = static_cast<std::size_t>(h) * n2 + k;
                    const double f = axis == 0 ? nu[h] : nu[k];
                    const double re = d.re[idx], im = d.im[idx];
                    d.re[idx] = f * im;
                    d.im[idx] = -f * re;
                }
            phi.component(axis) = inverse(d);
        }
    }
    return phi;
}

ScalarField2D SpectralPoisson2D::residual_curl(const VectorField2D& phi) const {
    require(&phi.grid() == grid_, "residual_curl: field from another grid");
    const auto& a0 = axes_[0];
    const auto& a1 = axes_[1];
    const int n1 = a0.n, n2 = a1.n;
    const std::size_t sz = static_cast<std::size_t>(n1) * n2;
    ScalarField2D out(*grid_);
    if (grid_->boundary() == BoundaryKind::Reflective) {
        // d1 Phi2: Phi2 is cos (x) sin shaped -> coefficients via cos/sin forward
        Plane t(sz), b2(sz), b1(sz);
        mul_axis0(a0.cos_f.data(), n1, n1, n2, phi.component(1).values().data(), t.data());
        mul_axis1(a1.sin_f.data(), n2, n2, n1, t.data(), b2.data());
        for (int h = 0; h < n1; ++h)
            for (int k = 0; k < n2; ++k)
                b2[static_cast<std::size_t>(h) * n2 + k] *= -a0.deriv[h];
        // d2 Phi1: Phi1 is sin (x) cos shaped
        mul_axis0(a0.sin_f.data(), n1, n1, n2, phi.component(0).values().data(), t.data());
        mul_axis1(a1.cos_f.data(), n2, n2, n1, t.data(), b1.data());
        for (int h = 0; h < n1; ++h)
            for (int k = 0; k < n2; ++k)
                b1[static_cast<std::size_t>(h) * n2 + k] *= -a1.deriv[k];
        for (std::size_t k = 0; k < sz; ++k) b2[k] -= b1[k];
        // evaluate the sin (x) sin difference
        mul_axis1(a1.sin_e.data(), n2, n2, n1, b2.data(), t.data());
        mul_axis0(a0.sin_e.data(), n1, n1, n2, t.data(), out.data().data());
    } else {
        SpectralCoeffs c2 = forward(phi.component(1));
        SpectralCoeffs c1 = forward(phi.component(0));
        SpectralCoeffs d;
        d.basis = BoundaryKind::Periodic;
        d.n1 = n1;
        d.n2 = n2;
        d.re.resize(sz);
        d.im.resize(sz);
        for (int h = 0; h < n1; ++h)
            for (int k = 0; k < n2; ++k) {
                const std::size_t idx = static_cast<std::size_t>(h) * n2 + k;
                // i nu_h * c2 - i nu_k * c1
                d.re[idx] = -a0.deriv[h] * c2.im[idx] + a1.deriv[k] * c1.im[idx];
                d.im[idx] = a0.deriv[h] * c2.re[idx] - a1.deriv[k] * c1.re[idx];
            }
        out = inverse(d);
    }
    return out;
}

double SpectralPoisson2D::boundary_net_flux(const VectorField2D& phi) const {
    require(&phi.grid() == grid_, "boundary_net_flux: field from another grid");
    const auto& a0 = axes_[0];
    const auto& a1 = axes_[1];
    const int n1 = a0.n, n2 = a1.n;
    const std::size_t sz = static_cast<std::size_t>(n1) * n2;
    double net = 0.0;

    if (grid_->boundary() == BoundaryKind::Reflective) {
        // normal component along x1 edges from the sin (x) cos coefficients
        Plane t(sz), b1(sz), b2(sz);
        mul_axis0(a0.sin_f.data(), n1, n1, n2, phi.component(0).values().data(), t.data());
        mul_axis1(a1.cos_f.data(), n2, n2, n1, t.data(), b1.data());
        for (int j = 0; j < n2; ++j) {
            double lo = 0.0, hi = 0.0;
            for (int h = 0; h < n1; ++h)
                for (int k = 0; k < n2; ++k) {
                    const double ck = a1.cos_e[static_cast<std::size_t>(j) * n2 + k];
                    const double v = b1[static_cast<std::size_t>(h) * n2 + k] * ck;
                    lo += v * a0.edge_sin[2 * h];
                    hi += v * a0.edge_sin[2 * h + 1];
                }
            net += (hi - lo) * grid_->dx(1);
        }
        mul_axis0(a0.cos_f.data(), n1, n1, n2, phi.component(1).values().data(), t.data());
        mul_axis1(a1.sin_f.data(), n2, n2, n1, t.data(), b2.data());
        for (int i = 0; i < n1; ++i) {
            double lo = 0.0, hi = 0.0;
            for (int h = 0; h < n1; ++h)
                for (int k = 0; k < n2; ++k) {
                    const double ch = a0.cos_e[static_cast<std::size_t>(i) * n1 + h];
                    const double v = b2[static_cast<std::size_t>(h) * n2 + k] * ch;
                    lo += v * a1.edge_sin[2 * k];
                    hi += v * a1.edge_sin[2 * k + 1];
                }
            net += (hi - lo) * grid_->dx(0);
        }
        return net;
    }

    // periodic: evaluate each component's series at the two opposite edges
    for (int axis = 0; axis < 2; ++axis) {
        const SpectralCoeffs c = forward(phi.component(axis));
        const auto& an = axes_[axis];
        const auto& at = axes_[1 - axis];
        const int nn = an.n, nt = at.n;
        // phases at x~ = 0 and x~ = L along the normal axis
        for (int jt = 0; jt < nt; ++jt) {
            double lo = 0.0, hi = 0.0;
            for (int hn = 0; hn < nn; ++hn)
                for (int kt = 0; kt < nt; ++kt) {
                    const std::size_t idx =
                        axis == 0 ? static_cast<std::size_t>(hn) * nt + kt
                                  : static_cast<std::size_t>(kt) * nn + hn;
                    const double pre = c.re[idx], pim = c.im[idx];
                    const double ct = at.cos_e[static_cast<std::size_t>(jt) * nt + kt];
                    const double st = at.sin_e[static_cast<std::size_t>(jt) * nt + kt];
                    // Re[(pre + i pim) (cos + i sin)_normal (cos + i sin)_transverse]
                    const double theta_hi = 2.0 * std::numbers::pi * hn;
                    const double cn_lo = 1.0, sn_lo = 0.0;
                    const double cn_hi = std::cos(theta_hi), sn_hi = std::sin(theta_hi);
                    const double re_t = pre * ct - pim * st;
                    const double im_t = pre * st + pim * ct;
                    lo += re_t * cn_lo - im_t * sn_lo;
                    hi += re_t * cn_hi - im_t * sn_hi;
                }
            net += (hi - lo) * grid_->dx(1 - axis);
        }
    }
    return net;
}

SpectralCoeffs cosine_transform_2d(const ScalarField2D& f) {
    require(f.grid().boundary() == BoundaryKind::Reflective,
            "cosine_transform_2d: reflective grid required");
    return SpectralPoisson2D(f.grid()).forward(f);
}

ScalarField2D inverse_cosine_transform_2d(const SpectralCoeffs& c, const Grid2D& g) {
    require(g.boundary() == BoundaryKind::Reflective,
            "inverse_cosine_transform_2d: reflective grid required");
    return SpectralPoisson2D(g).inverse(c);
}

ScalarField2D solve_poisson(const ScalarField2D& q, bool strict) {
    return SpectralPoisson2D(q.grid()).solve(q, strict);
}

VectorField2D flux_from_potential(const ScalarField2D& xi) {
    return SpectralPoisson2D(xi.grid()).flux_from_potential(xi);
}

}  // namespace densctl
