#include "densctl/control.hpp"

#include <cmath>

namespace densctl {

ScalarField1D error_field(const Density1D& rho_d, const Density1D& rho) {
    require(same_grid(rho_d.field(), rho.field()), "error_field: grid mismatch");
    ScalarField1D e(rho_d.grid());
    for (int j = 0; j < e.size(); ++j) e[j] = rho_d[j] - rho.field()[j];
    return e;
}

ScalarField2D error_field(const Density2D& rho_d, const Density2D& rho) {
    require(same_grid(rho_d.field(), rho.field()), "error_field: grid mismatch");
    ScalarField2D e(rho_d.grid());
    for (std::size_t k = 0; k < e.values().size(); ++k)
        e[k] = rho_d.field()[k] - rho.field()[k];
    return e;
}

double switching_gain_floor(const Reference1D& ref, double diffusion, const DriftBound& k) {
    k.validate(1);
    return k[0] * ref.sup_gradient() + diffusion * ref.sup_second_derivative();
}

double switching_gain_floor(const Reference2D& ref, double diffusion, const DriftBound& k) {
    k.validate(2);
    double a = 0.0;
    for (int axis = 0; axis < 2; ++axis)
        a += k[axis] * ref.sup_gradient(axis) + diffusion * ref.sup_second_derivative(axis);
    return a;
}

double switching_gain(const ControlGains& gains, double gain_floor, const DriftBound& k,
                      const ScalarField1D& e) {
    require(gain_floor >= 0.0, "switching_gain: negative gain floor");
    double ks = gains.ks_safety * gain_floor;
    if (gains.ks_mode == SwitchingGainMode::Dynamic) ks += k[0] * sup_norm(gradient(e));
    return ks;
}

double switching_gain(const ControlGains& gains, double gain_floor, const DriftBound& k,
                      const ScalarField2D& e) {
    require(gain_floor >= 0.0, "switching_gain: negative gain floor");
    double ks = gains.ks_safety * gain_floor;
    if (gains.ks_mode == SwitchingGainMode::Dynamic)
        for (int axis = 0; axis < 2; ++axis) ks += k[axis] * sup_norm(derivative(e, axis));
    return ks;
}

namespace {
template <class Field>
Field tanh_map(const Field& e, double epsilon) {
    require(epsilon > 0.0, "regularized_sign: epsilon must be positive");
    Field out = e;
    for (double& v : out.data()) v = std::tanh(v / epsilon);
    return out;
}
}  // namespace

ScalarField1D regularized_sign(const ScalarField1D& e, double epsilon) {
    return tanh_map(e, epsilon);
}
ScalarField2D regularized_sign(const ScalarField2D& e, double epsilon) {
    return tanh_map(e, epsilon);
}

double alpha_periodic(double k_s, const ScalarField1D& sgn_e) {
    require(sgn_e.grid().boundary() == BoundaryKind::Periodic,
            "alpha_periodic: periodic grid required");
    return k_s / sgn_e.grid().length() * integrate(sgn_e);
}

double alpha_periodic(double k_s, const ScalarField2D& sgn_e) {
    require(sgn_e.grid().boundary() == BoundaryKind::Periodic,
            "alpha_periodic: periodic grid required");
    return alpha_mean_free(k_s, sgn_e);
}

double alpha_mean_free(double k_s, const ScalarField2D& sgn_e) {
    return k_s / sgn_e.grid().area() * integrate(sgn_e);
}

namespace {
// Face values by linear extrapolation from the two nearest cell centers;
// exact for affine fields, second order otherwise.
inline double left_face(const ScalarField1D& f) { return 1.5 * f[0] - 0.5 * f[1]; }
inline double right_face(const ScalarField1D& f) {
    const int n = f.size();
    return 1.5 * f[n - 1] - 0.5 * f[n - 2];
}
}  // namespace

FluxBoundaryTerms alpha_b_reflective(const ScalarField1D& antiderivative) {
    require(antiderivative.grid().boundary() == BoundaryKind::Reflective,
            "alpha_b_reflective: reflective grid required");
    const double a = antiderivative.grid().half_width();
    const double g_lo = left_face(antiderivative);
    const double g_hi = right_face(antiderivative);
    return {(g_lo - g_hi) / (2.0 * a), -(g_lo + g_hi) / 2.0};
}

namespace {
template <class Field>
Field source_impl(const Field& e, const ControlGains& gains, double k_s, double alpha,
                  const Field* feedforward) {
    gains.validate();
    if (feedforward)
        require(same_grid(e, *feedforward), "control_source: feedforward grid mismatch");
    Field q = e;
    for (std::size_t k = 0; k < q.values().size(); ++k) {
        const double ev = e.values()[k];
        double v = -gains.k_p * ev - k_s * std::tanh(ev / gains.epsilon) + alpha;
        if (feedforward) v -= feedforward->values()[k];
        q.data()[k] = v;
    }
    return q;
}
}  // namespace

ScalarField1D control_source(const ScalarField1D& e, const ControlGains& gains, double k_s,
                             double alpha, const ScalarField1D* feedforward) {
    return source_impl(e, gains, k_s, alpha, feedforward);
}
ScalarField2D control_source(const ScalarField2D& e, const ControlGains& gains, double k_s,
                             double alpha, const ScalarField2D* feedforward) {
    return source_impl(e, gains, k_s, alpha, feedforward);
}

ScalarField1D cumulative_integral(const ScalarField1D& q) {
    const double dx = q.grid().dx();
    ScalarField1D out(q.grid());
    double left_face_value = 0.0;  // running integral up to the left face of cell j
    for (int j = 0; j < q.size(); ++j) {
        out[j] = left_face_value + 0.5 * dx * q[j];
        left_face_value += dx * q[j];
    }
    return out;
}

Flux1D flux_from_q(const ScalarField1D& q, double compat_tol) {
    const Grid1D& g = q.grid();
    if (g.boundary() == BoundaryKind::Periodic) {
        if (std::abs(integrate(q)) > compat_tol)
            throw CompatibilityError("flux_from_q: source does not integrate to zero");
        return {cumulative_integral(q), {0.0, 0.0}};
    }
    ScalarField1D phi = cumulative_integral(q);
    const FluxBoundaryTerms terms = alpha_b_reflective(phi);
    for (int j = 0; j < phi.size(); ++j) phi[j] += terms.alpha * g.center(j) + terms.b;
    return {std::move(phi), terms};
}

ScalarField1D velocity_from_flux(const ScalarField1D& flux, const ScalarField1D& rho,
                                 double rho_floor) {
    require(same_grid(flux, rho), "velocity_from_flux: grid mismatch");
    require(rho_floor > 0.0, "velocity_from_flux: rho_floor must be positive");
    ScalarField1D u(flux.grid());
    for (int j = 0; j < u.size(); ++j) u[j] = flux[j] / std::max(rho[j], rho_floor);
    return u;
}

VectorField2D velocity_from_flux(const VectorField2D& flux, const ScalarField2D& rho,
                                 double rho_floor) {
    require(&flux.grid() == &rho.grid(), "velocity_from_flux: grid mismatch");
    require(rho_floor > 0.0, "velocity_from_flux: rho_floor must be positive");
    VectorField2D u(flux.grid());
    for (int axis = 0; axis < 2; ++axis)
        for (std::size_t k = 0; k < rho.values().size(); ++k)
            u.component(axis)[k] =
                flux.component(axis)[k] / std::max(rho.values()[k], rho_floor);
    return u;
}

}  // namespace densctl
