#pragma once

#include <stdexcept>
#include <vector>

#include "densctl/density.hpp"
#include "densctl/field.hpp"

namespace densctl {

enum class SwitchingGainMode {
    /// k_s = ks_safety * gain_floor; valid on periodic domains where the
    /// boundary terms vanish.
    StaticPeriodic,
    /// k_s(t) = ks_safety * gain_floor + sum_i K_i * sup|d_i e|, recomputed
    /// from the current error field.
    Dynamic,
};

struct ControlGains {
    double k_p = 1.0;          // proportional rate
    double ks_safety = 1.1;    // multiplier on the dominance bound, > 1
    double epsilon = 1e-4;     // width of the regularized sign
    SwitchingGainMode ks_mode = SwitchingGainMode::StaticPeriodic;
    double rho_floor = 0.0;    // density floor for velocity recovery; <= 0 -> 1e-6 / |domain|

    void validate() const {
        require(k_p > 0.0, "gains: k_p must be positive");
        require(ks_safety > 1.0, "gains: ks_safety must exceed 1");
        require(epsilon > 0.0, "gains: epsilon must be positive");
    }

    double resolved_rho_floor(double domain_volume) const {
        return rho_floor > 0.0 ? rho_floor : 1e-6 / domain_volume;
    }
};

/// Per-axis bound on the magnitude of the unknown drift.
struct DriftBound {
    std::vector<double> per_axis;

    void validate(int dimension) const {
        require(static_cast<int>(per_axis.size()) == dimension,
                "drift bound: one component per axis required");
        for (double k : per_axis) require(k >= 0.0, "drift bound: components must be nonnegative");
    }
    double operator[](int axis) const { return per_axis[axis]; }
};

class CompatibilityError : public std::runtime_error {
public:
    explicit CompatibilityError(const std::string& what) : std::runtime_error(what) {}
};

// --- error and gains ---

/// Pointwise rho_d - rho; integrates to zero since both carry unit mass.
ScalarField1D error_field(const Density1D& rho_d, const Density1D& rho);
ScalarField2D error_field(const Density2D& rho_d, const Density2D& rho);

/// Dominance bound the switching gain must exceed:
/// sum over axes of K_i * sup|d_i rho_d| + D * sup|d_i d_i rho_d|,
/// from the reference's cached discrete derivative sup norms.
double switching_gain_floor(const Reference1D& ref, double diffusion, const DriftBound& k);
double switching_gain_floor(const Reference2D& ref, double diffusion, const DriftBound& k);

double switching_gain(const ControlGains& gains, double gain_floor, const DriftBound& k,
                      const ScalarField1D& e);
double switching_gain(const ControlGains& gains, double gain_floor, const DriftBound& k,
                      const ScalarField2D& e);

/// Pointwise tanh(e / epsilon): odd, monotone, into [-1, 1].
ScalarField1D regularized_sign(const ScalarField1D& e, double epsilon);
ScalarField2D regularized_sign(const ScalarField2D& e, double epsilon);

/// Offset making the control source mean-free on a periodic domain:
/// alpha = (k_s / |domain|) * integral of the (regularized) sign field.
double alpha_periodic(double k_s, const ScalarField1D& sgn_e);
double alpha_periodic(double k_s, const ScalarField2D& sgn_e);

/// Same offset without the boundary-kind restriction: the 2D flux recovery
/// needs the source mean-free under either basis.
double alpha_mean_free(double k_s, const ScalarField2D& sgn_e);

struct FluxBoundaryTerms {
    double alpha = 0.0;  // linear-in-x source offset
    double b = 0.0;      // flux integration constant
};

/// Unique (alpha, B) zeroing the reconstructed flux at both faces of a
/// reflective 1D grid. `antiderivative` holds G at cell centers; face values
/// are obtained by second-order extrapolation.
FluxBoundaryTerms alpha_b_reflective(const ScalarField1D& antiderivative);

/// q = -k_p e - k_s sign_eps(e) + alpha, minus the reference time derivative
/// when tracking.
ScalarField1D control_source(const ScalarField1D& e, const ControlGains& gains, double k_s,
                             double alpha, const ScalarField1D* feedforward = nullptr);
ScalarField2D control_source(const ScalarField2D& e, const ControlGains& gains, double k_s,
                             double alpha, const ScalarField2D* feedforward = nullptr);

/// Cumulative midpoint integral from the left face to each cell center.
ScalarField1D cumulative_integral(const ScalarField1D& q);

struct Flux1D {
    ScalarField1D phi;
    FluxBoundaryTerms terms;
};

/// Recover the mass flux from the scalar source by spatial integration.
///
/// Periodic: `q` must already be mean-free within `compat_tol` (times the
/// domain scale of q) or a CompatibilityError is thrown; the integration
/// constant is fixed to zero. Reflective: `q` is the source *without* alpha;
/// alpha and B are solved so the flux vanishes at both faces.
Flux1D flux_from_q(const ScalarField1D& q, double compat_tol = 1e-8);

/// U = flux / max(rho, rho_floor).
ScalarField1D velocity_from_flux(const ScalarField1D& flux, const ScalarField1D& rho,
                                 double rho_floor);
VectorField2D velocity_from_flux(const VectorField2D& flux, const ScalarField2D& rho,
                                 double rho_floor);

}  // namespace densctl
