#pragma once

#include <string>
#include <vector>

#include "densctl/control.hpp"
#include "densctl/density.hpp"
#include "densctl/field.hpp"
#include "densctl/metrics.hpp"
#include "densctl/poisson.hpp"

namespace densctl {

/// Side of the bounding dynamics: the unknown drift replaced by +K (upper)
/// or -K (lower) on every axis.
enum class BoundingSide { Upper, Lower };

inline double bounding_sign(BoundingSide s) { return s == BoundingSide::Upper ? 1.0 : -1.0; }

/// Numerical viscosity of the advective face flux.
enum class AdvectionViscosity {
    /// max(|v_L|, |v_R|) per face: local wave speed (default).
    LocalWaveSpeed,
    /// dx/(2 dt) (dx/(4 dt) in 2D): the classical fixed-coefficient form.
    /// Over-diffusive at small CFL; kept for comparison studies.
    FixedCoefficient,
};

/// Operator splitting of advection and diffusion in the 2D step.
enum class SplittingScheme {
    Lie,     // advection, then diffusion (first order)
    Strang,  // half diffusion, advection, half diffusion (second order)
};

struct CflReport {
    double advective = 0.0;
    double advective_limit = 1.0;
    double diffusive = 0.0;
    double diffusive_limit = 0.5;

    bool ok() const { return advective <= advective_limit && diffusive <= diffusive_limit; }
    std::string describe() const;
};

class CflViolation : public std::runtime_error {
public:
    explicit CflViolation(const CflReport& r) : std::runtime_error(r.describe()), report(r) {}
    CflReport report;
};

/// Bounding-system state: the density evolved by
///   rho_t + div(rho (U + sign * K)) = D lap(rho)
/// under zero-flux boundary handling.
struct MacroState1D {
    ScalarField1D rho_hat;
    double t = 0.0;
    BoundingSide side = BoundingSide::Upper;
    DriftBound k;
    double diffusion = 0.0;
};

struct MacroState2D {
    ScalarField2D rho_hat;
    double t = 0.0;
    BoundingSide side = BoundingSide::Upper;
    DriftBound k;
    double diffusion = 0.0;
};

CflReport cfl_report_1d(const MacroState1D& s, const ScalarField1D& velocity, double dt);
CflReport cfl_report_2d(const MacroState2D& s, const VectorField2D& velocity, double dt);

/// One finite-volume step: advective face fluxes with the configured
/// viscosity plus explicit centered diffusion, boundary faces wrapped
/// (periodic) or zeroed (reflective). Throws CflViolation when the report
/// fails.
MacroState1D step_macro_1d(const MacroState1D& s, const ScalarField1D& velocity, double dt,
                           AdvectionViscosity visc = AdvectionViscosity::LocalWaveSpeed);

/// Finite-volume advection composed with Crank-Nicolson diffusion (factored
/// into per-axis tridiagonal solves), sequenced per the splitting scheme.
MacroState2D step_macro_2d(const MacroState2D& s, const VectorField2D& velocity, double dt,
                           AdvectionViscosity visc = AdvectionViscosity::LocalWaveSpeed,
                           SplittingScheme splitting = SplittingScheme::Lie);

// --- closed-loop drivers ---

struct MacroRunConfig {
    ControlGains gains;
    DriftBound k;
    double diffusion = 0.0;
    BoundingSide side = BoundingSide::Upper;
    double dt = 1e-4;
    double t_final = 0.1;
    int metrics_every = 10;
    AdvectionViscosity viscosity = AdvectionViscosity::LocalWaveSpeed;
    SplittingScheme splitting = SplittingScheme::Lie;  // 2D only
};

struct MacroRunResult {
    MetricsTable metrics;
    std::vector<double> final_density;
    double gain_floor = 0.0;
    double min_density = 0.0;  // over every step; scheme positivity indicator
};

MacroRunResult run_closed_loop_macro(const Reference1D& ref, const Density1D& initial,
                                     const MacroRunConfig& cfg);
MacroRunResult run_closed_loop_macro(const Reference2D& ref, const Density2D& initial,
                                     const MacroRunConfig& cfg);

}  // namespace densctl
