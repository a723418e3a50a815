#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "densctl/control.hpp"
#include "densctl/density.hpp"
#include "densctl/field.hpp"
#include "densctl/metrics.hpp"
#include "densctl/rng.hpp"

namespace densctl {

// --- drift models ---

struct NoDrift {};

/// State-independent per-agent frequency, drawn once from U(-k_dist, k_dist).
struct OscillatorDrift {
    double k_dist = 0.0;
};

/// Spacing-based speed on the ring in the inertialess (zero relaxation
/// time) limit: g_i = v_opt(gap to the next vehicle), and the applied
/// velocity g_i + u_i saturates to [0, v_max].
/// delta_s <= 0 selects the mean gap, circumference / N.
struct TrafficDrift {
    double v_max = 0.0;
    double delta_s = 0.0;
    double beta = 0.0;
};

/// Gradient of a two-Gaussian hill potential with peaks at (pi/2, pi/2) and
/// (-pi/2, -pi/2).
struct TerrainDrift {
    double h1 = 0.0;
    double h2 = 0.0;
};

using DriftModel1D = std::variant<NoDrift, OscillatorDrift, TrafficDrift>;
using DriftModel2D = std::variant<NoDrift, TerrainDrift>;

double optimal_velocity(double spacing, double v_max, double delta_s, double beta);

/// Ring-sorted successor gaps; requires at least two agents.
std::vector<double> traffic_spacings(std::span<const double> positions, double half_width);
std::vector<double> traffic_drift(std::span<const double> positions, double half_width,
                                  const TrafficDrift& model);

/// Analytic terrain gradient at one point.
void terrain_gradient(double x1, double x2, const TerrainDrift& model, double& g1, double& g2);

// --- populations ---

struct AgentPopulation1D {
    std::vector<double> x;
    std::vector<double> omega;  // oscillator frequencies; empty otherwise
};

struct AgentPopulation2D {
    std::vector<double> x1, x2;
};

/// Positions drawn uniformly over the domain from the init stream.
AgentPopulation1D init_population_1d(int n_agents, const Grid1D& g, const CounterRng& rng,
                                     const DriftModel1D& drift);
AgentPopulation2D init_population_2d(int n_agents, const Grid2D& g, const CounterRng& rng);

/// Linear (bilinear in 2D) interpolation of a cell-centered field at agent
/// positions; periodic wrap or clamped at reflective boundaries.
std::vector<double> sample_velocity(const ScalarField1D& u, std::span<const double> positions);
void sample_velocity(const VectorField2D& u, std::span<const double> x1,
                     std::span<const double> x2, std::vector<double>& u1,
                     std::vector<double>& u2);

struct StepOptions {
    double diffusion = 0.0;
    std::optional<std::pair<double, double>> velocity_clip;  // traffic saturation
};

/// Euler-Maruyama update x += (u + g) dt + sqrt(2 D dt) xi, then wrap or
/// reflect back into the domain. Drift values are per-agent.
void step_agents_1d(AgentPopulation1D& pop, std::span<const double> drift,
                    std::span<const double> control, const Grid1D& g, double dt,
                    const CounterRng& rng, std::uint64_t step_index, const StepOptions& opt);
void step_agents_2d(AgentPopulation2D& pop, std::span<const double> drift1,
                    std::span<const double> drift2, std::span<const double> control1,
                    std::span<const double> control2, const Grid2D& g, double dt,
                    const CounterRng& rng, std::uint64_t step_index, const StepOptions& opt);

// --- closed-loop drivers ---

struct MicroRunConfig {
    ControlGains gains;
    DriftBound k;
    double diffusion = 0.0;
    int n_agents = 1000;
    double bandwidth_sigma = -1.0;  // <= 0 -> 2 dx
    double dt = 1e-4;
    double t_final = 0.1;
    std::uint64_t seed = 1;
    int metrics_every = 10;
    int snapshots_every = 0;  // 0 -> none
};

struct Snapshot {
    double t;
    std::vector<double> x1, x2;  // x2 empty in 1D
};

struct MicroRunResult {
    MetricsTable metrics;
    std::vector<Snapshot> snapshots;
    std::vector<double> final_density;
    std::vector<double> final_x1, final_x2;
    std::vector<double> max_abs_drift;  // per axis, over the whole run
    double gain_floor = 0.0;
    long containment_violations = 0;
};

MicroRunResult run_closed_loop_micro(const Reference1D& ref, const DriftModel1D& drift,
                                     const MicroRunConfig& cfg);
MicroRunResult run_closed_loop_micro(const Reference2D& ref, const DriftModel2D& drift,
                                     const MicroRunConfig& cfg);

}  // namespace densctl
