#include "densctl/micro.hpp"

#include "densctl/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace densctl {

double optimal_velocity(double spacing, double v_max, double delta_s, double beta) {
    require(spacing >= 0.0, "optimal_velocity: spacing must be nonnegative");
    require(delta_s > 0.0, "optimal_velocity: delta_s must be positive");
    return v_max * (std::tanh(spacing / delta_s - beta) + std::tanh(beta)) /
           (1.0 + std::tanh(beta));
}

std::vector<double> traffic_spacings(std::span<const double> positions, double half_width) {
    const std::size_t n = positions.size();
    require(n >= 2, "traffic: at least two vehicles required");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
    std::vector<double> s(n);
    for (std::size_t r = 0; r + 1 < n; ++r)
        s[order[r]] = positions[order[r + 1]] - positions[order[r]];
    s[order[n - 1]] = positions[order[0]] + 2.0 * half_width - positions[order[n - 1]];
    return s;
}

std::vector<double> traffic_drift(std::span<const double> positions, double half_width,
                                  const TrafficDrift& model) {
    const double ds =
        model.delta_s > 0.0 ? model.delta_s : 2.0 * half_width / positions.size();
    std::vector<double> g = traffic_spacings(positions, half_width);
    for (double& s : g) s = optimal_velocity(s, model.v_max, ds, model.beta);
    return g;
}

void terrain_gradient(double x1, double x2, const TerrainDrift& model, double& g1, double& g2) {
    const double c = std::numbers::pi / 2.0;
    const double e1 = model.h1 * std::exp(-2.0 * ((x1 - c) * (x1 - c) + (x2 - c) * (x2 - c)));
    const double e2 = model.h2 * std::exp(-2.0 * ((x1 + c) * (x1 + c) + (x2 + c) * (x2 + c)));
    g1 = -4.0 * ((x1 - c) * e1 + (x1 + c) * e2);
    g2 = -4.0 * ((x2 - c) * e1 + (x2 + c) * e2);
}

AgentPopulation1D init_population_1d(int n_agents, const Grid1D& g, const CounterRng& rng,
                                     const DriftModel1D& drift) {
    require(n_agents >= 1, "population: need at least one agent");
    AgentPopulation1D pop;
    pop.x.resize(n_agents);
    const double a = g.half_width();
    for (int i = 0; i < n_agents; ++i)
        pop.x[i] = -a + 2.0 * a * rng.uniform(i, CounterRng::kInitStep, 0);
    if (const auto* osc = std::get_if<OscillatorDrift>(&drift)) {
        pop.omega.resize(n_agents);
        for (int i = 0; i < n_agents; ++i)
            pop.omega[i] = osc->k_dist * (2.0 * rng.uniform(i, CounterRng::kInitStep, 1) - 1.0);
    }
    return pop;
}

AgentPopulation2D init_population_2d(int n_agents, const Grid2D& g, const CounterRng& rng) {
    require(n_agents >= 1, "population: need at least one agent");
    AgentPopulation2D pop;
    pop.x1.resize(n_agents);
    pop.x2.resize(n_agents);
    const double a = g.half_width();
    for (int i = 0; i < n_agents; ++i) {
        pop.x1[i] = -a + 2.0 * a * rng.uniform(i, CounterRng::kInitStep, 1);
        pop.x2[i] = -a + 2.0 * a * rng.uniform(i, CounterRng::kInitStep, 2);
    }
    return pop;
}

namespace {

// Interpolation weight between the centers of cell j0 and j0+1.
struct InterpPoint {
    int lo, hi;
    double w;
};

inline InterpPoint locate(double x, double a, double dx, int n, BoundaryKind bc) {
    const double rel = (x + a) / dx - 0.5;
    int j0 = static_cast<int>(std::floor(rel));
    double w = rel - j0;
    // snap to the node so that sampling at a cell center returns the stored
    // value exactly despite the round trip through (x + a) / dx
    if (w < 1e-12) {
        w = 0.0;
    } else if (w > 1.0 - 1e-12) {
        ++j0;
        w = 0.0;
    }
    if (bc == BoundaryKind::Periodic) {
        const int lo = (j0 % n + n) % n;
        return {lo, (lo + 1) % n, w};
    }
    if (j0 < 0) return {0, 0, 0.0};          // clamp below the first center
    if (j0 >= n - 1) return {n - 1, n - 1, 0.0};
    return {j0, j0 + 1, w};
}

inline double wrap_position(double x, double a) {
    const double len = 2.0 * a;
    double y = std::fmod(x + a, len);
    if (y < 0.0) y += len;
    return y - a;
}

inline double reflect_position(double x, double a) {
    // fold the line into [-a, a] with mirror symmetry at the ends
    const double len = 2.0 * a;
    double y = std::fmod(x + a, 2.0 * len);
    if (y < 0.0) y += 2.0 * len;
    if (y > len) y = 2.0 * len - y;
    return y - a;
}

}  // namespace

std::vector<double> sample_velocity(const ScalarField1D& u, std::span<const double> positions) {
    const Grid1D& g = u.grid();
    std::vector<double> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto p = locate(positions[i], g.half_width(), g.dx(), g.n_cells(), g.boundary());
        out[i] = (1.0 - p.w) * u[p.lo] + p.w * u[p.hi];
    }
    return out;
}

void sample_velocity(const VectorField2D& u, std::span<const double> x1,
                     std::span<const double> x2, std::vector<double>& u1,
                     std::vector<double>& u2) {
    const Grid2D& g = u.grid();
    u1.resize(x1.size());
    u2.resize(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const auto p = locate(x1[i], g.half_width(), g.dx(0), g.n_cells(0), g.boundary());
        const auto q = locate(x2[i], g.half_width(), g.dx(1), g.n_cells(1), g.boundary());
        const double w00 = (1 - p.w) * (1 - q.w), w10 = p.w * (1 - q.w);
        const double w01 = (1 - p.w) * q.w, w11 = p.w * q.w;
        for (int axis = 0; axis < 2; ++axis) {
            const ScalarField2D& f = u.component(axis);
            const double v = w00 * f(p.lo, q.lo) + w10 * f(p.hi, q.lo) + w01 * f(p.lo, q.hi) +
                             w11 * f(p.hi, q.hi);
            (axis == 0 ? u1 : u2)[i] = v;
        }
    }
}

void step_agents_1d(AgentPopulation1D& pop, std::span<const double> drift,
                    std::span<const double> control, const Grid1D& g, double dt,
                    const CounterRng& rng, std::uint64_t step_index, const StepOptions& opt) {
    require(dt > 0.0, "step_agents: dt must be positive");
    const double a = g.half_width();
    const double noise = std::sqrt(2.0 * opt.diffusion * dt);
    const bool periodic = g.boundary() == BoundaryKind::Periodic;
    for (std::size_t i = 0; i < pop.x.size(); ++i) {
        double v = control[i] + (drift.empty() ? 0.0 : drift[i]);
        if (opt.velocity_clip) v = std::clamp(v, opt.velocity_clip->first, opt.velocity_clip->second);
        double x = pop.x[i] + v * dt;
        if (noise > 0.0) x += noise * rng.normal(i, step_index, 0);
        pop.x[i] = periodic ? wrap_position(x, a) : reflect_position(x, a);
    }
}

void step_agents_2d(AgentPopulation2D& pop, std::span<const double> drift1,
                    std::span<const double> drift2, std::span<const double> control1,
                    std::span<const double> control2, const Grid2D& g, double dt,
                    const CounterRng& rng, std::uint64_t step_index, const StepOptions& opt) {
    require(dt > 0.0, "step_agents: dt must be positive");
    const double a = g.half_width();
    const double noise = std::sqrt(2.0 * opt.diffusion * dt);
    const bool periodic = g.boundary() == BoundaryKind::Periodic;
    for (std::size_t i = 0; i < pop.x1.size(); ++i) {
        double v1 = control1[i] + (drift1.empty() ? 0.0 : drift1[i]);
        double v2 = control2[i] + (drift2.empty() ? 0.0 : drift2[i]);
        if (opt.velocity_clip) {
            v1 = std::clamp(v1, opt.velocity_clip->first, opt.velocity_clip->second);
            v2 = std::clamp(v2, opt.velocity_clip->first, opt.velocity_clip->second);
        }
        double x1 = pop.x1[i] + v1 * dt;
        double x2 = pop.x2[i] + v2 * dt;
        if (noise > 0.0) {
            x1 += noise * rng.normal(i, step_index, 0);
            x2 += noise * rng.normal(i, step_index, 1);
        }
        pop.x1[i] = periodic ? wrap_position(x1, a) : reflect_position(x1, a);
        pop.x2[i] = periodic ? wrap_position(x2, a) : reflect_position(x2, a);
    }
}

namespace {

double mean_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

long count_outside(std::span<const double> v, double a) {
    long c = 0;
    for (double x : v)
        if (!(x >= -a && x <= a)) ++c;
    return c;
}

}  // namespace

MicroRunResult run_closed_loop_micro(const Reference1D& ref, const DriftModel1D& drift,
                                     const MicroRunConfig& cfg) {
    cfg.gains.validate();
    const Grid1D& g = ref.grid();
    const double bandwidth = cfg.bandwidth_sigma > 0.0 ? cfg.bandwidth_sigma : 2.0 * g.dx();
    const double gain_floor = switching_gain_floor(ref, cfg.diffusion, cfg.k);
    const double rho_floor = cfg.gains.resolved_rho_floor(g.length());
    const bool periodic = g.boundary() == BoundaryKind::Periodic;

    CounterRng rng(cfg.seed);
    AgentPopulation1D pop = init_population_1d(cfg.n_agents, g, rng, drift);
    const bool traffic = std::holds_alternative<TrafficDrift>(drift);

    StepOptions opt;
    opt.diffusion = cfg.diffusion;
    if (traffic) opt.velocity_clip = {0.0, std::get<TrafficDrift>(drift).v_max};

    MicroRunResult out;
    out.gain_floor = gain_floor;
    out.max_abs_drift = {0.0};
    out.metrics.columns = {"t", "l2_error", "l2_u", "mass", "ks", "alpha", "cfl", "mean_abs_u"};

    const int nsteps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    for (int step = 0;; ++step) {
        const double t = step * cfg.dt;
        const Density1D rho = estimate_density(pop.x, g, bandwidth);
        const Density1D target = ref.profile(t);
        const ScalarField1D e = error_field(target, rho);

        const double ks = switching_gain(cfg.gains, gain_floor, cfg.k, e);
        const ScalarField1D ff = ref.time_derivative(t);
        const ScalarField1D* ffp = ref.time_varying() ? &ff : nullptr;

        double alpha;
        Flux1D flux{ScalarField1D(g), {}};
        if (periodic) {
            alpha = alpha_periodic(ks, regularized_sign(e, cfg.gains.epsilon));
            flux = flux_from_q(control_source(e, cfg.gains, ks, alpha, ffp));
        } else {
            flux = flux_from_q(control_source(e, cfg.gains, ks, 0.0, ffp));
            alpha = flux.terms.alpha;
        }
        const ScalarField1D u_field = velocity_from_flux(flux.phi, rho.field(), rho_floor);
        const std::vector<double> u = sample_velocity(u_field, pop.x);

        std::vector<double> gvals;
        if (const auto* osc = std::get_if<OscillatorDrift>(&drift)) {
            (void)osc;
            gvals = pop.omega;
        } else if (traffic) {
            gvals = traffic_drift(pop.x, g.half_width(), std::get<TrafficDrift>(drift));
        }
        if (!gvals.empty()) out.max_abs_drift[0] = std::max(out.max_abs_drift[0], max_abs(gvals));

        if (step % cfg.metrics_every == 0 || step == nsteps) {
            const double cfl = max_abs(u) * cfg.dt / g.dx();
            out.metrics.append({t, l2_norm(e), l2_norm(u_field), integrate(rho.field()), ks,
                                alpha, cfl, mean_abs(u)});
        }
        if (cfg.snapshots_every > 0 && (step % cfg.snapshots_every == 0 || step == nsteps))
            out.snapshots.push_back({t, pop.x, {}});
        if (step == nsteps) {
            out.final_density.assign(rho.field().values().begin(), rho.field().values().end());
            break;
        }
        step_agents_1d(pop, gvals, u, g, cfg.dt, rng, step, opt);
        out.containment_violations += count_outside(pop.x, g.half_width());
    }
    out.final_x1 = std::move(pop.x);
    return out;
}

MicroRunResult run_closed_loop_micro(const Reference2D& ref, const DriftModel2D& drift,
                                     const MicroRunConfig& cfg) {
    cfg.gains.validate();
    const Grid2D& g = ref.grid();
    const double bandwidth = cfg.bandwidth_sigma > 0.0 ? cfg.bandwidth_sigma : 2.0 * g.dx(0);
    const double gain_floor = switching_gain_floor(ref, cfg.diffusion, cfg.k);
    const double rho_floor = cfg.gains.resolved_rho_floor(g.area());

    CounterRng rng(cfg.seed);
    AgentPopulation2D pop = init_population_2d(cfg.n_agents, g, rng);
    const auto* terrain = std::get_if<TerrainDrift>(&drift);

    StepOptions opt;
    opt.diffusion = cfg.diffusion;

    SpectralPoisson2D poisson(g);
    MicroRunResult out;
    out.gain_floor = gain_floor;
    out.max_abs_drift = {0.0, 0.0};
    out.metrics.columns = {"t",    "l2_error", "l2_u1", "l2_u2",     "mass",
                           "ks",   "alpha",    "cfl",   "mean_abs_u"};

    std::vector<double> u1, u2, g1, g2;
    const int nsteps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    for (int step = 0;; ++step) {
        const double t = step * cfg.dt;
        const Density2D rho = estimate_density(pop.x1, pop.x2, g, bandwidth);
        const ScalarField2D e = error_field(ref.profile(), rho);

        const double ks = switching_gain(cfg.gains, gain_floor, cfg.k, e);
        const double alpha = alpha_mean_free(ks, regularized_sign(e, cfg.gains.epsilon));
        const ScalarField2D q = control_source(e, cfg.gains, ks, alpha, nullptr);
        const VectorField2D flux = poisson.solve_flux(q);
        const VectorField2D u_field = velocity_from_flux(flux, rho.field(), rho_floor);
        sample_velocity(u_field, pop.x1, pop.x2, u1, u2);

        if (terrain) {
            g1.resize(pop.x1.size());
            g2.resize(pop.x1.size());
            for (std::size_t i = 0; i < pop.x1.size(); ++i)
                terrain_gradient(pop.x1[i], pop.x2[i], *terrain, g1[i], g2[i]);
            out.max_abs_drift[0] = std::max(out.max_abs_drift[0], max_abs(g1));
            out.max_abs_drift[1] = std::max(out.max_abs_drift[1], max_abs(g2));
        }

        if (step % cfg.metrics_every == 0 || step == nsteps) {
            const double cfl =
                std::max(max_abs(u1) * cfg.dt / g.dx(0), max_abs(u2) * cfg.dt / g.dx(1));
            double mu = 0.0;
            for (std::size_t i = 0; i < u1.size(); ++i) mu += std::hypot(u1[i], u2[i]);
            mu /= static_cast<double>(u1.size());
            out.metrics.append({t, l2_norm(e), l2_norm(u_field.component(0)),
                                l2_norm(u_field.component(1)), integrate(rho.field()), ks, alpha,
                                cfl, mu});
        }
        if (cfg.snapshots_every > 0 && (step % cfg.snapshots_every == 0 || step == nsteps))
            out.snapshots.push_back({t, pop.x1, pop.x2});
        if (step == nsteps) {
            out.final_density.assign(rho.field().values().begin(), rho.field().values().end());
            break;
        }
        step_agents_2d(pop, g1, g2, u1, u2, g, cfg.dt, rng, step, opt);
        out.containment_violations += count_outside(pop.x1, g.half_width()) +
                                      count_outside(pop.x2, g.half_width());
    }
    out.final_x1 = std::move(pop.x1);
    out.final_x2 = std::move(pop.x2);
    return out;
}

}  // namespace densctl
