#include "densctl/macro.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace densctl {

std::string CflReport::describe() const {
    std::ostringstream os;
    os << "advective CFL " << advective << " (limit " << advective_limit << "), diffusive number "
       << diffusive << " (limit " << diffusive_limit << ")";
    return os.str();
}

CflReport cfl_report_1d(const MacroState1D& s, const ScalarField1D& velocity, double dt) {
    const Grid1D& g = velocity.grid();
    const double k = s.k[0];
    double vmax = 0.0;
    for (double u : velocity.values()) vmax = std::max(vmax, std::abs(u) + k);
    CflReport r;
    r.advective = vmax * dt / g.dx();
    r.advective_limit = 1.0;
    r.diffusive = s.diffusion * dt / (g.dx() * g.dx());
    r.diffusive_limit = 0.5;
    return r;
}

CflReport cfl_report_2d(const MacroState2D& s, const VectorField2D& velocity, double dt) {
    const Grid2D& g = velocity.grid();
    CflReport r;
    for (int axis = 0; axis < 2; ++axis) {
        double vmax = 0.0;
        for (double u : velocity.component(axis).values())
            vmax = std::max(vmax, std::abs(u) + s.k[axis]);
        r.advective = std::max(r.advective, vmax * dt / g.dx(axis));
        r.diffusive = std::max(r.diffusive, s.diffusion * dt / (g.dx(axis) * g.dx(axis)));
    }
    r.advective_limit = 0.5;
    // diffusion is Crank-Nicolson, unconditionally stable
    r.diffusive_limit = std::numeric_limits<double>::infinity();
    return r;
}

MacroState1D step_macro_1d(const MacroState1D& s, const ScalarField1D& velocity, double dt,
                           AdvectionViscosity visc) {
    require(same_grid(s.rho_hat, velocity), "step_macro_1d: velocity grid mismatch");
    const CflReport rep = cfl_report_1d(s, velocity, dt);
    if (!rep.ok()) throw CflViolation(rep);

    const Grid1D& g = s.rho_hat.grid();
    const int n = g.n_cells();
    const double dx = g.dx();
    const double sgn = bounding_sign(s.side);
    const bool periodic = g.boundary() == BoundaryKind::Periodic;
    const double fixed_visc = dx / (2.0 * dt);

    // total face flux between cells l and r (advection + diffusion)
    auto face = [&](int l, int r) {
        const double vl = velocity[l] + sgn * s.k[0];
        const double vr = velocity[r] + sgn * s.k[0];
        const double nu =
            visc == AdvectionViscosity::LocalWaveSpeed ? std::max(std::abs(vl), std::abs(vr))
                                                       : fixed_visc;
        const double jump = s.rho_hat[r] - s.rho_hat[l];
        return 0.5 * (vl * s.rho_hat[l] + vr * s.rho_hat[r]) - 0.5 * nu * jump -
               s.diffusion * jump / dx;
    };

    std::vector<double> flux(static_cast<std::size_t>(n) + 1, 0.0);
    for (int f = 1; f < n; ++f) flux[f] = face(f - 1, f);
    if (periodic) {
        flux[0] = face(n - 1, 0);
        flux[n] = flux[0];
    }  // reflective: boundary faces stay zero

    MacroState1D out = s;
    out.t = s.t + dt;
    const double lam = dt / dx;
    for (int j = 0; j < n; ++j) out.rho_hat[j] = s.rho_hat[j] - lam * (flux[j + 1] - flux[j]);
    return out;
}

namespace {

// Solve (I - g L) y = d along one line, L the discrete second derivative
// with periodic wrap or zero-flux (mirror) closure. Thomas algorithm;
// periodic corners via Sherman-Morrison.
class CnLineSolver {
public:
    CnLineSolver(int n, double gamma, BoundaryKind bc) : n_(n), gamma_(gamma), bc_(bc) {
        diag_.assign(n, 1.0 + 2.0 * gamma);
        ws_.resize(n);
        if (bc == BoundaryKind::Reflective) {
            diag_.front() = 1.0 + gamma;
            diag_.back() = 1.0 + gamma;
        } else {
            // Sherman-Morrison: fold the wrap corners into a rank-one update
            const double alpha = -gamma, beta = -gamma;
            corr_gamma_ = -diag_[0];
            diag_[0] -= corr_gamma_;
            diag_[n - 1] -= alpha * beta / corr_gamma_;
            z_.assign(n, 0.0);
            std::vector<double> u(n, 0.0);
            u[0] = corr_gamma_;
            u[n - 1] = alpha;
            thomas(u, z_);
            denom_ = 1.0 + z_[0] + beta * z_[n - 1] / corr_gamma_;
        }
    }

    // y = (I + g L) x
    void apply_rhs(const double* x, double* y) const {
        const double gsz = gamma_;
        if (bc_ == BoundaryKind::Periodic) {
            for (int i = 0; i < n_; ++i) {
                const double lo = x[i == 0 ? n_ - 1 : i - 1];
                const double hi = x[i == n_ - 1 ? 0 : i + 1];
                y[i] = x[i] + gsz * (hi - 2.0 * x[i] + lo);
            }
        } else {
            y[0] = x[0] + gsz * (x[1] - x[0]);
            for (int i = 1; i < n_ - 1; ++i)
                y[i] = x[i] + gsz * (x[i + 1] - 2.0 * x[i] + x[i - 1]);
            y[n_ - 1] = x[n_ - 1] + gsz * (x[n_ - 2] - x[n_ - 1]);
        }
    }

    void solve(const std::vector<double>& d, std::vector<double>& y) {
        thomas(d, y);
        if (bc_ == BoundaryKind::Periodic) {
            const double beta = -gamma_;
            const double fact = (y[0] + beta * y[n_ - 1] / corr_gamma_) / denom_;
            for (int i = 0; i < n_; ++i) y[i] -= fact * z_[i];
        }
    }

private:
    void thomas(const std::vector<double>& d, std::vector<double>& y) {
        const double off = -gamma_;
        std::vector<double>& c = ws_;
        c[0] = off / diag_[0];
        y.resize(n_);
        y[0] = d[0] / diag_[0];
        for (int i = 1; i < n_; ++i) {
            const double m = 1.0 / (diag_[i] - off * c[i - 1]);
            c[i] = off * m;
            y[i] = (d[i] - off * y[i - 1]) * m;
        }
        for (int i = n_ - 2; i >= 0; --i) y[i] -= c[i] * y[i + 1];
    }

    int n_;
    double gamma_;
    BoundaryKind bc_;
    std::vector<double> diag_, z_, ws_;
    double corr_gamma_ = 0.0, denom_ = 1.0;
};

}  // namespace

namespace {

void advect_2d(ScalarField2D& rho, const MacroState2D& s, const VectorField2D& velocity,
               double dt, AdvectionViscosity visc) {
    const Grid2D& g = rho.grid();
    const int n1 = g.n_cells(0), n2 = g.n_cells(1);
    const bool periodic = g.boundary() == BoundaryKind::Periodic;
    const ScalarField2D r0 = rho;
    for (int axis = 0; axis < 2; ++axis) {
        const double dx = g.dx(axis);
        const double lam = dt / dx;
        const double fixed_visc = dx / (4.0 * dt);
        const double kdrift = bounding_sign(s.side) * s.k[axis];
        const ScalarField2D& u = velocity.component(axis);
        const int nn = axis == 0 ? n1 : n2;
        const int nt = axis == 0 ? n2 : n1;
        for (int t_idx = 0; t_idx < nt; ++t_idx) {
            auto cell = [&](int i) -> std::pair<double, double> {
                const int i1 = axis == 0 ? i : t_idx;
                const int i2 = axis == 0 ? t_idx : i;
                return {r0(i1, i2), u(i1, i2) + kdrift};
            };
            auto face = [&](int l, int r) {
                const auto [rl, vl] = cell(l);
                const auto [rr, vr] = cell(r);
                const double nu = visc == AdvectionViscosity::LocalWaveSpeed
                                      ? std::max(std::abs(vl), std::abs(vr))
                                      : fixed_visc;
                return 0.5 * (vl * rl + vr * rr) - 0.5 * nu * (rr - rl);
            };
            std::vector<double> flux(static_cast<std::size_t>(nn) + 1, 0.0);
            for (int f = 1; f < nn; ++f) flux[f] = face(f - 1, f);
            if (periodic) {
                flux[0] = face(nn - 1, 0);
                flux[nn] = flux[0];
            }
            for (int i = 0; i < nn; ++i) {
                const int i1 = axis == 0 ? i : t_idx;
                const int i2 = axis == 0 ? t_idx : i;
                rho(i1, i2) -= lam * (flux[i + 1] - flux[i]);
            }
        }
    }
}

// Crank-Nicolson diffusion over dt, factored per axis:
// (I - c Lx)(I - c Ly) rho+ = (I + c Lx)(I + c Ly) rho
void diffuse_cn_2d(ScalarField2D& rho, double diffusion, double dt) {
    const Grid2D& g = rho.grid();
    const int n1 = g.n_cells(0), n2 = g.n_cells(1);
    const double c = 0.5 * diffusion * dt;
    CnLineSolver sx(n1, c / (g.dx(0) * g.dx(0)), g.boundary());
    CnLineSolver sy(n2, c / (g.dx(1) * g.dx(1)), g.boundary());

    std::vector<double> line(std::max(n1, n2)), res;
    // rows: along axis 1
    for (int i = 0; i < n1; ++i) {
        sy.apply_rhs(&rho(i, 0), line.data());
        for (int j = 0; j < n2; ++j) rho(i, j) = line[j];
    }
    // columns: along axis 0 (gather/scatter through a strided view)
    std::vector<double> col(n1), tmp(n1);
    for (int j = 0; j < n2; ++j) {
        for (int i = 0; i < n1; ++i) col[i] = rho(i, j);
        sx.apply_rhs(col.data(), tmp.data());
        sx.solve(tmp, res);
        for (int i = 0; i < n1; ++i) rho(i, j) = res[i];
    }
    for (int i = 0; i < n1; ++i) {
        std::vector<double> row(n2);
        for (int j = 0; j < n2; ++j) row[j] = rho(i, j);
        sy.solve(row, res);
        for (int j = 0; j < n2; ++j) rho(i, j) = res[j];
    }
}

}  // namespace

MacroState2D step_macro_2d(const MacroState2D& s, const VectorField2D& velocity, double dt,
                           AdvectionViscosity visc, SplittingScheme splitting) {
    require(&s.rho_hat.grid() == &velocity.grid(), "step_macro_2d: velocity grid mismatch");
    const CflReport rep = cfl_report_2d(s, velocity, dt);
    if (!rep.ok()) throw CflViolation(rep);

    MacroState2D out = s;
    out.t = s.t + dt;
    const bool diffusive = s.diffusion > 0.0;

    if (splitting == SplittingScheme::Strang && diffusive)
        diffuse_cn_2d(out.rho_hat, s.diffusion, 0.5 * dt);
    advect_2d(out.rho_hat, s, velocity, dt, visc);
    if (diffusive)
        diffuse_cn_2d(out.rho_hat, s.diffusion,
                      splitting == SplittingScheme::Strang ? 0.5 * dt : dt);
    return out;
}

// --- closed-loop drivers ---

MacroRunResult run_closed_loop_macro(const Reference1D& ref, const Density1D& initial,
                                     const MacroRunConfig& cfg) {
    cfg.gains.validate();
    const Grid1D& g = ref.grid();
    require(&initial.grid() == &g, "run_closed_loop_macro: initial density grid mismatch");
    const double gain_floor = switching_gain_floor(ref, cfg.diffusion, cfg.k);
    const double rho_floor = cfg.gains.resolved_rho_floor(g.length());
    const bool periodic = g.boundary() == BoundaryKind::Periodic;

    MacroState1D state{initial.field(), 0.0, cfg.side, cfg.k, cfg.diffusion};
    MacroRunResult out;
    out.gain_floor = gain_floor;
    out.min_density = sup_norm(state.rho_hat);
    out.metrics.columns = {"t", "l2_error", "l2_u", "mass", "ks", "alpha", "cfl"};

    const int nsteps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    for (int step = 0;; ++step) {
        const double t = state.t;
        const Density1D target = ref.profile(t);
        ScalarField1D e(g);
        for (int j = 0; j < g.n_cells(); ++j) e[j] = target[j] - state.rho_hat[j];

        const double ks = switching_gain(cfg.gains, gain_floor, cfg.k, e);
        const ScalarField1D ff = ref.time_derivative(t);
        const ScalarField1D* ffp = ref.time_varying() ? &ff : nullptr;

        double alpha;
        Flux1D flux{ScalarField1D(g), {}};
        ScalarField1D q(g);
        if (periodic) {
            alpha = alpha_periodic(ks, regularized_sign(e, cfg.gains.epsilon));
            q = control_source(e, cfg.gains, ks, alpha, ffp);
            flux = flux_from_q(q);
        } else {
            ScalarField1D q0 = control_source(e, cfg.gains, ks, 0.0, ffp);
            flux = flux_from_q(q0);
            alpha = flux.terms.alpha;
            q = std::move(q0);
            for (double& v : q.data()) v += alpha;
        }
        const ScalarField1D u = velocity_from_flux(flux.phi, state.rho_hat, rho_floor);
        const CflReport rep = cfl_report_1d(state, u, cfg.dt);

        if (step % cfg.metrics_every == 0 || step == nsteps)
            out.metrics.append({t, l2_norm(e), l2_norm(u), integrate(state.rho_hat), ks, alpha,
                                rep.advective});
        if (step == nsteps) break;
        state = step_macro_1d(state, u, cfg.dt, cfg.viscosity);
        for (double v : state.rho_hat.values()) out.min_density = std::min(out.min_density, v);
    }
    out.final_density.assign(state.rho_hat.values().begin(), state.rho_hat.values().end());
    return out;
}

MacroRunResult run_closed_loop_macro(const Reference2D& ref, const Density2D& initial,
                                     const MacroRunConfig& cfg) {
    cfg.gains.validate();
    const Grid2D& g = ref.grid();
    require(&initial.grid() == &g, "run_closed_loop_macro: initial density grid mismatch");
    const double gain_floor = switching_gain_floor(ref, cfg.diffusion, cfg.k);
    const double rho_floor = cfg.gains.resolved_rho_floor(g.area());

    SpectralPoisson2D poisson(g);
    MacroState2D state{initial.field(), 0.0, cfg.side, cfg.k, cfg.diffusion};
    MacroRunResult out;
    out.gain_floor = gain_floor;
    out.min_density = sup_norm(state.rho_hat);
    out.metrics.columns = {"t", "l2_error", "l2_u1", "l2_u2", "mass", "ks", "alpha", "cfl"};

    const int nsteps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    for (int step = 0;; ++step) {
        const double t = state.t;
        const Density2D& target = ref.profile();
        ScalarField2D e(g);
        for (std::size_t k = 0; k < e.values().size(); ++k)
            e[k] = target.field()[k] - state.rho_hat[k];

        const double ks = switching_gain(cfg.gains, gain_floor, cfg.k, e);
        const double alpha = alpha_mean_free(ks, regularized_sign(e, cfg.gains.epsilon));
        const ScalarField2D q = control_source(e, cfg.gains, ks, alpha, nullptr);
        const VectorField2D flux = poisson.solve_flux(q);
        const VectorField2D u = velocity_from_flux(flux, state.rho_hat, rho_floor);
        const CflReport rep = cfl_report_2d(state, u, cfg.dt);

        if (step % cfg.metrics_every == 0 || step == nsteps)
            out.metrics.append({t, l2_norm(e), l2_norm(u.component(0)), l2_norm(u.component(1)),
                                integrate(state.rho_hat), ks, alpha, rep.advective});
        if (step == nsteps) break;
        state = step_macro_2d(state, u, cfg.dt, cfg.viscosity, cfg.splitting);
        for (double v : state.rho_hat.values()) out.min_density = std::min(out.min_density, v);
    }
    out.final_density.assign(state.rho_hat.values().begin(), state.rho_hat.values().end());
    return out;
}

}  // namespace densctl
