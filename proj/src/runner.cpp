#include "densctl/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "densctl/image.hpp"

namespace densctl {

namespace {

Density1D build_initial_1d(const InitialSpec& init, const Grid1D& g) {
    if (init.kind == InitialSpec::Kind::VonMises) return von_mises_1d(init.kappa, init.mu, g);
    ScalarField1D f(g);
    for (double& v : f.data()) v = 1.0;
    return Density1D::normalized(std::move(f));
}

Density2D build_initial_2d(const Grid2D& g) {
    ScalarField2D f(g);
    for (double& v : f.data()) v = 1.0;
    return Density2D::normalized(std::move(f));
}

Reference1D build_reference_1d(const Scenario& s, const Grid1D& g) {
    if (s.target.mu_rate != 0.0)
        return Reference1D::moving_von_mises(s.target.kappa, s.target.mu, s.target.mu_rate, g);
    return Reference1D::fixed(von_mises_1d(s.target.kappa, s.target.mu, g));
}

Reference2D build_reference_2d(const Scenario& s, const Grid2D& g) {
    if (s.target.kind == TargetSpec::Kind::BivariateVonMises)
        return Reference2D::fixed(
            bivariate_von_mises(s.target.kappa, s.target.kappa2, s.target.mu, s.target.nu, g));
    const std::string& path = s.target.image_path;
    const bool pgm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0;
    const GrayImage img = pgm ? load_pgm(path) : load_matrix_f64(path);
    return Reference2D::fixed(density_from_image(img, g, s.target.image_sigma, s.target.invert));
}

DriftModel1D build_drift_1d(const Scenario& s) {
    switch (s.drift.kind) {
        case DriftSpec::Kind::Oscillator:
            return OscillatorDrift{s.drift.k_dist};
        case DriftSpec::Kind::Traffic:
            return TrafficDrift{s.drift.v_max, s.drift.delta_s, s.drift.beta};
        default:
            return NoDrift{};
    }
}

DriftModel2D build_drift_2d(const Scenario& s) {
    if (s.drift.kind == DriftSpec::Kind::Terrain) return TerrainDrift{s.drift.h1, s.drift.h2};
    return NoDrift{};
}

}  // namespace

RunRecord run(const Scenario& s) {
    validate_scenario(s);
    RunRecord rec;
    rec.scenario_name = s.name;
    rec.scenario_hash = scenario_hash(s);
    rec.version = kVersion;
    rec.half_width = s.grid.half_width;
    rec.n1 = s.grid.n1;
    rec.n2 = s.dimension == 2 ? s.grid.n2 : 0;
    rec.n_agents = s.mode == RunMode::MicroAgents ? s.n_agents : 0;

    const auto t0 = std::chrono::steady_clock::now();

    if (s.mode == RunMode::MacroPde) {
        MacroRunConfig cfg;
        cfg.gains = s.gains;
        cfg.k = DriftBound{s.disturbance_bound};
        cfg.diffusion = s.diffusion;
        cfg.side = s.bounding;
        cfg.dt = s.dt;
        cfg.t_final = s.t_final;
        cfg.metrics_every = s.output.metrics_every;
        if (s.dimension == 1) {
            Grid1D g(s.grid.half_width, s.grid.n1, s.grid.boundary);
            const Reference1D ref = build_reference_1d(s, g);
            const Density1D init = build_initial_1d(s.initial, g);
            MacroRunResult r = run_closed_loop_macro(ref, init, cfg);
            rec.metrics = std::move(r.metrics);
            rec.final_density = std::move(r.final_density);
            rec.gain_floor = r.gain_floor;
            rec.min_density = r.min_density;
        } else {
            Grid2D g(s.grid.half_width, s.grid.n1, s.grid.n2, s.grid.boundary);
            const Reference2D ref = build_reference_2d(s, g);
            const Density2D init = build_initial_2d(g);
            MacroRunResult r = run_closed_loop_macro(ref, init, cfg);
            rec.metrics = std::move(r.metrics);
            rec.final_density = std::move(r.final_density);
            rec.gain_floor = r.gain_floor;
            rec.min_density = r.min_density;
        }
    } else {
        MicroRunConfig cfg;
        cfg.gains = s.gains;
        cfg.k = DriftBound{s.disturbance_bound};
        cfg.diffusion = s.diffusion;
        cfg.n_agents = s.n_agents;
        cfg.bandwidth_sigma = s.bandwidth_sigma;
        cfg.dt = s.dt;
        cfg.t_final = s.t_final;
        cfg.seed = s.seed;
        cfg.metrics_every = s.output.metrics_every;
        cfg.snapshots_every = s.output.snapshots_every;
        if (s.dimension == 1) {
            Grid1D g(s.grid.half_width, s.grid.n1, s.grid.boundary);
            const Reference1D ref = build_reference_1d(s, g);
            MicroRunResult r = run_closed_loop_micro(ref, build_drift_1d(s), cfg);
            rec.metrics = std::move(r.metrics);
            rec.final_density = std::move(r.final_density);
            rec.snapshots = std::move(r.snapshots);
            rec.max_abs_drift = std::move(r.max_abs_drift);
            rec.containment_violations = r.containment_violations;
            rec.gain_floor = r.gain_floor;
        } else {
            Grid2D g(s.grid.half_width, s.grid.n1, s.grid.n2, s.grid.boundary);
            const Reference2D ref = build_reference_2d(s, g);
            MicroRunResult r = run_closed_loop_micro(ref, build_drift_2d(s), cfg);
            rec.metrics = std::move(r.metrics);
            rec.final_density = std::move(r.final_density);
            rec.snapshots = std::move(r.snapshots);
            rec.max_abs_drift = std::move(r.max_abs_drift);
            rec.containment_violations = r.containment_violations;
            rec.gain_floor = r.gain_floor;
        }
    }

    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<RunRecord> sweep(const Scenario& s, const std::string& param,
                             std::span<const double> values, int workers) {
    std::vector<Scenario> variants;
    variants.reserve(values.size());
    for (double v : values) {
        Scenario vs = s;
        vs.sweep.reset();
        apply_override(vs, param, v);
        validate_scenario(vs);
        variants.push_back(std::move(vs));
    }
    std::vector<RunRecord> out(variants.size());
    if (workers < 1) workers = 1;
    for (std::size_t base = 0; base < variants.size(); base += workers) {
        const std::size_t end = std::min(base + workers, variants.size());
        std::vector<std::future<RunRecord>> batch;
        for (std::size_t i = base; i < end; ++i)
            batch.push_back(
                std::async(std::launch::async, [&variants, i] { return run(variants[i]); }));
        for (std::size_t i = base; i < end; ++i) out[i] = batch[i - base].get();
    }
    return out;
}

BoundCheckResult exponential_bound_check(std::span<const double> t,
                                         std::span<const double> l2_error, double k_p,
                                         double slack, double floor_value) {
    if (t.empty() || t.size() != l2_error.size())
        throw std::invalid_argument("exponential_bound_check: empty or mismatched series");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t[i - 1])
            throw std::invalid_argument("exponential_bound_check: times must increase");
    BoundCheckResult r;
    const double e0sq = l2_error[0] * l2_error[0];
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (l2_error[i] <= floor_value) continue;
        ++r.samples_checked;
        const double bound = e0sq * std::exp(-k_p * t[i]) * (1.0 + slack);
        // small relative grace so an exactly-decaying series passes at zero slack
        if (l2_error[i] * l2_error[i] > bound * (1.0 + 1e-12)) {
            r.pass = false;
            r.first_violation_t = t[i];
            break;
        }
    }
    return r;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::string final_density_csv(const RunRecord& r) {
    std::string out;
    char buf[96];
    if (r.n2 > 0) {
        out = "x1,x2,rho\n";
        const double dx1 = 2.0 * r.half_width / r.n1;
        const double dx2 = 2.0 * r.half_width / r.n2;
        for (int i = 0; i < r.n1; ++i)
            for (int j = 0; j < r.n2; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n",
                              -r.half_width + (i + 0.5) * dx1, -r.half_width + (j + 0.5) * dx2,
                              r.final_density[static_cast<std::size_t>(i) * r.n2 + j]);
                out += buf;
            }
    } else {
        out = "x,rho\n";
        const double dx = 2.0 * r.half_width / r.n1;
        for (int j = 0; j < r.n1; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", -r.half_width + (j + 0.5) * dx,
                          r.final_density[j]);
            out += buf;
        }
    }
    return out;
}

std::string snapshots_csv(const RunRecord& r) {
    const bool two_d = !r.snapshots.empty() && !r.snapshots.front().x2.empty();
    std::string out = two_d ? "t,agent_id,x1,x2\n" : "t,agent_id,x\n";
    char buf[96];
    for (const Snapshot& s : r.snapshots)
        for (std::size_t i = 0; i < s.x1.size(); ++i) {
            if (two_d)
                std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", s.t, i, s.x1[i],
                              s.x2[i]);
            else
                std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g\n", s.t, i, s.x1[i]);
            out += buf;
        }
    return out;
}

}  // namespace

void write_run_outputs(const RunRecord& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_text(fs::path(dir) / "metrics.csv", to_csv(r.metrics));
    write_text(fs::path(dir) / "final_density.csv", final_density_csv(r));
    if (!r.snapshots.empty()) write_text(fs::path(dir) / "snapshots.csv", snapshots_csv(r));

    nlohmann::json j;
    j["scenario"] = r.scenario_name;
    j["scenario_hash"] = r.scenario_hash;
    j["version"] = r.version;
    j["wall_seconds"] = r.wall_seconds;
    j["gain_floor"] = r.gain_floor;
    if (r.n_agents > 0) {
        j["n_agents"] = r.n_agents;
        j["containment_violations"] = r.containment_violations;
        j["max_abs_drift"] = r.max_abs_drift;
    }
    write_text(fs::path(dir) / "record.json", j.dump(2) + "\n");
}

}  // namespace densctl
