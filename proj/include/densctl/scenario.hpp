#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "densctl/control.hpp"
#include "densctl/grid.hpp"
#include "densctl/macro.hpp"

namespace densctl {

class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

enum class RunMode { MacroPde, MicroAgents };

struct GridSpec {
    double half_width = 0.0;
    int n1 = 0, n2 = 0;  // n2 unused in 1D
    BoundaryKind boundary = BoundaryKind::Periodic;
};

struct TargetSpec {
    enum class Kind { VonMises, BivariateVonMises, Image } kind = Kind::VonMises;
    double kappa = 0.0, mu = 0.0, mu_rate = 0.0;      // von Mises
    double kappa2 = 0.0, nu = 0.0;                    // bivariate extras
    std::string image_path;                           // image target
    double image_sigma = 0.0;
    bool invert = false;
};

struct DriftSpec {
    enum class Kind { None, Oscillator, Traffic, Terrain } kind = Kind::None;
    double k_dist = 0.0;                    // oscillator
    double v_max = 0.0, delta_s = 0.0, beta = 0.0;  // traffic (delta_s 0 -> mean gap)
    double h1 = 0.0, h2 = 0.0;              // terrain
};

struct InitialSpec {
    enum class Kind { Uniform, VonMises } kind = Kind::Uniform;
    double kappa = 0.0, mu = 0.0;
};

struct OutputSpec {
    int metrics_every = 1;
    int snapshots_every = 0;
};

struct SweepSpec {
    std::string param;
    std::vector<double> values;
};

/// A fully self-contained experiment description. Loaded from JSON with
/// strict key checking; see docs/formats.md for the schema.
struct Scenario {
    std::string name;
    RunMode mode = RunMode::MacroPde;
    int dimension = 1;
    GridSpec grid;
    TargetSpec target;
    double diffusion = 0.0;
    std::vector<double> disturbance_bound;
    DriftSpec drift;
    ControlGains gains;
    BoundingSide bounding = BoundingSide::Upper;
    InitialSpec initial;
    int n_agents = 0;
    double bandwidth_sigma = 0.0;  // 0 -> 2 dx
    double dt = 0.0;
    double t_final = 0.0;
    std::uint64_t seed = 1;
    OutputSpec output;
    double velocity_scale = 0.0;  // 0 -> max disturbance bound; used by validation only
    std::optional<SweepSpec> sweep;
};

/// Parse and validate; unknown keys and malformed values are errors naming
/// the offending field. Relative image paths resolve against the scenario
/// file's directory.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text, const std::string& base_dir);

void validate_scenario(const Scenario& s);

std::string scenario_to_json(const Scenario& s);

/// FNV-1a over the canonical (key-sorted) serialization: stable under field
/// reordering of the config file.
std::string scenario_hash(const Scenario& s);

/// Set one named parameter (the sweep/override surface). Throws on unknown
/// names. Supported: k_dist, epsilon, k_p, ks_safety, diffusion, dt, t_final,
/// n_agents, n_cells, seed, bandwidth_sigma, metrics_every, snapshots_every.
void apply_override(Scenario& s, const std::string& param, double value);

}  // namespace densctl
