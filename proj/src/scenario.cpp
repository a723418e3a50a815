#include "densctl/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace densctl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError("scenario: " + msg); }

// Typed accessors with error messages naming the field.
class Object {
public:
    Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object())
            fail(path_.empty() ? std::string("the document must be an object")
                               : path_ + " must be an object");
    }

    ~Object() = default;

    void finish() const {  // unknown keys are errors, no silent typos
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(loc() + "unknown key '" + it.key() + "'");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(loc() + "missing required key '" + key + "'");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(key_path(key) + " must be a number");
        return v.get<double>();
    }

    double number_or(const std::string& key, double def) {
        if (!j_.contains(key)) return def;
        return number(key);
    }

    long integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(key_path(key) + " must be an integer");
        return v.get<long>();
    }

    long integer_or(const std::string& key, long def) {
        if (!j_.contains(key)) return def;
        return integer(key);
    }

    bool boolean_or(const std::string& key, bool def) {
        if (!j_.contains(key)) return def;
        const json& v = raw(key);
        if (!v.is_boolean()) fail(key_path(key) + " must be a boolean");
        return v.get<bool>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(key_path(key) + " must be a string");
        return v.get<std::string>();
    }

    std::string text_or(const std::string& key, const std::string& def) {
        if (!j_.contains(key)) return def;
        return text(key);
    }

    Object object(const std::string& key) { return Object(raw(key), key_path(key)); }

    const std::string& path() const { return path_; }

private:
    // "grid: ..." for nested objects, bare at the root (fail() already
    // prefixes "scenario: ")
    std::string loc() const { return path_.empty() ? std::string() : path_ + ": "; }
    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

BoundaryKind parse_boundary(const std::string& s) {
    if (s == "periodic") return BoundaryKind::Periodic;
    if (s == "reflective") return BoundaryKind::Reflective;
    fail("grid.boundary must be 'periodic' or 'reflective'");
}

TargetSpec parse_target(Object o) {
    TargetSpec t;
    const std::string kind = o.text("kind");
    if (kind == "von_mises") {
        t.kind = TargetSpec::Kind::VonMises;
        t.kappa = o.number("kappa");
        t.mu = o.number_or("mu", 0.0);
        t.mu_rate = o.number_or("mu_rate", 0.0);
    } else if (kind == "bivariate_von_mises") {
        t.kind = TargetSpec::Kind::BivariateVonMises;
        t.kappa = o.number("kappa1");
        t.kappa2 = o.number("kappa2");
        t.mu = o.number_or("mu", 0.0);
        t.nu = o.number_or("nu", 0.0);
    } else if (kind == "image") {
        t.kind = TargetSpec::Kind::Image;
        t.image_path = o.text("path");
        t.image_sigma = o.number("smoothing_sigma");
        t.invert = o.boolean_or("invert", false);
    } else {
        fail("target.kind must be 'von_mises', 'bivariate_von_mises' or 'image'");
    }
    o.finish();
    return t;
}

DriftSpec parse_drift(Object o) {
    DriftSpec d;
    const std::string kind = o.text("kind");
    if (kind == "none") {
        d.kind = DriftSpec::Kind::None;
    } else if (kind == "oscillator") {
        d.kind = DriftSpec::Kind::Oscillator;
        d.k_dist = o.number("k_dist");
    } else if (kind == "traffic") {
        d.kind = DriftSpec::Kind::Traffic;
        d.v_max = o.number("v_max");
        d.delta_s = o.number_or("delta_s", 0.0);
        d.beta = o.number("beta");
    } else if (kind == "terrain") {
        d.kind = DriftSpec::Kind::Terrain;
        d.h1 = o.number("h1");
        d.h2 = o.number("h2");
    } else {
        fail("drift.kind must be 'none', 'oscillator', 'traffic' or 'terrain'");
    }
    o.finish();
    return d;
}

InitialSpec parse_initial(Object o) {
    InitialSpec i;
    const std::string kind = o.text("kind");
    if (kind == "uniform") {
        i.kind = InitialSpec::Kind::Uniform;
    } else if (kind == "von_mises") {
        i.kind = InitialSpec::Kind::VonMises;
        i.kappa = o.number("kappa");
        i.mu = o.number_or("mu", 0.0);
    } else {
        fail("initial.kind must be 'uniform' or 'von_mises'");
    }
    o.finish();
    return i;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario: parse error: ") + e.what());
    }
    Object root(j, "");
    Scenario s;
    s.name = root.text("name");

    const std::string mode = root.text("mode");
    if (mode == "macro")
        s.mode = RunMode::MacroPde;
    else if (mode == "micro")
        s.mode = RunMode::MicroAgents;
    else
        fail("mode must be 'macro' or 'micro'");

    s.dimension = static_cast<int>(root.integer("dimension"));

    {
        Object og = root.object("grid");
        s.grid.half_width = og.number("half_width");
        const json& nc = og.raw("n_cells");
        if (nc.is_number_integer()) {
            s.grid.n1 = s.grid.n2 = nc.get<int>();
        } else if (nc.is_array() && nc.size() == 2 && nc[0].is_number_integer() &&
                   nc[1].is_number_integer()) {
            s.grid.n1 = nc[0].get<int>();
            s.grid.n2 = nc[1].get<int>();
        } else {
            fail("grid.n_cells must be an integer or a pair of integers");
        }
        s.grid.boundary = parse_boundary(og.text("boundary"));
        og.finish();
    }

    s.target = parse_target(root.object("target"));
    if (!s.target.image_path.empty() && !base_dir.empty()) {
        std::filesystem::path p(s.target.image_path);
        if (p.is_relative()) s.target.image_path = (std::filesystem::path(base_dir) / p).string();
    }

    s.diffusion = root.number("diffusion");

    {
        const json& kb = root.raw("disturbance_bound");
        if (!kb.is_array() || kb.empty()) fail("disturbance_bound must be a nonempty array");
        for (const auto& v : kb) {
            if (!v.is_number()) fail("disturbance_bound entries must be numbers");
            s.disturbance_bound.push_back(v.get<double>());
        }
    }

    s.drift = root.has("drift") ? parse_drift(root.object("drift")) : DriftSpec{};

    {
        Object g = root.object("gains");
        s.gains.k_p = g.number("k_p");
        s.gains.ks_safety = g.number("ks_safety");
        s.gains.epsilon = g.number("epsilon");
        const std::string m = g.text("ks_mode");
        if (m == "static")
            s.gains.ks_mode = SwitchingGainMode::StaticPeriodic;
        else if (m == "dynamic")
            s.gains.ks_mode = SwitchingGainMode::Dynamic;
        else
            fail("gains.ks_mode must be 'static' or 'dynamic'");
        s.gains.rho_floor = g.number_or("rho_floor", 0.0);
        g.finish();
    }

    {
        const std::string b = root.text_or("bounding", "upper");
        if (b == "upper")
            s.bounding = BoundingSide::Upper;
        else if (b == "lower")
            s.bounding = BoundingSide::Lower;
        else
            fail("bounding must be 'upper' or 'lower'");
    }

    s.initial = root.has("initial") ? parse_initial(root.object("initial")) : InitialSpec{};
    s.n_agents = static_cast<int>(root.integer_or("n_agents", 0));
    s.bandwidth_sigma = root.number_or("bandwidth_sigma", 0.0);
    s.dt = root.number("dt");
    s.t_final = root.number("t_final");
    s.seed = static_cast<std::uint64_t>(root.integer_or("seed", 1));

    if (root.has("output")) {
        Object oo = root.object("output");
        s.output.metrics_every = static_cast<int>(oo.integer_or("metrics_every", 1));
        s.output.snapshots_every = static_cast<int>(oo.integer_or("snapshots_every", 0));
        oo.finish();
    }
    s.velocity_scale = root.number_or("velocity_scale", 0.0);

    if (root.has("sweep")) {
        Object os = root.object("sweep");
        SweepSpec sw;
        sw.param = os.text("param");
        const json& vals = os.raw("values");
        if (!vals.is_array()) fail("sweep.values must be an array");
        for (const auto& v : vals) {
            if (!v.is_number()) fail("sweep.values entries must be numbers");
            sw.values.push_back(v.get<double>());
        }
        os.finish();
        s.sweep = std::move(sw);
    }

    root.finish();
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str(),
                                   std::filesystem::path(path).parent_path().string());
}

void validate_scenario(const Scenario& s) {
    if (s.name.empty()) fail("name must not be empty");
    if (s.dimension != 1 && s.dimension != 2) fail("dimension must be 1 or 2");
    if (s.grid.half_width <= 0.0) fail("grid.half_width must be positive");
    if (s.grid.n1 < 4 || (s.dimension == 2 && s.grid.n2 < 4))
        fail("grid.n_cells must be at least 4 per axis");
    if (static_cast<int>(s.disturbance_bound.size()) != s.dimension)
        fail("disturbance_bound must have one entry per dimension");
    for (double k : s.disturbance_bound)
        if (k < 0.0) fail("disturbance_bound entries must be nonnegative");

    try {
        s.gains.validate();
    } catch (const std::exception& e) {
        fail(e.what());
    }

    if (s.dt <= 0.0) fail("dt must be positive");
    if (s.t_final < s.dt) fail("t_final must be at least dt");

    // target/dimension consistency
    if (s.dimension == 1 && s.target.kind != TargetSpec::Kind::VonMises)
        fail("1D scenarios take a von_mises target");
    if (s.dimension == 2 && s.target.kind == TargetSpec::Kind::VonMises)
        fail("2D scenarios take a bivariate_von_mises or image target");
    if (s.target.kind != TargetSpec::Kind::Image && s.grid.boundary != BoundaryKind::Periodic)
        fail("von Mises targets require a periodic grid");
    if (s.target.kind == TargetSpec::Kind::VonMises && s.target.kappa < 0.0)
        fail("target.kappa must be nonnegative");
    if (s.target.mu_rate != 0.0 && s.mode == RunMode::MacroPde && s.dimension == 2)
        fail("2D tracking targets are not supported");

    // drift/mode consistency
    switch (s.drift.kind) {
        case DriftSpec::Kind::None:
            break;
        case DriftSpec::Kind::Oscillator:
            if (s.mode != RunMode::MicroAgents || s.dimension != 1)
                fail("oscillator drift requires a 1D micro scenario");
            if (s.drift.k_dist < 0.0) fail("drift.k_dist must be nonnegative");
            break;
        case DriftSpec::Kind::Traffic:
            if (s.mode != RunMode::MicroAgents || s.dimension != 1)
                fail("traffic drift requires a 1D micro scenario");
            if (s.drift.v_max <= 0.0) fail("drift.v_max must be positive");
            if (s.drift.delta_s < 0.0) fail("drift.delta_s must be nonnegative");
            if (s.grid.boundary != BoundaryKind::Periodic)
                fail("traffic runs on a periodic ring");
            break;
        case DriftSpec::Kind::Terrain:
            if (s.mode != RunMode::MicroAgents || s.dimension != 2)
                fail("terrain drift requires a 2D micro scenario");
            break;
    }

    if (s.mode == RunMode::MicroAgents) {
        if (s.n_agents < 1) fail("micro scenarios need n_agents >= 1");
        if (s.drift.kind == DriftSpec::Kind::Traffic && s.n_agents < 2)
            fail("traffic needs at least two vehicles");
    }
    if (s.bandwidth_sigma < 0.0) fail("bandwidth_sigma must be nonnegative");
    if (s.output.metrics_every < 1) fail("output.metrics_every must be at least 1");
    if (s.output.snapshots_every < 0) fail("output.snapshots_every must be nonnegative");

    // up-front CFL feasibility for the PDE modes
    if (s.mode == RunMode::MacroPde) {
        double kmax = 0.0;
        for (double k : s.disturbance_bound) kmax = std::max(kmax, k);
        const double vscale = (s.velocity_scale > 0.0 ? s.velocity_scale : kmax) + kmax;
        const double dx = 2.0 * s.grid.half_width / s.grid.n1;
        const double limit = s.dimension == 1 ? 1.0 : 0.5;
        const double adv = vscale * s.dt / dx;
        if (adv > limit) {
            std::ostringstream os;
            os << "advective CFL " << adv << " exceeds " << limit
               << " for the declared velocity scale (dt too large for this grid)";
            fail(os.str());
        }
        if (s.dimension == 1) {
            const double diff = s.diffusion * s.dt / (dx * dx);
            if (diff > 0.5) fail("diffusive number exceeds 0.5 (explicit 1D diffusion)");
        }
    }

    if (s.sweep) {
        if (s.sweep->param.empty()) fail("sweep.param must not be empty");
        // reject unknown sweep parameters early
        Scenario probe = s;
        probe.sweep.reset();
        try {
            apply_override(probe, s.sweep->param, s.sweep->values.empty()
                                                      ? s.dt
                                                      : s.sweep->values.front());
        } catch (const ScenarioError&) {
            fail("sweep.param '" + s.sweep->param + "' is not a sweepable parameter");
        }
    }
}

namespace {

json grid_to_json(const GridSpec& g, int dimension) {
    json j;
    j["half_width"] = g.half_width;
    if (dimension == 2)
        j["n_cells"] = json::array({g.n1, g.n2});
    else
        j["n_cells"] = g.n1;
    j["boundary"] = g.boundary == BoundaryKind::Periodic ? "periodic" : "reflective";
    return j;
}

json target_to_json(const TargetSpec& t) {
    json j;
    switch (t.kind) {
        case TargetSpec::Kind::VonMises:
            j["kind"] = "von_mises";
            j["kappa"] = t.kappa;
            j["mu"] = t.mu;
            j["mu_rate"] = t.mu_rate;
            break;
        case TargetSpec::Kind::BivariateVonMises:
            j["kind"] = "bivariate_von_mises";
            j["kappa1"] = t.kappa;
            j["kappa2"] = t.kappa2;
            j["mu"] = t.mu;
            j["nu"] = t.nu;
            break;
        case TargetSpec::Kind::Image:
            j["kind"] = "image";
            j["path"] = t.image_path;
            j["smoothing_sigma"] = t.image_sigma;
            j["invert"] = t.invert;
            break;
    }
    return j;
}

json drift_to_json(const DriftSpec& d) {
    json j;
    switch (d.kind) {
        case DriftSpec::Kind::None:
            j["kind"] = "none";
            break;
        case DriftSpec::Kind::Oscillator:
            j["kind"] = "oscillator";
            j["k_dist"] = d.k_dist;
            break;
        case DriftSpec::Kind::Traffic:
            j["kind"] = "traffic";
            j["v_max"] = d.v_max;
            j["delta_s"] = d.delta_s;
            j["beta"] = d.beta;
            break;
        case DriftSpec::Kind::Terrain:
            j["kind"] = "terrain";
            j["h1"] = d.h1;
            j["h2"] = d.h2;
            break;
    }
    return j;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["mode"] = s.mode == RunMode::MacroPde ? "macro" : "micro";
    j["dimension"] = s.dimension;
    j["grid"] = grid_to_json(s.grid, s.dimension);
    j["target"] = target_to_json(s.target);
    j["diffusion"] = s.diffusion;
    j["disturbance_bound"] = s.disturbance_bound;
    j["drift"] = drift_to_json(s.drift);
    j["gains"] = {
        {"k_p", s.gains.k_p},
        {"ks_safety", s.gains.ks_safety},
        {"epsilon", s.gains.epsilon},
        {"ks_mode", s.gains.ks_mode == SwitchingGainMode::Dynamic ? "dynamic" : "static"},
        {"rho_floor", s.gains.rho_floor},
    };
    j["bounding"] = s.bounding == BoundingSide::Upper ? "upper" : "lower";
    json init;
    init["kind"] = s.initial.kind == InitialSpec::Kind::Uniform ? "uniform" : "von_mises";
    if (s.initial.kind == InitialSpec::Kind::VonMises) {
        init["kappa"] = s.initial.kappa;
        init["mu"] = s.initial.mu;
    }
    j["initial"] = std::move(init);
    j["n_agents"] = s.n_agents;
    j["bandwidth_sigma"] = s.bandwidth_sigma;
    j["dt"] = s.dt;
    j["t_final"] = s.t_final;
    j["seed"] = s.seed;
    j["output"] = {{"metrics_every", s.output.metrics_every},
                   {"snapshots_every", s.output.snapshots_every}};
    j["velocity_scale"] = s.velocity_scale;
    if (s.sweep) j["sweep"] = {{"param", s.sweep->param}, {"values", s.sweep->values}};
    return j.dump(2);
}

std::string scenario_hash(const Scenario& s) {
    // canonical dump: nlohmann objects iterate in key order
    const std::string canon = scenario_to_json(s);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void apply_override(Scenario& s, const std::string& param, double value) {
    if (param == "k_dist") {
        if (s.drift.kind != DriftSpec::Kind::Oscillator)
            throw ScenarioError("scenario: k_dist override needs an oscillator drift");
        s.drift.k_dist = value;
    } else if (param == "epsilon") {
        s.gains.epsilon = value;
    } else if (param == "k_p") {
        s.gains.k_p = value;
    } else if (param == "ks_safety") {
        s.gains.ks_safety = value;
    } else if (param == "diffusion") {
        s.diffusion = value;
    } else if (param == "dt") {
        s.dt = value;
    } else if (param == "t_final") {
        s.t_final = value;
    } else if (param == "n_agents") {
        s.n_agents = static_cast<int>(value);
    } else if (param == "n_cells") {
        s.grid.n1 = s.grid.n2 = static_cast<int>(value);
    } else if (param == "seed") {
        s.seed = static_cast<std::uint64_t>(value);
    } else if (param == "bandwidth_sigma") {
        s.bandwidth_sigma = value;
    } else if (param == "metrics_every") {
        s.output.metrics_every = static_cast<int>(value);
    } else if (param == "snapshots_every") {
        s.output.snapshots_every = static_cast<int>(value);
    } else {
        throw ScenarioError("scenario: unknown parameter '" + param + "'");
    }
}

}  // namespace densctl
