// Command-line front end: validate scenarios, execute runs and sweeps,
// check the exponential error bound on recorded metrics.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "densctl/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitRuntime = 2;

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::stod(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

void apply_cli_overrides(densctl::Scenario& s, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw densctl::ScenarioError("override must look like key=value: " + ov);
        densctl::apply_override(s, ov.substr(0, eq), std::stod(ov.substr(eq + 1)));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"macroscopic density control simulations"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, param, values_csv, metrics_path;
    std::vector<std::string> overrides;
    long seed = -1;
    int workers = 1;
    double kp = 1.0, slack = 0.0, floor_value = 0.0;

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario file");
    validate->add_option("scenario", scenario_path)->required();

    CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario");
    run_cmd->add_option("scenario", scenario_path)->required();
    run_cmd->add_option("--seed", seed, "override the scenario seed");
    run_cmd->add_option("--out", out_dir, "directory for metrics/density/record outputs");
    run_cmd->add_option("--override", overrides, "parameter override key=value; repeatable");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a one-parameter sweep");
    sweep_cmd->add_option("scenario", scenario_path)->required();
    sweep_cmd->add_option("--param", param, "parameter name (defaults to the file's sweep block)");
    sweep_cmd->add_option("--values", values_csv, "comma-separated values");
    sweep_cmd->add_option("--out", out_dir, "directory; one subdirectory per value");
    sweep_cmd->add_option("--workers", workers, "concurrent runs");
    sweep_cmd->add_option("--seed", seed, "override the scenario seed");

    CLI::App* check = app.add_subcommand("check-bound", "verify the exponential error bound");
    check->add_option("metrics", metrics_path)->required();
    check->add_option("--kp", kp, "decay rate")->required();
    check->add_option("--slack", slack, "relative slack on the bound")->required();
    check->add_option("--floor", floor_value, "ignore samples at or below this error")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            densctl::Scenario s = densctl::load_scenario(scenario_path);
            std::printf("ok: %s (hash %s)\n", s.name.c_str(),
                        densctl::scenario_hash(s).c_str());
            return kExitOk;
        }

        if (run_cmd->parsed()) {
            densctl::Scenario s = densctl::load_scenario(scenario_path);
            apply_cli_overrides(s, overrides);
            if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
            const densctl::RunRecord rec = densctl::run(s);
            const auto& e = rec.metrics.column("l2_error");
            std::printf("%s: %zu metric rows, l2_error %.6g -> %.6g, %.2fs\n",
                        rec.scenario_name.c_str(), rec.metrics.rows.size(), e.front(), e.back(),
                        rec.wall_seconds);
            if (!out_dir.empty()) densctl::write_run_outputs(rec, out_dir);
            return kExitOk;
        }

        if (sweep_cmd->parsed()) {
            densctl::Scenario s = densctl::load_scenario(scenario_path);
            if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
            std::vector<double> values;
            if (!param.empty()) {
                values = parse_values(values_csv);
            } else if (s.sweep) {
                param = s.sweep->param;
                values = s.sweep->values;
            } else {
                std::fprintf(stderr, "sweep: no --param given and no sweep block in file\n");
                return kExitCheckFailed;
            }
            const auto records = densctl::sweep(s, param, values, workers);
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& e = records[i].metrics.column("l2_error");
                std::printf("%s=%g: final l2_error %.6g\n", param.c_str(), values[i], e.back());
                if (!out_dir.empty()) {
                    char sub[64];
                    std::snprintf(sub, sizeof sub, "%s_%g", param.c_str(), values[i]);
                    densctl::write_run_outputs(records[i], out_dir + "/" + sub);
                }
            }
            return kExitOk;
        }

        if (check->parsed()) {
            const densctl::MetricsTable t = densctl::metrics_from_csv_file(metrics_path);
            const auto ts = t.column("t");
            const auto es = t.column("l2_error");
            const auto res = densctl::exponential_bound_check(ts, es, kp, slack, floor_value);
            if (res.pass) {
                std::printf("pass: %d samples above floor satisfy the bound\n",
                            res.samples_checked);
                return kExitOk;
            }
            std::printf("fail: first violation at t = %.6g\n", res.first_violation_t);
            return kExitCheckFailed;
        }
    } catch (const densctl::ScenarioError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
