#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "subdual/config.hpp"
#include "subdual/runner.hpp"
#include "subdual/solver.hpp"
#include "subdual/util.hpp"

namespace {

using namespace subdual;

struct GlobalFlags {
    std::string config_path;
    std::string out;
    int workers = 1;
    std::uint64_t seed = 0;
};

void add_global(CLI::App* sub, GlobalFlags& g) {
    sub->add_option("--config", g.config_path, "configuration file");
    sub->add_option("--out", g.out, "output file, directory, or prefix");
    sub->add_option("--workers", g.workers, "parallel sweep workers")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", g.seed, "override the config seed");
}

RunConfig base_config(const GlobalFlags& g, const CLI::App* sub) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    if (sub->count("--seed")) cfg.seed = g.seed;
    if (!g.out.empty()) cfg.out_dir = g.out;
    return cfg;
}

int finish(const RunArtifacts& art) {
    for (const auto& r : art.reports)
        std::printf("%-11s %s  margin=%s\n", r.id.c_str(), r.passed ? "pass" : "FAIL",
                    fmt17(r.margin).c_str());
    for (const auto& f : art.files_written) std::printf("wrote %s\n", f.c_str());
    if (art.exit_code != exit_ok)
        std::fprintf(stderr, "%s stage failed\n", art.failed_stage.c_str());
    return art.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memory-kernel evolution lab: resolvents, dual-convolution estimates, solvers"};
    app.require_subcommand(1);

    GlobalFlags g;

    auto* c_res = app.add_subcommand("resolvent", "emit the relaxation/resolvent family as CSV");
    double r_alpha = 0.5, r_gamma = 1.0, r_T = 1.0;
    int r_steps = 256;
    c_res->add_option("--alpha", r_alpha, "kernel order in (0,1)");
    c_res->add_option("--gamma", r_gamma, "resolvent parameter");
    c_res->add_option("--steps", r_steps, "time steps");
    c_res->add_option("--T", r_T, "time horizon");
    add_global(c_res, g);

    auto* c_id = app.add_subcommand("identities", "convolution-calculus residual table");
    double i_alpha = 0.5, i_T = 1.0;
    int i_steps = 256;
    c_id->add_option("--alpha", i_alpha, "kernel order in (0,1)");
    c_id->add_option("--steps", i_steps, "time steps");
    c_id->add_option("--T", i_T, "time horizon");
    add_global(c_id, g);

    auto* c_solve = app.add_subcommand("solve", "implicit solve of the configured problem");
    add_global(c_solve, g);

    auto* c_react = app.add_subcommand("react", "four-species reaction-diffusion run");
    add_global(c_react, g);

    auto* c_ver = app.add_subcommand("verify", "assemble a-priori estimate reports");
    std::vector<std::string> estimates;
    c_ver->add_option("--estimate", estimates,
                      "estimate id: basic|basic-alt|triple|galpha|pme|entropy|spectral|uniqueness");
    add_global(c_ver, g);

    auto* c_sweep = app.add_subcommand("sweep", "Cartesian parameter sweep with summary CSV");
    add_global(c_sweep, g);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(c_res)) {
            RunConfig cfg = base_config(g, c_res);
            if (c_res->count("--alpha")) {
                cfg.kernel.type = "standard";
                cfg.kernel.alpha = r_alpha;
            }
            if (c_res->count("--gamma")) cfg.gamma = r_gamma;
            if (c_res->count("--steps")) cfg.N = r_steps;
            if (c_res->count("--T")) cfg.T = r_T;
            return finish(run_resolvent(cfg, cfg.out_dir));
        }
        if (app.got_subcommand(c_id)) {
            RunConfig cfg = base_config(g, c_id);
            if (c_id->count("--alpha")) {
                cfg.kernel.type = "standard";
                cfg.kernel.alpha = i_alpha;
            }
            if (c_id->count("--steps")) cfg.N = i_steps;
            if (c_id->count("--T")) cfg.T = i_T;
            RunArtifacts art = run_identities(cfg, cfg.out_dir);
            return finish(art);
        }
        if (app.got_subcommand(c_solve)) {
            RunConfig cfg = base_config(g, c_solve);
            return finish(run_solve(cfg, cfg.out_dir));
        }
        if (app.got_subcommand(c_react)) {
            RunConfig cfg = base_config(g, c_react);
            return finish(run_react(cfg, cfg.out_dir));
        }
        if (app.got_subcommand(c_ver)) {
            RunConfig cfg = base_config(g, c_ver);
            return finish(run_verify(cfg, estimates, cfg.out_dir));
        }
        if (app.got_subcommand(c_sweep)) {
            RunConfig cfg = base_config(g, c_sweep);
            return finish(run_sweep(cfg, cfg.out_dir, g.workers));
        }
    } catch (const ValidationError& e) {
        for (const auto& item : e.items)
            std::fprintf(stderr, "config error: %s\n", item.c_str());
        return exit_config_error;
    } catch (const StepFailure& e) {
        std::fprintf(stderr, "solver stage failed: step %d, residual %s (%s)\n", e.step,
                     fmt17(e.residual).c_str(), e.what());
        return exit_solver_failed;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "solver stage failed: %s\n", e.what());
        return exit_solver_failed;
    }
    return exit_ok;
}
