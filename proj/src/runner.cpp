#include "subdual/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "subdual/conv.hpp"
#include "subdual/estimates.hpp"
#include "subdual/resolvent.hpp"
#include "subdual/solver.hpp"
#include "subdual/spectral.hpp"
#include "subdual/util.hpp"

namespace subdual {

namespace fs = std::filesystem;

std::string csv_join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary); // binary keeps summaries byte-identical
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void ensure_dir(const std::string& path) {
    if (!path.empty()) fs::create_directories(path);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                  suffix) == 0;
}

// --out accepts either a target .csv file or a directory to drop files into
std::string resolve_out(const std::string& out, const std::string& default_name) {
    if (ends_with(out, ".csv")) return out;
    ensure_dir(out);
    return (fs::path(out) / default_name).string();
}

// directory artifacts (reports, summary) live next to an explicit output file
std::string artifact_dir(const std::string& out) {
    if (!ends_with(out, ".csv") && !ends_with(out, ".json")) return out;
    const std::string parent = fs::path(out).parent_path().string();
    return parent.empty() ? std::string(".") : parent;
}

std::string in_dir(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// machine-readable run summary: id, wall time, pass counts, exit state
void write_run_summary(const std::string& path, const std::string& command,
                       const RunConfig& cfg, const RunArtifacts& art, double wall_seconds) {
    int passed = 0, failed = 0;
    for (const auto& r : art.reports) (r.passed ? passed : failed)++;
    const std::string run_id =
        command + "-" + hex16(fnv1a(command) ^ cfg.seed ^ fnv1a(std::to_string(cfg.N)));
    std::string json = "{\n";
    json += "  \"run_id\": \"" + run_id + "\",\n";
    json += "  \"command\": \"" + command + "\",\n";
    json += "  \"wall_seconds\": " + fmt17(wall_seconds) + ",\n";
    json += "  \"reports_passed\": " + std::to_string(passed) + ",\n";
    json += "  \"reports_failed\": " + std::to_string(failed) + ",\n";
    json += "  \"exit_code\": " + std::to_string(art.exit_code) + ",\n";
    json += "  \"failed_stage\": \"" + art.failed_stage + "\",\n";
    json += "  \"files\": [";
    for (std::size_t i = 0; i < art.files_written.size(); ++i) {
        if (i) json += ", ";
        json += "\"" + art.files_written[i] + "\"";
    }
    json += "]\n}\n";
    write_text_file(path, json);
}

// random low-frequency Fourier path sampled on cell midpoints
std::vector<double> smooth_random_path(Rng& rng, const TimeGrid& grid) {
    constexpr int modes = 6;
    double a[modes], b[modes];
    for (int j = 0; j < modes; ++j) {
        a[j] = rng.normal() / (j + 1);
        b[j] = rng.normal() / (j + 1);
    }
    std::vector<double> v(grid.N);
    for (int i = 0; i < grid.N; ++i) {
        const double s = grid.mid(i) / grid.T;
        double acc = 0.0;
        for (int j = 0; j < modes; ++j)
            acc += a[j] * std::sin(2.0 * M_PI * (j + 1) * s) +
                   b[j] * std::cos(2.0 * M_PI * (j + 1) * s);
        v[i] = acc;
    }
    return v;
}

// Lazily materialized run state shared by the verify/solve/sweep pipelines;
// each piece is built at most once no matter how many estimates ask for it.
struct RunState {
    const RunConfig& cfg;
    std::string kernel_warning;
    SolveStats stats;

    explicit RunState(const RunConfig& c) : cfg(c) {}

    const ProblemSpec& spec() {
        if (!spec_) {
            spec_ = cfg.problem(&kernel_warning);
            spec_->validate();
        }
        return *spec_;
    }

    const SpectralOperator& opr() {
        if (!opr_) {
            if (!cfg.has_spectral)
                throw ValidationError({"spectral run requested without a [spectral] section"});
            opr_ = SpectralOperator::fractional(cfg.L, cfg.M, cfg.beta);
        }
        return *opr_;
    }

    const Field& solution() {
        if (!u_) {
            if (cfg.has_spectral)
                u_ = solve_nonlocal_pme(spec(), opr(), &stats);
            else
                u_ = solve(spec(), cfg.solve_method(), &stats);
        }
        return *u_;
    }

    const ReactionRun& reaction() {
        if (!react_) {
            if (!cfg.has_reaction)
                throw ValidationError({"reaction run requested without a [reaction] section"});
            if (cfg.bc != BC::Neumann)
                throw ValidationError({"reaction runs need space.bc = \"neumann\""});
            react_ = simulate(cfg.reaction_spec(),
                              cfg.kernel.make_pair(cfg.time_grid(), &kernel_warning),
                              cfg.time_grid(), cfg.space_grid());
        }
        return *react_;
    }

    EstimateReport compute(const std::string& id) {
        if (id == "galpha") {
            const TimeGrid grid = cfg.time_grid();
            Rng rng(cfg.seed);
            return verify_galpha(smooth_random_path(rng, grid), cfg.kernel.alpha, grid);
        }
        if (id == "entropy") return verify_entropy(reaction());
        if (id == "uniqueness") return uniqueness_gap(spec()).report;
        if (id == "spectral") return verify_spectral(solution(), spec(), opr());

        const Field& u = solution();
        const ProblemSpec& sp = spec();
        const Field w = derive_w(sp, u);
        const Field f = derive_f_cells(sp);
        const std::vector<double> u0 = sp.u0_values();
        if (id == "basic") return verify_basic(u, w, u0, f, sp.pair, sp.tgrid, sp.sgrid);
        if (id == "basic-alt") return verify_basic_alt(u, w, u0, f, sp.pair, sp.tgrid, sp.sgrid);
        if (id == "triple") return verify_triple(u, w, u0, f, sp.pair, sp.tgrid, sp.sgrid);
        if (id == "pme") return verify_pme(u, sp);
        throw ValidationError({"unknown estimate '" + id + "'"});
    }

  private:
    std::optional<ProblemSpec> spec_;
    std::optional<SpectralOperator> opr_;
    std::optional<Field> u_;
    std::optional<ReactionRun> react_;
};

// runs the requested estimates; path_for(id) names the report file ("" = no file)
void run_estimates(RunState& state, const std::vector<std::string>& ids,
                   const std::function<std::string(const std::string&)>& path_for,
                   RunArtifacts& art) {
    for (const auto& id : ids) {
        EstimateReport rep;
        try {
            rep = state.compute(id);
        } catch (const StepFailure&) {
            art.exit_code = exit_solver_failed;
            art.failed_stage = "solver";
            return;
        }
        const std::string path = path_for ? path_for(id) : std::string();
        if (!path.empty()) {
            write_text_file(path, rep.to_json() + "\n");
            art.files_written.push_back(path);
        }
        art.reports.push_back(std::move(rep));
    }
    for (const auto& rep : art.reports)
        if (!rep.passed) {
            art.exit_code = exit_verify_failed;
            art.failed_stage = "verify";
        }
}

} // namespace

RunArtifacts run_resolvent(const RunConfig& cfg, const std::string& out_dir) {
    RunArtifacts art;
    const TimeGrid grid = cfg.time_grid();
    std::string warn;
    const KernelPair pair = cfg.kernel.make_pair(grid, &warn);
    const ResolventFamily fam = resolvent_family(pair.l, cfg.gamma, grid);

    if (!out_dir.empty()) {
        std::string csv = "t,s,r,h,k_reg\n";
        for (int i = 0; i < grid.N; ++i) {
            csv += csv_join({fmt17(grid.right(i)), fmt17(fam.s[i]), fmt17(fam.r[i]),
                             fmt17(fam.h[i]), fmt17(fam.k_reg[i])});
            csv += '\n';
        }
        const std::string path = resolve_out(out_dir, "resolvent.csv");
        write_text_file(path, csv);
        art.files_written.push_back(path);
    }
    return art;
}

RunArtifacts run_identities(const RunConfig& cfg, const std::string& out_dir) {
    RunArtifacts art;
    const TimeGrid grid = cfg.time_grid();
    std::string warn;
    const KernelPair pair = cfg.kernel.make_pair(grid, &warn);
    const int N = grid.N;

    Rng rng(cfg.seed);
    std::vector<double> f(N), g(N);
    for (int i = 0; i < N; ++i) f[i] = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < N; ++i) g[i] = rng.uniform(-1.0, 1.0);

    std::vector<std::pair<std::string, double>> rows;

    const auto op = ConvOperator::from_kernel(pair.k, grid);
    const double r_dual =
        std::abs(inner(grid, op.conv(f), g) - inner(grid, f, op.dual(g)));
    rows.emplace_back("duality", r_dual);

    if (!pair.k.power_terms().empty() && !pair.l.power_terms().empty())
        rows.emplace_back("successive_dual", check_successive_dual(pair.k, pair.l, g, grid));

    // bounded regularization k_8 = 8 s_8 feeds the duality that needs k(0)
    const Kernel k8 = regularized_kernel(pair, 8, grid);
    std::vector<double> fs(N), gs(N), v(N + 1);
    for (int i = 0; i < N; ++i) fs[i] = std::sin(2.0 * M_PI * grid.mid(i) / grid.T);
    for (int i = 0; i < N; ++i) gs[i] = std::cos(M_PI * grid.mid(i) / grid.T);
    for (int i = 0; i <= N; ++i) v[i] = 1.0 + 0.5 * std::sin(2.0 * M_PI * grid.node(i) / grid.T);
    rows.emplace_back("integrodiff", check_integrodiff_duality(k8, fs, gs, grid));

    // the pointwise identity needs k' integrable away from 0, so it gets a
    // smooth bounded kernel rather than k_8 (whose derivative blows up at 0+)
    std::vector<double> kt, kv;
    for (int i = 0; i <= 4 * N; ++i) {
        kt.push_back(grid.T * i / (4 * N));
        kv.push_back(std::exp(-kt.back()));
    }
    rows.emplace_back("fundamental",
                      check_fundamental_identity(Kernel::tabulated_samples(kt, kv), v, grid));

    // discrete companion solves W_k lambda = 1 exactly; residual is rounding
    const Kernel comp = companion_kernel(pair.k, grid, &warn);
    std::vector<double> lam(N);
    for (int i = 0; i < N; ++i) lam[i] = comp.eval(grid.mid(i));
    const auto ones = op.conv(lam);
    double r_comp = 0.0;
    for (double x : ones) r_comp = std::max(r_comp, std::abs(x - 1.0));
    rows.emplace_back("companion", r_comp);

    if (!out_dir.empty()) {
        std::string csv = "identity,N,residual\n";
        for (const auto& [name, res] : rows)
            csv += csv_join({name, std::to_string(N), fmt17(res)}) + "\n";
        const std::string path = resolve_out(out_dir, "identities.csv");
        write_text_file(path, csv);
        art.files_written.push_back(path);
    }

    const double tol_dual = 1e-12 * std::max(1.0, norm2(f) * norm2(g));
    if (r_dual > tol_dual || r_comp > pair.eps_pair) {
        art.exit_code = exit_verify_failed;
        art.failed_stage = "identities";
    }
    return art;
}

RunArtifacts run_solve(const RunConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    RunArtifacts art;
    RunState state(cfg);
    try {
        state.solution();
    } catch (const StepFailure&) {
        art.exit_code = exit_solver_failed;
        art.failed_stage = "solver";
        return art;
    }

    const std::string dir = out_dir.empty() ? std::string() : artifact_dir(out_dir);
    if (!out_dir.empty()) {
        const Field& u = state.solution();
        const TimeGrid& tg = state.spec().tgrid;
        const SpaceGrid& sg = state.spec().sgrid;
        std::string csv = sg.dim == 1 ? "t,x,u\n" : "t,x,y,u\n";
        for (int n = 0; n <= tg.N; ++n)
            for (int j = 0; j < sg.npoints(); ++j) {
                std::vector<std::string> cells{fmt17(tg.node(n)), fmt17(sg.x_of(j))};
                if (sg.dim == 2) cells.push_back(fmt17(sg.y_of(j)));
                cells.push_back(fmt17(u.at(n, j)));
                csv += csv_join(cells) + "\n";
            }
        const std::string path = resolve_out(out_dir, "traj.csv");
        write_text_file(path, csv);
        art.files_written.push_back(path);
    }

    run_estimates(state, cfg.verify,
                  [&](const std::string& id) {
                      return dir.empty() ? std::string()
                                         : in_dir(dir, "report_" + id + ".json");
                  },
                  art);

    if (!dir.empty())
        write_run_summary(in_dir(dir, "summary.json"), "solve", cfg, art, seconds_since(t0));
    return art;
}

RunArtifacts run_react(const RunConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    RunArtifacts art;
    RunState state(cfg);
    try {
        state.reaction();
    } catch (const ValidationError&) {
        throw;
    } catch (const StepFailure&) {
        art.exit_code = exit_solver_failed;
        art.failed_stage = "solver";
        return art;
    } catch (const std::runtime_error&) { // positivity breach aborts the run
        art.exit_code = exit_solver_failed;
        art.failed_stage = "solver";
        return art;
    }

    const ReactionRun& run = state.reaction();
    const TimeGrid& tg = run.tgrid;
    const SpaceGrid& sg = run.sgrid;

    // --out is a prefix: <prefix>_c1.csv ... (or plain names inside dir/)
    const auto prefixed = [&](const std::string& name) {
        if (out_dir.empty()) return std::string();
        if (ends_with(out_dir, "/")) return out_dir + name;
        return out_dir + "_" + name;
    };

    if (!out_dir.empty()) {
        for (int s = 0; s < 4; ++s) {
            std::string csv = sg.dim == 1 ? "t,x,c\n" : "t,x,y,c\n";
            for (int n = 0; n <= tg.N; ++n)
                for (int j = 0; j < sg.npoints(); ++j) {
                    std::vector<std::string> cells{fmt17(tg.node(n)), fmt17(sg.x_of(j))};
                    if (sg.dim == 2) cells.push_back(fmt17(sg.y_of(j)));
                    cells.push_back(fmt17(run.c[s].at(n, j)));
                    csv += csv_join(cells) + "\n";
                }
            const std::string path = prefixed("c" + std::to_string(s + 1) + ".csv");
            write_text_file(path, csv);
            art.files_written.push_back(path);
        }

        const MassCombination mc = mass_combination(run);
        const auto res = mass_combination_residuals(run, mc);
        const double meas = std::pow(sg.h(), sg.dim);
        const auto phi = [](double s) { return s > 0.0 ? s * std::log(s) - s + 1.0 : 1.0; };
        std::string csv = "t,min_c,u_residual,entropy\n";
        for (int n = 0; n <= tg.N; ++n) {
            double cmin = std::numeric_limits<double>::infinity();
            double ent = 0.0;
            for (int j = 0; j < sg.npoints(); ++j)
                for (int s = 0; s < 4; ++s) {
                    cmin = std::min(cmin, run.c[s].at(n, j));
                    ent += meas * phi(run.c[s].at(n, j));
                }
            csv += csv_join({fmt17(tg.node(n)), fmt17(cmin), fmt17(res[n]), fmt17(ent)}) + "\n";
        }
        const std::string path = prefixed("diagnostics.csv");
        write_text_file(path, csv);
        art.files_written.push_back(path);
    }

    run_estimates(state, cfg.verify,
                  [&](const std::string& id) { return prefixed("report_" + id + ".json"); },
                  art);

    if (!out_dir.empty())
        write_run_summary(prefixed("summary.json"), "react", cfg, art, seconds_since(t0));
    return art;
}

RunArtifacts run_verify(const RunConfig& cfg, const std::vector<std::string>& estimates,
                        const std::string& out_dir) {
    const auto t0 = Clock::now();
    RunArtifacts art;
    const std::vector<std::string> ids = estimates.empty() ? cfg.verify : estimates;
    if (ids.empty())
        throw ValidationError({"no estimates requested (set [verify] estimates or --estimate)"});

    RunState state(cfg);
    if (ends_with(out_dir, ".json") && ids.size() == 1) {
        run_estimates(state, ids, [&](const std::string&) { return out_dir; }, art);
        return art;
    }

    if (!out_dir.empty()) ensure_dir(out_dir);
    run_estimates(state, ids,
                  [&](const std::string& id) {
                      return out_dir.empty() ? std::string()
                                             : in_dir(out_dir, "report_" + id + ".json");
                  },
                  art);
    if (!out_dir.empty())
        write_run_summary(in_dir(out_dir, "summary.json"), "verify", cfg, art,
                          seconds_since(t0));
    return art;
}

// --------------------------------------------------------------------- sweep

namespace {

struct SweepCell {
    double alpha, m, beta;
    int N, M;
};

struct SweepRow {
    SweepCell cell{};
    double min_margin = std::numeric_limits<double>::quiet_NaN();
    int passed = 0, failed = 0;
    double error = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
};

SweepRow run_cell(const RunConfig& base, const SweepCell& cell, std::uint64_t cell_seed) {
    SweepRow row;
    row.cell = cell;

    RunConfig cfg = base;
    cfg.kernel.alpha = cell.alpha;
    cfg.m = cell.m;
    cfg.N = cell.N;
    cfg.M = cell.M;
    cfg.beta = cell.beta;
    cfg.seed = cell_seed;
    cfg.sweep = SweepAxes{};

    try {
        RunState state(cfg);
        const Field& u = state.solution();

        if (!base.uexact_expr.empty()) {
            const Expr ue = Expr::parse(base.uexact_expr);
            const TimeGrid tg = cfg.time_grid();
            const SpaceGrid sg = cfg.space_grid();
            double err = 0.0;
            for (int n = 0; n <= tg.N; ++n)
                for (int j = 0; j < sg.npoints(); ++j)
                    err = std::max(err, std::abs(u.at(n, j) -
                                                 ue.eval(tg.node(n), sg.x_of(j), sg.y_of(j))));
            row.error = err;
        } else {
            row.error = state.stats.max_step_residual;
        }

        for (const auto& id : cfg.verify) {
            const EstimateReport rep = state.compute(id);
            if (rep.passed)
                ++row.passed;
            else
                ++row.failed;
            if (std::isnan(row.min_margin) || rep.margin < row.min_margin)
                row.min_margin = rep.margin;
        }
        if (row.failed > 0) row.status = "verify_failed";
    } catch (const ValidationError&) {
        row.status = "config_error";
    } catch (const std::domain_error&) {
        row.status = "config_error";
    } catch (const std::exception&) {
        row.status = "solver_failed";
    }
    return row;
}

} // namespace

RunArtifacts run_sweep(const RunConfig& cfg, const std::string& out_dir, int workers) {
    RunArtifacts art;

    if (!cfg.sweep.alpha.empty() && cfg.kernel.type != "standard" &&
        cfg.kernel.type != "exp_shifted")
        throw ValidationError({"sweep over alpha needs a standard or exp_shifted kernel"});

    const auto axis_or = [](const std::vector<double>& v, double dflt) {
        return v.empty() ? std::vector<double>{dflt} : v;
    };
    const auto iaxis_or = [](const std::vector<int>& v, int dflt) {
        return v.empty() ? std::vector<int>{dflt} : v;
    };
    const auto alphas = axis_or(cfg.sweep.alpha, cfg.kernel.alpha);
    const auto ms = axis_or(cfg.sweep.m, cfg.m);
    const auto Ns = iaxis_or(cfg.sweep.N, cfg.N);
    const auto Ms = iaxis_or(cfg.sweep.M, cfg.M);
    const auto betas = axis_or(cfg.sweep.beta, cfg.beta);

    // lexicographic over (alpha, m, N, M, beta); row order never depends on timing
    std::vector<SweepCell> cells;
    for (double a : alphas)
        for (double m : ms)
            for (int N : Ns)
                for (int M : Ms)
                    for (double b : betas) cells.push_back({a, m, b, N, M});

    std::vector<SweepRow> rows(cells.size());
    std::vector<double> seconds(cells.size(), 0.0);
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            const auto t0 = Clock::now();
            const std::uint64_t cell_seed =
                cfg.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(i + 1));
            rows[i] = run_cell(cfg, cells[i], cell_seed);
            seconds[i] = seconds_since(t0);
        }
    };

    const int nthreads = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::string summary = "alpha,m,N,M,beta,min_margin,passed,failed,error,status\n";
        std::string timings = "alpha,m,N,M,beta,seconds\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            const std::vector<std::string> key{fmt17(r.cell.alpha), fmt17(r.cell.m),
                                               std::to_string(r.cell.N),
                                               std::to_string(r.cell.M), fmt17(r.cell.beta)};
            std::vector<std::string> cells_out = key;
            cells_out.push_back(fmt17(r.min_margin));
            cells_out.push_back(std::to_string(r.passed));
            cells_out.push_back(std::to_string(r.failed));
            cells_out.push_back(fmt17(r.error));
            cells_out.push_back(r.status);
            summary += csv_join(cells_out) + "\n";

            std::vector<std::string> trow = key;
            trow.push_back(fmt17(seconds[i]));
            timings += csv_join(trow) + "\n";
        }
        const std::string spath = in_dir(out_dir, "summary.csv");
        const std::string tpath = in_dir(out_dir, "timings.csv");
        write_text_file(spath, summary);
        write_text_file(tpath, timings);
        art.files_written.push_back(spath);
        art.files_written.push_back(tpath);
    }

    bool any_solver = false, any_bad = false;
    for (const auto& r : rows) {
        if (r.status == "solver_failed") any_solver = true;
        if (r.status != "ok") any_bad = true;
    }
    if (any_solver) {
        art.exit_code = exit_solver_failed;
        art.failed_stage = "sweep";
    } else if (any_bad) {
        art.exit_code = exit_verify_failed;
        art.failed_stage = "sweep";
    }
    return art;
}

} // namespace subdual
