#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subdual/kernels.hpp"
#include "subdual/problem.hpp"
#include "subdual/reaction.hpp"

namespace subdual {

// Arithmetic expression in the variables t, x, y with the constant pi and the
// functions sin cos exp sqrt pow abs log sinh tanh. Parsed once, evaluated many
// times per assembly; parse errors carry the offending position.
class Expr {
  public:
    static Expr parse(const std::string& src);
    double eval(double t, double x, double y) const;
    const std::string& source() const { return src_; }

    struct Node;

  private:
    std::string src_;
    std::shared_ptr<const Node> root_;
};

// Line-oriented structured config text: [section] headers, key = value pairs,
// values are strings, numbers, booleans, or flat arrays. Strict mode — every
// key must be consumed by a reader, leftovers are reported with line numbers.
struct ConfigValue {
    enum class Kind { String, Number, Boolean, Array };
    Kind kind = Kind::Number;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<ConfigValue> items;
    int line = 0;
};

struct ConfigTree {
    std::string origin; // path or "<inline>"
    std::map<std::string, std::map<std::string, ConfigValue>> sections;
    std::map<std::string, int> section_lines;
};

ConfigTree parse_config_text(const std::string& text, const std::string& origin);

struct KernelConfig {
    std::string type = "standard"; // standard | multi_term | exp_shifted | tabulated
    double alpha = 0.5;            // order: k = g_{1-alpha}
    std::vector<double> weights;   // multi_term
    std::vector<double> alphas;    // multi_term
    double mu = 1.0;               // exp_shifted
    std::string path;              // tabulated sample CSV (t,value)

    Kernel make_kernel() const;
    // companion obtained analytically where available, numerically otherwise;
    // a bounded-kernel warning from the numeric path is appended to *warning
    KernelPair make_pair(const TimeGrid& grid, std::string* warning = nullptr) const;
};

struct ReactionConfig {
    std::array<int, 4> stoich{1, 1, 1, 1};
    double nu_f = 1.0;
    double nu_b = 1.0;
    std::array<double, 4> d{1.0, 1.0, 1.0, 1.0};
    double m = 1.0;
    std::array<std::string, 4> c0_expr{"1", "1", "1", "1"};
};

struct SweepAxes {
    std::vector<double> alpha;
    std::vector<double> m;
    std::vector<int> N;
    std::vector<int> M;
    std::vector<double> beta;
    bool empty() const {
        return alpha.empty() && m.empty() && N.empty() && M.empty() && beta.empty();
    }
};

struct RunConfig {
    KernelConfig kernel;

    double T = 1.0;
    int N = 256;

    int dim = 1;
    double L = 1.0;
    int M = 64;
    BC bc = BC::Dirichlet;

    double m = 1.0;
    std::string phi_name = "power"; // power | linear | table
    std::string phi_table_path;     // table: CSV of (x, phi(x)) samples
    std::string a_expr = "1";
    std::string a_csv; // alternative to a_expr: grid-shaped CSV, last column in node order
    double a1 = 1.0;
    double a2 = 1.0;
    std::string u0_expr = "0";
    std::string f_expr = "0";
    std::string uexact_expr; // optional known solution, drives sweep error columns
    bool nonneg = true;
    std::string method = "newton"; // newton | newton_only | fixed_point

    bool has_spectral = false;
    double beta = 2.0;

    bool has_reaction = false;
    ReactionConfig reaction;

    Tolerances tol;

    std::vector<std::string> verify; // estimate ids to run after solving
    std::string out_dir;
    std::uint64_t seed = 0x5eed5eedULL;
    double gamma = 1.0; // resolvent subcommand parameter

    SweepAxes sweep;

    TimeGrid time_grid() const { return TimeGrid{T, N}; }
    SpaceGrid space_grid() const { return SpaceGrid{dim, L, M, bc}; }
    NonlinSolve solve_method() const;
    ProblemSpec problem(std::string* kernel_warning = nullptr) const;
    ReactionSpec reaction_spec() const;
};

// Fully validated config or a ValidationError aggregating every problem found
// (parse errors, unknown keys, bad ranges, missing files) — not just the first.
RunConfig load_config(const std::string& path);
RunConfig config_from_text(const std::string& text, const std::string& origin);

} // namespace subdual
