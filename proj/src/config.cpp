#include "subdual/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "subdual/util.hpp"

namespace subdual {

// ---------------------------------------------------------------- expressions

struct Expr::Node {
    enum class Op {
        Const, Var, Neg, Add, Sub, Mul, Div, Pow,
        Sin, Cos, Exp, Sqrt, Abs, Log, Sinh, Tanh, PowFn
    };
    Op op = Op::Const;
    double value = 0.0;
    int var = 0; // 0=t 1=x 2=y
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

struct ExprParser {
    const std::string& src;
    std::size_t pos = 0;

    explicit ExprParser(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError({"expression '" + src + "': " + what + " at position " +
                               std::to_string(pos)});
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (eat('+')) {
                lhs = make_node({Node::Op::Add, 0, 0, lhs, parse_term()});
            } else if (eat('-')) {
                lhs = make_node({Node::Op::Sub, 0, 0, lhs, parse_term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            if (eat('*')) {
                lhs = make_node({Node::Op::Mul, 0, 0, lhs, parse_factor()});
            } else if (eat('/')) {
                lhs = make_node({Node::Op::Div, 0, 0, lhs, parse_factor()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor() {
        if (eat('-')) return make_node({Node::Op::Neg, 0, 0, parse_factor(), nullptr});
        if (eat('+')) return parse_factor();
        NodePtr base = parse_primary();
        if (eat('^')) // right-associative
            return make_node({Node::Op::Pow, 0, 0, base, parse_factor()});
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of input");
        const char c = src[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = parse_expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(src.c_str() + pos, &end);
            if (end == src.c_str() + pos) fail("bad number");
            pos = static_cast<std::size_t>(end - src.c_str());
            return make_node({Node::Op::Const, v, 0, nullptr, nullptr});
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                        src[pos] == '_'))
                ++pos;
            const std::string name = src.substr(start, pos - start);
            if (name == "t") return make_node({Node::Op::Var, 0, 0, nullptr, nullptr});
            if (name == "x") return make_node({Node::Op::Var, 0, 1, nullptr, nullptr});
            if (name == "y") return make_node({Node::Op::Var, 0, 2, nullptr, nullptr});
            if (name == "pi") return make_node({Node::Op::Const, M_PI, 0, nullptr, nullptr});

            static const std::map<std::string, Node::Op> fns = {
                {"sin", Node::Op::Sin},   {"cos", Node::Op::Cos}, {"exp", Node::Op::Exp},
                {"sqrt", Node::Op::Sqrt}, {"abs", Node::Op::Abs}, {"log", Node::Op::Log},
                {"sinh", Node::Op::Sinh}, {"tanh", Node::Op::Tanh}, {"pow", Node::Op::PowFn}};
            const auto it = fns.find(name);
            if (it == fns.end()) fail("unknown name '" + name + "'");
            if (!eat('(')) fail("'" + name + "' needs arguments");
            NodePtr a = parse_expr();
            NodePtr b;
            if (it->second == Node::Op::PowFn) {
                if (!eat(',')) fail("'pow' needs two arguments");
                b = parse_expr();
            }
            if (!eat(')')) fail("missing ')'");
            return make_node({it->second, 0, 0, a, b});
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Node& n, double t, double x, double y) {
    switch (n.op) {
        case Node::Op::Const: return n.value;
        case Node::Op::Var: return n.var == 0 ? t : n.var == 1 ? x : y;
        case Node::Op::Neg: return -eval_node(*n.a, t, x, y);
        case Node::Op::Add: return eval_node(*n.a, t, x, y) + eval_node(*n.b, t, x, y);
        case Node::Op::Sub: return eval_node(*n.a, t, x, y) - eval_node(*n.b, t, x, y);
        case Node::Op::Mul: return eval_node(*n.a, t, x, y) * eval_node(*n.b, t, x, y);
        case Node::Op::Div: return eval_node(*n.a, t, x, y) / eval_node(*n.b, t, x, y);
        case Node::Op::Pow:
        case Node::Op::PowFn:
            return std::pow(eval_node(*n.a, t, x, y), eval_node(*n.b, t, x, y));
        case Node::Op::Sin: return std::sin(eval_node(*n.a, t, x, y));
        case Node::Op::Cos: return std::cos(eval_node(*n.a, t, x, y));
        case Node::Op::Exp: return std::exp(eval_node(*n.a, t, x, y));
        case Node::Op::Sqrt: return std::sqrt(eval_node(*n.a, t, x, y));
        case Node::Op::Abs: return std::abs(eval_node(*n.a, t, x, y));
        case Node::Op::Log: return std::log(eval_node(*n.a, t, x, y));
        case Node::Op::Sinh: return std::sinh(eval_node(*n.a, t, x, y));
        case Node::Op::Tanh: return std::tanh(eval_node(*n.a, t, x, y));
    }
    return 0.0;
}

} // namespace

Expr Expr::parse(const std::string& src) {
    ExprParser p(src);
    Expr e;
    e.src_ = src;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != src.size()) p.fail("trailing input");
    return e;
}

double Expr::eval(double t, double x, double y) const {
    if (!root_) throw std::logic_error("Expr: evaluating an empty expression");
    return eval_node(*root_, t, x, y);
}

// ---------------------------------------------------------------- raw parsing

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// one scalar token -> string/number/boolean value
ConfigValue parse_scalar(const std::string& tok, int line, const std::string& origin,
                         std::vector<std::string>& errs) {
    ConfigValue v;
    v.line = line;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.kind = ConfigValue::Kind::String;
        v.str = tok.substr(1, tok.size() - 2);
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.kind = ConfigValue::Kind::Boolean;
        v.boolean = tok == "true";
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty()) {
        errs.push_back(origin + ":" + std::to_string(line) + ": cannot parse value '" + tok + "'");
        v.num = 0.0;
    }
    v.kind = ConfigValue::Kind::Number;
    return v;
}

// split a [a, b, c] body on commas (values contain no nested brackets)
std::vector<std::string> split_items(const std::string& body) {
    std::vector<std::string> out;
    std::string cur;
    bool instr = false;
    for (char c : body) {
        if (c == '"') instr = !instr;
        if (c == ',' && !instr) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    const std::string last = trim(cur);
    if (!last.empty()) out.push_back(last);
    return out;
}

} // namespace

ConfigTree parse_config_text(const std::string& text, const std::string& origin) {
    ConfigTree tree;
    tree.origin = origin;
    std::vector<std::string> errs;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        bool instr = false; // strip comments outside strings
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') instr = !instr;
            if (s[i] == '#' && !instr) {
                s = s.substr(0, i);
                break;
            }
        }
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                errs.push_back(origin + ":" + std::to_string(line) + ": malformed section header");
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) {
                errs.push_back(origin + ":" + std::to_string(line) + ": empty section name");
                continue;
            }
            if (tree.sections.count(section)) {
                errs.push_back(origin + ":" + std::to_string(line) + ": duplicate section [" +
                               section + "]");
                continue;
            }
            tree.sections[section];
            tree.section_lines[section] = line;
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            errs.push_back(origin + ":" + std::to_string(line) + ": expected key = value");
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty() || val.empty()) {
            errs.push_back(origin + ":" + std::to_string(line) + ": expected key = value");
            continue;
        }
        if (section.empty()) {
            errs.push_back(origin + ":" + std::to_string(line) + ": key '" + key +
                           "' outside any [section]");
            continue;
        }
        auto& sec = tree.sections[section];
        if (sec.count(key)) {
            errs.push_back(origin + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
            continue;
        }
        if (val.front() == '[') {
            if (val.back() != ']') {
                errs.push_back(origin + ":" + std::to_string(line) + ": malformed array");
                continue;
            }
            ConfigValue v;
            v.kind = ConfigValue::Kind::Array;
            v.line = line;
            for (const auto& item : split_items(val.substr(1, val.size() - 2)))
                v.items.push_back(parse_scalar(item, line, origin, errs));
            sec[key] = std::move(v);
        } else {
            sec[key] = parse_scalar(val, line, origin, errs);
        }
    }
    if (!errs.empty()) throw ValidationError(std::move(errs));
    return tree;
}

// ------------------------------------------------------------- config reading

namespace {

// strict-mode reader: every key access is recorded, leftovers are errors
struct Reader {
    const ConfigTree& tree;
    std::vector<std::string>& errs;
    std::map<std::string, std::set<std::string>> used;
    std::set<std::string> known_sections;

    Reader(const ConfigTree& t, std::vector<std::string>& e) : tree(t), errs(e) {}

    bool has_section(const std::string& sec) {
        known_sections.insert(sec);
        return tree.sections.count(sec) > 0;
    }

    const ConfigValue* find(const std::string& sec, const std::string& key) {
        known_sections.insert(sec);
        const auto s = tree.sections.find(sec);
        if (s == tree.sections.end()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        used[sec].insert(key);
        return &k->second;
    }

    std::string where(const ConfigValue& v) const {
        return tree.origin + ":" + std::to_string(v.line);
    }

    double num(const std::string& sec, const std::string& key, double dflt) {
        const ConfigValue* v = find(sec, key);
        if (!v) return dflt;
        if (v->kind != ConfigValue::Kind::Number) {
            errs.push_back(where(*v) + ": '" + key + "' must be a number");
            return dflt;
        }
        return v->num;
    }

    int integer(const std::string& sec, const std::string& key, int dflt) {
        const double d = num(sec, key, dflt);
        if (d != std::floor(d)) {
            errs.push_back(tree.origin + ": '" + sec + "." + key + "' must be an integer");
            return dflt;
        }
        return static_cast<int>(d);
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& dflt) {
        const ConfigValue* v = find(sec, key);
        if (!v) return dflt;
        if (v->kind != ConfigValue::Kind::String) {
            errs.push_back(where(*v) + ": '" + key + "' must be a string");
            return dflt;
        }
        return v->str;
    }

    bool boolean(const std::string& sec, const std::string& key, bool dflt) {
        const ConfigValue* v = find(sec, key);
        if (!v) return dflt;
        if (v->kind != ConfigValue::Kind::Boolean) {
            errs.push_back(where(*v) + ": '" + key + "' must be true or false");
            return dflt;
        }
        return v->boolean;
    }

    std::vector<double> num_array(const std::string& sec, const std::string& key) {
        const ConfigValue* v = find(sec, key);
        if (!v) return {};
        if (v->kind != ConfigValue::Kind::Array) {
            errs.push_back(where(*v) + ": '" + key + "' must be an array");
            return {};
        }
        std::vector<double> out;
        for (const auto& item : v->items) {
            if (item.kind != ConfigValue::Kind::Number) {
                errs.push_back(where(*v) + ": '" + key + "' must contain numbers");
                return {};
            }
            out.push_back(item.num);
        }
        return out;
    }

    std::vector<std::string> str_array(const std::string& sec, const std::string& key) {
        const ConfigValue* v = find(sec, key);
        if (!v) return {};
        if (v->kind != ConfigValue::Kind::Array) {
            errs.push_back(where(*v) + ": '" + key + "' must be an array");
            return {};
        }
        std::vector<std::string> out;
        for (const auto& item : v->items) {
            if (item.kind != ConfigValue::Kind::String) {
                errs.push_back(where(*v) + ": '" + key + "' must contain strings");
                return {};
            }
            out.push_back(item.str);
        }
        return out;
    }

    // strict mode: unknown sections and keys are hard errors, with locations
    void finish() {
        for (const auto& [sec, kv] : tree.sections) {
            if (!known_sections.count(sec)) {
                errs.push_back(tree.origin + ":" +
                               std::to_string(tree.section_lines.at(sec)) +
                               ": unknown section [" + sec + "]");
                continue;
            }
            const auto u = used.find(sec);
            for (const auto& [key, val] : kv)
                if (u == used.end() || !u->second.count(key))
                    errs.push_back(where(val) + ": unknown key '" + sec + "." + key + "'");
        }
    }
};

void check_expr(const std::string& src, const std::string& what,
                std::vector<std::string>& errs) {
    try {
        Expr::parse(src);
    } catch (const ValidationError& e) {
        for (const auto& item : e.items) errs.push_back(what + ": " + item);
    }
}

bool file_readable(const std::string& path) { return std::ifstream(path).good(); }

// numeric CSV rows; a leading non-numeric line is treated as a header
std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot open CSV: " + path});
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ss(s);
        std::string cell;
        bool ok = true;
        while (std::getline(ss, cell, ',')) {
            const std::string tc = trim(cell);
            char* end = nullptr;
            const double v = std::strtod(tc.c_str(), &end);
            if (tc.empty() || end != tc.c_str() + tc.size()) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (first) { // header
                first = false;
                continue;
            }
            throw ValidationError({"CSV " + path + ": non-numeric row '" + s + "'"});
        }
        first = false;
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

RunConfig read_config(const ConfigTree& tree) {
    std::vector<std::string> errs;
    Reader r(tree, errs);
    RunConfig cfg;

    cfg.kernel.type = r.str("kernel", "type", cfg.kernel.type);
    cfg.kernel.alpha = r.num("kernel", "alpha", cfg.kernel.alpha);
    cfg.kernel.weights = r.num_array("kernel", "weights");
    cfg.kernel.alphas = r.num_array("kernel", "alphas");
    cfg.kernel.mu = r.num("kernel", "mu", cfg.kernel.mu);
    cfg.kernel.path = r.str("kernel", "path", "");

    cfg.T = r.num("time", "T", cfg.T);
    cfg.N = r.integer("time", "N", cfg.N);

    cfg.dim = r.integer("space", "dim", cfg.dim);
    cfg.L = r.num("space", "L", cfg.L);
    cfg.M = r.integer("space", "M", cfg.M);
    const std::string bc = r.str("space", "bc", "dirichlet");

    cfg.m = r.num("problem", "m", cfg.m);
    cfg.phi_name = r.str("problem", "phi", cfg.phi_name);
    cfg.phi_table_path = r.str("problem", "phi_table", "");
    cfg.a_expr = r.str("problem", "a", cfg.a_expr);
    const bool a_expr_given = r.find("problem", "a") != nullptr;
    cfg.a_csv = r.str("problem", "a_csv", "");
    cfg.a1 = r.num("problem", "a1", cfg.a1);
    cfg.a2 = r.num("problem", "a2", cfg.a2);
    cfg.u0_expr = r.str("problem", "u0", cfg.u0_expr);
    cfg.f_expr = r.str("problem", "f", cfg.f_expr);
    cfg.uexact_expr = r.str("problem", "uexact", "");
    cfg.nonneg = r.boolean("problem", "nonneg", cfg.nonneg);
    cfg.method = r.str("problem", "solver", cfg.method);

    cfg.has_spectral = r.has_section("spectral");
    if (cfg.has_spectral) {
        cfg.beta = r.num("spectral", "beta", cfg.beta);
        const std::string st = r.str("spectral", "type", "fractional");
        if (st != "fractional")
            errs.push_back(tree.origin + ": spectral.type must be \"fractional\"");
        const int modes = r.integer("spectral", "modes", cfg.M);
        if (r.find("spectral", "modes") != nullptr) cfg.M = modes; // unknowns = modes
    }

    cfg.has_reaction = r.has_section("reaction");
    if (cfg.has_reaction) {
        const auto st = r.num_array("reaction", "stoich");
        if (!st.empty()) {
            if (st.size() != 4) {
                errs.push_back(tree.origin + ": reaction.stoich needs 4 entries");
            } else {
                for (int i = 0; i < 4; ++i) cfg.reaction.stoich[i] = static_cast<int>(st[i]);
            }
        }
        cfg.reaction.nu_f = r.num("reaction", "nu_f", cfg.reaction.nu_f);
        cfg.reaction.nu_b = r.num("reaction", "nu_b", cfg.reaction.nu_b);
        const auto d = r.num_array("reaction", "d");
        if (!d.empty()) {
            if (d.size() != 4) {
                errs.push_back(tree.origin + ": reaction.d needs 4 entries");
            } else {
                for (int i = 0; i < 4; ++i) cfg.reaction.d[i] = d[i];
            }
        }
        cfg.reaction.m = r.num("reaction", "m", cfg.reaction.m);
        for (int i = 0; i < 4; ++i) {
            const std::string key = "c0_" + std::to_string(i + 1);
            cfg.reaction.c0_expr[i] = r.str("reaction", key, cfg.reaction.c0_expr[i]);
        }
    }

    cfg.tol.newton = r.num("tolerances", "newton", cfg.tol.newton);
    cfg.tol.max_newton = r.integer("tolerances", "max_newton", cfg.tol.max_newton);
    cfg.tol.max_backtrack = r.integer("tolerances", "max_backtrack", cfg.tol.max_backtrack);
    cfg.tol.max_picard = r.integer("tolerances", "max_picard", cfg.tol.max_picard);
    cfg.tol.est = r.num("tolerances", "est", cfg.tol.est);

    cfg.verify = r.str_array("verify", "estimates");
    cfg.out_dir = r.str("output", "dir", "");

    cfg.seed = static_cast<std::uint64_t>(r.num("run", "seed", static_cast<double>(cfg.seed)));
    cfg.gamma = r.num("run", "gamma", cfg.gamma);

    cfg.sweep.alpha = r.num_array("sweep", "alpha");
    cfg.sweep.m = r.num_array("sweep", "m");
    for (double v : r.num_array("sweep", "N")) cfg.sweep.N.push_back(static_cast<int>(v));
    for (double v : r.num_array("sweep", "M")) cfg.sweep.M.push_back(static_cast<int>(v));
    cfg.sweep.beta = r.num_array("sweep", "beta");

    r.finish();

    // semantic validation, aggregated
    const std::set<std::string> kernel_types = {"standard", "multi_term", "exp_shifted",
                                                "tabulated"};
    if (!kernel_types.count(cfg.kernel.type))
        errs.push_back(tree.origin + ": unknown kernel type '" + cfg.kernel.type + "'");
    if (cfg.kernel.type == "standard" || cfg.kernel.type == "exp_shifted") {
        if (!(cfg.kernel.alpha > 0.0 && cfg.kernel.alpha < 1.0))
            errs.push_back(tree.origin + ": kernel order alpha must be in (0,1)");
    }
    if (cfg.kernel.type == "multi_term") {
        if (cfg.kernel.weights.empty() || cfg.kernel.weights.size() != cfg.kernel.alphas.size())
            errs.push_back(tree.origin + ": multi_term kernel needs matching weights/alphas");
    }
    if (cfg.kernel.type == "exp_shifted" && !(cfg.kernel.mu >= 0.0))
        errs.push_back(tree.origin + ": kernel.mu must be nonnegative");
    if (cfg.kernel.type == "tabulated") {
        if (cfg.kernel.path.empty()) {
            errs.push_back(tree.origin + ": tabulated kernel needs kernel.path");
        } else if (!std::ifstream(cfg.kernel.path).good()) {
            errs.push_back(tree.origin + ": kernel file not found: " + cfg.kernel.path);
        }
    }

    if (!(cfg.T > 0.0)) errs.push_back(tree.origin + ": time.T must be positive");
    if (cfg.N < 1) errs.push_back(tree.origin + ": time.N must be >= 1");
    if (cfg.dim != 1 && cfg.dim != 2) errs.push_back(tree.origin + ": space.dim must be 1 or 2");
    if (!(cfg.L > 0.0)) errs.push_back(tree.origin + ": space.L must be positive");
    if (cfg.M < 2) errs.push_back(tree.origin + ": space.M must be >= 2");

    if (bc == "dirichlet") {
        cfg.bc = BC::Dirichlet;
    } else if (bc == "neumann") {
        cfg.bc = BC::Neumann;
    } else if (bc == "periodic") {
        cfg.bc = BC::Periodic;
    } else {
        errs.push_back(tree.origin + ": unknown boundary condition '" + bc + "'");
    }

    if (!(cfg.m >= 1.0)) errs.push_back(tree.origin + ": problem.m must be >= 1");
    if (!(cfg.a1 > 0.0)) errs.push_back(tree.origin + ": coefficient lower bound must be positive");
    if (!(cfg.a2 >= cfg.a1))
        errs.push_back(tree.origin + ": coefficient upper bound must be >= lower bound");
    if (cfg.method != "newton" && cfg.method != "newton_only" && cfg.method != "fixed_point")
        errs.push_back(tree.origin + ": unknown solver '" + cfg.method + "'");
    if (cfg.phi_name != "power" && cfg.phi_name != "linear" && cfg.phi_name != "table") {
        errs.push_back(tree.origin + ": unknown phi '" + cfg.phi_name + "'");
    } else if (cfg.phi_name == "table") {
        if (cfg.phi_table_path.empty())
            errs.push_back(tree.origin + ": phi = \"table\" needs problem.phi_table");
        else if (!file_readable(cfg.phi_table_path))
            errs.push_back(tree.origin + ": phi table file not found: " + cfg.phi_table_path);
        if (cfg.method == "fixed_point")
            errs.push_back(tree.origin + ": fixed_point solver needs a power nonlinearity");
    }
    if (!cfg.a_csv.empty()) {
        if (a_expr_given)
            errs.push_back(tree.origin + ": problem.a and problem.a_csv are mutually exclusive");
        if (!file_readable(cfg.a_csv))
            errs.push_back(tree.origin + ": coefficient file not found: " + cfg.a_csv);
    }
    check_expr(cfg.a_expr, tree.origin + ": problem.a", errs);
    check_expr(cfg.u0_expr, tree.origin + ": problem.u0", errs);
    check_expr(cfg.f_expr, tree.origin + ": problem.f", errs);
    if (!cfg.uexact_expr.empty()) check_expr(cfg.uexact_expr, tree.origin + ": problem.uexact", errs);

    if (cfg.has_spectral && !(cfg.beta > 0.0 && cfg.beta <= 2.0))
        errs.push_back(tree.origin + ": spectral.beta must be in (0,2]");
    if (cfg.has_reaction)
        for (int i = 0; i < 4; ++i)
            check_expr(cfg.reaction.c0_expr[i],
                       tree.origin + ": reaction.c0_" + std::to_string(i + 1), errs);

    if (!(cfg.tol.newton > 0.0)) errs.push_back(tree.origin + ": tolerances.newton must be positive");
    if (cfg.tol.max_newton < 1 || cfg.tol.max_picard < 1 || cfg.tol.max_backtrack < 0)
        errs.push_back(tree.origin + ": iteration budgets must be positive");
    if (cfg.tol.est < 0.0) errs.push_back(tree.origin + ": tolerances.est must be nonnegative");

    const std::set<std::string> known_estimates = {"basic",   "basic-alt", "triple",
                                                   "galpha",  "pme",       "entropy",
                                                   "spectral", "uniqueness"};
    for (const auto& e : cfg.verify)
        if (!known_estimates.count(e))
            errs.push_back(tree.origin + ": unknown estimate '" + e + "'");

    if (!errs.empty()) throw ValidationError(std::move(errs));
    return cfg;
}

} // namespace

Kernel KernelConfig::make_kernel() const {
    if (type == "standard") return Kernel::standard(1.0 - alpha);
    if (type == "multi_term") {
        std::vector<std::pair<double, double>> terms;
        for (std::size_t i = 0; i < weights.size(); ++i)
            terms.emplace_back(weights[i], alphas[i]);
        return Kernel::multi_term(std::move(terms));
    }
    if (type == "exp_shifted") return Kernel::exp_shifted(alpha, mu);
    if (type == "tabulated") {
        std::vector<double> t, v;
        for (const auto& row : read_numeric_csv(path)) {
            if (row.size() != 2)
                throw ValidationError({"kernel file " + path + ": expected 't,value' rows"});
            t.push_back(row[0]);
            v.push_back(row[1]);
        }
        return Kernel::tabulated_samples(std::move(t), std::move(v));
    }
    throw ValidationError({"unknown kernel type '" + type + "'"});
}

KernelPair KernelConfig::make_pair(const TimeGrid& grid, std::string* warning) const {
    if (type == "standard") return standard_pair(alpha);
    Kernel k = make_kernel();
    Kernel l = companion_kernel(k, grid, warning);
    return KernelPair{std::move(k), std::move(l), 1e-8};
}

NonlinSolve RunConfig::solve_method() const {
    if (method == "newton_only") return NonlinSolve::NewtonOnly;
    if (method == "fixed_point") return NonlinSolve::FixedPointOnly;
    return NonlinSolve::NewtonWithFallback;
}

ProblemSpec RunConfig::problem(std::string* kernel_warning) const {
    ProblemSpec spec;
    spec.tgrid = time_grid();
    spec.sgrid = space_grid();
    spec.pair = kernel.make_pair(spec.tgrid, kernel_warning);

    if (phi_name == "linear") {
        spec.phi = Phi::linear();
    } else if (phi_name == "table") {
        std::vector<double> xs, ys;
        for (const auto& row : read_numeric_csv(phi_table_path)) {
            if (row.size() != 2)
                throw ValidationError({"phi table " + phi_table_path + ": expected 'x,y' rows"});
            xs.push_back(row[0]);
            ys.push_back(row[1]);
        }
        spec.phi = Phi::table(xs, ys);
    } else {
        spec.phi = Phi::power(m);
    }

    if (!a_csv.empty()) {
        // grid-shaped table: one value per (time node, space point), node-major;
        // lookup by index so sampling at grid points is exact
        std::vector<double> vals;
        for (const auto& row : read_numeric_csv(a_csv))
            if (!row.empty()) vals.push_back(row.back());
        const std::size_t need =
            static_cast<std::size_t>(spec.tgrid.N + 1) * spec.sgrid.npoints();
        if (vals.size() != need)
            throw ValidationError({"coefficient file " + a_csv + ": expected " +
                                   std::to_string(need) + " values, got " +
                                   std::to_string(vals.size())});
        const auto data = std::make_shared<const std::vector<double>>(std::move(vals));
        const TimeGrid tg = spec.tgrid;
        const SpaceGrid sg = spec.sgrid;
        const auto axis = [sg](double c) {
            double pos = c / sg.h();
            if (sg.bc == BC::Dirichlet) pos -= 1.0;
            if (sg.bc == BC::Neumann) pos -= 0.5;
            long i = std::lround(pos);
            if (sg.bc == BC::Periodic) i = ((i % sg.M) + sg.M) % sg.M;
            return static_cast<int>(std::clamp(i, 0L, static_cast<long>(sg.M - 1)));
        };
        spec.a = [data, tg, sg, axis](double t, double x, double y) {
            const long n = std::clamp(std::lround(t / tg.dt()), 0L, static_cast<long>(tg.N));
            const int j = sg.dim == 1 ? axis(x) : axis(y) * sg.M + axis(x);
            return (*data)[static_cast<std::size_t>(n) * sg.npoints() + j];
        };
    } else {
        const Expr ae = Expr::parse(a_expr);
        spec.a = [ae](double t, double x, double y) { return ae.eval(t, x, y); };
    }

    const Expr u0e = Expr::parse(u0_expr);
    const Expr fe = Expr::parse(f_expr);
    spec.u0 = [u0e](double x, double y) { return u0e.eval(0.0, x, y); };
    spec.f = [fe](double t, double x, double y) { return fe.eval(t, x, y); };
    spec.a1 = a1;
    spec.a2 = a2;
    spec.nonneg = nonneg;
    spec.tol = tol;
    return spec;
}

ReactionSpec RunConfig::reaction_spec() const {
    ReactionSpec spec;
    spec.stoich = reaction.stoich;
    spec.nu_f = reaction.nu_f;
    spec.nu_b = reaction.nu_b;
    spec.d = reaction.d;
    spec.m = reaction.m;
    for (int i = 0; i < 4; ++i) {
        const Expr e = Expr::parse(reaction.c0_expr[i]);
        spec.c0[i] = [e](double x, double y) { return e.eval(0.0, x, y); };
    }
    spec.tol = tol;
    return spec;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot open config file: " + path});
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_config(parse_config_text(buf.str(), path));
}

RunConfig config_from_text(const std::string& text, const std::string& origin) {
    return read_config(parse_config_text(text, origin));
}

} // namespace subdual
