#include "subdual/conv.hpp"

#include <cmath>
#include <stdexcept>

#include "subdual/util.hpp"

namespace subdual {

namespace {

std::string tag_name(Kernel::Tag t) {
    switch (t) {
        case Kernel::Tag::Standard: return "standard";
        case Kernel::Tag::MultiTerm: return "multi_term";
        case Kernel::Tag::ExpShifted: return "exp_shifted";
        case Kernel::Tag::Tabulated: return "tabulated";
    }
    return "?";
}

void require_nonneg(const std::vector<double>& w, const std::string& who) {
    const double slack = 1e-14 * std::max(1.0, max_abs(w));
    for (double x : w) {
        if (!std::isfinite(x)) throw std::runtime_error(who + ": non-finite weight");
        if (x < -slack) throw std::runtime_error(who + ": negative weight");
    }
}

void require_nonincreasing(const std::vector<double>& w, const std::string& who) {
    const double slack = 1e-12 * std::max(1.0, max_abs(w));
    for (std::size_t j = 1; j < w.size(); ++j)
        if (w[j] > w[j - 1] + slack) throw std::runtime_error(who + ": weights increase");
}

} // namespace

ConvOperator ConvOperator::from_kernel(const Kernel& k, const TimeGrid& grid) {
    std::vector<double> w(grid.N);
    for (int i = 0; i < grid.N; ++i)
        w[i] = k.antiderivative(grid.node(i + 1)) - k.antiderivative(grid.node(i));
    require_nonneg(w, "ConvOperator");
    require_nonincreasing(w, "ConvOperator"); // every Kernel variant is nonincreasing
    ConvOperator op;
    op.grid_ = grid;
    op.w_ = std::move(w);
    op.provenance_ = tag_name(k.tag());
    return op;
}

ConvOperator ConvOperator::from_weights(std::vector<double> w, const TimeGrid& grid,
                                        std::string provenance) {
    if (static_cast<int>(w.size()) != grid.N)
        throw std::domain_error("ConvOperator::from_weights: need one weight per cell");
    require_nonneg(w, "ConvOperator(" + provenance + ")");
    ConvOperator op;
    op.grid_ = grid;
    op.w_ = std::move(w);
    op.provenance_ = std::move(provenance);
    return op;
}

std::vector<double> ConvOperator::conv(const std::vector<double>& f) const {
    if (f.size() != w_.size()) throw std::domain_error("ConvOperator::conv: size mismatch");
    const int n = static_cast<int>(f.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += w_[i - j] * f[j];
        out[i] = acc;
    }
    return out;
}

std::vector<double> ConvOperator::dual(const std::vector<double>& g) const {
    if (g.size() != w_.size()) throw std::domain_error("ConvOperator::dual: size mismatch");
    const int n = static_cast<int>(g.size());
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = j; i < n; ++i) acc += w_[i - j] * g[i];
        out[j] = acc;
    }
    return out;
}

double ConvOperator::l1() const {
    double s = 0.0;
    for (double x : w_) s += x;
    return s;
}

double inner(const TimeGrid& grid, const std::vector<double>& f, const std::vector<double>& g) {
    if (f.size() != g.size()) throw std::domain_error("inner: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return grid.dt() * s;
}

ConvOperator convolved_operator(const Kernel& b, const Kernel& h, const TimeGrid& grid) {
    const auto tb = b.power_terms();
    const auto th = h.power_terms();
    if (tb.empty() || th.empty())
        throw std::domain_error("convolved_operator: both kernels must be power sums");
    // g_p * g_q = g_{p+q}, so (b*h) has the exact antiderivative
    // A(t) = sum_{p,q} w_p w_q g_{p+q+1}(t)
    auto anti = [&](double t) {
        if (t <= 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& [wb, p] : tb)
            for (const auto& [wh, q] : th)
                acc += wb * wh * std::pow(t, p + q) / std::tgamma(p + q + 1.0);
        return acc;
    };
    std::vector<double> w(grid.N);
    for (int i = 0; i < grid.N; ++i) w[i] = anti(grid.node(i + 1)) - anti(grid.node(i));
    return ConvOperator::from_weights(std::move(w), grid, "convolved");
}

double check_successive_dual(const Kernel& b, const Kernel& h, const std::vector<double>& g,
                             const TimeGrid& grid) {
    const auto ob = ConvOperator::from_kernel(b, grid);
    const auto oh = ConvOperator::from_kernel(h, grid);
    const auto obh = convolved_operator(b, h, grid);
    const auto lhs = ob.dual(oh.dual(g));
    const auto rhs = obh.dual(g);
    double r = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) r = std::max(r, std::abs(lhs[i] - rhs[i]));
    return r;
}

namespace {

// centered interior, one-sided endpoint differences of a nodal series
std::vector<double> ddt_nodes(const std::vector<double>& p, double dt) {
    const std::size_t n = p.size();
    std::vector<double> d(n);
    d[0] = (p[1] - p[0]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (p[i + 1] - p[i - 1]) / (2.0 * dt);
    d[n - 1] = (p[n - 1] - p[n - 2]) / dt;
    return d;
}

} // namespace

double check_integrodiff_duality(const Kernel& k, const std::vector<double>& f,
                                 const std::vector<double>& g, const TimeGrid& grid) {
    if (!k.bounded_at_zero())
        throw std::domain_error("check_integrodiff_duality: kernel must be bounded at 0 "
                                "(regularize first)");
    const auto op = ConvOperator::from_kernel(k, grid);
    const int N = grid.N;
    const double dt = grid.dt();

    // nodal extensions: (k T* f) vanishes at T, (k*g) vanishes at 0
    std::vector<double> P(N + 1, 0.0), Q(N + 1, 0.0);
    const auto dualf = op.dual(f);
    const auto convg = op.conv(g);
    for (int i = 0; i < N; ++i) P[i] = dualf[i];
    for (int i = 0; i < N; ++i) Q[i + 1] = convg[i];

    const auto dP = ddt_nodes(P, dt);
    const auto dQ = ddt_nodes(Q, dt);

    double acc = 0.0;
    for (int i = 0; i < N; ++i) acc += dt * (dP[i] * g[i] + f[i] * dQ[i + 1]);
    return std::abs(acc);
}

double check_fundamental_identity(const Kernel& k, const std::vector<double>& v_nodes,
                                  const TimeGrid& grid) {
    if (!k.bounded_at_zero())
        throw std::domain_error("check_fundamental_identity: kernel must be bounded at 0 "
                                "(regularize first)");
    const int N = grid.N;
    if (static_cast<int>(v_nodes.size()) != N + 1)
        throw std::domain_error("check_fundamental_identity: v must be nodal (N+1 values)");
    const double dt = grid.dt();

    std::vector<double> wk(N), vmid(N), vmid2(N);
    for (int i = 0; i < N; ++i) {
        wk[i] = k.antiderivative(grid.node(i + 1)) - k.antiderivative(grid.node(i));
        vmid[i] = 0.5 * (v_nodes[i] + v_nodes[i + 1]);
        vmid2[i] = vmid[i] * vmid[i];
    }

    // nodal k*v and k*v^2 (value 0 at t = 0)
    std::vector<double> kv(N + 1, 0.0), kv2(N + 1, 0.0);
    for (int i = 0; i < N; ++i) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j <= i; ++j) {
            a += wk[i - j] * vmid[j];
            b += wk[i - j] * vmid2[j];
        }
        kv[i + 1] = a;
        kv2[i + 1] = b;
    }
    const auto dkv = ddt_nodes(kv, dt);
    const auto dkv2 = ddt_nodes(kv2, dt);

    // cell masses of -k' via point values: k(t_q) - k(t_{q+1}); k(0) finite by precondition
    std::vector<double> kn(N + 1);
    for (int q = 0; q <= N; ++q) kn[q] = k.eval(grid.node(q));

    double resid = 0.0;
    for (int i = 1; i <= N; ++i) {
        double mem = 0.0;
        for (int q = 0; q < i; ++q) {
            const double dv = v_nodes[i] - 0.5 * (v_nodes[i - q] + v_nodes[i - q - 1]);
            mem += (kn[q] - kn[q + 1]) * dv * dv;
        }
        const double lhs = v_nodes[i] * dkv[i];
        const double rhs = 0.5 * dkv2[i] + 0.5 * kn[i] * v_nodes[i] * v_nodes[i] + 0.5 * mem;
        resid = std::max(resid, std::abs(lhs - rhs));
    }
    return resid;
}

} // namespace subdual
