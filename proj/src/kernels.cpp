#include "subdual/kernels.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "subdual/util.hpp"

namespace subdual {

double eval_standard(double beta, double t) {
    if (!(beta > 0.0)) throw std::domain_error("eval_standard: beta must be positive");
    if (!(t > 0.0)) throw std::domain_error("eval_standard: t must be positive");
    return std::pow(t, beta - 1.0) / std::tgamma(beta);
}

namespace {

// int_0^t g_beta = g_{beta+1}(t)
double anti_standard(double beta, double t) {
    return t <= 0.0 ? 0.0 : std::pow(t, beta) / std::tgamma(beta + 1.0);
}

// int_0^t e^{-mu s} s^{-alpha} / Gamma(1-alpha) ds = mu^{alpha-1} P(1-alpha, mu t)
// with P the regularized lower incomplete gamma function
double anti_tempered(double alpha, double mu, double t) {
    if (t <= 0.0) return 0.0;
    if (mu == 0.0) return anti_standard(1.0 - alpha, t);
    return std::pow(mu, alpha - 1.0) * boost::math::gamma_p(1.0 - alpha, mu * t);
}

// index of the cell [t_i, t_{i+1}) containing t in a sorted node array
std::size_t locate_cell(const std::vector<double>& nodes, double t) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    if (it == nodes.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return std::min(i, nodes.size() - 2);
}

} // namespace

bool Kernel::bounded_at_zero() const {
    switch (tag_) {
        case Tag::Standard: return beta_ >= 1.0;
        case Tag::MultiTerm: return false; // factory enforces alpha_j in (0,1)
        case Tag::ExpShifted: return false;
        case Tag::Tabulated: return true;
    }
    return true;
}

double Kernel::eval(double t) const {
    switch (tag_) {
        case Tag::Standard:
            if (beta_ == 1.0 && t == 0.0) return amp_; // the one bounded member of the family
            return amp_ * eval_standard(beta_, t);
        case Tag::MultiTerm: {
            if (!(t > 0.0)) throw std::domain_error("Kernel::eval: t must be positive");
            double v = 0.0;
            for (const auto& [w, alpha] : terms_) v += w * eval_standard(1.0 - alpha, t);
            return amp_ * v;
        }
        case Tag::ExpShifted:
            if (!(t > 0.0)) throw std::domain_error("Kernel::eval: t must be positive");
            return amp_ * std::exp(-mu_ * t) * std::pow(t, -alpha_) / std::tgamma(1.0 - alpha_);
        case Tag::Tabulated: {
            if (t < 0.0) throw std::domain_error("Kernel::eval: t must be nonnegative");
            if (t > tab_t_.back() * (1.0 + 1e-12))
                throw std::domain_error("Kernel::eval: t beyond tabulated range");
            if (t <= tab_t_.front()) return amp_ * tab_v_.front(); // flat left extension
            std::size_t i = locate_cell(tab_t_, std::min(t, tab_t_.back()));
            if (tab_cellwise_) return amp_ * tab_v_[i];
            const double t0 = tab_t_[i], t1 = tab_t_[i + 1];
            const double s = (t - t0) / (t1 - t0);
            return amp_ * ((1.0 - s) * tab_v_[i] + s * tab_v_[i + 1]);
        }
    }
    throw std::logic_error("Kernel::eval: unreachable");
}

double Kernel::antiderivative(double t) const {
    if (t < 0.0) throw std::domain_error("Kernel::antiderivative: t must be nonnegative");
    switch (tag_) {
        case Tag::Standard:
            return amp_ * anti_standard(beta_, t);
        case Tag::MultiTerm: {
            double v = 0.0;
            for (const auto& [w, alpha] : terms_) v += w * anti_standard(1.0 - alpha, t);
            return amp_ * v;
        }
        case Tag::ExpShifted:
            return amp_ * anti_tempered(alpha_, mu_, t);
        case Tag::Tabulated: {
            if (t > tab_t_.back() * (1.0 + 1e-12))
                throw std::domain_error("Kernel::antiderivative: t beyond tabulated range");
            if (t <= tab_t_.front()) return amp_ * tab_v_.front() * t; // flat left extension
            std::size_t i = locate_cell(tab_t_, std::min(t, tab_t_.back()));
            const double t0 = tab_t_[i], t1 = tab_t_[i + 1];
            const double s = (t - t0) / (t1 - t0);
            // tab_A_ is exact at the nodes for both tabulated flavors; in between the
            // integrand is constant (cellwise) or linear (samples)
            double partial;
            if (tab_cellwise_) {
                partial = tab_v_[i] * (t - t0);
            } else {
                const double vt = (1.0 - s) * tab_v_[i] + s * tab_v_[i + 1];
                partial = 0.5 * (tab_v_[i] + vt) * (t - t0);
            }
            return amp_ * (tab_A_[i] + partial);
        }
    }
    throw std::logic_error("Kernel::antiderivative: unreachable");
}

double Kernel::derivative(double t) const {
    if (!(t > 0.0)) throw std::domain_error("Kernel::derivative: t must be positive");
    switch (tag_) {
        case Tag::Standard:
            return amp_ * (beta_ - 1.0) * std::pow(t, beta_ - 2.0) / std::tgamma(beta_);
        case Tag::MultiTerm: {
            double v = 0.0;
            for (const auto& [w, alpha] : terms_)
                v += w * (-alpha) * std::pow(t, -alpha - 1.0) / std::tgamma(1.0 - alpha);
            return amp_ * v;
        }
        case Tag::ExpShifted:
            return amp_ * std::exp(-mu_ * t) * (-mu_ * std::pow(t, -alpha_) - alpha_ * std::pow(t, -alpha_ - 1.0)) /
                   std::tgamma(1.0 - alpha_);
        case Tag::Tabulated:
            throw std::domain_error("Kernel::derivative: tabulated kernels have no analytic derivative");
    }
    throw std::logic_error("Kernel::derivative: unreachable");
}

Kernel Kernel::standard(double beta) {
    // beta = 1 (the constant kernel) is admitted for classical-limit cross-checks
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::domain_error("Kernel::standard: beta must be in (0,1]");
    Kernel k;
    k.tag_ = Tag::Standard;
    k.completely_monotone_ = true;
    k.beta_ = beta;
    return k;
}

Kernel Kernel::multi_term(std::vector<std::pair<double, double>> terms) {
    if (terms.empty()) throw std::domain_error("Kernel::multi_term: at least one term required");
    for (const auto& [w, alpha] : terms) {
        if (!(w > 0.0)) throw std::domain_error("Kernel::multi_term: weights must be positive");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::domain_error("Kernel::multi_term: orders must be in (0,1)");
    }
    Kernel k;
    k.tag_ = Tag::MultiTerm;
    k.completely_monotone_ = true;
    k.terms_ = std::move(terms);
    return k;
}

Kernel Kernel::exp_shifted(double alpha, double mu) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("Kernel::exp_shifted: alpha must be in (0,1)");
    if (!(mu >= 0.0)) throw std::domain_error("Kernel::exp_shifted: mu must be nonnegative");
    Kernel k;
    k.tag_ = Tag::ExpShifted;
    k.completely_monotone_ = true; // product of completely monotone factors
    k.alpha_ = alpha;
    k.mu_ = mu;
    return k;
}

Kernel Kernel::tabulated_cells(const TimeGrid& grid, std::vector<double> cell_values) {
    if (static_cast<int>(cell_values.size()) != grid.N)
        throw std::domain_error("Kernel::tabulated_cells: need one value per cell");
    for (double v : cell_values) {
        if (!std::isfinite(v)) throw std::domain_error("Kernel::tabulated_cells: non-finite value");
        if (v < -1e-12) throw std::domain_error("Kernel::tabulated_cells: negative value");
    }
    Kernel k;
    k.tag_ = Tag::Tabulated;
    k.completely_monotone_ = false;
    k.tab_cellwise_ = true;
    k.tab_t_.resize(grid.N + 1);
    for (int i = 0; i <= grid.N; ++i) k.tab_t_[i] = grid.node(i);
    k.tab_A_.resize(grid.N + 1);
    k.tab_A_[0] = 0.0;
    for (int i = 0; i < grid.N; ++i) k.tab_A_[i + 1] = k.tab_A_[i] + cell_values[i] * grid.dt();
    k.tab_v_ = std::move(cell_values);
    return k;
}

Kernel Kernel::tabulated_samples(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.size() < 2)
        throw std::domain_error("Kernel::tabulated_samples: need >= 2 matching samples");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(v[i]))
            throw std::domain_error("Kernel::tabulated_samples: non-finite sample");
        if (v[i] < 0.0) throw std::domain_error("Kernel::tabulated_samples: negative value");
        if (i > 0 && !(t[i] > t[i - 1]))
            throw std::domain_error("Kernel::tabulated_samples: abscissae must increase");
    }
    if (t.front() < 0.0) throw std::domain_error("Kernel::tabulated_samples: negative abscissa");
    Kernel k;
    k.tag_ = Tag::Tabulated;
    k.completely_monotone_ = false;
    k.tab_cellwise_ = false;
    k.tab_A_.resize(t.size());
    k.tab_A_[0] = v.front() * t.front(); // flat extension down to 0
    for (std::size_t i = 1; i < t.size(); ++i)
        k.tab_A_[i] = k.tab_A_[i - 1] + 0.5 * (v[i - 1] + v[i]) * (t[i] - t[i - 1]);
    k.tab_t_ = std::move(t);
    k.tab_v_ = std::move(v);
    return k;
}

Kernel Kernel::scaled(double c) const {
    if (!(c > 0.0)) throw std::domain_error("Kernel::scaled: factor must be positive");
    Kernel k = *this;
    k.amp_ *= c;
    return k;
}

std::vector<std::pair<double, double>> Kernel::power_terms() const {
    switch (tag_) {
        case Tag::Standard: return {{amp_, beta_}};
        case Tag::MultiTerm: {
            std::vector<std::pair<double, double>> out;
            out.reserve(terms_.size());
            for (const auto& [w, alpha] : terms_) out.emplace_back(amp_ * w, 1.0 - alpha);
            return out;
        }
        default: return {};
    }
}

KernelPair standard_pair(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("standard_pair: alpha must be in (0,1)");
    return KernelPair{Kernel::standard(1.0 - alpha), Kernel::standard(alpha), 1e-8};
}

Kernel companion_kernel(const Kernel& k, const TimeGrid& grid, std::string* warning) {
    if (grid.N < 2) throw std::domain_error("companion_kernel: need N >= 2");
    if (k.bounded_at_zero() && warning)
        *warning = "companion_kernel: kernel is bounded at 0; its companion has a "
                   "delta-type part the cell representation cannot express";

    std::vector<double> w(grid.N);
    for (int i = 0; i < grid.N; ++i)
        w[i] = k.antiderivative(grid.node(i + 1)) - k.antiderivative(grid.node(i));
    if (!(w[0] > 0.0))
        throw std::runtime_error("companion_kernel: leading quadrature weight vanishes (singular system)");

    // forward substitution on sum_{j<=i} w_{i-j} lambda_j = 1
    std::vector<double> lambda(grid.N);
    for (int i = 0; i < grid.N; ++i) {
        double acc = 1.0;
        for (int j = 0; j < i; ++j) acc -= w[i - j] * lambda[j];
        lambda[i] = acc / w[0];
    }
    return Kernel::tabulated_cells(grid, std::move(lambda));
}

} // namespace subdual
