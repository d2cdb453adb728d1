#include "subdual/problem.hpp"

#include <algorithm>
#include <cmath>

#include "subdual/util.hpp"

namespace subdual {

Phi Phi::table(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::domain_error("phi: table needs >= 2 matching samples");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw std::domain_error("phi: table abscissae must increase");
        if (!(ys[i] > ys[i - 1])) throw std::domain_error("phi: table must be strictly increasing");
    }
    if (xs.front() > 0.0 || xs.back() < 0.0)
        throw std::domain_error("phi: table must bracket 0");
    Phi p;
    p.kind_ = Kind::Table;
    p.xs_ = std::move(xs);
    p.ys_ = std::move(ys);
    if (std::abs(p(0.0)) > 1e-15) throw std::domain_error("phi: table must pass through (0,0)");
    return p;
}

double Phi::operator()(double u) const {
    if (kind_ == Kind::Power) {
        if (m_ == 1.0) return u;
        // sign(u)|u|^m keeps sign-changing iterates well-defined
        return u >= 0.0 ? std::pow(u, m_) : -std::pow(-u, m_);
    }
    // piecewise linear with end-slope extrapolation
    const auto& xs = xs_;
    std::size_t i;
    if (u <= xs.front()) {
        i = 0;
    } else if (u >= xs.back()) {
        i = xs.size() - 2;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), u) - xs.begin()) - 1;
    }
    const double slope = (ys_[i + 1] - ys_[i]) / (xs[i + 1] - xs[i]);
    return ys_[i] + slope * (u - xs[i]);
}

double Phi::deriv(double u) const {
    if (kind_ == Kind::Power) {
        if (m_ == 1.0) return 1.0;
        return m_ * std::pow(std::abs(u), m_ - 1.0);
    }
    const auto& xs = xs_;
    std::size_t i;
    if (u <= xs.front()) {
        i = 0;
    } else if (u >= xs.back()) {
        i = xs.size() - 2;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), u) - xs.begin()) - 1;
    }
    return (ys_[i + 1] - ys_[i]) / (xs[i + 1] - xs[i]);
}

std::vector<double> ProblemSpec::u0_values() const {
    std::vector<double> v(sgrid.npoints());
    for (int j = 0; j < sgrid.npoints(); ++j) v[j] = u0(sgrid.x_of(j), sgrid.y_of(j));
    return v;
}

std::vector<double> ProblemSpec::a_values(double t) const {
    std::vector<double> v(sgrid.npoints());
    for (int j = 0; j < sgrid.npoints(); ++j) v[j] = a(t, sgrid.x_of(j), sgrid.y_of(j));
    return v;
}

std::vector<double> ProblemSpec::f_values(double t) const {
    std::vector<double> v(sgrid.npoints());
    for (int j = 0; j < sgrid.npoints(); ++j) v[j] = f(t, sgrid.x_of(j), sgrid.y_of(j));
    return v;
}

void ProblemSpec::validate() const {
    std::vector<std::string> errs;
    if (!a || !u0 || !f) {
        errs.push_back("problem: a, u0, f must all be set");
        throw ValidationError(std::move(errs));
    }
    if (!(a1 > 0.0)) errs.push_back("coefficient lower bound must be positive");
    if (!(a2 >= a1)) errs.push_back("coefficient upper bound must be >= lower bound");
    if (!(tol.newton > 0.0)) errs.push_back("newton tolerance must be positive");
    if (tol.max_newton < 1 || tol.max_backtrack < 0 || tol.max_picard < 1)
        errs.push_back("iteration budgets must be positive");
    if (tol.est < 0.0) errs.push_back("estimate tolerance must be nonnegative");

    // declared coefficient bounds are checked against nodal samples, not trusted
    bool a_low = false, a_high = false, a_bad = false, u0_neg = false, bad_sample = false;
    for (int n = 0; n <= tgrid.N && !(a_low && a_high); ++n) {
        const auto an = a_values(tgrid.node(n));
        for (double v : an) {
            if (!std::isfinite(v)) a_bad = true;
            if (v < a1 - 1e-12) a_low = true;
            if (v > a2 + 1e-12) a_high = true;
        }
    }
    for (int j = 0; j < sgrid.npoints(); ++j) {
        const double v = u0(sgrid.x_of(j), sgrid.y_of(j));
        if (!std::isfinite(v)) bad_sample = true;
        if (nonneg && v < 0.0) u0_neg = true;
    }
    if (a_bad) errs.push_back("coefficient a is non-finite at a node");
    if (a_low) errs.push_back("coefficient a falls below the declared lower bound a1");
    if (a_high) errs.push_back("coefficient a exceeds the declared upper bound a2");
    if (u0_neg) errs.push_back("u0 must be nonnegative when the nonneg flag is set");
    if (bad_sample) errs.push_back("u0 is non-finite at a node");

    if (!errs.empty()) throw ValidationError(std::move(errs));
}

} // namespace subdual
