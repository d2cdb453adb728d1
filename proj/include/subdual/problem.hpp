#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdual/field.hpp"
#include "subdual/grids.hpp"
#include "subdual/kernels.hpp"

namespace subdual {

// Monotone nonlinearity. power(m) evaluates as sign(u)|u|^m so sign-changing
// iterates stay well-defined for non-integer m.
class Phi {
public:
    enum class Kind { Power, Table };

    static Phi power(double m) {
        if (m < 1.0) throw std::domain_error("phi: exponent must be >= 1");
        Phi p;
        p.kind_ = Kind::Power;
        p.m_ = m;
        return p;
    }
    static Phi linear() { return power(1.0); }
    // strictly increasing samples through (0,0); piecewise-linear
    static Phi table(std::vector<double> xs, std::vector<double> ys);

    Kind kind() const { return kind_; }
    double exponent() const { return m_; }

    double operator()(double u) const;
    double deriv(double u) const;

private:
    Kind kind_ = Kind::Power;
    double m_ = 1.0;
    std::vector<double> xs_, ys_;
};

struct Tolerances {
    double newton = 1e-11;
    int max_newton = 50;
    int max_backtrack = 30;
    int max_picard = 30000;
    double est = 0.0; // 0 -> default 1e-9*max(|lhs|,|rhs|,1)
};

// Everything one solve needs. Coefficient bounds are validated against nodal
// samples at load, not trusted.
struct ProblemSpec {
    KernelPair pair;
    TimeGrid tgrid;
    SpaceGrid sgrid;
    Phi phi = Phi::linear();
    std::function<double(double, double, double)> a;  // a(t,x,y)
    double a1 = 1.0, a2 = 1.0;
    std::function<double(double, double)> u0;         // u0(x,y)
    std::function<double(double, double, double)> f;  // f(t,x,y)
    bool nonneg = true;
    Tolerances tol;

    std::vector<double> u0_values() const;
    std::vector<double> a_values(double t) const;
    std::vector<double> f_values(double t) const;

    // aggregate every violation instead of stopping at the first
    void validate() const;
};

} // namespace subdual
