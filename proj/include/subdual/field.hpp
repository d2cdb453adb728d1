#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace subdual {

// Space-time trajectory: rows are time nodes 0..N (row 0 holds the initial
// state), columns are spatial unknowns. Row n >= 1 doubles as the value on time
// cell n-1 in all quadratures.
struct Field {
    int N = 0; // time steps
    int M = 0; // spatial unknowns
    std::vector<double> data;
    bool nonneg = false;

    Field() = default;
    Field(int N_, int M_, bool nonneg_ = false)
        : N(N_), M(M_), data(static_cast<size_t>(N_ + 1) * M_, 0.0), nonneg(nonneg_) {}

    double& at(int n, int j) { return data[static_cast<size_t>(n) * M + j]; }
    double at(int n, int j) const { return data[static_cast<size_t>(n) * M + j]; }

    double* row(int n) { return data.data() + static_cast<size_t>(n) * M; }
    const double* row(int n) const { return data.data() + static_cast<size_t>(n) * M; }

    std::vector<double> row_vec(int n) const {
        return std::vector<double>(row(n), row(n) + M);
    }

    double min_value() const {
        double m = data.empty() ? 0.0 : data[0];
        for (double x : data) m = std::min(m, x);
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : data) m = std::max(m, std::abs(x));
        return m;
    }

    // finite entries; min >= -1e-10 when the nonneg flag is set
    void check_invariants() const {
        for (double x : data)
            if (!std::isfinite(x)) throw std::runtime_error("Field: non-finite entry");
        if (nonneg && min_value() < -1e-10)
            throw std::runtime_error("Field: nonneg flag violated beyond -1e-10");
    }
};

} // namespace subdual
