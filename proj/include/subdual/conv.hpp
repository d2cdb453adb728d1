#pragma once

#include <string>
#include <vector>

#include "subdual/grids.hpp"
#include "subdual/kernels.hpp"

namespace subdual {

// Lower-triangular discrete convolution with exact kernel cell integrals as
// weights: (conv f)_i = sum_{j<=i} w_{i-j} f_j approximates (k*f)(t_{i+1}) for
// cell series f. The dual convolution is the exact transpose, which turns the
// duality identity <k*f, g> = <f, k T* g> into a structural property of the
// discretization rather than an approximation.
class ConvOperator {
public:
    ConvOperator() = default;

    static ConvOperator from_kernel(const Kernel& k, const TimeGrid& grid);
    static ConvOperator from_weights(std::vector<double> w, const TimeGrid& grid,
                                     std::string provenance);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return w_; }
    const std::string& provenance() const { return provenance_; }

    std::vector<double> conv(const std::vector<double>& f) const;
    std::vector<double> dual(const std::vector<double>& g) const;

    double l1() const; // sum of weights = antiderivative at T

private:
    TimeGrid grid_;
    std::vector<double> w_;
    std::string provenance_;
};

// dt * sum_i f_i g_i on cell series
double inner(const TimeGrid& grid, const std::vector<double>& f, const std::vector<double>& g);

// Operator of the convolved kernel b*h built from the exact closed form
// (power-sum kernels only); right-hand side of the successive-dual identity.
ConvOperator convolved_operator(const Kernel& b, const Kernel& h, const TimeGrid& grid);

// max nodal residual of b T* (h T* g) against (b*h) T* g
double check_successive_dual(const Kernel& b, const Kernel& h, const std::vector<double>& g,
                             const TimeGrid& grid);

// Residual of int (d/dt)(k T* f) g + int f (d/dt)(k*g) for bounded kernels.
// Both sides use genuine centered differences (one-sided at the endpoints):
// a mirrored discretization would make the residual identically zero for every
// kernel — triangular Toeplitz operators commute — and would verify nothing.
double check_integrodiff_duality(const Kernel& k, const std::vector<double>& f,
                                 const std::vector<double>& g, const TimeGrid& grid);

// Nodal residual of v (k*v)' against (1/2)(k*v^2)' + (1/2)k v^2
// + (1/2) int_0^t (-k')(s)|v(t)-v(t-s)|^2 ds for smooth kernels; v given at nodes.
double check_fundamental_identity(const Kernel& k, const std::vector<double>& v_nodes,
                                  const TimeGrid& grid);

} // namespace subdual
