#ifndef HSFLOW_STOKES_OP_HPP
#define HSFLOW_STOKES_OP_HPP

/// The third-order existence operator behind the flow equation, evaluated by
/// nested second-order central-difference stencils of the assembled inner
/// expressions. Derivatives of the profile g itself come from its exact
/// evaluators; only the metric-dependent factors are differenced.

#include <cstdint>
#include <functional>
#include <vector>

#include "hsflow/metric.hpp"
#include "hsflow/profiles.hpp"

namespace hsflow {

struct ResidualField {
    std::vector<double> x1, x3;   // grid axes
    std::vector<double> values;   // row-major [i * n3 + j]
    double sup_norm = 0.0;
    double h = 0.0;               // finite-difference step used
};

/// Residual N[g] = RHS - LHS of the existence equation on an n1 x n3 grid
/// interior to both the metric domain and the profile gap (stencil margins
/// are insetted automatically). h <= 0 selects 1e-3 of the smaller domain
/// width. A true flow solution drives the sup-norm to zero at O(h^2).
ResidualField flow_residual(const MetricSpec& m, const FlowProfile& g,
                              int n1 = 17, int n3 = 17, double h = 0.0);

/// Pointwise application of the same discrete operator to an arbitrary
/// profile given by exact g and g' evaluators. The point must sit at least
/// 3h (x1) and 2h (x3) inside the metric domain.
double flow_operator_apply(const MetricSpec& m,
                    const std::function<double(double)>& g,
                    const std::function<double(double)>& dg,
                    double x1, double x3, double h);

/// Sampled coefficients of the flow ODE in the convention
///   g''' - A g'' - B g' - C g = 0,
/// recovered by probing the linear operator with {1, x1, x1^2, x1^3} and
/// solving the triangular system at each grid point.
struct OdeCoefficients {
    std::vector<double> x1, x3;              // grid axes
    std::vector<double> A, B, C, alpha3;     // row-major [i * n3 + j]
    std::vector<std::uint8_t> degenerate;    // leading coefficient too small
    double x3_deviation = 0.0;  // max row spread across x3, normalized
    double h = 0.0;

    int n1() const { return static_cast<int>(x1.size()); }
    int n3() const { return static_cast<int>(x3.size()); }
};

OdeCoefficients extract_coefficients(const MetricSpec& m, int n1 = 17, int n3 = 17,
                                     double h = 0.0);

/// True when every coefficient's spread across x3 stays within tol
/// (relative). Degenerate grid points are masked out of the deviation.
bool x3_independence(const OdeCoefficients& c, double tol = 1e-6);

struct PressureField {
    std::vector<double> x1, x3;   // grid axes
    std::vector<double> p;        // row-major, p(basepoint) = 0
    double compatibility_residual = 0.0;  // max mixed-partial mismatch
    double base_x1 = 0.0, base_x3 = 0.0;
    double h = 0.0;
};

/// Integrates dp/dx1 and dp/dx3 from the momentum balance along the L-path
/// basepoint -> (x1, base_x3) -> (x1, x3) with composite Simpson rules.
/// The compatibility residual measures how far the two gradient fields are
/// from a single potential; it stays O(h^2) exactly when g solves the flow
/// equation.
PressureField reconstruct_pressure(const MetricSpec& m, const FlowProfile& g,
                                   double base_x1, double base_x3,
                                   int n1 = 17, int n3 = 17, double h = 0.0,
                                   double eta = 1.0, int quad_nodes = 129);

}  // namespace hsflow

#endif  // HSFLOW_STOKES_OP_HPP
