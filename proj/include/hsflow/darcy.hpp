#ifndef HSFLOW_DARCY_HPP
#define HSFLOW_DARCY_HPP

/// Gap averaging and the mobility laws: the pseudosphere law with its
/// hypergeometric geometry factor, and the conformal law in closed form and
/// as the even power-series ratio. Mobilities follow the convention
/// V_mean = -value * (grad p)_3, so value is positive.

#include <functional>
#include <map>
#include <string>

#include "hsflow/expr.hpp"
#include "hsflow/metric.hpp"

namespace hsflow {

struct DarcyMobility {
    double value = 0.0;          // velocity per unit pressure gradient, includes 1/eta
    double dimensionless = 0.0;  // geometry factor: F/12 or S(alpha b)
    double a = 0.0, b = 0.0, eta = 1.0;
    std::map<std::string, double> extra;  // law-specific: x3, f, k1, u, ...
    std::string frame_note;      // the (grad p) convention the value multiplies
    std::string law;             // "pseudosphere" or "conformal"
    bool trig_continuation = false;  // trigonometric continuation in use
};

/// Arc-length-weighted average of h along the gap path x3 = const:
/// (int h |E1| dx1) / (int |E1| dx1), composite Simpson with `nodes` points.
double average_along_gap(const std::function<double(double, double)>& h,
                         const MetricSpec& m, double x3, double a, double b,
                         int nodes = 129);

/// Gauss hypergeometric F(1,2;4;z) for z <= 0. For x = -z >= 0.1 the closed
/// form (6/x^3)(x + x^2/2 - (1+x)ln(1+x)) is used; below that the series
/// sum 6 z^n / ((n+2)(n+3)) avoids the cancellation in the closed form.
double hypergeometric_F124(double z);

/// Dimensionless conformal factor S(u) = (1/2)[coth(u/2)/u - 2/u^2] with the
/// series fallback below u = 1e-3; S(0) = 1/12.
double mobility_factor(double u);

/// Truncated even-series ratio for S:
///   numerator   sum_{k=0..n} (1/(2k+3)! - 2/(2k+4)!) u^{2k}
///   denominator 1 + sum_{k=1..n} 2 u^{2k} / (2k+2)!
double mobility_series(double u, int n_terms);

/// Pseudosphere cell walls r=a and r=a+b: value = b^2 F(1,2;4;-b/a)/(12 eta),
/// against the pressure gradient framed at the inner wall.
DarcyMobility pseudosphere_mobility(double a, double b, double eta);

/// Conformal cell of width b at height x3: alpha^2 = -k1(x3) frozen at x3,
/// value = b^2 f(x3)^2 S(alpha b)/eta. Positive k1 selects the flagged
/// trigonometric continuation.
DarcyMobility conformal_mobility(const Expression& f, double b, double x3, double eta,
                                 const Bindings& params = {});

}  // namespace hsflow

#endif  // HSFLOW_DARCY_HPP
