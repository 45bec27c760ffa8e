#ifndef HSFLOW_METRIC_HPP
#define HSFLOW_METRIC_HPP

/// Orthogonal 3-metrics ds^2 = eps1*E1^2 dx1^2 + E2^2 dx2^2 + E3^2 dx3^2
/// with the fixed coordinate roles
///   x1 = gap (cell-normal) direction, walls are level sets of x1,
///   x2 = ignored symmetry direction (coefficients must not reference it),
///   x3 = flow direction.
/// The coefficients are expressions in (x1, x3) plus named parameters and
/// must be nonzero on a validation grid over the domain box.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsflow/expr.hpp"

namespace hsflow {

/// Construction- and file-level metric failures (schema violations,
/// vanishing coefficients, bad domains).
class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MetricSpec {
    std::string name;
    Expression e1, e2, e3;       // |E_i|, always real and positive on the domain
    int epsilon1 = +1;           // -1 marks a semi-Riemannian x1 term
    Bindings params;
    double x1_min = 0.0, x1_max = 1.0;
    double x3_min = 0.0, x3_max = 1.0;
    std::optional<Expression> conformal_f;  // set when built as a conformal metric

    double eval_e1(double x1, double x3) const { return e1.evaluate(x1, x3, params); }
    double eval_e2(double x1, double x3) const { return e2.evaluate(x1, x3, params); }
    double eval_e3(double x1, double x3) const { return e3.evaluate(x1, x3, params); }
};

/// Constancy diagnostic of k1(x3) = -(2/3) f^3 (1/f^3)'' for a conformal
/// factor f(x3), computed by exact symbolic differentiation at each sample.
struct ConformalFactorReport {
    std::vector<double> x3;
    std::vector<double> k1_values;
    bool is_constant = false;
    double k1_constant = 0.0;  // meaningful when is_constant
    double tolerance = 0.0;
};

/// Preset catalog. `params` supplies geometry constants; `f_text` is the
/// conformal factor expression for the "conformal" preset (ignored
/// otherwise).
///
///   cartesian              (1, 1, 1)
///   cylindrical_zflow      x1=rho, x3=z:    (1, x1, 1)
///   cylindrical_radial     x1=z,   x3=rho:  (1, x3, 1)
///   cylindrical_azimuthal  x1=rho, x3=phi:  (1, 1, x1)
///   spherical_polar        x1=r,   x3=theta:(1, x1*sin(x3), x1)
///   minkowski_pseudosphere x1=r,   x3=tau:  (1, x1*sinh(x3), x1), eps1=-1
///   conformal              (f, f, f), f = f(x3) from f_text
///   conical                param alpha in (0, pi/2): (1, x1*cos(alpha)+x3*sin(alpha), 1)
///   toroidal               param a > 0: (1, a + x1*cos(x3), x1)
MetricSpec make_preset(const std::string& name, const Bindings& params = {},
                       const std::string& f_text = "");

/// Validates and constructs a custom metric; throws MetricError on bad
/// values (vanishing coefficient, inverted domain, x2 dependence).
MetricSpec make_metric(std::string name, Expression e1, Expression e2, Expression e3,
                       int epsilon1, Bindings params,
                       double x1_min, double x1_max, double x3_min, double x3_max,
                       std::optional<Expression> conformal_f = std::nullopt);

/// Reads the metric JSON schema:
/// {"name": str, "e1": str, "e2": str, "e3": str, "epsilon1": +-1,
///  "params": {str: num}, "domain": {"x1": [lo,hi], "x3": [lo,hi]}}
/// Schema violations report the offending field path.
MetricSpec load_metric(const std::string& file_path);

/// k1(x3) sampled on `grid_size` points of [x3_min, x3_max]; constant iff
/// max |k1 - mean| <= tol * (1 + |mean|).
ConformalFactorReport conformal_k1(const Expression& f, double x3_min, double x3_max,
                                   int grid_size = 33, double tol = 1e-9,
                                   const Bindings& params = {});

/// Pointwise k1 at a single x3 (exact symbolic differentiation of 1/f^3).
double conformal_k1_at(const Expression& f, double x3, const Bindings& params = {});

}  // namespace hsflow

#endif  // HSFLOW_METRIC_HPP
