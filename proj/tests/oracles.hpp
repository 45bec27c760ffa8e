#ifndef HSFLOW_TESTS_ORACLES_HPP
#define HSFLOW_TESTS_ORACLES_HPP

// Test-only reference numerics, deliberately independent of the library's
// quadrature and differencing code paths.

#include <cmath>
#include <functional>

namespace oracle {

/// Plain composite Simpson with n (even) subintervals.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int subintervals = 2048) {
    if (subintervals % 2 == 1) ++subintervals;
    const double h = (b - a) / subintervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < subintervals; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Fourth-order central first derivative.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-4) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Second-order central first derivative (the agreement targets in the
/// module contracts are phrased against this stencil).
inline double derivative2nd(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace oracle

#endif  // HSFLOW_TESTS_ORACLES_HPP
