#ifndef HSFLOW_NUMERICS_HPP
#define HSFLOW_NUMERICS_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hsflow {

/// n evenly spaced points covering [a, b] inclusive (n >= 2).
inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + h * i;
    out.back() = b;
    return out;
}

/// Composite Simpson rule on [a, b]. `nodes` is rounded up to the next odd
/// count >= 3.
template <class F>
double simpson(F&& f, double a, double b, int nodes) {
    if (nodes < 3) nodes = 3;
    if (nodes % 2 == 0) ++nodes;
    const int n = nodes - 1;  // even interval count
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Cumulative integral of uniformly sampled values (spacing h), starting at
/// zero. Even indices use composite Simpson; odd indices add a one-interval
/// quadratic end rule, keeping the whole table fourth-order accurate.
inline std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("cumulative_integral: need at least 3 samples");
    std::vector<double> F(n, 0.0);
    for (std::size_t k = 2; k < n; k += 2)
        F[k] = F[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
    F[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for (std::size_t k = 3; k < n; k += 2)
        F[k] = F[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
    return F;
}

}  // namespace hsflow

#endif  // HSFLOW_NUMERICS_HPP
