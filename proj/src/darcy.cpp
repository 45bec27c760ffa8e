#include "hsflow/darcy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hsflow/numerics.hpp"

namespace hsflow {

double average_along_gap(const std::function<double(double, double)>& h,
                         const MetricSpec& m, double x3, double a, double b,
                         int nodes) {
    if (!(b > 0.0)) throw std::invalid_argument("average_along_gap: b must be positive");
    if (a < m.x1_min - 1e-12 || a + b > m.x1_max + 1e-12 || x3 < m.x3_min - 1e-12 ||
        x3 > m.x3_max + 1e-12)
        throw std::invalid_argument("average_along_gap: path outside the metric domain");

    auto weight = [&](double x1) {
        const double w = std::fabs(m.eval_e1(x1, x3));
        if (w == 0.0 || !std::isfinite(w)) {
            std::ostringstream os;
            os << "average_along_gap: degenerate E1 at (x1=" << x1 << ", x3=" << x3 << ")";
            throw std::domain_error(os.str());
        }
        return w;
    };
    const double num = simpson([&](double x1) { return h(x1, x3) * weight(x1); }, a, a + b, nodes);
    const double den = simpson(weight, a, a + b, nodes);
    return num / den;
}

double hypergeometric_F124(double z) {
    if (z > 0.0)
        throw std::invalid_argument("hypergeometric_F124: argument must be non-positive");
    const double x = -z;
    if (x < 0.1) {
        // F(1,2;4;z) = sum_n 6 z^n / ((n+2)(n+3)); fast for |z| < 0.1.
        double sum = 0.0, term = 1.0;  // term_n = 6 z^n / ((n+2)(n+3)), term_0 = 1
        for (int n = 0; n < 200; ++n) {
            sum += term;
            const double next = term * z * (n + 2.0) / (n + 4.0);
            if (std::fabs(next) <= 1e-14 * std::fabs(sum)) {
                sum += next;
                break;
            }
            term = next;
        }
        return sum;
    }
    const double lp = std::log1p(x);
    return 6.0 / (x * x * x) * (x + x * x / 2.0 - (1.0 + x) * lp);
}

double mobility_series(double u, int n_terms) {
    if (n_terms < 1) throw std::invalid_argument("mobility_series: n_terms must be >= 1");
    const double u2 = u * u;
    // factorials grow up to (2n+4)!; doubles hold that comfortably for the
    // truncation depths in use.
    double num = 1.0 / 6.0 - 2.0 / 24.0;  // k = 0: 1/3! - 2/4!
    double den = 1.0;
    double upow = 1.0;
    double fact = 24.0;  // (2k+2)! at k = 1 -> 4! built incrementally below
    for (int k = 1; k <= n_terms; ++k) {
        upow *= u2;
        // (2k+2)! from (2k)!: multiply previous (2k+2)! by (2k+3)(2k+4) lazily
        if (k > 1) fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
        const double f2k2 = fact;                                // (2k+2)!
        const double f2k3 = f2k2 * (2.0 * k + 3.0);              // (2k+3)!
        const double f2k4 = f2k3 * (2.0 * k + 4.0);              // (2k+4)!
        num += (1.0 / f2k3 - 2.0 / f2k4) * upow;
        den += 2.0 * upow / f2k2;
    }
    return num / den;
}

double mobility_factor(double u) {
    if (u < 0.0) throw std::invalid_argument("mobility_factor: u must be non-negative");
    if (u < 1e-3) return mobility_series(u, 8);
    return 0.5 * (1.0 / std::tanh(u / 2.0) / u - 2.0 / (u * u));
}

namespace {

// Trigonometric continuation of S for k1 > 0 (v = sqrt(k1) b).
double mobility_factor_trig(double v) {
    // Resonant thickness: v at a multiple of 2 pi.
    const double two_pi = 6.283185307179586476925286766559;
    const double frac = std::fabs(std::remainder(v, two_pi));
    if (frac < 1e-10)
        throw std::domain_error("conformal_mobility: resonance, sqrt(k1)*b at a multiple of 2*pi");
    if (v < 1e-3) return mobility_series(0.0, 4);  // same flat limit
    return 0.5 * (2.0 / (v * v) - 1.0 / std::tan(v / 2.0) / v);
}

}  // namespace

DarcyMobility pseudosphere_mobility(double a, double b, double eta) {
    if (!(a > 0.0) || !(b > 0.0) || !(eta > 0.0))
        throw std::invalid_argument("pseudosphere_mobility: a, b, eta must be positive");
    DarcyMobility mob;
    mob.law = "pseudosphere";
    mob.a = a;
    mob.b = b;
    mob.eta = eta;
    const double F = hypergeometric_F124(-b / a);
    mob.dimensionless = F / 12.0;
    mob.value = b * b * F / (12.0 * eta);
    mob.extra["F"] = F;
    mob.extra["b_over_a"] = b / a;
    mob.frame_note =
        "value multiplies -(grad p)_tau = -(1/E3) dp/dtau with E3 = r evaluated at the "
        "inner wall r = a";
    return mob;
}

DarcyMobility conformal_mobility(const Expression& f, double b, double x3, double eta,
                                 const Bindings& params) {
    if (!(b > 0.0) || !(eta > 0.0))
        throw std::invalid_argument("conformal_mobility: b and eta must be positive");
    const double fv = f.evaluate(0.0, x3, params);
    if (!(fv > 0.0))
        throw std::domain_error("conformal_mobility: conformal factor must be positive at x3");
    const double k1 = conformal_k1_at(f, x3, params);

    DarcyMobility mob;
    mob.law = "conformal";
    mob.a = 0.0;
    mob.b = b;
    mob.eta = eta;
    mob.extra["x3"] = x3;
    mob.extra["f"] = fv;
    mob.extra["k1"] = k1;

    double S;
    if (k1 <= 0.0) {
        const double alpha = std::sqrt(-k1);
        const double u = alpha * b;
        S = mobility_factor(u);
        mob.extra["alpha"] = alpha;
        mob.extra["u"] = u;
    } else {
        const double v = std::sqrt(k1) * b;
        S = mobility_factor_trig(v);
        mob.extra["omega"] = std::sqrt(k1);
        mob.extra["u"] = v;
        mob.trig_continuation = true;
    }
    mob.dimensionless = S;
    mob.value = b * b * fv * fv * S / eta;
    mob.frame_note =
        "value multiplies -(grad p)_3 = -(1/E3) dp/dx3 with E3 = f frozen at the path's "
        "x3; for non-constant k1 this is the gap-frozen local law";
    return mob;
}

}  // namespace hsflow
