#include "hsflow/stokes_op.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "hsflow/numerics.hpp"

namespace hsflow {

namespace {

struct GProfile {
    std::function<double(double)> g, dg;
};

/// Evaluates the existence operator on one profile over one metric. All
/// metric factors are sampled pointwise; x-derivatives of assembled inner
/// quantities use central differences with step h, while g and g' are exact.
class OperatorEval {
public:
    OperatorEval(const MetricSpec& m, GProfile prof, double h)
        : m_(m), prof_(std::move(prof)), h_(h) {}

    double h() const { return h_; }

    // R = E3/(E1 E2), Q = E2/(E1 E3), P = E1/(E2 E3); |E1| throughout.
    double R(double x1, double x3) const {
        const double d = e1(x1, x3) * e2(x1, x3);
        check_denom(d, x1, x3);
        return e3(x1, x3) / d;
    }
    double Q(double x1, double x3) const {
        const double d = e1(x1, x3) * e3(x1, x3);
        check_denom(d, x1, x3);
        return e2(x1, x3) / d;
    }
    double P(double x1, double x3) const {
        const double d = e2(x1, x3) * e3(x1, x3);
        check_denom(d, x1, x3);
        return e1(x1, x3) / d;
    }

    /// W = Q * d/dx1 (R g) with the product rule split: the metric part of
    /// the innermost derivative is differenced, g and g' are exact.
    double W(double x1, double x3) const {
        const double dR = (R(x1 + h_, x3) - R(x1 - h_, x3)) / (2.0 * h_);
        return Q(x1, x3) * (dR * prof_.g(x1) + R(x1, x3) * prof_.dg(x1));
    }

    double dW_dx1(double x1, double x3) const {
        return (W(x1 + h_, x3) - W(x1 - h_, x3)) / (2.0 * h_);
    }
    double dW_dx3(double x1, double x3) const {
        return (W(x1, x3 + h_) - W(x1, x3 - h_)) / (2.0 * h_);
    }

    double lhs(double x1, double x3) const {
        const double tp = P(x1, x3 + h_) * dW_dx3(x1, x3 + h_);
        const double tm = P(x1, x3 - h_) * dW_dx3(x1, x3 - h_);
        return (tp - tm) / (2.0 * h_);
    }
    double rhs(double x1, double x3) const {
        const double up = R(x1 + h_, x3) * dW_dx1(x1 + h_, x3);
        const double um = R(x1 - h_, x3) * dW_dx1(x1 - h_, x3);
        return (up - um) / (2.0 * h_);
    }

    double apply(double x1, double x3) const { return rhs(x1, x3) - lhs(x1, x3); }

    // Momentum-balance gradient fields.
    double dp_dx1(double x1, double x3, double eta) const {
        return -eta * P(x1, x3) * dW_dx3(x1, x3);
    }
    double dp_dx3(double x1, double x3, double eta) const {
        return eta * R(x1, x3) * dW_dx1(x1, x3);
    }

private:
    double e1(double x1, double x3) const { return std::fabs(m_.eval_e1(x1, x3)); }
    double e2(double x1, double x3) const { return m_.eval_e2(x1, x3); }
    double e3(double x1, double x3) const { return m_.eval_e3(x1, x3); }

    static void check_denom(double d, double x1, double x3) {
        if (d == 0.0 || !std::isfinite(d)) {
            std::ostringstream os;
            os << "degenerate metric coefficient at (x1=" << x1 << ", x3=" << x3 << ")";
            throw std::domain_error(os.str());
        }
    }

    const MetricSpec& m_;
    GProfile prof_;
    double h_;
};

double default_step(const MetricSpec& m) {
    return 1e-3 * std::min(m.x1_max - m.x1_min, m.x3_max - m.x3_min);
}

struct EvalBox {
    std::vector<double> x1, x3;
};

EvalBox interior_grid(double x1_lo, double x1_hi, double x3_lo, double x3_hi,
                      int n1, int n3, double h) {
    // Stencils reach 3h in x1 (nested first derivatives of expressions that
    // already difference the metric) and 2h in x3.
    const double m1 = 3.5 * h, m3 = 2.5 * h;
    if (x1_lo + m1 >= x1_hi - m1 || x3_lo + m3 >= x3_hi - m3)
        throw std::invalid_argument("finite-difference step too large for the domain");
    if (n1 < 2 || n3 < 2) throw std::invalid_argument("grid must be at least 2x2");
    EvalBox box;
    box.x1 = linspace(x1_lo + m1, x1_hi - m1, n1);
    box.x3 = linspace(x3_lo + m3, x3_hi - m3, n3);
    return box;
}

GProfile wrap(const FlowProfile& p) {
    return GProfile{[p](double x) { return p.g(x); }, [p](double x) { return p.dg(x); }};
}

}  // namespace

double flow_operator_apply(const MetricSpec& m,
                    const std::function<double(double)>& g,
                    const std::function<double(double)>& dg,
                    double x1, double x3, double h) {
    if (h <= 0.0) h = default_step(m);
    OperatorEval op(m, GProfile{g, dg}, h);
    return op.apply(x1, x3);
}

ResidualField flow_residual(const MetricSpec& m, const FlowProfile& g,
                              int n1, int n3, double h) {
    if (h <= 0.0) h = default_step(m);
    const double x1_lo = std::max(m.x1_min, g.wall_a());
    const double x1_hi = std::min(m.x1_max, g.wall_a() + g.wall_b());
    const EvalBox box = interior_grid(x1_lo, x1_hi, m.x3_min, m.x3_max, n1, n3, h);

    OperatorEval op(m, wrap(g), h);
    ResidualField out;
    out.x1 = box.x1;
    out.x3 = box.x3;
    out.h = h;
    out.values.resize(box.x1.size() * box.x3.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < box.x1.size(); ++i) {
        for (std::size_t j = 0; j < box.x3.size(); ++j) {
            const double v = op.apply(box.x1[i], box.x3[j]);
            out.values[i * box.x3.size() + j] = v;
            sup = std::max(sup, std::fabs(v));
        }
    }
    out.sup_norm = sup;
    return out;
}

OdeCoefficients extract_coefficients(const MetricSpec& m, int n1, int n3, double h) {
    if (h <= 0.0) h = default_step(m);
    const EvalBox box = interior_grid(m.x1_min, m.x1_max, m.x3_min, m.x3_max, n1, n3, h);

    const GProfile probes[4] = {
        {[](double) { return 1.0; }, [](double) { return 0.0; }},
        {[](double x) { return x; }, [](double) { return 1.0; }},
        {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }},
        {[](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }},
    };
    OperatorEval ops[4] = {
        {m, probes[0], h}, {m, probes[1], h}, {m, probes[2], h}, {m, probes[3], h}};

    OdeCoefficients out;
    out.x1 = box.x1;
    out.x3 = box.x3;
    out.h = h;
    const std::size_t total = box.x1.size() * box.x3.size();
    out.A.resize(total);
    out.B.resize(total);
    out.C.resize(total);
    out.alpha3.resize(total);
    out.degenerate.assign(total, 0);

    for (std::size_t i = 0; i < box.x1.size(); ++i) {
        const double x = box.x1[i];
        for (std::size_t j = 0; j < box.x3.size(); ++j) {
            const double y = box.x3[j];
            const double N0 = ops[0].apply(x, y);
            const double N1 = ops[1].apply(x, y);
            const double N2 = ops[2].apply(x, y);
            const double N3 = ops[3].apply(x, y);

            const double a0 = N0;
            const double a1 = N1 - x * a0;
            const double a2 = (N2 - x * x * a0 - 2.0 * x * a1) / 2.0;
            const double a3 = (N3 - x * x * x * a0 - 3.0 * x * x * a1 - 6.0 * x * a2) / 6.0;

            const std::size_t idx = i * box.x3.size() + j;
            out.alpha3[idx] = a3;
            const double scale = std::max({std::fabs(a0), std::fabs(a1), std::fabs(a2),
                                           std::fabs(a3)});
            if (scale == 0.0 || std::fabs(a3) < 1e-12 * scale) {
                out.degenerate[idx] = 1;
                out.A[idx] = out.B[idx] = out.C[idx] = 0.0;
                continue;
            }
            out.A[idx] = -a2 / a3;
            out.B[idx] = -a1 / a3;
            out.C[idx] = -a0 / a3;
        }
    }

    // Row spread across x3 of each coefficient, normalized by the grid-wide
    // magnitude; degenerate points (coordinate singularities) are masked.
    const std::vector<double>* coefs[3] = {&out.A, &out.B, &out.C};
    double deviation = 0.0;
    for (const auto* cf : coefs) {
        double grid_max = 0.0;
        for (std::size_t idx = 0; idx < total; ++idx)
            if (!out.degenerate[idx]) grid_max = std::max(grid_max, std::fabs((*cf)[idx]));
        for (std::size_t i = 0; i < box.x1.size(); ++i) {
            double lo = 0.0, hi = 0.0;
            bool first = true;
            for (std::size_t j = 0; j < box.x3.size(); ++j) {
                const std::size_t idx = i * box.x3.size() + j;
                if (out.degenerate[idx]) continue;
                const double v = (*cf)[idx];
                if (first) {
                    lo = hi = v;
                    first = false;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            if (!first) deviation = std::max(deviation, (hi - lo) / (1.0 + grid_max));
        }
    }
    out.x3_deviation = deviation;
    return out;
}

bool x3_independence(const OdeCoefficients& c, double tol) {
    bool any = false;
    for (std::uint8_t d : c.degenerate)
        if (!d) { any = true; break; }
    if (!any) throw std::invalid_argument("x3_independence: extraction degenerate everywhere");
    return c.x3_deviation <= tol;
}

PressureField reconstruct_pressure(const MetricSpec& m, const FlowProfile& g,
                                   double base_x1, double base_x3,
                                   int n1, int n3, double h, double eta, int quad_nodes) {
    if (h <= 0.0) h = default_step(m);
    const double x1_lo = std::max(m.x1_min, g.wall_a());
    const double x1_hi = std::min(m.x1_max, g.wall_a() + g.wall_b());
    const EvalBox box = interior_grid(x1_lo, x1_hi, m.x3_min, m.x3_max, n1, n3, h);
    if (base_x1 < box.x1.front() || base_x1 > box.x1.back() ||
        base_x3 < box.x3.front() || base_x3 > box.x3.back())
        throw std::invalid_argument("reconstruct_pressure: basepoint outside the usable grid");

    OperatorEval op(m, wrap(g), h);
    auto f1 = [&](double x1, double x3) { return op.dp_dx1(x1, x3, eta); };
    auto f3 = [&](double x1, double x3) { return op.dp_dx3(x1, x3, eta); };

    PressureField out;
    out.x1 = box.x1;
    out.x3 = box.x3;
    out.base_x1 = base_x1;
    out.base_x3 = base_x3;
    out.h = h;
    out.p.resize(box.x1.size() * box.x3.size());

    // First leg along x1 at base_x3, second along x3 at each x1.
    std::vector<double> leg1(box.x1.size());
    for (std::size_t i = 0; i < box.x1.size(); ++i) {
        leg1[i] = simpson([&](double s) { return f1(s, base_x3); }, base_x1, box.x1[i],
                          quad_nodes);
    }
    for (std::size_t i = 0; i < box.x1.size(); ++i) {
        const double x = box.x1[i];
        for (std::size_t j = 0; j < box.x3.size(); ++j) {
            out.p[i * box.x3.size() + j] =
                leg1[i] +
                simpson([&](double t) { return f3(x, t); }, base_x3, box.x3[j], quad_nodes);
        }
    }

    double compat = 0.0;
    for (double x : box.x1) {
        for (double y : box.x3) {
            const double d13 = (f1(x, y + h) - f1(x, y - h)) / (2.0 * h);
            const double d31 = (f3(x + h, y) - f3(x - h, y)) / (2.0 * h);
            compat = std::max(compat, std::fabs(d13 - d31));
        }
    }
    out.compatibility_residual = compat;
    return out;
}

}  // namespace hsflow
