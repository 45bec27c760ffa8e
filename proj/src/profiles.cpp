#include "hsflow/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsflow/numerics.hpp"
#include "hsflow/separability.hpp"

namespace hsflow {

namespace detail {

struct ProfileImpl {
    virtual ~ProfileImpl() = default;
    virtual double g(double x) const = 0;
    virtual double dg(double x) const = 0;
    virtual double d2g(double x) const = 0;
    virtual double d3g(double x) const = 0;
};

namespace {

struct ClosedFormImpl : ProfileImpl {
    std::function<double(double)> f0, f1, f2, f3;
    double g(double x) const override { return f0(x); }
    double dg(double x) const override { return f1(x); }
    double d2g(double x) const override { return f2(x); }
    double d3g(double x) const override { return f3(x); }
};

/// Cubic Hermite table on a uniform grid: values plus exact derivatives at
/// the nodes, fourth-order accurate between them.
struct HermiteTable {
    double x0 = 0.0, h = 1.0;
    std::vector<double> value, slope;

    double operator()(double x) const {
        const int cells = static_cast<int>(value.size()) - 1;
        int k = static_cast<int>(std::floor((x - x0) / h));
        k = std::clamp(k, 0, cells - 1);
        const double t = (x - (x0 + k * h)) / h;
        const double t2 = t * t, t3 = t2 * t;
        return value[k] * (2 * t3 - 3 * t2 + 1) + slope[k] * h * (t3 - 2 * t2 + t) +
               value[k + 1] * (-2 * t3 + 3 * t2) + slope[k + 1] * h * (t3 - t2);
    }
};

struct QuadratureImpl : ProfileImpl {
    // Frozen-x3 factor machinery; all expressions are evaluated at
    // (x1, x3_ref) with the metric parameters bound.
    Bindings params;
    double x3_ref = 0.0;
    Expression e1, de1;                  // E1 and E1'
    Expression Hx, invH;                 // H = (e3/e2)(., x3_ref) and 1/H
    Expression phi, dphi, d2phi, d3phi;  // phi = E1/H
    Expression psi, dpsi, d2psi;         // psi = E1*H
    double lam_over_eta = 0.0;
    double c1 = 0.0;
    double slope_fix = 0.0;  // constant correction from closing w at the far wall
    HermiteTable Q, w;

    double ev(const Expression& e, double x) const { return e.evaluate(x, x3_ref, params); }

    double uval(double x) const { return lam_over_eta * Q(x) + c1; }
    double wval(double x) const { return w(x); }
    double w1(double x) const { return ev(psi, x) * uval(x) - slope_fix; }
    double w2(double x) const { return ev(dpsi, x) * uval(x) + lam_over_eta * ev(e1, x); }
    double w3(double x) const {
        return ev(d2psi, x) * uval(x) +
               lam_over_eta * (ev(dpsi, x) * ev(invH, x) + ev(de1, x));
    }

    double g(double x) const override { return wval(x) * ev(phi, x); }
    double dg(double x) const override { return w1(x) * ev(phi, x) + wval(x) * ev(dphi, x); }
    double d2g(double x) const override {
        return w2(x) * ev(phi, x) + 2.0 * w1(x) * ev(dphi, x) + wval(x) * ev(d2phi, x);
    }
    double d3g(double x) const override {
        return w3(x) * ev(phi, x) + 3.0 * w2(x) * ev(dphi, x) + 3.0 * w1(x) * ev(d2phi, x) +
               wval(x) * ev(d3phi, x);
    }
};

}  // namespace
}  // namespace detail

namespace {

// cosh(p)/cosh(q) and sinh(p)/cosh(q) without overflow for large arguments
// (the profiles only ever need |p| <= q plus stencil-sized excursions).
double cosh_ratio(double p, double q) {
    const double ap = std::fabs(p);
    if (q <= 350.0 && ap <= 350.0) return std::cosh(p) / std::cosh(q);
    return std::exp(ap - q) * (1.0 + std::exp(-2.0 * ap)) / (1.0 + std::exp(-2.0 * q));
}

double sinh_over_cosh(double p, double q) {
    const double ap = std::fabs(p);
    if (q <= 350.0 && ap <= 350.0) return std::sinh(p) / std::cosh(q);
    const double mag =
        std::exp(ap - q) * (1.0 - std::exp(-2.0 * ap)) / (1.0 + std::exp(-2.0 * q));
    return p < 0.0 ? -mag : mag;
}

}  // namespace

const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::MinkowskiQuadratic: return "MinkowskiQuadratic";
        case ProfileKind::ConformalSinh: return "ConformalSinh";
        case ProfileKind::ConformalTrig: return "ConformalTrig";
        case ProfileKind::FlatParabola: return "FlatParabola";
        case ProfileKind::Quadrature: return "Quadrature";
    }
    return "?";
}

FlowProfile::FlowProfile(ProfileKind kind, double a, double b, double amplitude, double k2,
                         double alpha, std::string note,
                         std::shared_ptr<const detail::ProfileImpl> impl,
                         std::vector<std::pair<double, double>> samples)
    : kind_(kind), a_(a), b_(b), amplitude_(amplitude), k2_(k2), alpha_(alpha),
      note_(std::move(note)), impl_(std::move(impl)), samples_(std::move(samples)) {}

double FlowProfile::g(double x1) const { return impl_->g(x1); }
double FlowProfile::dg(double x1) const { return impl_->dg(x1); }
double FlowProfile::d2g(double x1) const { return impl_->d2g(x1); }
double FlowProfile::d3g(double x1) const { return impl_->d3g(x1); }

FlowProfile minkowski_profile(double a, double b, double C, double eta) {
    if (!(a > 0.0)) throw std::invalid_argument("minkowski_profile: a must be positive");
    if (!(b > 0.0)) throw std::invalid_argument("minkowski_profile: b must be positive");
    if (!(eta > 0.0)) throw std::invalid_argument("minkowski_profile: eta must be positive");
    const double coef = -C / (2.0 * eta);
    auto impl = std::make_shared<detail::ClosedFormImpl>();
    impl->f0 = [=](double r) { return coef * (r - a) * (a + b - r); };
    impl->f1 = [=](double r) { return coef * (2.0 * a + b - 2.0 * r); };
    impl->f2 = [=](double) { return -2.0 * coef; };
    impl->f3 = [](double) { return 0.0; };
    return FlowProfile(ProfileKind::MinkowskiQuadratic, a, b, C, 0.0, 0.0,
                       "amplitude is the constant C driving the pressure equation; eta folded in",
                       impl);
}

FlowProfile conformal_profile(double b, double k1, double k2, double a, bool allow_trig) {
    if (!(b > 0.0)) throw std::invalid_argument("conformal_profile: b must be positive");

    if (k1 == 0.0) {
        auto impl = std::make_shared<detail::ClosedFormImpl>();
        impl->f0 = [=](double x) { const double s = x - a; return -(k2 / 2.0) * s * (b - s); };
        impl->f1 = [=](double x) { const double s = x - a; return -(k2 / 2.0) * (b - 2.0 * s); };
        impl->f2 = [=](double) { return k2; };
        impl->f3 = [](double) { return 0.0; };
        return FlowProfile(ProfileKind::FlatParabola, a, b, k2, k2, 0.0,
                           "flat limit of the conformal family (k1 = 0)", impl);
    }

    if (k1 < 0.0) {
        const double alpha = std::sqrt(-k1);
        const double half = alpha * b / 2.0;
        const double scale = k2 / k1;
        auto impl = std::make_shared<detail::ClosedFormImpl>();
        auto gfun = [=](double x) {
            const double d = (x - a) - b / 2.0;
            return scale * (1.0 - cosh_ratio(alpha * d, half));
        };
        auto g1fun = [=](double x) {
            const double d = (x - a) - b / 2.0;
            return -scale * alpha * sinh_over_cosh(alpha * d, half);
        };
        impl->f0 = gfun;
        impl->f1 = g1fun;
        impl->f2 = [=](double x) { return k2 - k1 * gfun(x); };
        impl->f3 = [=](double x) { return -k1 * g1fun(x); };
        return FlowProfile(ProfileKind::ConformalSinh, a, b, k2, k2, alpha,
                           "g solves g'' + k1 g = k2 with no-slip walls", impl);
    }

    if (!allow_trig)
        throw std::invalid_argument(
            "conformal_profile: k1 > 0 selects the trigonometric continuation, which must "
            "be enabled explicitly (allow_trig)");
    const double omega = std::sqrt(k1);
    if (std::fabs(std::sin(omega * b)) < 1e-10)
        throw ProfileError("conformal_profile: resonance, sin(omega*b) vanishes");
    const double denom = std::cos(omega * b / 2.0);
    const double scale = k2 / k1;
    auto impl = std::make_shared<detail::ClosedFormImpl>();
    auto gfun = [=](double x) {
        const double d = (x - a) - b / 2.0;
        return scale * (1.0 - std::cos(omega * d) / denom);
    };
    impl->f0 = gfun;
    impl->f1 = [=](double x) {
        const double d = (x - a) - b / 2.0;
        return scale * omega * std::sin(omega * d) / denom;
    };
    impl->f2 = [=](double x) { return k2 - k1 * gfun(x); };
    impl->f3 = [=](double x) {
        const double d = (x - a) - b / 2.0;
        return -k1 * (scale * omega * std::sin(omega * d) / denom);
    };
    return FlowProfile(ProfileKind::ConformalTrig, a, b, k2, k2, omega,
                       "trigonometric continuation (k1 > 0), enabled explicitly",
                       impl);
}

FlowProfile quadrature_profile(const MetricSpec& m, double a, double b, double lambda,
                               double eta, int nodes) {
    if (!(b > 0.0)) throw std::invalid_argument("quadrature_profile: b must be positive");
    if (!(eta > 0.0)) throw std::invalid_argument("quadrature_profile: eta must be positive");
    if (nodes < 65) throw std::invalid_argument("quadrature_profile: need at least 65 nodes");
    if (a < m.x1_min - 1e-12 || a + b > m.x1_max + 1e-12)
        throw std::invalid_argument("quadrature_profile: gap [a, a+b] outside the metric domain");

    const ExistenceVerdict verdict = check_flow_existence(m);
    if (verdict.status != ExistenceStatus::ExistsConstructive)
        throw ProfileError(std::string("quadrature_profile: existence verdict not constructive (") +
                           to_string(verdict.status) + ": " + verdict.reason + ")");
    if (verdict.e1_depends_on_x3)
        throw ProfileError("quadrature_profile: E1 depends on x3; use the conformal family");

    double x3_ref = 0.5 * (m.x3_min + m.x3_max);
    for (const auto& [label, rep] : verdict.reports) {
        if (label == "E3/E2") x3_ref = rep.anchor_x3;
    }

    auto impl = std::make_shared<detail::QuadratureImpl>();
    impl->params = m.params;
    impl->x3_ref = x3_ref;
    impl->e1 = m.e1;
    impl->de1 = m.e1.derivative("x1");
    impl->Hx = m.e3 / m.e2;
    impl->invH = m.e2 / m.e3;
    impl->phi = m.e1 * m.e2 / m.e3;
    impl->dphi = impl->phi.derivative("x1");
    impl->d2phi = impl->dphi.derivative("x1");
    impl->d3phi = impl->d2phi.derivative("x1");
    impl->psi = m.e1 * m.e3 / m.e2;
    impl->dpsi = impl->psi.derivative("x1");
    impl->d2psi = impl->dpsi.derivative("x1");
    impl->lam_over_eta = lambda / eta;

    const int fine = 2 * (nodes - 1) + 1;
    const double hf = b / (fine - 1);
    std::vector<double> r(fine), Hv(fine), q(fine), psiv(fine), e1v(fine);
    for (int k = 0; k < fine; ++k) {
        r[k] = a + k * hf;
        Hv[k] = impl->ev(impl->Hx, r[k]);
        psiv[k] = impl->ev(impl->psi, r[k]);
        e1v[k] = impl->ev(impl->e1, r[k]);
    }
    double hmax = 0.0;
    for (double v : Hv) hmax = std::max(hmax, std::fabs(v));
    for (int k = 0; k < fine; ++k) {
        if (std::fabs(Hv[k]) <= 1e-12 * hmax || Hv[k] * Hv[0] < 0.0) {
            std::ostringstream os;
            os << "quadrature_profile: H vanishes inside the gap near x1 = " << r[k];
            throw ProfileError(os.str());
        }
        q[k] = 1.0 / Hv[k];
    }

    std::vector<double> Qv = cumulative_integral(q, hf);

    // c1 from w(a+b) = 0: c1 = -(Lambda/eta) * int(E1 H Q) / int(E1 H).
    std::vector<double> num(fine), den(fine);
    for (int k = 0; k < fine; ++k) {
        num[k] = psiv[k] * Qv[k];
        den[k] = psiv[k];
    }
    const double I1 = cumulative_integral(num, hf).back();
    const double I2 = cumulative_integral(den, hf).back();
    impl->c1 = -impl->lam_over_eta * I1 / I2;

    std::vector<double> s(fine);
    for (int k = 0; k < fine; ++k) s[k] = psiv[k] * (impl->lam_over_eta * Qv[k] + impl->c1);
    std::vector<double> wv = cumulative_integral(s, hf);

    // Close the far wall exactly: remove the residual quadrature defect as a
    // linear ramp, which keeps w' consistent up to the same defect.
    const double defect = wv.back();
    impl->slope_fix = defect / b;
    for (int k = 0; k < fine; ++k) wv[k] -= defect * (r[k] - a) / b;
    wv.front() = 0.0;
    wv.back() = 0.0;

    impl->Q.x0 = a;
    impl->Q.h = hf;
    impl->Q.value = Qv;
    impl->Q.slope = q;
    impl->w.x0 = a;
    impl->w.h = hf;
    impl->w.value = wv;
    impl->w.slope.resize(fine);
    for (int k = 0; k < fine; ++k)
        impl->w.slope[k] = s[k] - impl->slope_fix;

    std::vector<std::pair<double, double>> samples;
    samples.reserve(nodes);
    for (int i = 0; i < nodes; ++i) {
        const int k = 2 * i;
        samples.emplace_back(r[k], wv[k] * impl->ev(impl->phi, r[k]));
    }

    std::ostringstream note;
    note << "separated-equation quadrature; H(x1) = (E3/E2)(x1, x3_ref) with x3_ref = "
         << x3_ref << "; Lambda is the separation constant for that normalization";
    return FlowProfile(ProfileKind::Quadrature, a, b, lambda, 0.0, 0.0, note.str(),
                       impl, std::move(samples));
}

std::function<double(double, double)> velocity_field(const FlowProfile& p, const MetricSpec& m) {
    if (p.wall_a() < m.x1_min - 1e-12 || p.wall_a() + p.wall_b() > m.x1_max + 1e-12)
        throw std::invalid_argument("velocity_field: profile walls outside the metric domain");
    return [p, m](double x1, double x3) {
        const double e1 = std::fabs(m.eval_e1(x1, x3));
        const double e2 = m.eval_e2(x1, x3);
        const double denom = e1 * e2;
        if (denom == 0.0 || !std::isfinite(denom))
            throw ProfileError("velocity_field: metric degeneracy, E1*E2 vanishes");
        return p.g(x1) / denom;
    };
}

}  // namespace hsflow
