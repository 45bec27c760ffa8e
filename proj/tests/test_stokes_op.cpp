#include <doctest.h>

#include <cmath>
#include <random>

#include "hsflow/numerics.hpp"
#include "hsflow/profiles.hpp"
#include "hsflow/separability.hpp"
#include "hsflow/stokes_op.hpp"

using hsflow::FlowProfile;
using hsflow::MetricSpec;
using hsflow::OdeCoefficients;
using hsflow::PressureField;
using hsflow::ResidualField;
using hsflow::conformal_profile;
using hsflow::extract_coefficients;
using hsflow::flow_residual;
using hsflow::make_preset;
using hsflow::minkowski_profile;
using hsflow::reconstruct_pressure;
using hsflow::x3_independence;

namespace {

double coef_at(const OdeCoefficients& c, const std::vector<double>& field, double x1, double x3) {
    // nearest grid point
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 1; i < c.x1.size(); ++i)
        if (std::fabs(c.x1[i] - x1) < std::fabs(c.x1[bi] - x1)) bi = i;
    for (std::size_t j = 1; j < c.x3.size(); ++j)
        if (std::fabs(c.x3[j] - x3) < std::fabs(c.x3[bj] - x3)) bj = j;
    return field[bi * c.x3.size() + bj];
}

}  // namespace

TEST_CASE("flat metric: the operator reduces to g''' and annihilates parabolas") {
    const MetricSpec m = make_preset("cartesian");
    const FlowProfile p = conformal_profile(1.0, 0.0, 2.0);  // parabola on [0, 1]
    const ResidualField r = flow_residual(m, p, 9, 9);
    CHECK(r.sup_norm <= 1e-12);
}

TEST_CASE("coefficient extraction: cartesian gives zeros exactly") {
    const OdeCoefficients c = extract_coefficients(make_preset("cartesian"), 9, 9);
    for (std::size_t i = 0; i < c.A.size(); ++i) {
        CHECK_FALSE(c.degenerate[i]);
        CHECK(std::fabs(c.A[i]) <= 1e-9);
        CHECK(std::fabs(c.B[i]) <= 1e-9);
        CHECK(std::fabs(c.C[i]) <= 1e-9);
    }
    CHECK(c.x3_deviation <= 1e-9);
    CHECK(x3_independence(c));
}

TEST_CASE("coefficient extraction: cylindrical z-flow at rho = 1") {
    // Symbolic expansion gives g''' - (2/rho) g'' + (3/rho^2) g' - (3/rho^3) g = 0,
    // i.e. (A, B, C) = (2, -3, 3) at rho = 1.
    const MetricSpec m = make_preset("cylindrical_zflow");

    SUBCASE("direct probes at rho = 1 hit the derived values at 1e-6 relative") {
        const double h = 2e-4, x = 1.0, y = 0.5;
        auto probe = [&](int k) {
            auto g = [k](double t) { return std::pow(t, k); };
            auto dg = [k](double t) { return k == 0 ? 0.0 : k * std::pow(t, k - 1); };
            return hsflow::flow_operator_apply(m, g, dg, x, y, h);
        };
        const double N0 = probe(0), N1 = probe(1), N2 = probe(2), N3 = probe(3);
        const double a0 = N0;
        const double a1 = N1 - x * a0;
        const double a2 = (N2 - x * x * a0 - 2 * x * a1) / 2.0;
        const double a3 = (N3 - x * x * x * a0 - 3 * x * x * a1 - 6 * x * a2) / 6.0;
        CHECK(std::fabs(-a2 / a3 - 2.0) <= 1e-6 * 2.0);
        CHECK(std::fabs(-a1 / a3 - -3.0) <= 1e-6 * 3.0);
        CHECK(std::fabs(-a0 / a3 - 3.0) <= 1e-6 * 3.0);
    }

    SUBCASE("grid extraction follows the closed coefficient functions") {
        // O(h^2) truncation and the ~eps/h^3 noise floor of the deepest
        // probe meet near h = 2e-4; a few 1e-6 relative is the honest bound
        // away from rho = 1.
        const OdeCoefficients c = extract_coefficients(m, 33, 5, 2e-4);
        auto close = [](double got, double want) {
            return std::fabs(got - want) <= 1e-5 * (1.0 + std::fabs(want));
        };
        for (std::size_t i = 0; i < c.x1.size(); i += 4) {
            const double rho = c.x1[i];
            CHECK(close(coef_at(c, c.A, rho, 0.5), 2.0 / rho));
            CHECK(close(coef_at(c, c.B, rho, 0.5), -3.0 / (rho * rho)));
            CHECK(close(coef_at(c, c.C, rho, 0.5), 3.0 / (rho * rho * rho)));
        }
        CHECK(c.x3_deviation <= 1e-6);
    }
}

TEST_CASE("coefficient extraction: constant-k1 conformal gives (0, -k1, 0)") {
    const MetricSpec m = make_preset("conformal", {}, "exp(x3/sqrt(6))");  // k1 = -1
    const OdeCoefficients c = extract_coefficients(m, 7, 7, 1e-4);
    for (std::size_t i = 0; i < c.A.size(); ++i) {
        REQUIRE_FALSE(c.degenerate[i]);
        CHECK(std::fabs(c.A[i]) <= 1e-6);
        CHECK(c.B[i] == doctest::Approx(1.0).epsilon(1e-6));  // B = -k1 = 1
        CHECK(std::fabs(c.C[i]) <= 1e-6);
    }
    CHECK(x3_independence(c));
}

TEST_CASE("probe-extraction exactness on random cubics") {
    // The discrete operator is linear in the profile, so the extracted
    // coefficients must reproduce a direct application of the operator to
    // any cubic: N[q] = alpha3 (q''' - A q'' - B q' - C q).
    for (const char* name : {"cylindrical_zflow", "spherical_polar"}) {
        const MetricSpec m = make_preset(name);
        const OdeCoefficients c = extract_coefficients(m, 5, 5);

        std::mt19937 rng(99u);
        std::uniform_real_distribution<double> coef(-2.0, 2.0);
        for (int trial = 0; trial < 10; ++trial) {
            const double q0 = coef(rng), q1 = coef(rng), q2 = coef(rng), q3 = coef(rng);
            auto g = [=](double x) { return ((q3 * x + q2) * x + q1) * x + q0; };
            auto dg = [=](double x) { return (3 * q3 * x + 2 * q2) * x + q1; };

            for (std::size_t i = 0; i < c.x1.size(); ++i) {
                for (std::size_t j = 0; j < c.x3.size(); ++j) {
                    const std::size_t idx = i * c.x3.size() + j;
                    if (c.degenerate[idx]) continue;
                    const double x = c.x1[i];
                    const double d2g = 6 * q3 * x + 2 * q2, d3g = 6 * q3;
                    const double direct =
                        hsflow::flow_operator_apply(m, g, dg, x, c.x3[j], c.h);
                    const double reconstructed =
                        c.alpha3[idx] * (d3g - c.A[idx] * d2g - c.B[idx] * dg(x) -
                                         c.C[idx] * g(x));
                    CHECK(std::fabs(direct - reconstructed) <=
                          1e-9 * (1.0 + std::fabs(direct)));
                }
            }
        }
    }
}

TEST_CASE("x3 independence verdicts") {
    CHECK(x3_independence(extract_coefficients(make_preset("cartesian"), 7, 7)));
    CHECK(x3_independence(extract_coefficients(make_preset("spherical_polar"), 7, 7)));
    CHECK(x3_independence(extract_coefficients(make_preset("minkowski_pseudosphere"), 7, 7)));
    CHECK(x3_independence(
        extract_coefficients(make_preset("conformal", {}, "(1+x3)^(-1/3)"), 7, 7, 1e-4)));

    const OdeCoefficients cone =
        extract_coefficients(make_preset("conical", {{"alpha", 0.7853981633974483}}), 9, 9);
    CHECK_FALSE(x3_independence(cone));
    CHECK(cone.x3_deviation > 1e-2);
}

TEST_CASE("lemma chain: x3-independent coefficients imply the separable ratio") {
    for (const char* name : {"cartesian", "cylindrical_zflow", "cylindrical_radial",
                             "cylindrical_azimuthal", "spherical_polar",
                             "minkowski_pseudosphere"}) {
        const MetricSpec m = make_preset(name);
        const OdeCoefficients c = extract_coefficients(m, 7, 7);
        if (!x3_independence(c)) continue;
        const auto rep = hsflow::test_separable(
            [&](double x1, double x3) {
                const double e1 = std::fabs(m.eval_e1(x1, x3));
                return m.eval_e3(x1, x3) / (e1 * e1 * e1 * m.eval_e2(x1, x3));
            },
            m.x1_min, m.x1_max, m.x3_min, m.x3_max);
        CHECK(rep.verdict);
    }
}

TEST_CASE("degenerate leading coefficient is masked, not fatal") {
    // E2 with an inflection that kills alpha3 = R/..." at isolated points is
    // hard to arrange exactly; instead verify the mask plumbing by checking
    // a healthy metric has no degenerate points and the field sizes agree.
    const OdeCoefficients c = extract_coefficients(make_preset("toroidal", {{"a", 1.0}}), 7, 7);
    CHECK(c.A.size() == c.degenerate.size());
    bool any_ok = false;
    for (auto d : c.degenerate) any_ok = any_ok || !d;
    CHECK(any_ok);
}

TEST_CASE("residual convergence at O(h^2) for the conformal solution") {
    const MetricSpec m = make_preset("conformal", {}, "(1+x3)^(-1/3)");
    const FlowProfile p = conformal_profile(1.0, 0.0, 1.0);  // k1 = 0 limit profile
    const double h0 = 4e-3;
    const double r1 = flow_residual(m, p, 7, 7, h0).sup_norm;
    const double r2 = flow_residual(m, p, 7, 7, h0 / 2.0).sup_norm;
    const double r4 = flow_residual(m, p, 7, 7, h0 / 4.0).sup_norm;
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.2));
    CHECK(r2 / r4 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("non-solvable metrics keep a bounded-away residual") {
    const MetricSpec cone = make_preset("conical", {{"alpha", 0.7853981633974483}});
    const FlowProfile q = conformal_profile(1.0, 0.0, 1.0, /*a=*/0.7);  // any quadratic
    const double r1 = flow_residual(cone, q, 7, 7, 2e-3).sup_norm;
    const double r2 = flow_residual(cone, q, 7, 7, 1e-3).sup_norm;
    CHECK(r1 > 1e-3);
    CHECK(r2 > 1e-3);
    CHECK(r2 > 0.5 * r1);  // no decay under refinement

    const MetricSpec torus = make_preset("toroidal", {{"a", 1.0}});
    const FlowProfile qt = conformal_profile(0.4, 0.0, 1.0, /*a=*/0.25);
    const double t1 = flow_residual(torus, qt, 7, 7, 1e-3).sup_norm;
    const double t2 = flow_residual(torus, qt, 7, 7, 5e-4).sup_norm;
    CHECK(t1 > 1e-3);
    CHECK(t2 > 0.5 * t1);
    const double tc1 = reconstruct_pressure(torus, qt, 0.4, 0.5, 7, 7, 1e-3)
                           .compatibility_residual;
    const double tc2 = reconstruct_pressure(torus, qt, 0.4, 0.5, 7, 7, 5e-4)
                           .compatibility_residual;
    CHECK(tc1 > 1e-3);
    CHECK(tc2 > 0.5 * tc1);
}

TEST_CASE("quadrature profile satisfies the discrete flow equation") {
    const MetricSpec m = make_preset("cylindrical_zflow");
    const FlowProfile p = hsflow::quadrature_profile(m, 1.0, 1.0, 1.0, 1.0, 257);
    const ResidualField r = flow_residual(m, p, 9, 9, 3e-4);
    CHECK(r.sup_norm <= 1e-6);
}

TEST_CASE("pressure reconstruction") {
    SUBCASE("cartesian parabola: p linear in x3, compatible") {
        const MetricSpec m = make_preset("cartesian");
        const FlowProfile p = conformal_profile(1.0, 0.0, 1.0);  // g'' = 1
        const PressureField f =
            reconstruct_pressure(m, p, 0.5, 0.5, 9, 9, 1e-3, /*eta=*/1.0);
        CHECK(f.compatibility_residual <= 1e-10);
        // dp/dx3 = eta g'' = 1: p = x3 - 0.5 along every column
        for (std::size_t i = 0; i < f.x1.size(); ++i)
            for (std::size_t j = 0; j < f.x3.size(); ++j)
                CHECK(f.p[i * f.x3.size() + j] ==
                      doctest::Approx(f.x3[j] - 0.5).epsilon(1e-8));
    }

    SUBCASE("minkowski: p(tau) matches the log-tanh closed form") {
        const MetricSpec m = make_preset("minkowski_pseudosphere");
        const double eta = 1.0, C = -2.0;
        const FlowProfile p = minkowski_profile(1.0, 1.0, C, eta);
        const double tau0 = 1.2;
        const PressureField f =
            reconstruct_pressure(m, p, 1.5, tau0, 9, 9, 5e-4, eta, 257);
        for (std::size_t i = 0; i < f.x1.size(); ++i) {
            for (std::size_t j = 0; j < f.x3.size(); ++j) {
                const double expected =
                    C * (std::log(std::tanh(f.x3[j] / 2.0)) - std::log(std::tanh(tau0 / 2.0)));
                CHECK(f.p[i * f.x3.size() + j] == doctest::Approx(expected).epsilon(1e-6));
            }
        }
        CHECK(f.compatibility_residual <= 1e-6);
    }

    SUBCASE("conical: any quadratic leaves an incompatible gradient field") {
        const MetricSpec cone = make_preset("conical", {{"alpha", 0.7853981633974483}});
        const FlowProfile q = conformal_profile(1.0, 0.0, 1.0, /*a=*/0.7);
        const PressureField f1 = reconstruct_pressure(cone, q, 1.2, 1.2, 7, 7, 2e-3);
        const PressureField f2 = reconstruct_pressure(cone, q, 1.2, 1.2, 7, 7, 1e-3);
        CHECK(f1.compatibility_residual > 1e-3);
        CHECK(f2.compatibility_residual > 1e-3);
    }

    SUBCASE("pressure and flow residuals vanish together on solvable metrics") {
        const MetricSpec m = make_preset("conformal", {}, "(1+x3)^(-1/3)");
        const FlowProfile p = conformal_profile(1.0, 0.0, 1.0);
        const double c1 =
            reconstruct_pressure(m, p, 0.5, 1.0, 7, 7, 4e-3).compatibility_residual;
        const double c2 =
            reconstruct_pressure(m, p, 0.5, 1.0, 7, 7, 2e-3).compatibility_residual;
        CHECK(c1 / c2 == doctest::Approx(4.0).epsilon(0.25));
    }
}
