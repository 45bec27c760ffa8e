#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hsflow/metric.hpp"

using hsflow::Bindings;
using hsflow::ConformalFactorReport;
using hsflow::Expression;
using hsflow::MetricError;
using hsflow::MetricSpec;
using hsflow::conformal_k1;
using hsflow::load_metric;
using hsflow::make_preset;

namespace {

std::string write_temp_json(const char* name, const std::string& body) {
    std::string path = std::string("/tmp/hsflow_test_") + name + ".json";
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("preset catalog coefficients") {
    const MetricSpec sph = make_preset("spherical_polar");
    CHECK(sph.eval_e2(1.5, 1.0) == doctest::Approx(1.5 * std::sin(1.0)).epsilon(1e-15));
    CHECK(sph.eval_e3(1.5, 1.0) == 1.5);
    CHECK(sph.eval_e1(1.5, 1.0) == 1.0);

    const MetricSpec tor = make_preset("toroidal", {{"a", 1.0}});
    CHECK(tor.eval_e2(0.5, 0.7) == doctest::Approx(1.0 + 0.5 * std::cos(0.7)).epsilon(1e-15));
    CHECK(tor.eval_e3(0.5, 0.7) == 0.5);

    const MetricSpec flat = make_preset("conformal", {}, "1");
    CHECK(flat.eval_e1(0.3, 0.9) == 1.0);
    CHECK(flat.eval_e2(0.3, 0.9) == 1.0);
    CHECK(flat.eval_e3(0.3, 0.9) == 1.0);
    CHECK(flat.conformal_f.has_value());

    const MetricSpec mink = make_preset("minkowski_pseudosphere");
    CHECK(mink.epsilon1 == -1);
    CHECK(mink.eval_e2(1.5, 1.0) == doctest::Approx(1.5 * std::sinh(1.0)).epsilon(1e-15));

    const MetricSpec zfl = make_preset("cylindrical_zflow");
    CHECK(zfl.eval_e2(1.25, 0.4) == 1.25);
    const MetricSpec rad = make_preset("cylindrical_radial");
    CHECK(rad.eval_e2(0.25, 1.4) == 1.4);
    const MetricSpec azi = make_preset("cylindrical_azimuthal");
    CHECK(azi.eval_e3(1.25, 0.4) == 1.25);
}

TEST_CASE("preset parameter validation") {
    CHECK_THROWS_AS(make_preset("no_such_metric"), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("toroidal"), std::invalid_argument);          // missing a
    CHECK_THROWS_AS(make_preset("conical"), std::invalid_argument);          // missing alpha
    CHECK_THROWS_AS(make_preset("conical", {{"alpha", 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("conical", {{"alpha", 1.6}}), std::invalid_argument);
    CHECK_THROWS_AS(make_preset("conformal"), std::invalid_argument);        // missing f
    CHECK_THROWS_AS(make_preset("conformal", {}, "x1+x3"), std::invalid_argument);
    CHECK_NOTHROW(make_preset("conical", {{"alpha", 0.785398}}));
}

TEST_CASE("conformal k1 diagnostics") {
    const std::set<std::string> names = {"x3"};

    SUBCASE("constant factor gives k1 = 0") {
        const auto rep = conformal_k1(hsflow::parse("1", names), 0.0, 2.0);
        CHECK(rep.is_constant);
        CHECK(rep.k1_constant == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("(1+x3)^(-1/3): 1/f^3 is linear, so k1 vanishes") {
        const auto rep = conformal_k1(hsflow::parse("(1+x3)^(-1/3)", names), 0.0, 2.0);
        CHECK(rep.is_constant);
        CHECK(std::fabs(rep.k1_constant) < 1e-12);
    }

    SUBCASE("hyperbolic factor 1/(1+x3): k1 = -4/(1+x3)^2, not constant") {
        const auto rep = conformal_k1(hsflow::parse("1/(1+x3)", names), 0.0, 2.0);
        CHECK_FALSE(rep.is_constant);
        REQUIRE(rep.x3.size() == rep.k1_values.size());
        for (std::size_t i = 0; i < rep.x3.size(); ++i) {
            const double expected = -4.0 / ((1.0 + rep.x3[i]) * (1.0 + rep.x3[i]));
            CHECK(rep.k1_values[i] == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    SUBCASE("exp(x3/sqrt(6)) has constant k1 = -1") {
        const auto rep = conformal_k1(hsflow::parse("exp(x3/sqrt(6))", names), 0.0, 1.0);
        CHECK(rep.is_constant);
        CHECK(rep.k1_constant == doctest::Approx(-1.0).epsilon(1e-12));
    }

    SUBCASE("positive-curvature factor is non-constant (K = 1)") {
        const auto rep = conformal_k1(hsflow::parse("1/(K*x3^2+1/4)", {"x3", "K"}),
                                      0.0, 1.0, 33, 1e-9, {{"K", 1.0}});
        CHECK_FALSE(rep.is_constant);
    }

    SUBCASE("samples are grid-refinement invariant (pointwise symbolic)") {
        const Expression f = hsflow::parse("1/(1+x3)", names);
        const auto coarse = conformal_k1(f, 0.0, 2.0, 17);
        const auto fine = conformal_k1(f, 0.0, 2.0, 33);
        // every other fine sample lands on a coarse sample
        for (std::size_t i = 0; i < coarse.x3.size(); ++i) {
            CHECK(std::fabs(coarse.k1_values[i] - fine.k1_values[2 * i]) <= 1e-12);
        }
    }

    SUBCASE("non-positive factor is a domain error") {
        CHECK_THROWS_AS(conformal_k1(hsflow::parse("x3", names), 0.0, 1.0), hsflow::EvalError);
    }
}

TEST_CASE("load_metric accepts the schema and reports field paths") {
    SUBCASE("well-formed conical metric") {
        const std::string path = write_temp_json("cone_ok", R"json({
            "name": "cone",
            "e1": "1",
            "e2": "x1*cos(alpha)+x3*sin(alpha)",
            "e3": "1",
            "params": {"alpha": 0.7853981633974483},
            "domain": {"x1": [1.0, 2.0], "x3": [1.0, 2.0]}
        })json");
        const MetricSpec m = load_metric(path);
        CHECK(m.name == "cone");
        CHECK(m.epsilon1 == +1);
        CHECK(m.eval_e2(1.0, 1.0) ==
              doctest::Approx(std::cos(0.7853981633974483) + std::sin(0.7853981633974483)));
        std::remove(path.c_str());
    }

    SUBCASE("x2 dependence is rejected") {
        const std::string path = write_temp_json("x2dep", R"json({
            "e1": "1", "e2": "x2", "e3": "1",
            "domain": {"x1": [0, 1], "x3": [0, 1]}
        })json");
        try {
            load_metric(path);
            FAIL("expected MetricError");
        } catch (const MetricError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("$.e2") != std::string::npos);
            CHECK(msg.find("x2") != std::string::npos);
        }
        std::remove(path.c_str());
    }

    SUBCASE("coefficient vanishing inside the domain is rejected with the point") {
        const std::string path = write_temp_json("zerocoef", R"json({
            "e1": "1", "e2": "1", "e3": "x1-1",
            "domain": {"x1": [0, 2], "x3": [0, 1]}
        })json");
        try {
            load_metric(path);
            FAIL("expected MetricError");
        } catch (const MetricError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("e3") != std::string::npos);
            CHECK(msg.find("x1=1") != std::string::npos);
        }
        std::remove(path.c_str());
    }

    SUBCASE("schema violations name the field") {
        const std::string path = write_temp_json("badfield", R"json({
            "e1": "1", "e2": "1", "e3": "1",
            "domain": {"x1": [0, 1]}
        })json");
        try {
            load_metric(path);
            FAIL("expected MetricError");
        } catch (const MetricError& e) {
            CHECK(std::string(e.what()).find("$.domain.x3") != std::string::npos);
        }
        std::remove(path.c_str());

        const std::string path2 = write_temp_json("badeps", R"json({
            "e1": "1", "e2": "1", "e3": "1", "epsilon1": 2,
            "domain": {"x1": [0, 1], "x3": [0, 1]}
        })json");
        CHECK_THROWS_AS(load_metric(path2), MetricError);
        std::remove(path2.c_str());
    }

    SUBCASE("custom metrics may flag epsilon1 = -1") {
        const std::string path = write_temp_json("custom_mink", R"json({
            "name": "mink", "e1": "1", "e2": "x1*sinh(x3)", "e3": "x1", "epsilon1": -1,
            "domain": {"x1": [0.5, 2.0], "x3": [0.5, 2.0]}
        })json");
        CHECK(load_metric(path).epsilon1 == -1);
        std::remove(path.c_str());
    }

    CHECK_THROWS_AS(load_metric("/nonexistent/metric.json"), MetricError);
}
