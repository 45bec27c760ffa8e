#include "hsflow/metric.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hsflow/numerics.hpp"

namespace hsflow {

namespace {

constexpr int kValidationGrid = 33;

std::set<std::string> allowed_names(const Bindings& params) {
    std::set<std::string> names = {"x1", "x3"};
    for (const auto& [k, v] : params) names.insert(k);
    return names;
}

void check_names(const Expression& e, const Bindings& params, const std::string& field) {
    for (const auto& name : e.free_names()) {
        if (name == "x2")
            throw MetricError(field + ": x2 dependence forbidden (metric coefficients "
                              "must not reference the symmetry coordinate)");
        if (name != "x1" && name != "x3" && params.count(name) == 0)
            throw MetricError(field + ": unknown name '" + name + "'");
    }
}

void validate_nonzero(const MetricSpec& m) {
    const auto xs1 = linspace(m.x1_min, m.x1_max, kValidationGrid);
    const auto xs3 = linspace(m.x3_min, m.x3_max, kValidationGrid);
    const char* labels[3] = {"e1", "e2", "e3"};
    const Expression* exprs[3] = {&m.e1, &m.e2, &m.e3};
    for (int c = 0; c < 3; ++c) {
        for (double x1 : xs1) {
            for (double x3 : xs3) {
                double v;
                try {
                    v = exprs[c]->evaluate(x1, x3, m.params);
                } catch (const EvalError& e) {
                    throw MetricError(std::string(labels[c]) + ": evaluation failed at (x1=" +
                                      std::to_string(x1) + ", x3=" + std::to_string(x3) +
                                      "): " + e.what());
                }
                if (!(std::fabs(v) > 0.0) || !std::isfinite(v)) {
                    std::ostringstream os;
                    os << labels[c] << ": vanishing or non-finite coefficient at (x1=" << x1
                       << ", x3=" << x3 << ")";
                    throw MetricError(os.str());
                }
            }
        }
    }
}

Expression parse_coeff(const std::string& text, const Bindings& params, const std::string& field) {
    try {
        return parse(text, allowed_names(params));
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        if (msg.find("'x2'") != std::string::npos)
            throw MetricError(field + ": x2 dependence forbidden (metric coefficients "
                              "must not reference the symmetry coordinate)");
        throw MetricError(field + ": " + msg + " at offset " + std::to_string(e.offset()));
    }
}

double require_param(const Bindings& params, const std::string& key, const std::string& preset) {
    auto it = params.find(key);
    if (it == params.end())
        throw std::invalid_argument("preset '" + preset + "' requires parameter '" + key + "'");
    return it->second;
}

}  // namespace

MetricSpec make_metric(std::string name, Expression e1, Expression e2, Expression e3,
                       int epsilon1, Bindings params,
                       double x1_min, double x1_max, double x3_min, double x3_max,
                       std::optional<Expression> conformal_f) {
    if (epsilon1 != 1 && epsilon1 != -1)
        throw MetricError("epsilon1 must be +1 or -1");
    if (!(x1_min < x1_max) || !(x3_min < x3_max))
        throw MetricError("domain: empty or inverted box");
    MetricSpec m;
    m.name = std::move(name);
    m.e1 = std::move(e1);
    m.e2 = std::move(e2);
    m.e3 = std::move(e3);
    m.epsilon1 = epsilon1;
    m.params = std::move(params);
    m.x1_min = x1_min;
    m.x1_max = x1_max;
    m.x3_min = x3_min;
    m.x3_max = x3_max;
    m.conformal_f = std::move(conformal_f);
    check_names(m.e1, m.params, "e1");
    check_names(m.e2, m.params, "e2");
    check_names(m.e3, m.params, "e3");
    validate_nonzero(m);
    return m;
}

MetricSpec make_preset(const std::string& name, const Bindings& params, const std::string& f_text) {
    const std::set<std::string> none = {"x1", "x3"};
    auto lit = [&](const char* text) { return parse(text, none); };

    if (name == "cartesian") {
        return make_metric(name, lit("1"), lit("1"), lit("1"), +1, {}, 0.0, 1.0, 0.0, 1.0);
    }
    if (name == "cylindrical_zflow") {
        // x1 = rho (gap), x2 = phi, x3 = z (flow)
        return make_metric(name, lit("1"), lit("x1"), lit("1"), +1, {}, 0.5, 2.0, 0.0, 1.0);
    }
    if (name == "cylindrical_radial") {
        // x1 = z (gap), x2 = phi, x3 = rho (flow)
        return make_metric(name, lit("1"), lit("x3"), lit("1"), +1, {}, 0.0, 1.0, 0.5, 2.0);
    }
    if (name == "cylindrical_azimuthal") {
        // x1 = rho (gap), x2 = z, x3 = phi (flow)
        return make_metric(name, lit("1"), lit("1"), lit("x1"), +1, {}, 0.5, 2.0, 0.0, 1.5);
    }
    if (name == "spherical_polar") {
        // x1 = r (gap), x2 = phi, x3 = theta (flow)
        return make_metric(name, lit("1"), lit("x1*sin(x3)"), lit("x1"), +1, {},
                           0.5, 2.0, 0.5, 2.6);
    }
    if (name == "minkowski_pseudosphere") {
        // x1 = r (gap), x2 = phi, x3 = tau (flow); |E1| stored, sign in epsilon1
        return make_metric(name, lit("1"), lit("x1*sinh(x3)"), lit("x1"), -1, {},
                           0.5, 2.0, 0.5, 2.0);
    }
    if (name == "conformal") {
        if (f_text.empty())
            throw std::invalid_argument("preset 'conformal' requires a factor expression f(x3)");
        Expression f = parse(f_text, allowed_names(params));
        for (const auto& n : f.free_names()) {
            if (n == "x1" || n == "x2")
                throw std::invalid_argument("conformal factor must depend on x3 only");
        }
        for (double x3 : linspace(0.0, 2.0, kValidationGrid)) {
            if (!(f.evaluate(0.0, x3, params) > 0.0))
                throw MetricError("conformal factor must be positive on the domain (f(" +
                                  std::to_string(x3) + ") <= 0)");
        }
        return make_metric(name, f, f, f, +1, params, 0.0, 1.0, 0.0, 2.0, f);
    }
    if (name == "conical") {
        const double alpha = require_param(params, "alpha", name);
        constexpr double kHalfPi = 1.5707963267948966;
        if (!(alpha > 0.0) || !(alpha < kHalfPi))
            throw std::invalid_argument("conical: alpha must lie in (0, pi/2)");
        Bindings p = params;
        return make_metric(name, parse("1", none), parse("x1*cos(alpha)+x3*sin(alpha)", allowed_names(p)),
                           parse("1", none), +1, p, 0.5, 2.0, 0.5, 2.0);
    }
    if (name == "toroidal") {
        const double a = require_param(params, "a", name);
        if (!(a > 0.0)) throw std::invalid_argument("toroidal: parameter a must be positive");
        Bindings p = params;
        return make_metric(name, parse("1", none), parse("a+x1*cos(x3)", allowed_names(p)),
                           parse("x1", none), +1, p, 0.2, 0.8, 0.0, 1.0);
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

MetricSpec load_metric(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in.is_open()) throw MetricError("cannot open metric file: " + file_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MetricError("invalid JSON in " + file_path + ": " + e.what());
    }
    if (!j.is_object()) throw MetricError("$: metric file must hold a JSON object");

    auto require_string = [&](const char* key) -> std::string {
        if (!j.contains(key)) throw MetricError(std::string("$.") + key + ": missing");
        if (!j.at(key).is_string()) throw MetricError(std::string("$.") + key + ": expected string");
        return j.at(key).get<std::string>();
    };

    Bindings params;
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw MetricError("$.params: expected object");
        for (const auto& [k, v] : j.at("params").items()) {
            if (!v.is_number()) throw MetricError("$.params." + k + ": expected number");
            params[k] = v.get<double>();
        }
    }

    int epsilon1 = +1;
    if (j.contains("epsilon1")) {
        if (!j.at("epsilon1").is_number_integer())
            throw MetricError("$.epsilon1: expected integer +1 or -1");
        epsilon1 = j.at("epsilon1").get<int>();
        if (epsilon1 != 1 && epsilon1 != -1)
            throw MetricError("$.epsilon1: expected +1 or -1");
    }

    if (!j.contains("domain")) throw MetricError("$.domain: missing");
    const auto& dom = j.at("domain");
    if (!dom.is_object()) throw MetricError("$.domain: expected object");
    auto axis = [&](const char* key) -> std::pair<double, double> {
        if (!dom.contains(key)) throw MetricError(std::string("$.domain.") + key + ": missing");
        const auto& arr = dom.at(key);
        if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number() || !arr[1].is_number())
            throw MetricError(std::string("$.domain.") + key + ": expected [lo, hi]");
        return {arr[0].get<double>(), arr[1].get<double>()};
    };
    const auto [x1lo, x1hi] = axis("x1");
    const auto [x3lo, x3hi] = axis("x3");

    const std::string name = j.contains("name") ? require_string("name") : "custom";
    Expression e1 = parse_coeff(require_string("e1"), params, "$.e1");
    Expression e2 = parse_coeff(require_string("e2"), params, "$.e2");
    Expression e3 = parse_coeff(require_string("e3"), params, "$.e3");

    return make_metric(name, std::move(e1), std::move(e2), std::move(e3), epsilon1,
                       std::move(params), x1lo, x1hi, x3lo, x3hi);
}

double conformal_k1_at(const Expression& f, double x3, const Bindings& params) {
    const Expression y = Expression::constant(1.0) / pow(f, Expression::constant(3.0));
    const Expression ypp = y.derivative("x3").derivative("x3");
    const double fv = f.evaluate(0.0, x3, params);
    if (!(fv > 0.0))
        throw EvalError("conformal factor must be positive (f(" + std::to_string(x3) +
                        ") = " + std::to_string(fv) + ")");
    return -2.0 / 3.0 * fv * fv * fv * ypp.evaluate(0.0, x3, params);
}

ConformalFactorReport conformal_k1(const Expression& f, double x3_min, double x3_max,
                                   int grid_size, double tol, const Bindings& params) {
    if (grid_size < 2) throw std::invalid_argument("conformal_k1: grid_size must be >= 2");
    ConformalFactorReport rep;
    rep.tolerance = tol;
    rep.x3 = linspace(x3_min, x3_max, grid_size);
    rep.k1_values.reserve(rep.x3.size());

    // Differentiate once, evaluate everywhere: the report is grid-refinement
    // invariant because each sample is exact.
    const Expression y = Expression::constant(1.0) / pow(f, Expression::constant(3.0));
    const Expression ypp = y.derivative("x3").derivative("x3");
    for (double x3 : rep.x3) {
        const double fv = f.evaluate(0.0, x3, params);
        if (!(fv > 0.0))
            throw EvalError("conformal factor must be positive (f(" + std::to_string(x3) +
                            ") = " + std::to_string(fv) + ")");
        rep.k1_values.push_back(-2.0 / 3.0 * fv * fv * fv * ypp.evaluate(0.0, x3, params));
    }

    double mean = 0.0;
    for (double v : rep.k1_values) mean += v;
    mean /= static_cast<double>(rep.k1_values.size());
    double max_dev = 0.0;
    for (double v : rep.k1_values) max_dev = std::max(max_dev, std::fabs(v - mean));
    rep.is_constant = max_dev <= tol * (1.0 + std::fabs(mean));
    rep.k1_constant = mean;
    return rep;
}

}  // namespace hsflow
