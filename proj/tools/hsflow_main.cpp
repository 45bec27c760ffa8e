// hsflow: decide existence of symmetric unidirectional flows on orthogonal
// 3-metrics, build profiles, and compute gap-averaged mobilities.
//
// JSON goes to standard output, notes and error objects to standard error.
// Exit codes: 0 success, 1 usage, 2 numeric/domain failure, 3 existence
// refusal.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsflow/darcy.hpp"
#include "hsflow/expr.hpp"
#include "hsflow/metric.hpp"
#include "hsflow/profiles.hpp"
#include "hsflow/separability.hpp"
#include "hsflow/stokes_op.hpp"
#include "json_writer.hpp"

namespace {

using hsflow::cli::Json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RefusalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricSource {
    std::string preset;
    std::string metric_file;
    std::string f_text;
    std::vector<std::string> params_kv;
};

hsflow::Bindings parse_params(const std::vector<std::string>& kvs) {
    hsflow::Bindings out;
    for (const auto& kv : kvs) {
        const auto pos = kv.find('=');
        if (pos == std::string::npos || pos == 0)
            throw UsageError("--param expects name=value, got '" + kv + "'");
        const std::string key = kv.substr(0, pos);
        const std::string val = kv.substr(pos + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            throw UsageError("--param " + key + ": not a number: '" + val + "'");
        }
        if (used != val.size())
            throw UsageError("--param " + key + ": not a number: '" + val + "'");
        out[key] = v;
    }
    return out;
}

hsflow::MetricSpec resolve_metric(const MetricSource& src) {
    const bool has_preset = !src.preset.empty();
    const bool has_file = !src.metric_file.empty();
    if (has_preset == has_file)
        throw UsageError("exactly one of --preset or --metric is required");
    if (has_file) return hsflow::load_metric(src.metric_file);
    return hsflow::make_preset(src.preset, parse_params(src.params_kv), src.f_text);
}

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 1; i < argc; ++i) {
        if (i > 1) out += ' ';
        out += argv[i];
    }
    return out;
}

Json metric_inputs(const hsflow::MetricSpec& m, const MetricSource& src) {
    Json in = Json::object();
    in.set("metric", Json::str(m.name));
    in.set("source", Json::str(src.metric_file.empty() ? "preset" : src.metric_file));
    Json params = Json::object();
    for (const auto& [k, v] : m.params) params.set(k, Json::num(v));
    in.set("params", std::move(params));
    if (m.conformal_f) in.set("f", Json::str(m.conformal_f->to_string()));
    Json dom = Json::object();
    dom.set("x1", Json::array().push(Json::num(m.x1_min)).push(Json::num(m.x1_max)));
    dom.set("x3", Json::array().push(Json::num(m.x3_min)).push(Json::num(m.x3_max)));
    in.set("domain", std::move(dom));
    in.set("epsilon1", Json::integer(m.epsilon1));
    return in;
}

void emit(const Json& report) {
    std::fputs(report.dump().c_str(), stdout);
    std::fputc('\n', stdout);
}

int emit_error(int code, const std::string& kind, const std::string& message) {
    Json err = Json::object();
    Json body = Json::object();
    body.set("exit_code", Json::integer(code));
    body.set("kind", Json::str(kind));
    body.set("message", Json::str(message));
    err.set("error", std::move(body));
    std::fputs(err.dump().c_str(), stderr);
    std::fputc('\n', stderr);
    return code;
}

Json summary_stats(const std::vector<double>& v, const std::vector<std::uint8_t>& mask) {
    double lo = 0.0, hi = 0.0, mean = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (mask[i]) continue;
        if (n == 0) { lo = hi = v[i]; }
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
        mean += v[i];
        ++n;
    }
    if (n > 0) mean /= static_cast<double>(n);
    Json s = Json::object();
    s.set("min", Json::num(lo));
    s.set("max", Json::num(hi));
    s.set("mean", Json::num(mean));
    return s;
}

// ---------------------------------------------------------------------------

int cmd_check(const MetricSource& src, double tol, const std::string& echo) {
    const hsflow::MetricSpec m = resolve_metric(src);
    const hsflow::ExistenceVerdict verdict = hsflow::check_flow_existence(m, tol);

    Json report = Json::object();
    report.set("schema_version", Json::str("1"));
    report.set("command", Json::str(echo));
    Json inputs = metric_inputs(m, src);
    inputs.set("tol", Json::num(tol));
    report.set("inputs", std::move(inputs));

    Json warnings = Json::array();
    Json results = Json::object();
    Json sep = Json::object();
    for (const auto& [label, rep] : verdict.reports) {
        Json r = Json::object();
        r.set("verdict", Json::boolean(rep.verdict));
        r.set("residual", Json::num(rep.residual));
        r.set("grid", Json::array().push(Json::integer(rep.n1)).push(Json::integer(rep.n3)));
        sep.set(label == "E3/E2" ? "ratio_e3e2" : "ratio_gexis", std::move(r));
    }
    results.set("separability", std::move(sep));
    results.set("e1_depends_on_x3", Json::boolean(verdict.e1_depends_on_x3));

    try {
        const hsflow::OdeCoefficients c = hsflow::extract_coefficients(m);
        Json coeffs = Json::object();
        coeffs.set("A", summary_stats(c.A, c.degenerate));
        coeffs.set("B", summary_stats(c.B, c.degenerate));
        coeffs.set("C", summary_stats(c.C, c.degenerate));
        coeffs.set("x3_deviation", Json::num(c.x3_deviation));
        std::size_t bad = 0;
        for (auto d : c.degenerate) bad += d;
        coeffs.set("degenerate_fraction",
                   Json::num(static_cast<double>(bad) / static_cast<double>(c.degenerate.size())));
        coeffs.set("h", Json::num(c.h));
        results.set("coefficients", std::move(coeffs));
    } catch (const std::exception& e) {
        warnings.push(Json::str(std::string("coefficient extraction failed: ") + e.what()));
    }

    results.set("verdict", Json::str(hsflow::to_string(verdict.status)));
    results.set("reason", Json::str(verdict.reason));
    report.set("results", std::move(results));
    report.set("warnings", std::move(warnings));
    emit(report);
    return 0;
}

int cmd_profile(const MetricSource& src, double a, double b, double amplitude, double eta,
                int samples, int nodes, const std::string& out_path, bool force,
                std::optional<double> x3_frozen, const std::string& echo) {
    const hsflow::MetricSpec m = resolve_metric(src);
    if (samples < 2) throw UsageError("--samples must be at least 2");

    std::vector<std::string> warnings;
    std::optional<hsflow::FlowProfile> prof;

    if (m.conformal_f) {
        const hsflow::ConformalFactorReport k1rep =
            hsflow::conformal_k1(*m.conformal_f, m.x3_min, m.x3_max, 33, 1e-9, m.params);
        if (k1rep.is_constant) {
            prof = hsflow::conformal_profile(b, k1rep.k1_constant, amplitude, a,
                                             /*allow_trig=*/force);
        } else if (!force) {
            throw RefusalError(
                "no exact unidirectional flow: conformal k1(x3) is not constant "
                "(rerun with --force for the gap-frozen closed form)");
        } else {
            const double x3 = x3_frozen.value_or(0.5 * (m.x3_min + m.x3_max));
            const double k1 = hsflow::conformal_k1_at(*m.conformal_f, x3, m.params);
            warnings.push_back("k1 is not constant; profile uses k1 frozen at x3 = " +
                               std::to_string(x3));
            prof = hsflow::conformal_profile(b, k1, amplitude, a, /*allow_trig=*/true);
        }
    } else if (m.name == "minkowski_pseudosphere") {
        prof = hsflow::minkowski_profile(a, b, amplitude, eta);
    } else {
        const hsflow::ExistenceVerdict verdict = hsflow::check_flow_existence(m);
        if (verdict.status == hsflow::ExistenceStatus::NotExists)
            throw RefusalError("no symmetric unidirectional flow on this metric: " +
                               verdict.reason);
        prof = hsflow::quadrature_profile(m, a, b, amplitude, eta, nodes);
    }

    // CSV: x1, g, g', g'' at `samples` evenly spaced stations, walls included.
    std::ofstream csv(out_path);
    if (!csv.is_open()) throw std::domain_error("cannot write CSV file: " + out_path);
    csv << "x1,g,gp,gpp\n";
    double max_abs_g = 0.0;
    char line[160];
    for (int i = 0; i < samples; ++i) {
        const double x = a + b * static_cast<double>(i) / (samples - 1);
        const double gv = prof->g(x);
        max_abs_g = std::max(max_abs_g, std::fabs(gv));
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", x, gv, prof->dg(x),
                      prof->d2g(x));
        csv << line;
    }
    csv.close();

    Json report = Json::object();
    report.set("schema_version", Json::str("1"));
    report.set("command", Json::str(echo));
    Json inputs = metric_inputs(m, src);
    inputs.set("a", Json::num(a));
    inputs.set("b", Json::num(b));
    inputs.set("amplitude", Json::num(amplitude));
    inputs.set("eta", Json::num(eta));
    inputs.set("samples", Json::integer(samples));
    report.set("inputs", std::move(inputs));

    Json results = Json::object();
    Json pj = Json::object();
    pj.set("kind", Json::str(hsflow::to_string(prof->kind())));
    pj.set("wall_a", Json::num(prof->wall_a()));
    pj.set("wall_b", Json::num(prof->wall_b()));
    pj.set("alpha", Json::num(prof->alpha()));
    pj.set("note", Json::str(prof->note()));
    results.set("profile", std::move(pj));
    results.set("max_abs_g", Json::num(max_abs_g));

    try {
        const hsflow::ResidualField r1 = hsflow::flow_residual(m, *prof, 9, 9);
        const hsflow::ResidualField r2 = hsflow::flow_residual(m, *prof, 9, 9, r1.h / 2.0);
        Json rj = Json::object();
        rj.set("sup_norm", Json::num(r1.sup_norm));
        rj.set("sup_norm_half_step", Json::num(r2.sup_norm));
        rj.set("ratio", Json::num(r2.sup_norm > 0.0 ? r1.sup_norm / r2.sup_norm : 0.0));
        rj.set("h", Json::num(r1.h));
        results.set("residual", std::move(rj));
    } catch (const std::exception& e) {
        warnings.push_back(std::string("residual verification failed: ") + e.what());
    }

    Json cj = Json::object();
    cj.set("path", Json::str(out_path));
    cj.set("rows", Json::integer(samples));
    results.set("csv", std::move(cj));
    report.set("results", std::move(results));

    Json wj = Json::array();
    for (const auto& w : warnings) wj.push(Json::str(w));
    report.set("warnings", std::move(wj));
    emit(report);
    return 0;
}

int cmd_mobility(const std::string& law, double a, double b, double eta,
                 const std::string& f_text, const std::vector<std::string>& params_kv,
                 double x3, const std::string& echo) {
    hsflow::DarcyMobility mob;
    Json inputs = Json::object();
    inputs.set("law", Json::str(law));
    if (law == "pseudosphere") {
        mob = hsflow::pseudosphere_mobility(a, b, eta);
        inputs.set("a", Json::num(a));
        inputs.set("b", Json::num(b));
        inputs.set("eta", Json::num(eta));
    } else if (law == "conformal") {
        if (f_text.empty()) throw UsageError("mobility conformal requires --f");
        const hsflow::Bindings params = parse_params(params_kv);
        std::set<std::string> allowed = {"x3"};
        for (const auto& [k, v] : params) allowed.insert(k);
        const hsflow::Expression f = hsflow::parse(f_text, allowed);
        mob = hsflow::conformal_mobility(f, b, x3, eta, params);
        inputs.set("f", Json::str(f_text));
        inputs.set("b", Json::num(b));
        inputs.set("x3", Json::num(x3));
        inputs.set("eta", Json::num(eta));
    } else {
        throw UsageError("unknown mobility law '" + law + "' (pseudosphere or conformal)");
    }

    Json report = Json::object();
    report.set("schema_version", Json::str("1"));
    report.set("command", Json::str(echo));
    report.set("inputs", std::move(inputs));

    Json results = Json::object();
    results.set("law", Json::str(mob.law));
    results.set("value", Json::num(mob.value));
    results.set("dimensionless", Json::num(mob.dimensionless));
    results.set("a", Json::num(mob.a));
    results.set("b", Json::num(mob.b));
    results.set("eta", Json::num(mob.eta));
    Json extra = Json::object();
    for (const auto& [k, v] : mob.extra) extra.set(k, Json::num(v));
    results.set("extra", std::move(extra));
    results.set("frame_note", Json::str(mob.frame_note));
    results.set("trig_continuation", Json::boolean(mob.trig_continuation));
    report.set("results", std::move(results));

    Json warnings = Json::array();
    if (mob.trig_continuation)
        warnings.push(Json::str("k1 > 0: trigonometric continuation, outside the hyperbolic "
                                "family"));
    report.set("warnings", std::move(warnings));
    emit(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string echo = join_args(argc, argv);

    CLI::App app{"symmetric unidirectional Stokes flows and gap-averaged mobilities on "
                 "orthogonal 3-metrics"};
    app.require_subcommand(1);

    MetricSource check_src, prof_src;
    double check_tol = 1e-8;

    CLI::App* check = app.add_subcommand("check", "existence analysis for a metric");
    check->add_option("--preset", check_src.preset, "preset metric name");
    check->add_option("--metric", check_src.metric_file, "metric JSON file");
    check->add_option("--param", check_src.params_kv, "preset parameter name=value");
    check->add_option("--f", check_src.f_text, "conformal factor f(x3) for --preset conformal");
    check->add_option("--tol", check_tol, "separability tolerance");

    double p_a = 0.0, p_b = 1.0, p_amp = 1.0, p_eta = 1.0;
    int p_samples = 101, p_nodes = 257;
    std::string p_out = "profile.csv";
    bool p_force = false;
    double p_x3 = 0.0;
    bool p_x3_set = false;

    CLI::App* profile = app.add_subcommand("profile", "construct a flow profile, write CSV");
    profile->add_option("--preset", prof_src.preset, "preset metric name");
    profile->add_option("--metric", prof_src.metric_file, "metric JSON file");
    profile->add_option("--param", prof_src.params_kv, "preset parameter name=value");
    profile->add_option("--f", prof_src.f_text, "conformal factor f(x3)");
    profile->add_option("--a", p_a, "inner wall position");
    profile->add_option("--b", p_b, "gap width")->required();
    profile->add_option("--amplitude", p_amp,
                        "drive constant: C (minkowski), k2 (conformal), Lambda (quadrature)");
    profile->add_option("--eta", p_eta, "viscosity");
    profile->add_option("--samples", p_samples, "CSV sample rows");
    profile->add_option("--nodes", p_nodes, "quadrature nodes");
    profile->add_option("--out", p_out, "CSV output path");
    profile->add_flag("--force", p_force, "allow gap-frozen/trig closed forms");
    profile->add_option("--x3", p_x3, "freeze x3 for non-constant k1 (with --force)")
        ->each([&](const std::string&) { p_x3_set = true; });

    std::string m_law;
    double m_a = 1.0, m_b = 1.0, m_eta = 1.0, m_x3 = 0.0;
    std::string m_f;
    std::vector<std::string> m_params;

    CLI::App* mobility = app.add_subcommand("mobility", "gap-averaged mobility");
    mobility->add_option("law", m_law, "pseudosphere or conformal")->required();
    mobility->add_option("--a", m_a, "inner wall (pseudosphere)");
    mobility->add_option("--b", m_b, "gap width");
    mobility->add_option("--eta", m_eta, "viscosity");
    mobility->add_option("--f", m_f, "conformal factor f(x3)");
    mobility->add_option("--param", m_params, "parameter name=value for f");
    mobility->add_option("--x3", m_x3, "evaluation height (conformal)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error(1, "usage", e.what());
    }

    try {
        if (check->parsed()) return cmd_check(check_src, check_tol, echo);
        if (profile->parsed())
            return cmd_profile(prof_src, p_a, p_b, p_amp, p_eta, p_samples, p_nodes, p_out,
                               p_force, p_x3_set ? std::optional<double>(p_x3) : std::nullopt,
                               echo);
        if (mobility->parsed())
            return cmd_mobility(m_law, m_a, m_b, m_eta, m_f, m_params, m_x3, echo);
        return emit_error(1, "usage", "no subcommand given");
    } catch (const RefusalError& e) {
        return emit_error(3, "refusal", e.what());
    } catch (const UsageError& e) {
        return emit_error(1, "usage", e.what());
    } catch (const std::invalid_argument& e) {
        return emit_error(1, "usage", e.what());
    } catch (const std::exception& e) {
        return emit_error(2, "domain", e.what());
    }
}
