#ifndef HSFLOW_SEPARABILITY_HPP
#define HSFLOW_SEPARABILITY_HPP

/// Numerical rank-one test for bivariate functions and the existence
/// decision for symmetric unidirectional flows built on top of it.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hsflow/metric.hpp"

namespace hsflow {

struct SeparabilityReport {
    bool verdict = false;
    double residual = 0.0;      // max normalized 2x2 minor
    int n1 = 0, n3 = 0;         // grid used
    double tolerance = 0.0;
    double max_abs = 0.0;       // max |h| over the grid
    // Witness factors u(x1_i), v(x3_j) with h ~ u (x) v, populated when the
    // verdict is true; empty otherwise. v is scaled so that u*v matches h
    // exactly at the anchor entry.
    std::vector<double> witness_u, witness_v;
    int anchor_i = 0, anchor_j = 0;          // index of the max-|h| entry
    double anchor_x1 = 0.0, anchor_x3 = 0.0;
};

/// Samples h on an n1 x n3 grid over the box and scans 2x2 minors:
/// residual = max |H_ij H_kl - H_il H_kj| / (max|H|)^2. The full scan runs
/// when it costs at most 1e6 minors; beyond that, minors anchored at the
/// max-|h| entry plus 200 seeded-random pairs are used. An all-zero sample
/// matrix reports separable with zero witnesses.
SeparabilityReport test_separable(const std::function<double(double, double)>& h,
                                  double x1_min, double x1_max,
                                  double x3_min, double x3_max,
                                  int n1 = 17, int n3 = 17, double tol = 1e-8);

enum class ExistenceStatus { ExistsConstructive, NotExists, NecessaryPassedInconclusive };

const char* to_string(ExistenceStatus s);

struct ExistenceVerdict {
    ExistenceStatus status = ExistenceStatus::NecessaryPassedInconclusive;
    std::string reason;
    bool e1_depends_on_x3 = false;
    // Reports consulted, keyed by the ratio tested ("E3/E2", "E3/(E1^3*E2)").
    std::vector<std::pair<std::string, SeparabilityReport>> reports;
};

/// Existence decision for a symmetric unidirectional flow on m:
/// - E1 = E1(x1): separability of E3/E2 decides ExistsConstructive vs
///   NotExists (necessary and sufficient).
/// - E1 depends on x3: non-separable E3/(E1^3 E2) rules the flow out; when
///   it is separable the verdict stays inconclusive, except for conformal
///   metrics where constancy of k1 settles it either way.
ExistenceVerdict check_flow_existence(const MetricSpec& m, double tol = 1e-8);

}  // namespace hsflow

#endif  // HSFLOW_SEPARABILITY_HPP
