#ifndef HSFLOW_PROFILES_HPP
#define HSFLOW_PROFILES_HPP

/// Velocity profiles g(x1) on the gap [a, a+b], satisfying no-slip at both
/// walls, with exact derivative access up to third order. The physical
/// velocity is V3 = g / (E1 E2).

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hsflow/metric.hpp"

namespace hsflow {

class ProfileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProfileKind { MinkowskiQuadratic, ConformalSinh, ConformalTrig, FlatParabola, Quadrature };

const char* to_string(ProfileKind k);

namespace detail {
struct ProfileImpl;
}

/// Immutable profile; copies share the implementation.
class FlowProfile {
public:
    ProfileKind kind() const { return kind_; }
    double wall_a() const { return a_; }       // inner wall
    double wall_b() const { return b_; }       // gap width, walls at a and a+b
    double amplitude() const { return amplitude_; }  // C, k2 or Lambda by family
    double k2() const { return k2_; }
    double alpha() const { return alpha_; }    // conformal family rate, >= 0
    const std::string& note() const { return note_; }

    double g(double x1) const;
    double dg(double x1) const;
    double d2g(double x1) const;
    double d3g(double x1) const;

    /// Node samples (x1, g); populated for Quadrature profiles only.
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }

    FlowProfile(ProfileKind kind, double a, double b, double amplitude, double k2,
                double alpha, std::string note,
                std::shared_ptr<const detail::ProfileImpl> impl,
                std::vector<std::pair<double, double>> samples = {});

private:
    ProfileKind kind_;
    double a_, b_, amplitude_, k2_, alpha_;
    std::string note_;
    std::shared_ptr<const detail::ProfileImpl> impl_;
    std::vector<std::pair<double, double>> samples_;
};

/// g(r) = -(C/2 eta) (r-a)(a+b-r): the constant-pressure-drive profile
/// between the pseudosphere walls r=a and r=a+b.
FlowProfile minkowski_profile(double a, double b, double C, double eta);

/// Solution of g'' + k1 g = k2 with no-slip walls at x1 = a and x1 = a+b:
///   k1 < 0: g = (k2/k1)[1 - cosh(alpha(x-a-b/2))/cosh(alpha b/2)], alpha^2 = -k1
///   k1 = 0: g = -(k2/2)(x-a)(a+b-x)
///   k1 > 0: trigonometric continuation (opt-in via allow_trig), rejected
///           near resonance |sin(omega b)| < 1e-10.
FlowProfile conformal_profile(double b, double k1, double k2, double a = 0.0,
                              bool allow_trig = false);

/// Quadrature construction for metrics with E1 = E1(x1) and separable
/// E3/E2 = H(x1) Ht(x3). Solves
///   d/dx1 [ (1/(E1 H)) d/dx1 ( g H / E1 ) ] = Lambda / (eta H),
/// g(a) = g(a+b) = 0, by two nested composite quadratures. H is frozen as
/// (E3/E2)(x1, x3_ref) with x3_ref the separability witness anchor, so the
/// separation constant Lambda is tied to that normalization (recorded in
/// note()). Requires a constructive existence verdict and nodes >= 65.
FlowProfile quadrature_profile(const MetricSpec& m, double a, double b, double lambda,
                               double eta, int nodes = 257);

/// V3(x1, x3) = g(x1) / (E1 E2); |E1| is used, the signature flag does not
/// enter magnitudes.
std::function<double(double, double)> velocity_field(const FlowProfile& p, const MetricSpec& m);

}  // namespace hsflow

#endif  // HSFLOW_PROFILES_HPP
