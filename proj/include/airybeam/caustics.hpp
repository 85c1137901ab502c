#pragma once

#include "aperture.hpp"
#include "core.hpp"
#include "propagate.hpp"
#include "specfun.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace airybeam {

/// Aperture phase Phi(xi), entering the field as A(xi) exp(-j Phi(xi)), with its
/// first three derivatives on the open domain (xi_min, xi_max).
struct PhaseProfile {
    std::function<double(double)> phi, dphi, d2phi, d3phi;
    double xi_min = -1e4;
    double xi_max = 0.0;
};

struct CausticPoint {
    double z = 0.0;
    double x = 0.0;
    double xi = 0.0;
};

struct CausticCurve {
    std::vector<CausticPoint> points;

    Interval z_range() const {
        if (points.empty()) throw domain_error("caustic curve is empty");
        return {points.front().z, points.back().z};
    }

    /// Linear interpolation of x_c(z).
    double x_at(double z) const {
        const Interval r = z_range();
        if (!(z >= r.lo && z <= r.hi))
            throw domain_error("z = " + std::to_string(z) + " is outside the caustic range");
        auto it = std::lower_bound(points.begin(), points.end(), z,
                                   [](const CausticPoint& p, double v) { return p.z < v; });
        if (it == points.begin()) return it->x;
        const auto& b = *it;
        const auto& a = *(it - 1);
        return a.x + (b.x - a.x) * (z - a.z) / (b.z - a.z);
    }
};

struct RangeReport {
    double z_max = 0.0;
    double z_corner = 0.0;
    double z_fraunhofer = 0.0;
    double z_fraunhofer_apodized = 0.0;
};

/// Phase of the forward-bending half of Ai: Phi = pi/4 - (2/3)(-xi)^(3/2).
inline PhaseProfile airy_phase_profile(double xi_min = -1e4) {
    PhaseProfile p;
    p.phi = [](double s) { return pi / 4.0 - 2.0 / 3.0 * std::pow(-s, 1.5); };
    p.dphi = [](double s) { return std::sqrt(-s); };
    p.d2phi = [](double s) { return -0.5 / std::sqrt(-s); };
    p.d3phi = [](double s) { return -0.25 * std::pow(-s, -1.5); };
    p.xi_min = xi_min;
    p.xi_max = 0.0;
    return p;
}

/// Slowly varying amplitude paired with airy_phase_profile (Ai ~ M cos).
inline double airy_phase_amplitude(double s) { return 0.5 / (std::sqrt(pi) * std::pow(-s, 0.25)); }

inline PhaseProfile linear_phase_profile(double slope, double xi_min = -1e4, double xi_max = 1e4) {
    PhaseProfile p;
    p.phi = [slope](double s) { return slope * s; };
    p.dphi = [slope](double) { return slope; };
    p.d2phi = [](double) { return 0.0; };
    p.d3phi = [](double) { return 0.0; };
    p.xi_min = xi_min;
    p.xi_max = xi_max;
    return p;
}

/// Derivatives by centered differences with one Richardson step.
inline PhaseProfile profile_from_function(std::function<double(double)> phi, double xi_min, double xi_max,
                                          double h = 1e-4) {
    auto d1 = [phi](double s, double hh) { return (phi(s + hh) - phi(s - hh)) / (2.0 * hh); };
    auto d2 = [phi](double s, double hh) { return (phi(s + hh) - 2.0 * phi(s) + phi(s - hh)) / (hh * hh); };
    auto d3 = [phi](double s, double hh) {
        return (phi(s + 2 * hh) - 2.0 * phi(s + hh) + 2.0 * phi(s - hh) - phi(s - 2 * hh)) / (2.0 * hh * hh * hh);
    };
    PhaseProfile p;
    p.phi = phi;
    p.dphi = [d1, h](double s) { return (4.0 * d1(s, h) - d1(s, 2 * h)) / 3.0; };
    p.d2phi = [d2, h](double s) { return (4.0 * d2(s, h) - d2(s, 2 * h)) / 3.0; };
    // third differences lose digits fast; use a wider step
    p.d3phi = [d3, h](double s) { return (4.0 * d3(s, 10 * h) - d3(s, 20 * h)) / 3.0; };
    p.xi_min = xi_min;
    p.xi_max = xi_max;
    return p;
}

/// Physical phase Phi(xi) = p(gamma xi) + nu xi.
inline PhaseProfile scaled_profile(const PhaseProfile& p, double gamma, double nu) {
    detail::require(gamma > 0.0, "scaled_profile: gamma must be positive");
    PhaseProfile q;
    q.phi = [p, gamma, nu](double x) { return p.phi(gamma * x) + nu * x; };
    q.dphi = [p, gamma, nu](double x) { return gamma * p.dphi(gamma * x) + nu; };
    q.d2phi = [p, gamma](double x) { return gamma * gamma * p.d2phi(gamma * x); };
    q.d3phi = [p, gamma](double x) { return gamma * gamma * gamma * p.d3phi(gamma * x); };
    q.xi_min = p.xi_min / gamma;
    q.xi_max = p.xi_max / gamma;
    return q;
}

/// Paraxial ray launched at xi, evaluated at z.
inline double ray_at(const PhaseProfile& p, double xi, double z, double gamma = 1.0, double nu = 0.0) {
    detail::require(z > 0.0, "ray_at: z must be > 0");
    return xi + z * (gamma * p.dphi(gamma * xi) + nu) / k0;
}

namespace detail {

// Points of (lo, hi) clustered geometrically toward both ends.
inline std::vector<double> scan_points(double lo, double hi) {
    const double L = hi - lo;
    std::vector<double> s;
    for (int i = 0; i <= 600; ++i) {
        const double t = std::pow(10.0, -14.0 + 14.0 * i / 600.0) * 0.5;
        s.push_back(lo + L * t);
        s.push_back(hi - L * t);
    }
    for (int i = 1; i < 1000; ++i) s.push_back(lo + L * i / 1000.0);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

// Root of f on (lo, hi): the sign change nearest to hi.
inline std::optional<double> scan_root(const std::function<double(double)>& f, double lo, double hi) {
    const std::vector<double> s = scan_points(lo, hi);
    double xb = s.back(), fb = f(xb);
    for (std::size_t i = s.size() - 1; i-- > 0;) {
        const double xa = s[i], fa = f(xa);
        if (std::isfinite(fa) && std::isfinite(fb)) {
            if (fa == 0.0) return xa;
            if ((fa < 0.0) != (fb < 0.0)) {
                boost::uintmax_t it = 200;
                auto r = boost::math::tools::toms748_solve(f, xa, xb, fa, fb,
                                                           boost::math::tools::eps_tolerance<double>(52), it);
                return 0.5 * (r.first + r.second);
            }
        }
        xb = xa;
        fb = fa;
    }
    return std::nullopt;
}

inline void require_focusing(const PhaseProfile& p, double lo, double hi) {
    for (double s : scan_points(lo, hi))
        if (p.d2phi(s) < 0.0) return;
    throw domain_error("no caustic: aperture phase curvature is nonnegative everywhere");
}

} // namespace detail

/// Paraxial caustic of the scaled profile p(gamma xi) + nu xi at each z.
/// Distances with no admissible launch point are skipped.
inline CausticCurve caustic_paraxial(const PhaseProfile& p, double gamma, double nu, const std::vector<double>& zs) {
    detail::require(gamma > 0.0, "caustic_paraxial: gamma must be positive");
    detail::require_focusing(p, p.xi_min, p.xi_max);
    CausticCurve c;
    for (double z : zs) {
        detail::require(z > 0.0, "caustic_paraxial: z must be > 0");
        auto f = [&](double s) { return 1.0 + z * gamma * gamma * p.d2phi(s) / k0; };
        auto s = detail::scan_root(f, p.xi_min, p.xi_max);
        if (!s) continue;
        const double xi = *s / gamma;
        c.points.push_back({z, ray_at(p, xi, z, gamma, nu), xi});
    }
    if (c.points.empty()) throw domain_error("no caustic in the requested z range");
    return c;
}

/// Residual of the paraxial caustic system at a point (both equations).
inline double caustic_residual_paraxial(const PhaseProfile& p, double gamma, double nu, const CausticPoint& q) {
    const double r1 = q.x - ray_at(p, q.xi, q.z, gamma, nu);
    const double r2 = 1.0 + q.z * gamma * gamma * p.d2phi(gamma * q.xi) / k0;
    return std::max(std::abs(r1), std::abs(r2));
}

inline double nonparaxial_ray(const PhaseProfile& p, double xi, double z) {
    const double d = p.dphi(xi);
    return xi + z * d / std::sqrt(k0 * k0 - d * d);
}

/// Caustic without the small-angle approximation (profile in physical units).
inline CausticCurve caustic_nonparaxial(const PhaseProfile& p, const std::vector<double>& zs) {
    for (double s : detail::scan_points(p.xi_min, p.xi_max))
        if (!(std::abs(p.dphi(s)) < k0))
            throw domain_error("superluminal phase slope: |dPhi/dxi| >= k0 at xi = " + std::to_string(s));
    detail::require_focusing(p, p.xi_min, p.xi_max);
    CausticCurve c;
    for (double z : zs) {
        detail::require(z > 0.0, "caustic_nonparaxial: z must be > 0");
        auto f = [&](double s) {
            const double d = p.dphi(s);
            return 1.0 + z * k0 * k0 * p.d2phi(s) / std::pow(k0 * k0 - d * d, 1.5);
        };
        auto s = detail::scan_root(f, p.xi_min, p.xi_max);
        if (!s) continue;
        c.points.push_back({z, nonparaxial_ray(p, *s, z), *s});
    }
    if (c.points.empty()) throw domain_error("no caustic in the requested z range");
    return c;
}

inline double caustic_residual_nonparaxial(const PhaseProfile& p, const CausticPoint& q) {
    const double d = p.dphi(q.xi);
    const double r1 = q.x - nonparaxial_ray(p, q.xi, q.z);
    const double r2 = 1.0 + q.z * k0 * k0 * p.d2phi(q.xi) / std::pow(k0 * k0 - d * d, 1.5);
    return std::max(std::abs(r1), std::abs(r2));
}

/// Aperture phase whose rays envelope the convex trajectory x = g(z).
/// Each xi is mapped to its tangency distance z_c(xi) in z_range; the phase is
/// anchored at xi_max (Phi = 0 there).
inline PhaseProfile phase_for_trajectory(std::function<double(double)> g, std::function<double(double)> dg,
                                         Interval xi_range, Interval z_range, double h = 1e-4) {
    detail::require(xi_range.lo < xi_range.hi, "phase_for_trajectory: empty xi range");
    detail::require(z_range.lo < z_range.hi, "phase_for_trajectory: empty z range");
    auto zc = [g, dg, z_range](double xi) {
        auto f = [&](double z) { return g(z) - z * dg(z) - xi; };
        const double fa = f(z_range.lo), fb = f(z_range.hi);
        if (fa == 0.0) return z_range.lo;
        if (fb == 0.0) return z_range.hi;
        if ((fa < 0.0) == (fb < 0.0))
            throw domain_error("tangency not found for xi = " + std::to_string(xi) + " in the z range");
        boost::uintmax_t it = 200;
        auto r = boost::math::tools::toms748_solve(f, z_range.lo, z_range.hi, fa, fb,
                                                   boost::math::tools::eps_tolerance<double>(52), it);
        return 0.5 * (r.first + r.second);
    };
    PhaseProfile p;
    p.xi_min = xi_range.lo;
    p.xi_max = xi_range.hi;
    p.dphi = [zc, dg](double xi) {
        const double s = dg(zc(xi));
        return k0 * s / std::sqrt(1.0 + s * s);
    };
    // implicit differentiation of the tangency condition cancels g''
    p.d2phi = [zc, dg](double xi) {
        const double z = zc(xi), s = dg(z);
        return -k0 / (z * std::pow(1.0 + s * s, 1.5));
    };
    auto d2 = p.d2phi;
    const double lo = xi_range.lo, hi = xi_range.hi;
    p.d3phi = [d2, h, lo, hi](double xi) {
        const double hh = std::min(h * std::max(1.0, std::abs(xi)), 0.25 * std::min(xi - lo, hi - xi));
        return (d2(xi + hh) - d2(xi - hh)) / (2.0 * hh);
    };
    auto d1 = p.dphi;
    p.phi = [d1, hi](double xi) {
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(d1, hi, xi, 12, 1e-12);
    };
    return p;
}

/// kappa = |g''| / (1 + g'^2)^(3/2).
inline double trajectory_curvature(const std::function<double(double)>& dg, const std::function<double(double)>& d2g,
                                   double z) {
    const double s = dg(z);
    return std::abs(d2g(z)) / std::pow(1.0 + s * s, 1.5);
}

/// Stationary-phase field near a fold caustic: the local cubic expansion of the
/// total phase integrates to an Airy function of the offset x - x_c.
inline cplx field_near_caustic_sp(const PhaseProfile& p, const std::function<double(double)>& amplitude,
                                  const CausticPoint& c, double x) {
    const double d3 = p.d3phi(c.xi);
    if (!(std::abs(d3) >= 1e-12))
        throw domain_error("degenerate caustic: third phase derivative vanishes, stationary phase breaks down");
    const double cr = std::cbrt(d3 / 2.0);
    const double a = -k0 * (x - c.x) / c.z;
    const double psi = p.phi(c.xi) + k0 * (x - c.xi) * (x - c.xi) / (2.0 * c.z);
    const double mag = std::sqrt(2.0 * pi * k0 / c.z) * amplitude(c.xi) / std::abs(cr);
    return mag * airy_ai(a / cr) * std::polar(1.0, pi / 4.0 - psi - k0 * c.z);
}

/// Caustic of the closed-form Airy beam.
inline double airy_caustic_x(const AiryBeamSpec& s, double z) {
    const double x = s.gamma_a * s.gamma_a * s.gamma_a * z * z / (4.0 * k0 * k0) + s.nu_a * z / k0;
    return s.mirrored ? -x : x;
}

/// Launch point of the caustic ray at distance z.
inline double airy_caustic_xi(const AiryBeamSpec& s, double z) {
    const double g3 = s.gamma_a * s.gamma_a * s.gamma_a;
    const double xi = -g3 * z * z / (4.0 * k0 * k0);
    return s.mirrored ? -xi : xi;
}

inline CausticCurve airy_caustic_curve(const AiryBeamSpec& s, const std::vector<double>& zs) {
    CausticCurve c;
    for (double z : zs) c.points.push_back({z, airy_caustic_x(s, z), airy_caustic_xi(s, z)});
    return c;
}

/// Intensity on the caustic of the apodized beam.
inline double caustic_intensity_modulated(const AiryBeamSpec& s, double z) {
    detail::require(z >= 0.0, "caustic_intensity_modulated: z must be >= 0");
    const double g = s.gamma_a, a = s.alpha_a;
    const double ai = std::abs(airy_ai(cplx(0.0, -z * g * a / k0)));
    return s.u_a * s.u_a * ai * ai * std::exp(-z * z * g * g * g * a / (2.0 * k0 * k0));
}

/// x_a_max is the largest |coordinate| of the aperture (defaults to x_eff).
inline RangeReport range_report(const AiryBeamSpec& s, double x_eff, int n = 3,
                                std::optional<double> x_a_max = std::nullopt) {
    s.validate();
    detail::require(x_eff > 0.0, "range_report: x_eff must be > 0");
    detail::require(n >= 1, "range_report: n must be >= 1");
    const double inf = std::numeric_limits<double>::infinity();
    const double g3 = s.gamma_a * s.gamma_a * s.gamma_a;
    RangeReport r;
    r.z_max = std::isinf(x_eff) ? inf : std::sqrt(2.0 * k0 * k0 * x_eff / g3);
    r.z_corner = s.alpha_a > 0.0 ? std::sqrt(2.0 * k0 * k0 / (g3 * s.alpha_a)) : inf;
    r.z_fraunhofer = fraunhofer_distance(x_a_max.value_or(x_eff));
    r.z_fraunhofer_apodized = s.alpha_a > 0.0 ? pi * n * n / (lambda0 * s.alpha_a * s.alpha_a) : inf;
    return r;
}

} // namespace airybeam
