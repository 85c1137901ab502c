#pragma once

#include "aperture.hpp"
#include "caustics.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "propagate.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace airybeam {

/// Opaque screen at z_b covering x_b1 < x < x_b2 (x_b2 may be +inf).
struct KnifeEdgeSpec {
    double z_b = 0.0;
    double x_b1 = 0.0;
    double x_b2 = std::numeric_limits<double>::infinity();

    void validate() const {
        detail::require(z_b >= 0.0 && std::isfinite(z_b), "knife edge: z_b must be >= 0");
        detail::require(std::isfinite(x_b1), "knife edge: x_b1 must be finite");
        detail::require(x_b1 <= x_b2, "knife edge: need x_b1 <= x_b2");
    }
};

/// Infinite screen at z_b with Gaussian absorption centered at mu_obs.
struct SoftObstacleSpec {
    double z_b = 0.0;
    double mu_obs = 0.0;
    double sigma_obs = 1.0;

    void validate() const {
        detail::require(z_b > 0.0 && std::isfinite(z_b), "soft obstacle: z_b must be > 0");
        detail::require(std::isfinite(mu_obs), "soft obstacle: mu_obs must be finite");
        detail::require(sigma_obs > 0.0 && std::isfinite(sigma_obs), "soft obstacle: sigma_obs must be > 0");
    }
};

/// Pieces of the closed-form perturbation. With D = z - z_b:
///   p = u_b sqrt(pi/(D eta)) exp(-g^3 nu_b/(8 eta^2)) Ai(delta_b - g^4/(16 eta^2) + j g nu_b/(2 eta)) exp(-j psi_b)
struct PerturbationTerms {
    cplx delta_b;
    cplx u_b;
    cplx log_u_b;  // log of u_b, kept for far-off obstacles
    std::function<cplx(double, double)> nu_b;   // (z, x)
    std::function<cplx(double)> eta_b;          // z
    std::function<cplx(double, double)> psi_b;  // (z, x)
};

inline double clearance_edge_position(const CausticCurve& c, double z_b, double clearance) {
    return c.x_at(z_b) + clearance;
}

inline double clearance_edge_position(const AiryBeamSpec& s, double z_b, double clearance) {
    detail::require(z_b >= 0.0, "clearance_edge_position: z_b must be >= 0");
    return airy_caustic_x(s, z_b) + clearance;
}

/// Field across the plane z_b, ready to be propagated further.
struct FieldColumn {
    double z = 0.0;
    std::vector<double> x;
    std::vector<cplx> field;
};

inline FieldColumn incident_column_rs(const SampledAperture& ap, double z_b, double x_lo, double x_hi, double dx,
                                      int threads = 1) {
    detail::require(z_b >= 2.0 * lambda0, "incident column: z_b must be >= 2 lambda0");
    const std::size_t n = detail::sample_count(x_lo, x_hi, dx);
    FieldColumn c;
    c.z = z_b;
    c.x = linspace(x_lo, x_hi, n);
    c.field.resize(n);
    FieldGrid probe({z_b}, {x_lo, x_hi});
    check_kernel_sampling(ap, probe, false);
    parallel_for(n, threads, [&](std::size_t i) { c.field[i] = rs_point(ap, z_b, c.x[i]); });
    return c;
}

/// Relative cutoff used to trim semi-infinite integration ranges.
inline constexpr double column_truncation = 1e-6;

namespace detail {

struct QuadNode {
    double x;
    cplx e;
    double w;
};

// Trapezoid nodes over the part of the column outside the screen. Partially
// covered cells get an extra node at the edge, interpolated linearly.
inline std::vector<QuadNode> open_nodes(const FieldColumn& col, double b1, double b2, double trunc) {
    const std::size_t n = col.x.size();
    require(n >= 2 && col.field.size() == n, "knife edge: bad incident column");
    double peak = 0.0;
    for (const cplx& v : col.field) peak = std::max(peak, std::abs(v));
    std::size_t i0 = 0, i1 = n - 1;
    while (i0 + 1 < n && std::abs(col.field[i0]) < trunc * peak) ++i0;
    while (i1 > i0 && std::abs(col.field[i1]) < trunc * peak) --i1;
    if (i1 == i0) return {};

    auto value_at = [&](double x) {
        std::size_t k = std::min<std::size_t>(n - 2, std::size_t((x - col.x[0]) / (col.x[1] - col.x[0])));
        const double t = (x - col.x[k]) / (col.x[k + 1] - col.x[k]);
        return (1.0 - t) * col.field[k] + t * col.field[k + 1];
    };
    std::vector<QuadNode> out;
    auto segment = [&](double a, double b) {
        a = std::max(a, col.x[i0]);
        b = std::min(b, col.x[i1]);
        if (!(b > a)) return;
        std::vector<QuadNode> pts;
        pts.push_back({a, value_at(a), 0.0});
        for (std::size_t k = i0; k <= i1; ++k)
            if (col.x[k] > a && col.x[k] < b) pts.push_back({col.x[k], col.field[k], 0.0});
        pts.push_back({b, value_at(b), 0.0});
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            const double h = pts[k + 1].x - pts[k].x;
            pts[k].w += h / 2.0;
            pts[k + 1].w += h / 2.0;
        }
        out.insert(out.end(), pts.begin(), pts.end());
    };
    const double inf = std::numeric_limits<double>::infinity();
    if (!(b2 > b1)) {
        segment(-inf, inf);
    } else {
        segment(-inf, b1);
        segment(b2, inf);
    }
    return out;
}

} // namespace detail

/// Field behind the screen from the incident column at z_b. RS or Fresnel
/// kernel; integration is truncated where the column drops below 1e-6 of its
/// peak.
inline FieldGrid knife_edge_field(const FieldColumn& col, const KnifeEdgeSpec& spec, const FieldGrid& coords,
                                  PropagatorKind kind = PropagatorKind::rayleigh_sommerfeld, int threads = 1) {
    spec.validate();
    detail::require(std::abs(col.z - spec.z_b) < 1e-9 * std::max(1.0, spec.z_b),
                    "knife edge: incident column is not at z_b");
    detail::require(kind == PropagatorKind::rayleigh_sommerfeld || kind == PropagatorKind::fresnel,
                    "knife edge: kernel must be Rayleigh-Sommerfeld or Fresnel");
    FieldGrid g(coords.z_values, coords.x_values);
    detail::require(g.z_values.front() > spec.z_b, "knife edge: grid must lie beyond z_b");
    const double cdx = col.x[1] - col.x[0];
    const double dmin = g.z_values.front() - spec.z_b;
    if (kind == PropagatorKind::fresnel) {
        const double d = std::max(std::abs(g.x_values.back() - col.x.front()), std::abs(g.x_values.front() - col.x.back()));
        detail::check_sampling(k0 * d / dmin, cdx, "knife edge kernel sampling");
    } else {
        detail::check_sampling(k0, cdx, "knife edge kernel sampling");
    }
    const auto nodes = detail::open_nodes(col, spec.x_b1, spec.x_b2, column_truncation);
    detail::fill_grid(g, threads, [&](double z, double x) {
        const double d = z - spec.z_b;
        cplx sum = 0.0;
        if (kind == PropagatorKind::rayleigh_sommerfeld) {
            for (const auto& q : nodes) {
                const double rho = std::hypot(d, x - q.x);
                sum += q.w * (d / rho) * q.e * hankel2(1, k0 * rho);
            }
            return sum * k0 / cplx(0.0, 2.0);
        }
        const double c = k0 / (2.0 * d);
        for (const auto& q : nodes) sum += q.w * q.e * std::polar(1.0, -c * (x - q.x) * (x - q.x));
        return std::sqrt(cplx(0.0, 1.0 / (lambda0 * d))) * std::polar(1.0, -k0 * d) * sum;
    });
    return g;
}

inline double soft_transmittance(const SoftObstacleSpec& o, double x) {
    const double t = (x - o.mu_obs) / o.sigma_obs;
    return 1.0 - std::exp(-0.5 * t * t);
}

inline PerturbationTerms perturbation_terms(const AiryBeamSpec& s, const SoftObstacleSpec& o) {
    s.validate();
    o.validate();
    const double g = s.gamma_a, a = s.alpha_a, nu = s.nu_a, zb = o.z_b;
    const double g2 = g * g, g3 = g2 * g, g4 = g3 * g;
    const double zk = zb / k0;
    const double s2 = o.sigma_obs * o.sigma_obs;
    const double mu = s.mirrored ? -o.mu_obs : o.mu_obs;

    PerturbationTerms t;
    t.delta_b = cplx(-zk * zk * g4 / 4.0 - zk * g * nu, -zk * g * a);
    const double mag = -a * (zk * zk * g3 / 2.0 + zk * nu) - mu * mu / (2.0 * s2);
    const double ph = (zk * g2 / 2.0) * (zk * zk * g4 / 6.0 + zk * g * nu + (nu * nu - a * a) / g2);
    t.u_b = s.u_a * std::exp(mag) * std::polar(1.0, ph);
    t.log_u_b = cplx(std::log(s.u_a) + mag, ph);
    t.eta_b = [zb, s2](double z) { return cplx(-k0 / (2.0 * (z - zb)), 1.0 / (2.0 * s2)); };
    t.nu_b = [=](double z, double x) {
        return cplx(a + mu / s2, -(nu + zk * g3 / 2.0 - k0 * x / (z - zb)));
    };
    const cplx db = t.delta_b;
    auto eta = t.eta_b;
    auto nub = t.nu_b;
    t.psi_b = [=](double z, double x) {
        const cplx e = eta(z), n = nub(z, x);
        return -(g2 / (4.0 * e)) * (db - g4 / (24.0 * e * e) + n * n / g2) + k0 * x * x / (2.0 * (z - zb)) - pi / 2.0;
    };
    return t;
}

/// Closed-form perturbation envelope p(z, x) (carrier excluded).
inline cplx soft_perturbation_closed(const AiryBeamSpec& s, const SoftObstacleSpec& o, double z, double x) {
    detail::require(z > o.z_b, "soft obstacle: z must be beyond z_b");
    const PerturbationTerms t = perturbation_terms(s, o);
    if (s.mirrored) x = -x;
    const double g = s.gamma_a, g3 = g * g * g, g4 = g3 * g;
    const double d = z - o.z_b;
    const cplx e = t.eta_b(z), n = t.nu_b(z, x);
    const cplx arg = t.delta_b - g4 / (16.0 * e * e) + cplx(0.0, 1.0) * g * n / (2.0 * e);
    // one exponential: far-off obstacles underflow u_b while the other factors overflow
    return std::sqrt(pi / (d * e)) *
           std::exp(t.log_u_b - g3 * n / (8.0 * e * e) + airy_ai_log(arg) - cplx(0.0, 1.0) * t.psi_b(z, x));
}

/// u - p, with the carrier exp(-j k0 z).
inline cplx soft_diffracted_field(const AiryBeamSpec& s, const SoftObstacleSpec& o, double z, double x) {
    return (airy_envelope_closed(s, z, x) - soft_perturbation_closed(s, o, z, x)) * std::polar(1.0, -k0 * z);
}

/// Direct Fresnel quadrature of the screened beam: u(z_b, xi) tau(xi) sampled
/// on `window` and propagated from z_b. Reference for the closed form. dx <= 0
/// picks the spacing that resolves the kernel over the whole grid.
inline FieldGrid soft_diffracted_quadrature(const AiryBeamSpec& s, const SoftObstacleSpec& o, const FieldGrid& coords,
                                            Interval window = {-300.0, 20.0}, double dx = 0.0,
                                            int threads = 1) {
    o.validate();
    FieldGrid g(coords.z_values, coords.x_values);
    detail::require(g.z_values.front() > o.z_b, "soft obstacle: grid must lie beyond z_b");
    const double dmin = g.z_values.front() - o.z_b;
    if (dx <= 0.0) {
        // resolve the steepest kernel phase on the grid
        const double off = std::max(std::abs(g.x_values.back() - window.lo), std::abs(g.x_values.front() - window.hi));
        dx = std::min(1.0 / 16.0, 0.9 * (2.0 * pi / samples_per_period) / (k0 * off / dmin));
    }
    auto screened = [s, o](double xi) { return airy_envelope_closed(s, o.z_b, xi) * soft_transmittance(o, xi); };
    SampledAperture col = sample_aperture(screened, window.lo, window.hi, dx);
    detail::check_sampling(k0 * detail::max_offset(col, g.x_values) / dmin, col.dx, "soft obstacle kernel sampling");
    detail::fill_grid(g, threads, [&](double z, double x) { return fresnel_point(col, z - o.z_b, x); });
    // fresnel_point carried exp(-j k0 (z - z_b)); restore the full carrier
    for (std::size_t iz = 0; iz < g.nz(); ++iz)
        for (std::size_t ix = 0; ix < g.nx(); ++ix) g.at(iz, ix) *= std::polar(1.0, -k0 * o.z_b);
    return g;
}

enum class SimilarityPath { fixed_x, along_caustic };
enum class SimilarityMeasure { modulus, real_part };

/// Normalized correlation of u_d and u over z in [z_c - eps/2, z_c + eps/2].
/// fixed_x samples both at x = x_c(z_c); along_caustic follows x_c(v).
/// real_part correlates Re u_d with Re u instead of the complex fields.
inline double similarity_index(const std::function<cplx(double, double)>& ud,
                               const std::function<cplx(double, double)>& u,
                               const std::function<double(double)>& caustic, double z_c, double eps = 12.0,
                               SimilarityPath path = SimilarityPath::fixed_x,
                               SimilarityMeasure measure = SimilarityMeasure::modulus) {
    detail::require(eps > 0.0, "similarity_index: eps must be > 0");
    const double xc = caustic(z_c);
    const GaussRule& r = gauss_legendre(16);
    const int panels = std::max(4, int(std::ceil(eps)));
    const double a = z_c - eps / 2.0, h = eps / panels;
    cplx cross = 0.0;
    double nd = 0.0, nu = 0.0;
    for (int p = 0; p < panels; ++p) {
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            const double v = a + (p + 0.5) * h + 0.5 * h * r.nodes[i];
            const double x = path == SimilarityPath::fixed_x ? xc : caustic(v);
            cplx fd = ud(v, x), fu = u(v, x);
            if (measure == SimilarityMeasure::real_part) {
                fd = fd.real();
                fu = fu.real();
            }
            const double w = r.weights[i];
            cross += w * fd * std::conj(fu);
            nd += w * std::norm(fd);
            nu += w * std::norm(fu);
        }
    }
    if (!(nd > 0.0) || !(nu > 0.0)) throw domain_error("similarity_index: a field vanishes on the window");
    return std::min(1.0, std::abs(cross) / std::sqrt(nd * nu));
}

} // namespace airybeam
