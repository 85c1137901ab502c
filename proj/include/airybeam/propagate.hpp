#pragma once

#include "aperture.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "specfun.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace airybeam {

enum class PropagatorKind { rayleigh_sommerfeld, fresnel, fraunhofer, closed_form_airy, closed_form_gaussian };

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    detail::require(n >= 1, "linspace: n must be >= 1");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
    v.back() = b;
    return v;
}

/// Complex field on a (z, x) grid; row index is z, x runs fastest.
struct FieldGrid {
    std::vector<double> z_values;
    std::vector<double> x_values;
    std::vector<cplx> field;

    FieldGrid() = default;
    FieldGrid(std::vector<double> z, std::vector<double> x) : z_values(std::move(z)), x_values(std::move(x)) {
        validate_axes();
        field.assign(z_values.size() * x_values.size(), cplx{});
    }

    std::size_t nz() const { return z_values.size(); }
    std::size_t nx() const { return x_values.size(); }
    cplx& at(std::size_t iz, std::size_t ix) { return field[iz * nx() + ix]; }
    const cplx& at(std::size_t iz, std::size_t ix) const { return field[iz * nx() + ix]; }

    std::vector<cplx> row(std::size_t iz) const {
        return {field.begin() + long(iz * nx()), field.begin() + long((iz + 1) * nx())};
    }

    void validate_axes() const {
        detail::require(!z_values.empty() && !x_values.empty(), "grid: empty axis");
        for (std::size_t i = 0; i < z_values.size(); ++i) {
            detail::require(std::isfinite(z_values[i]) && z_values[i] > 0.0, "grid: z values must be > 0");
            if (i) detail::require(z_values[i] > z_values[i - 1], "grid: z values must be strictly increasing");
        }
        for (std::size_t i = 0; i < x_values.size(); ++i) {
            detail::require(std::isfinite(x_values[i]), "grid: x values must be finite");
            if (i) detail::require(x_values[i] > x_values[i - 1], "grid: x values must be strictly increasing");
        }
    }
};

struct RealGrid {
    std::vector<double> z_values;
    std::vector<double> x_values;
    std::vector<double> values;

    std::size_t nx() const { return x_values.size(); }
    double at(std::size_t iz, std::size_t ix) const { return values[iz * nx() + ix]; }
};

inline RealGrid intensity_grid(const FieldGrid& fg) {
    RealGrid out{fg.z_values, fg.x_values, std::vector<double>(fg.field.size())};
    for (std::size_t i = 0; i < fg.field.size(); ++i) out.values[i] = std::norm(fg.field[i]);
    return out;
}

struct PropagateOptions {
    int threads = 1;
    /// Fresnel: largest allowed max|x - xi| / min z. Infinity disables the check,
    /// which is how paraxial-model cross-checks (against closed forms) are run.
    double paraxial_limit = 0.2;
    std::vector<std::string>* warnings = nullptr;
};

namespace detail {

inline void warn(const PropagateOptions& o, const std::string& msg) {
    if (o.warnings) o.warnings->push_back(msg);
}

// Largest transverse offset between an aperture sample and a grid column.
inline double max_offset(const SampledAperture& ap, const std::vector<double>& xs) {
    return std::max(std::abs(xs.back() - ap.x1), std::abs(xs.front() - ap.x2));
}

inline double trap_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

template <class F>
void fill_grid(FieldGrid& g, int threads, F&& f) {
    parallel_for(g.field.size(), threads, [&](std::size_t k) {
        const std::size_t iz = k / g.nx(), ix = k % g.nx();
        g.field[k] = f(g.z_values[iz], g.x_values[ix]);
    });
}

} // namespace detail

/// Rayleigh-Sommerfeld field at one point, 2-D (cylindrical) Green function.
inline cplx rs_point(const SampledAperture& ap, double z, double x, double k = k0) {
    cplx sum = 0.0;
    const std::size_t n = ap.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx e = ap.samples[i];
        if (e == cplx{}) continue;
        const double d = x - ap.x(i);
        const double rho = std::hypot(z, d);
        sum += detail::trap_weight(i, n) * (z / rho) * e * hankel2(1, k * rho);
    }
    return sum * (k * ap.dx) / cplx(0.0, 2.0);
}

/// Huygens-Fresnel field at one point; includes sqrt(j/(lambda z)) exp(-jkz).
inline cplx fresnel_point(const SampledAperture& ap, double z, double x, double k = k0) {
    cplx sum = 0.0;
    const std::size_t n = ap.size();
    const double c = k / (2.0 * z);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x - ap.x(i);
        sum += detail::trap_weight(i, n) * ap.samples[i] * std::polar(1.0, -c * d * d);
    }
    const double lambda = 2.0 * pi / k;
    return std::sqrt(cplx(0.0, 1.0 / (lambda * z))) * std::polar(1.0, -k * z) * sum * ap.dx;
}

inline cplx far_field_point(const SampledAperture& ap, double z, double x) {
    cplx sum = 0.0;
    const std::size_t n = ap.size();
    for (std::size_t i = 0; i < n; ++i)
        sum += detail::trap_weight(i, n) * ap.samples[i] * std::polar(1.0, k0 * x * ap.x(i) / z);
    return std::sqrt(cplx(0.0, 1.0 / (lambda0 * z))) * std::polar(1.0, -k0 * z - k0 * x * x / (2.0 * z)) * sum *
           ap.dx;
}

/// Throws sampling_error if the RS/Fresnel kernel phase moves more than pi/4
/// between neighbouring aperture samples anywhere on the grid.
inline void check_kernel_sampling(const SampledAperture& ap, const FieldGrid& g, bool paraxial) {
    const double d = detail::max_offset(ap, g.x_values);
    const double zmin = g.z_values.front();
    const double slope = paraxial ? d / zmin : d / std::hypot(zmin, d);
    detail::check_sampling(k0 * slope, ap.dx, "kernel sampling");
}

inline FieldGrid propagate_rs(const SampledAperture& ap, const FieldGrid& coords, const PropagateOptions& o = {}) {
    FieldGrid g(coords.z_values, coords.x_values);
    detail::require(g.z_values.front() >= 2.0 * lambda0, "propagate_rs: z must be >= 2 lambda0");
    check_kernel_sampling(ap, g, false);
    detail::fill_grid(g, o.threads, [&](double z, double x) { return rs_point(ap, z, x); });
    return g;
}

inline FieldGrid propagate_fresnel(const SampledAperture& ap, const FieldGrid& coords, const PropagateOptions& o = {}) {
    FieldGrid g(coords.z_values, coords.x_values);
    const double ratio = detail::max_offset(ap, g.x_values) / g.z_values.front();
    if (ratio > o.paraxial_limit)
        throw domain_error("propagate_fresnel: paraxial condition violated, max|x - xi|/z = " + std::to_string(ratio));
    check_kernel_sampling(ap, g, true);
    detail::fill_grid(g, o.threads, [&](double z, double x) { return fresnel_point(ap, z, x); });
    return g;
}

inline double fraunhofer_distance(double x_max) { return pi / lambda0 * x_max * x_max; }

inline FieldGrid propagate_far_field(const SampledAperture& ap, const FieldGrid& coords,
                                     const PropagateOptions& o = {}) {
    FieldGrid g(coords.z_values, coords.x_values);
    const double zf = fraunhofer_distance(std::max(std::abs(ap.x1), std::abs(ap.x2)));
    const double zmin = g.z_values.front();
    if (zmin < zf)
        throw domain_error("propagate_far_field: z = " + std::to_string(zmin) + " is inside the Fraunhofer distance " +
                           std::to_string(zf));
    if (zmin < 10.0 * zf) detail::warn(o, "far field: z < 10 z_F, expect reduced accuracy");
    const double xm = std::max(std::abs(g.x_values.front()), std::abs(g.x_values.back()));
    detail::check_sampling(k0 * xm / zmin, ap.dx, "far-field kernel sampling");
    detail::fill_grid(g, o.threads, [&](double z, double x) { return far_field_point(ap, z, x); });
    return g;
}

inline double relative_l2(const std::vector<cplx>& a, const std::vector<cplx>& ref) {
    detail::require(a.size() == ref.size(), "relative_l2: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - ref[i]);
        den += std::norm(ref[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Halves dx until the grid changes by less than tol (relative L2). Needs an
/// aperture with an analytic source.
inline FieldGrid propagate_adaptive(PropagatorKind kind, SampledAperture ap, const FieldGrid& coords,
                                    const PropagateOptions& o = {}, double tol = 1e-4, int max_doublings = 6) {
    auto run = [&](const SampledAperture& a) {
        switch (kind) {
        case PropagatorKind::rayleigh_sommerfeld: return propagate_rs(a, coords, o);
        case PropagatorKind::fresnel: return propagate_fresnel(a, coords, o);
        case PropagatorKind::fraunhofer: return propagate_far_field(a, coords, o);
        default: throw domain_error("propagate_adaptive: closed forms need no refinement");
        }
    };
    FieldGrid prev = run(ap);
    for (int it = 0; it < max_doublings; ++it) {
        ap = resample(ap, ap.dx / 2.0);
        FieldGrid next = run(ap);
        if (relative_l2(next.field, prev.field) < tol) return next;
        prev = std::move(next);
    }
    throw numeric_error("propagate_adaptive: no convergence after " + std::to_string(max_doublings) + " doublings");
}

/// Closed-form paraxial envelope u(z, x) of the apodized, tilted Airy beam
/// radiated by an unbounded aperture (carrier factor exp(-jkz) excluded).
inline cplx airy_envelope_closed(const AiryBeamSpec& s, double z, double x, double k = k0) {
    if (s.mirrored) x = -x;
    const double g = s.gamma_a, a = s.alpha_a, nu = s.nu_a;
    const double g2 = g * g, g3 = g2 * g, g4 = g3 * g;
    const double zk = z / k;
    const cplx arg(g * x - zk * zk * g4 / 4.0 - zk * g * nu, -zk * g * a);
    const double env = a * (x - zk * zk * g3 / 2.0 - zk * nu);
    const double phi = nu * x + (zk * g2 / 2.0) * (g * x - zk * zk * g4 / 6.0 - zk * g * nu + (a * a - nu * nu) / g2);
    return s.u_a * airy_ai(arg) * std::exp(env) * std::polar(1.0, -phi);
}

inline cplx airy_field_closed(const AiryBeamSpec& s, double z, double x) {
    return airy_envelope_closed(s, z, x) * std::polar(1.0, -k0 * z);
}

inline cplx gaussian_envelope_closed(const GaussianBeamSpec& s, double z, double x) {
    const double xs = x - s.center;
    const double z0 = k0 * s.w_a * s.w_a / 2.0;
    const double wz = s.w_a * std::sqrt(1.0 + (z / z0) * (z / z0));
    const double xt = xs - z * s.mu_a / k0;
    double phase = -(xs - z * s.mu_a / (2.0 * k0)) * s.mu_a + 0.5 * std::atan(z / z0) - s.mu_a * s.center;
    if (z > 0.0) phase -= k0 / 2.0 * xt * xt / (z * (1.0 + (z0 / z) * (z0 / z)));
    return s.v_a * std::sqrt(s.w_a / wz) * std::exp(-xt * xt / (wz * wz)) * std::polar(1.0, phase);
}

inline cplx gaussian_field_closed(const GaussianBeamSpec& s, double z, double x) {
    return gaussian_envelope_closed(s, z, x) * std::polar(1.0, -k0 * z);
}

inline FieldGrid airy_grid_closed(const AiryBeamSpec& s, const FieldGrid& coords, int threads = 1) {
    FieldGrid g(coords.z_values, coords.x_values);
    detail::fill_grid(g, threads, [&](double z, double x) { return airy_field_closed(s, z, x); });
    return g;
}

inline FieldGrid gaussian_grid_closed(const GaussianBeamSpec& s, const FieldGrid& coords, int threads = 1) {
    FieldGrid g(coords.z_values, coords.x_values);
    detail::fill_grid(g, threads, [&](double z, double x) { return gaussian_field_closed(s, z, x); });
    return g;
}

} // namespace airybeam
