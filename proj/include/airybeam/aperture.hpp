#pragma once

#include "core.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace airybeam {

/// Exponentially apodized, scaled and tilted Airy aperture
///   E(xi) = U Ai(gamma xi) exp(alpha xi) exp(-j nu xi)
/// gamma is in units of 1/lambda0 (the ideal beam has gamma = 1). A mirrored
/// beam uses E(-xi) instead of a negative gamma.
struct AiryBeamSpec {
    double gamma_a = 1.0;
    double alpha_a = 0.0;
    double nu_a = 0.0;
    double u_a = 1.0;
    bool mirrored = false;

    void validate() const {
        detail::require(gamma_a > 0.0 && std::isfinite(gamma_a), "airy beam: gamma_a must be positive");
        detail::require(alpha_a >= 0.0 && std::isfinite(alpha_a), "airy beam: alpha_a must be >= 0");
        detail::require(std::isfinite(nu_a), "airy beam: nu_a must be finite");
        detail::require(u_a > 0.0 && std::isfinite(u_a), "airy beam: u_a must be positive");
    }
};

/// Tilted Gaussian aperture E(xi) = V exp(-(xi - center)^2 / w^2) exp(-j mu xi).
struct GaussianBeamSpec {
    double w_a = 1.0;
    double mu_a = 0.0;
    double v_a = 1.0;
    double center = 0.0;

    void validate() const {
        detail::require(w_a > 0.0 && std::isfinite(w_a), "gaussian beam: w_a must be positive");
        detail::require(v_a > 0.0 && std::isfinite(v_a), "gaussian beam: v_a must be positive");
        detail::require(std::isfinite(mu_a) && std::isfinite(center), "gaussian beam: mu_a and center must be finite");
    }
};

/// Amplitude giving unit energy over the whole line (needs alpha > 0).
inline double airy_unit_energy_amplitude(double gamma_a, double alpha_a) {
    detail::require(gamma_a > 0.0, "airy_unit_energy_amplitude: gamma_a must be positive");
    detail::require(alpha_a > 0.0, "airy_unit_energy_amplitude: alpha_a must be positive");
    const double r = alpha_a / gamma_a;
    return std::pow(8.0 * pi * alpha_a * gamma_a, 0.25) * std::exp(-r * r * r / 3.0);
}

inline double gaussian_unit_energy_amplitude(double w_a) {
    detail::require(w_a > 0.0, "gaussian_unit_energy_amplitude: w_a must be positive");
    return std::pow(2.0 / pi, 0.25) / std::sqrt(w_a);
}

inline AiryBeamSpec normalized(AiryBeamSpec s) {
    s.u_a = airy_unit_energy_amplitude(s.gamma_a, s.alpha_a);
    return s;
}

inline GaussianBeamSpec normalized(GaussianBeamSpec s) {
    s.v_a = gaussian_unit_energy_amplitude(s.w_a);
    return s;
}

inline cplx airy_aperture_value(const AiryBeamSpec& s, double xi) {
    const double x = s.mirrored ? -xi : xi;
    return s.u_a * airy_ai(s.gamma_a * x) * std::exp(s.alpha_a * x) * std::polar(1.0, -s.nu_a * x);
}

inline cplx gaussian_aperture_value(const GaussianBeamSpec& s, double xi) {
    const double d = (xi - s.center) / s.w_a;
    return s.v_a * std::exp(-d * d) * std::polar(1.0, -s.mu_a * xi);
}

/// Uniformly sampled aperture field on [x1, x2]. `source` is kept when the
/// field comes from an analytic profile so that propagators can refine it.
struct SampledAperture {
    double x1 = 0.0;
    double x2 = 0.0;
    double dx = 0.0;
    std::vector<cplx> samples;
    std::function<cplx(double)> source;
    std::function<double(double, double)> max_wavenumber;  // over [a, b]

    std::size_t size() const { return samples.size(); }
    double x(std::size_t i) const { return x1 + double(i) * dx; }
};

/// Samples per local period required of aperture and kernel phases.
inline constexpr double samples_per_period = 8.0;

namespace detail {

inline std::size_t sample_count(double x1, double x2, double dx) {
    require(std::isfinite(x1) && std::isfinite(x2) && x1 < x2, "aperture: need x1 < x2");
    require(dx > 0.0 && std::isfinite(dx), "aperture: dx must be positive");
    const double n = std::round((x2 - x1) / dx);
    require(n >= 1.0 && n < 5e7, "aperture: sample count out of range");
    return std::size_t(n) + 1;
}

inline void check_sampling(double kmax, double dx, const std::string& who) {
    if (kmax * dx > 2.0 * pi / samples_per_period)
        throw sampling_error(who + ": dx = " + std::to_string(dx) + " gives " +
                             std::to_string(2.0 * pi / (kmax * dx)) + " samples per local period (need >= 8)");
}

} // namespace detail

/// Samples f on the grid x1 + i*dx, i = 0..round((x2-x1)/dx); dx is adjusted so
/// the last sample lands on x2.
inline SampledAperture sample_aperture(std::function<cplx(double)> f, double x1, double x2, double dx,
                                       std::function<double(double, double)> kmax = {}) {
    const std::size_t n = detail::sample_count(x1, x2, dx);
    SampledAperture ap;
    ap.x1 = x1;
    ap.x2 = x2;
    ap.dx = (x2 - x1) / double(n - 1);
    if (kmax) detail::check_sampling(kmax(x1, x2), ap.dx, "aperture sampling");
    ap.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) ap.samples[i] = f(ap.x(i));
    ap.source = std::move(f);
    ap.max_wavenumber = std::move(kmax);
    return ap;
}

/// Same profile, new spacing. Needs an analytic source.
inline SampledAperture resample(const SampledAperture& ap, double dx) {
    if (!ap.source) throw domain_error("resample: aperture has no analytic source");
    return sample_aperture(ap.source, ap.x1, ap.x2, dx, ap.max_wavenumber);
}

/// Largest local phase slope of the Airy aperture over [a, b].
inline double airy_local_wavenumber(const AiryBeamSpec& s, double a, double b) {
    // oscillating part lives at negative (unmirrored) coordinate
    const double far = s.mirrored ? std::max(0.0, b) : std::max(0.0, -a);
    return s.gamma_a * std::sqrt(s.gamma_a * far) + std::abs(s.nu_a);
}

inline SampledAperture make_airy_aperture(const AiryBeamSpec& spec, double x1, double x2, double dx) {
    spec.validate();
    return sample_aperture([spec](double xi) { return airy_aperture_value(spec, xi); }, x1, x2, dx,
                           [spec](double a, double b) { return airy_local_wavenumber(spec, a, b); });
}

inline SampledAperture make_gaussian_aperture(const GaussianBeamSpec& spec, double x1, double x2, double dx) {
    spec.validate();
    const double mu = std::abs(spec.mu_a);
    return sample_aperture([spec](double xi) { return gaussian_aperture_value(spec, xi); }, x1, x2, dx,
                           [mu](double, double) { return mu; });
}

/// Trapezoid of |E|^2.
inline double aperture_energy(const SampledAperture& ap) {
    std::vector<double> p(ap.size());
    for (std::size_t i = 0; i < ap.size(); ++i) p[i] = std::norm(ap.samples[i]);
    return trapezoid(p, ap.dx);
}

/// Energy of Ai(gamma xi) over [-x_eff, 0].
inline double airy_energy_truncated_closed(double gamma_a, double x_eff) {
    detail::require(gamma_a > 0.0, "airy_energy_truncated_closed: gamma_a must be positive");
    detail::require(x_eff >= 0.0, "airy_energy_truncated_closed: x_eff must be >= 0");
    const double t = gamma_a * x_eff;
    const AiryPair p = airy_pair(cplx(-t, 0.0));
    const double ai = p.ai.real(), aip = p.aip.real();
    const double aip0 = airy_ai_prime(0.0);
    return (t * ai * ai - aip0 * aip0 + aip * aip) / gamma_a;
}

/// Energy of the apodized beam over the whole line.
inline double airy_energy_modulated_closed(const AiryBeamSpec& s) {
    s.validate();
    if (!(s.alpha_a > 0.0)) throw domain_error("airy_energy_modulated_closed: alpha_a must be > 0");
    const double r = s.alpha_a / s.gamma_a;
    return s.u_a * s.u_a / std::sqrt(8.0 * pi * s.alpha_a * s.gamma_a) * std::exp(2.0 / 3.0 * r * r * r);
}

} // namespace airybeam
