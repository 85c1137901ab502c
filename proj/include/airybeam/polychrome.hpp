#pragma once

#include "aperture.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "propagate.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <vector>

namespace airybeam {

/// Nyquist (sinc) pulse of bandwidth B = bandwidth_ratio * f0. Frequencies are
/// measured in units of f0, so P(f) = 1/bandwidth_ratio inside the band.
struct PulseSpec {
    double bandwidth_ratio = 0.1;
    double u_bar_a = 1.0;

    void validate() const {
        detail::require(bandwidth_ratio > 0.0 && bandwidth_ratio < 2.0, "pulse: bandwidth_ratio must be in (0, 2)");
        detail::require(u_bar_a > 0.0 && std::isfinite(u_bar_a), "pulse: u_bar_a must be positive");
    }
};

/// Pulse whose space-time aperture energy is one.
inline PulseSpec normalized_pulse(const AiryBeamSpec& s, double bandwidth_ratio) {
    PulseSpec p{bandwidth_ratio, std::sqrt(bandwidth_ratio) * airy_unit_energy_amplitude(s.gamma_a, s.alpha_a)};
    p.validate();
    return p;
}

inline double wavenumber_at(double f_ratio) {
    if (!(1.0 + f_ratio > 0.0)) throw domain_error("wavenumber_at: 1 + f/f0 must be > 0");
    return k0 * (1.0 + f_ratio);
}

/// P(f) u(z, x; f) exp(-j k(f) z) for one spectral component.
inline cplx pulsed_airy_spectral_field(const AiryBeamSpec& s, const PulseSpec& pulse, double z, double x,
                                      double f_ratio) {
    pulse.validate();
    if (std::abs(f_ratio) > pulse.bandwidth_ratio / 2.0 * (1.0 + 1e-12))
        throw domain_error("pulsed field: frequency is outside the pulse band");
    AiryBeamSpec sb = s;
    sb.u_a = pulse.u_bar_a;
    const double k = wavenumber_at(f_ratio);
    return airy_envelope_closed(sb, z, x, k) * std::polar(1.0, -k * z) / pulse.bandwidth_ratio;
}

/// Time-integrated intensity: Gauss-Legendre over the band of |P u|^2.
inline RealGrid polychromatic_intensity(const AiryBeamSpec& s, const PulseSpec& pulse, const FieldGrid& coords,
                                        int nodes = 33, int threads = 1) {
    pulse.validate();
    coords.validate_axes();
    const GaussRule& r = gauss_legendre(nodes);
    const double half = pulse.bandwidth_ratio / 2.0;
    RealGrid out{coords.z_values, coords.x_values, std::vector<double>(coords.nz() * coords.nx())};
    parallel_for(out.values.size(), threads, [&](std::size_t k) {
        const double z = coords.z_values[k / coords.nx()], x = coords.x_values[k % coords.nx()];
        double sum = 0.0;
        for (int i = 0; i < nodes; ++i)
            sum += r.weights[i] * std::norm(pulsed_airy_spectral_field(s, pulse, z, x, half * r.nodes[i]));
        out.values[k] = sum * half;
    });
    return out;
}

/// Same integral with every spectral component propagated by Rayleigh-Sommerfeld
/// quadrature from the sampled aperture (unit amplitude samples scaled by u_bar).
inline RealGrid polychromatic_intensity_rs(const SampledAperture& ap, const PulseSpec& pulse, const FieldGrid& coords,
                                           int nodes = 33, int threads = 1) {
    pulse.validate();
    coords.validate_axes();
    const GaussRule& r = gauss_legendre(nodes);
    const double half = pulse.bandwidth_ratio / 2.0;
    RealGrid out{coords.z_values, coords.x_values, std::vector<double>(coords.nz() * coords.nx())};
    parallel_for(out.values.size(), threads, [&](std::size_t k) {
        const double z = coords.z_values[k / coords.nx()], x = coords.x_values[k % coords.nx()];
        double sum = 0.0;
        for (int i = 0; i < nodes; ++i) {
            const double kf = wavenumber_at(half * r.nodes[i]);
            sum += r.weights[i] * std::norm(rs_point(ap, z, x, kf) * pulse.u_bar_a / pulse.bandwidth_ratio);
        }
        out.values[k] = sum * half;
    });
    return out;
}

/// Full width at half maximum of the lobe holding the global maximum.
inline double main_lobe_fwhm(const std::vector<double>& xs, const std::vector<double>& v) {
    detail::require(xs.size() == v.size() && xs.size() >= 3, "main_lobe_fwhm: bad profile");
    std::size_t m = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[m]) m = i;
    const double half = v[m] / 2.0;
    std::size_t lo = m, hi = m;
    while (lo > 0 && v[lo - 1] >= half) --lo;
    while (hi + 1 < v.size() && v[hi + 1] >= half) ++hi;
    if (lo == 0 || hi + 1 == v.size()) throw domain_error("main_lobe_fwhm: lobe touches the profile edge");
    auto cross = [&](std::size_t a, std::size_t b) {
        return xs[a] + (half - v[a]) * (xs[b] - xs[a]) / (v[b] - v[a]);
    };
    return cross(hi, hi + 1) - cross(lo - 1, lo);
}

} // namespace airybeam
