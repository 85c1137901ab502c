#pragma once

#include "aperture.hpp"
#include "caustics.hpp"
#include "core.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace airybeam {

/// Receiving aperture of width dx_r. On the caustic the window is
/// [x_c - width, x_c]; an explicit placement centers it on (z_r, x_r).
struct ReceiverSpec {
    enum class Placement { on_caustic, explicit_point };
    double width = 1.0;
    Placement placement = Placement::on_caustic;
    double z_r = 0.0;
    double x_r = 0.0;

    Interval window(double x_c) const {
        detail::require(width > 0.0, "receiver: width must be > 0");
        if (placement == Placement::on_caustic) return {x_c - width, x_c};
        return {x_r - width / 2.0, x_r + width / 2.0};
    }
};

namespace detail {

inline double lerp_intensity(const std::vector<double>& xs, const std::vector<cplx>& f, std::size_t i, double x) {
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - t) * std::norm(f[i]) + t * std::norm(f[i + 1]);
}

} // namespace detail

/// Trapezoid of |E|^2 over the window; end points are interpolated linearly
/// in intensity between grid nodes.
inline double received_energy(const std::vector<double>& xs, const std::vector<cplx>& column, Interval w) {
    detail::require(xs.size() == column.size() && xs.size() >= 2, "received_energy: bad column");
    detail::require(w.lo < w.hi, "received_energy: empty window");
    if (w.lo < xs.front() || w.hi > xs.back())
        throw domain_error("received_energy: window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                           "] is outside the sampled column");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double a = std::max(xs[i], w.lo), b = std::min(xs[i + 1], w.hi);
        if (b <= a) continue;
        const double ia = detail::lerp_intensity(xs, column, i, a);
        const double ib = detail::lerp_intensity(xs, column, i, b);
        sum += 0.5 * (ia + ib) * (b - a);
    }
    return sum;
}

/// Energy in [x_c - width, x_c] at z_c for the unbounded closed-form beam.
inline double received_energy_closed(const AiryBeamSpec& s, double z_c, double width) {
    s.validate();
    detail::require(width > 0.0, "received_energy_closed: width must be > 0");
    detail::require(z_c >= 0.0, "received_energy_closed: z_c must be >= 0");
    const double g = s.gamma_a, a = s.alpha_a;
    const double im = -z_c * g * a / k0;
    auto f = [&](double v) { return std::norm(airy_ai(cplx(g * v, im))) * std::exp(2.0 * a * v); };
    const int panels = std::max(4, int(std::ceil(width * g * 2.0)));
    const double integral = integrate_gl(f, -width, 0.0, panels, 20);
    return s.u_a * s.u_a * std::exp(-z_c * z_c * g * g * g * a / (2.0 * k0 * k0)) * integral;
}

/// True when the first-order expansion behind the closed form is strained.
inline bool qdl_warning(const AiryBeamSpec& s, double width) { return s.alpha_a * width > 0.05; }

/// Quasi-diffractionless closed form (first order in alpha/gamma).
inline double received_energy_qdl_approx(const AiryBeamSpec& s, double width) {
    s.validate();
    detail::require(width > 0.0, "received_energy_qdl_approx: width must be > 0");
    if (!(s.alpha_a * width < 0.1))
        throw domain_error("received_energy_qdl_approx: alpha_a * width must be < 0.1");
    const double g = s.gamma_a, r = s.alpha_a / g;
    auto prim = [r](double v) {
        const AiryPair p = airy_pair(cplx(v, 0.0));
        const double ai = p.ai.real(), aip = p.aip.real();
        return v * ai * ai - aip * aip + 2.0 / 3.0 * r * (ai * aip - v * aip * aip + v * v * ai * ai);
    };
    return s.u_a * s.u_a / g * (prim(0.0) - prim(-g * width));
}

inline double path_loss_db(double energy_received) {
    if (!(energy_received > 0.0) || !std::isfinite(energy_received))
        throw domain_error("path_loss_db: received energy must be positive");
    return -10.0 * std::log10(energy_received);
}

/// Share of the aperture energy that falls inside the shadow interval.
inline double obstructed_energy_fraction(const SampledAperture& ap, Interval shadow) {
    detail::require(shadow.lo <= shadow.hi, "obstructed_energy_fraction: interval must be ordered");
    const double total = aperture_energy(ap);
    if (!(total > 0.0)) throw domain_error("obstructed_energy_fraction: aperture has no energy");
    const double lo = std::max(shadow.lo, ap.x1), hi = std::min(shadow.hi, ap.x2);
    if (!(hi > lo)) return 0.0;
    std::vector<cplx> col(ap.samples);
    std::vector<double> xs(ap.size());
    for (std::size_t i = 0; i < ap.size(); ++i) xs[i] = ap.x(i);
    return received_energy(xs, col, {lo, hi}) / total;
}

/// Center offset of the Gaussian aperture whose shadowed share equals target.
/// Offsets are scanned outward from zero and the root of smallest |offset| is
/// refined, since for finite shadows the share is not monotone in the offset.
inline double gaussian_center_for_obstruction(GaussianBeamSpec g, double x1, double x2, double dx, Interval shadow,
                                              double target, double max_offset = 0.0) {
    detail::require(target >= 0.0 && target <= 1.0, "gaussian_center_for_obstruction: target must be in [0, 1]");
    if (max_offset <= 0.0) max_offset = std::max(std::abs(x1), std::abs(x2));
    auto share = [&](double c) {
        g.center = c;
        return obstructed_energy_fraction(make_gaussian_aperture(g, x1, x2, dx), shadow) - target;
    };
    const double step = std::min(0.25, g.w_a / 8.0);
    const double f0 = share(0.0);
    if (f0 == 0.0) return 0.0;
    double pa = 0.0, fpa = f0, na = 0.0, fna = f0;
    for (double d = step; d <= max_offset + 1e-12; d += step) {
        for (int sgn : {+1, -1}) {
            const double c = sgn * d;
            const double fc = share(c);
            double& prev = sgn > 0 ? pa : na;
            double& fprev = sgn > 0 ? fpa : fna;
            if ((fc < 0.0) != (fprev < 0.0) || fc == 0.0) {
                if (fc == 0.0) return c;
                boost::uintmax_t it = 100;
                auto r = boost::math::tools::toms748_solve(share, std::min(prev, c), std::max(prev, c),
                                                           sgn > 0 ? fprev : fc, sgn > 0 ? fc : fprev,
                                                           boost::math::tools::eps_tolerance<double>(40), it);
                return 0.5 * (r.first + r.second);
            }
            prev = c;
            fprev = fc;
        }
    }
    throw numeric_error("gaussian_center_for_obstruction: no offset reproduces the target share");
}

} // namespace airybeam
