#pragma once

#include "core.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace airybeam {

struct AiryPair {
    cplx ai;
    cplx aip;
};

namespace detail {

using cld = std::complex<long double>;

inline constexpr long double airy_c1 = 0.355028053887817239260063186004183176L;  // Ai(0)
inline constexpr long double airy_c2 = 0.258819403792806798405183560189203963L;  // -Ai'(0)

inline cld to_ld(cplx z) { return {z.real(), z.imag()}; }
inline cplx to_d(cld z) { return {double(z.real()), double(z.imag())}; }

// Power series about the origin, summed in extended precision because the
// two fundamental parts cancel on the positive real axis.
inline AiryPair airy_maclaurin(cplx zd) {
    const cld z = to_ld(zd);
    const cld z2 = z * z, z3 = z2 * z;
    cld a = 1.0L, bh = 1.0L;  // a_k z^3k and b_k z^3k
    cld f = 1.0L, fp = 0.0L, g = 1.0L, gp = 1.0L;
    long double peak = 1.0L;
    for (int k = 0; k < 400; ++k) {
        const long double k3 = 3.0L * k;
        const cld fp_term = a * z2 / (k3 + 2.0L);
        a *= z3 / ((k3 + 2.0L) * (k3 + 3.0L));
        bh *= z3 / ((k3 + 3.0L) * (k3 + 4.0L));
        f += a;
        fp += fp_term;
        g += bh;
        gp += (k3 + 4.0L) * bh;
        const long double mag = std::abs(a) + std::abs(bh) * (1.0L + std::abs(z)) + std::abs(fp_term);
        peak = std::max(peak, mag);
        if (k > 2 && mag < 1e-21L * peak) break;
    }
    g *= z;
    return {to_d(airy_c1 * f - airy_c2 * g), to_d(airy_c1 * fp - airy_c2 * gp)};
}

// Large-argument expansion, valid for |arg z| <= 2pi/3. Summed until the
// terms stop shrinking.
struct AirySeries {
    cplx zeta, z14, su, sv;
};

inline AirySeries airy_sector_series(cplx z) {
    const cplx sz = std::sqrt(z);
    const cplx z14 = std::sqrt(sz);
    const cplx zeta = (2.0 / 3.0) * z * sz;
    const cplx ratio = -1.0 / zeta;
    cplx su = 1.0, sv = 1.0, pw = 1.0;
    double uk = 1.0, last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 80; ++k) {
        uk *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
        const double vk = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * uk;
        pw *= ratio;
        const cplx tu = uk * pw;
        const double mag = std::abs(tu);
        if (mag > last) break;
        su += tu;
        sv += vk * pw;
        last = mag;
        if (mag < 1e-18) break;
    }
    return {zeta, z14, su, sv};
}

inline AiryPair airy_asymptotic_sector(cplx z) {
    const AirySeries a = airy_sector_series(z);
    const cplx pre = std::exp(-a.zeta) / (2.0 * std::sqrt(pi));
    return {pre / a.z14 * a.su, -pre * a.z14 * a.sv};
}

inline cplx airy_sector_log(cplx z) {
    const AirySeries a = airy_sector_series(z);
    return -a.zeta - std::log(2.0 * std::sqrt(pi) * a.z14) + std::log(a.su);
}

// Ai(z) + w Ai(wz) + w^2 Ai(w^2 z) = 0 moves the left sector onto the other two.
inline AiryPair airy_asymptotic(cplx z) {
    if (std::abs(std::arg(z)) <= 2.0 * pi / 3.0) return airy_asymptotic_sector(z);
    const cplx w = std::polar(1.0, 2.0 * pi / 3.0);
    const cplx w2 = w * w;
    const AiryPair p1 = airy_asymptotic_sector(w * z);
    const AiryPair p2 = airy_asymptotic_sector(w2 * z);
    return {-w * p1.ai - w2 * p2.ai, -w2 * p1.aip - w * p2.aip};
}

// Taylor steps of y'' = z y along the segment from z0 to z1.
inline AiryPair airy_walk(cplx z0d, AiryPair start, cplx z1d) {
    const cld z0 = to_ld(z0d), z1 = to_ld(z1d);
    const int nsteps = std::max(1, int(std::ceil(std::abs(z1 - z0) / 0.5L)));
    const cld h = (z1 - z0) / (long double)nsteps;
    cld y = to_ld(start.ai), yp = to_ld(start.aip), zc = z0;
    for (int s = 0; s < nsteps; ++s) {
        cld cm1 = 0.0L, c0 = y, c1 = yp;
        cld hn = h;  // h^n for the c1 term
        cld ysum = c0 + c1 * h, ypsum = c1;
        for (int n = 0; n < 80; ++n) {
            const cld c2 = (zc * c0 + cm1) / ((n + 1.0L) * (n + 2.0L));
            ypsum += (n + 2.0L) * c2 * hn;
            hn *= h;
            const cld term = c2 * hn;
            ysum += term;
            cm1 = c0;
            c0 = c1;
            c1 = c2;
            if (n > 4 && std::abs(term) < 1e-21L * (std::abs(ysum) + std::abs(ypsum))) break;
        }
        y = ysum;
        yp = ypsum;
        zc += h;
    }
    return {to_d(y), to_d(yp)};
}

inline constexpr double airy_inner_radius = 5.0;
inline constexpr double airy_outer_radius = 9.0;

} // namespace detail

/// Ai and Ai' together. Maclaurin inside radius 5, asymptotic beyond 9, and
/// Taylor stepping in between: inward from the asymptotic circle where Ai is
/// recessive (|arg z| <= pi/3), outward from the series elsewhere.
inline AiryPair airy_pair(cplx z) {
    if (!detail::finite(z)) throw domain_error("airy: non-finite argument");
    const double r = std::abs(z);
    if (r >= 1e4) throw domain_error("airy: |z| >= 1e4 is outside the supported range");
    AiryPair out;
    if (r <= detail::airy_inner_radius) {
        out = detail::airy_maclaurin(z);
    } else if (r >= detail::airy_outer_radius) {
        out = detail::airy_asymptotic(z);
    } else {
        const double th = std::arg(z);
        if (std::abs(th) <= pi / 3.0) {
            const cplx s = std::polar(detail::airy_outer_radius, th);
            out = detail::airy_walk(s, detail::airy_asymptotic(s), z);
        } else {
            const cplx s = std::polar(detail::airy_inner_radius, th);
            out = detail::airy_walk(s, detail::airy_maclaurin(s), z);
        }
    }
    if (!detail::finite(out.ai) || !detail::finite(out.aip))
        throw numeric_error("airy: result overflowed");
    return out;
}

inline cplx airy_ai(cplx z) { return airy_pair(z).ai; }
inline cplx airy_ai_prime(cplx z) { return airy_pair(z).aip; }
inline double airy_ai(double x) { return airy_pair(cplx(x, 0.0)).ai.real(); }

/// log Ai(z) (any branch), finite where Ai itself over- or underflows.
inline cplx airy_ai_log(cplx z) {
    if (!detail::finite(z)) throw domain_error("airy: non-finite argument");
    if (std::abs(z) < detail::airy_outer_radius) return std::log(airy_ai(z));
    if (std::abs(std::arg(z)) <= 2.0 * pi / 3.0) return detail::airy_sector_log(z);
    const cplx w = std::polar(1.0, 2.0 * pi / 3.0);
    const cplx l1 = std::log(-w) + detail::airy_sector_log(w * z);
    const cplx l2 = std::log(-w * w) + detail::airy_sector_log(w * w * z);
    const cplx m = l1.real() > l2.real() ? l1 : l2;
    return m + std::log(std::exp(l1 - m) + std::exp(l2 - m));
}
inline double airy_ai_prime(double x) { return airy_pair(cplx(x, 0.0)).aip.real(); }

/// Leading-order estimate of the n-th zero of Ai (n >= 1).
inline double airy_zero_approx(int n) {
    if (n < 1) throw domain_error("airy_zero_approx: n must be >= 1");
    return -std::pow(1.5 * pi * (n - 0.25), 2.0 / 3.0);
}

/// n-th zero of Ai, Newton-polished from the estimate above.
inline double airy_zero(int n) {
    double a = airy_zero_approx(n);
    for (int it = 0; it < 30; ++it) {
        const AiryPair p = airy_pair(cplx(a, 0.0));
        const double step = p.ai.real() / p.aip.real();
        a -= step;
        if (std::abs(step) < 1e-15 * std::abs(a)) break;
    }
    return a;
}

namespace detail {

inline constexpr long double euler_gamma = 0.577215664901532860606512090082402431L;

// J_n and Y_n (n = 0, 1) from the ascending series.
inline void bessel_series(int n, double ud, long double& jn, long double& yn) {
    const long double u = ud, q = u * u / 4.0L;
    const long double ln_half = std::log(u / 2.0L);
    const long double ipi = 1.0L / 3.141592653589793238462643383279502884L;
    long double t = (n == 0) ? 1.0L : u / 2.0L;  // first term
    long double sj = 0.0L, sy = 0.0L, hk = 0.0L;  // hk = H_k
    long double peak = std::abs(t);
    for (int k = 0; k < 300; ++k) {
        if (k > 0) {
            t *= -q / ((long double)k * (k + n));
            hk += 1.0L / k;
        }
        sj += t;
        if (n == 0) {
            sy += hk * t;
        } else {
            sy += (-2.0L * euler_gamma + hk + hk + 1.0L / (k + 1.0L)) * t;
        }
        peak = std::max(peak, std::abs(t));
        if (k > u && std::abs(t) < 1e-22L * peak) break;
    }
    jn = sj;
    if (n == 0) {
        yn = 2.0L * ipi * ((ln_half + euler_gamma) * sj - sy);
    } else {
        yn = -2.0L * ipi / u + 2.0L * ipi * ln_half * sj - ipi * sy;
    }
}

// Hankel large-argument expansion, second kind.
inline cplx hankel2_asymptotic(int n, double u) {
    const double mu = 4.0 * n * n;
    cplx sum = 1.0, pw = 1.0;
    double ak = 1.0, last = std::numeric_limits<double>::infinity();
    const cplx step = cplx(0.0, -1.0) / u;
    for (int k = 1; k < 200; ++k) {
        ak *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k);
        pw *= step;
        const cplx term = ak * pw;
        const double mag = std::abs(term);
        if (mag > last) break;
        sum += term;
        last = mag;
        if (mag < 1e-17) break;
    }
    const double phase = u - n * pi / 2.0 - pi / 4.0;
    return std::sqrt(2.0 / (pi * u)) * std::polar(1.0, -phase) * sum;
}

inline constexpr double hankel_switch = 17.0;

} // namespace detail

/// H^(2)_n(u) = J_n(u) - j Y_n(u) for n in {0, 1}, u > 0.
inline cplx hankel2(int order, double u) {
    if (order != 0 && order != 1) throw domain_error("hankel2: order must be 0 or 1");
    if (!(u > 0.0) || !std::isfinite(u)) throw domain_error("hankel2: argument must be positive and finite");
    if (u >= detail::hankel_switch) return detail::hankel2_asymptotic(order, u);
    long double jn, yn;
    detail::bessel_series(order, u, jn, yn);
    return {double(jn), -double(yn)};
}

} // namespace airybeam
