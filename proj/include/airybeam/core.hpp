#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace airybeam {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx j{0.0, 1.0};

// Normalized units: lengths are in carrier wavelengths.
inline constexpr double lambda0 = 1.0;
inline constexpr double k0 = 2.0 * pi / lambda0;

/// Base of everything the library throws.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad argument or an argument outside the supported domain.
struct domain_error : error {
    using error::error;
};

/// Sample spacing too coarse for the oscillation being integrated.
struct sampling_error : error {
    using error::error;
};

/// A computation produced NaN/Inf or failed to converge.
struct numeric_error : error {
    using error::error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw domain_error(what);
}

inline bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

} // namespace detail
} // namespace airybeam
