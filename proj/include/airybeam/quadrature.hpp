#pragma once

#include "core.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace airybeam {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

namespace detail {

inline GaussRule build_gauss_legendre(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = r.weights[n - 1 - i] = w;
    }
    return r;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
inline const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw domain_error("gauss_legendre: n must be >= 1");
    static std::mutex m;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::build_gauss_legendre(n)).first;
    return it->second;
}

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <class F>
auto integrate_gl(F&& f, double a, double b, int panels = 8, int order = 16) {
    const GaussRule& g = gauss_legendre(order);
    const double h = (b - a) / panels;
    decltype(f(a)) sum{};
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int i = 0; i < order; ++i) sum += g.weights[i] * f(mid + 0.5 * h * g.nodes[i]);
    }
    return sum * (0.5 * h);
}

/// Trapezoid rule for uniform samples.
template <class T>
T trapezoid(const std::vector<T>& y, double dx) {
    if (y.size() < 2) return T{};
    T s = 0.5 * (y.front() + y.back());
    for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * dx;
}

} // namespace airybeam
