#pragma once

#include "../propagate.hpp"
#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace airybeam::cli {

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw io_error("cannot write '" + path + "'");
    return out;
}

inline void close_checked(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw io_error("write failed for '" + path + "'");
}

} // namespace detail

/// z,x,re,im,intensity rows, z outer and x inner. Non-finite values are refused.
inline void write_grid_csv(const FieldGrid& g, const std::string& path) {
    for (const cplx& v : g.field)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw numeric_error("refusing to write non-finite field values to '" + path + "'");
    auto out = detail::open_out(path);
    out << "z,x,re,im,intensity\n";
    for (std::size_t iz = 0; iz < g.nz(); ++iz)
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
            const cplx v = g.at(iz, ix);
            out << detail::fmt(g.z_values[iz]) << ',' << detail::fmt(g.x_values[ix]) << ',' << detail::fmt(v.real())
                << ',' << detail::fmt(v.imag()) << ',' << detail::fmt(std::norm(v)) << '\n';
        }
    detail::close_checked(out, path);
}

inline FieldGrid read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "z,x,re,im,intensity") throw io_error("'" + path + "': bad header");
    std::vector<double> zs, xs;
    std::vector<cplx> f;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double v[5];
        std::stringstream ss(line);
        std::string cell;
        for (double& d : v) {
            if (!std::getline(ss, cell, ',')) throw io_error("'" + path + "': short row");
            d = std::stod(cell);
        }
        if (zs.empty() || v[0] != zs.back()) zs.push_back(v[0]);
        if (zs.size() == 1) xs.push_back(v[1]);
        f.emplace_back(v[2], v[3]);
    }
    if (zs.empty() || f.size() != zs.size() * xs.size()) throw io_error("'" + path + "': not a rectangular grid");
    FieldGrid g(zs, xs);
    g.field = std::move(f);
    return g;
}

/// Plain numeric table with a header row.
inline void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
    auto out = detail::open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << (std::isfinite(r[i]) ? detail::fmt(r[i]) : "nan");
        out << '\n';
    }
    detail::close_checked(out, path);
}

inline void write_json(const std::string& path, const json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
    detail::close_checked(out, path);
}

/// 8-bit log-intensity preview, rows along z, columns along x. The scale is
/// clipped `decades` below the maximum.
inline void write_pgm(const RealGrid& g, const std::string& path, double decades = 4.0) {
    const std::size_t nx = g.x_values.size(), nz = g.z_values.size();
    double peak = 0.0;
    for (double v : g.values)
        if (std::isfinite(v)) peak = std::max(peak, v);
    const double top = peak > 0.0 ? std::log10(peak) : 0.0;
    auto out = detail::open_out(path, true);
    out << "P5\n" << nx << ' ' << nz << "\n255\n";
    std::vector<unsigned char> px(nx * nz);
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double v = g.values[i];
        double t = v > 0.0 ? (std::log10(v) - (top - decades)) / decades : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        px[i] = static_cast<unsigned char>(std::lround(255.0 * t));
    }
    out.write(reinterpret_cast<const char*>(px.data()), std::streamsize(px.size()));
    detail::close_checked(out, path);
}

} // namespace airybeam::cli
