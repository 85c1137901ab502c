#pragma once

#include "../airybeam.hpp"
#include "config.hpp"
#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace airybeam::cli {

struct RunOptions {
    std::string out_dir = "out";
    int threads = 1;
    bool preview = false;
    bool oracle = false;
    std::ostream* log = nullptr;
};

struct RunResult {
    json summary;
    std::vector<std::string> files;
    int failures = 0;  // validate only
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"field", "caustic", "pathloss", "knife", "softheal", "pulse", "validate"};
    return c;
}

namespace detail {

using PointField = std::function<cplx(double, double)>;

inline bool is_airy(const BeamConfig& b) { return b.kind == BeamConfig::Kind::airy; }

inline const AiryBeamSpec& need_airy(const ScenarioConfig& c, const std::string& cmd) {
    if (!is_airy(c.beam)) throw config_error("config error at 'beam.type': '" + cmd + "' needs an airy beam");
    return c.beam.airy;
}

inline FieldGrid need_grid(const ScenarioConfig& c, const std::string& cmd) {
    if (!c.grid_z || !c.grid_x) throw config_error("config error at 'grid': '" + cmd + "' needs a grid block");
    return FieldGrid(c.grid_z->values(), c.grid_x->values());
}

inline SampledAperture beam_aperture(const BeamConfig& b, const ApertureConfig& a) {
    if (!a.present) throw config_error("config error at 'aperture': block is required here");
    return is_airy(b) ? make_airy_aperture(b.airy, a.x1, a.x2, a.dx) : make_gaussian_aperture(b.gaussian, a.x1, a.x2, a.dx);
}

inline PointField closed_field(const BeamConfig& b) {
    if (is_airy(b)) return [s = b.airy](double z, double x) { return airy_field_closed(s, z, x); };
    return [s = b.gaussian](double z, double x) { return gaussian_field_closed(s, z, x); };
}

inline PointField point_field(Propagator p, const BeamConfig& b, const SampledAperture* ap) {
    switch (p) {
    case Propagator::closed_form: return closed_field(b);
    case Propagator::rs: return [ap](double z, double x) { return rs_point(*ap, z, x); };
    case Propagator::fresnel: return [ap](double z, double x) { return fresnel_point(*ap, z, x); };
    case Propagator::far_field: return [ap](double z, double x) { return far_field_point(*ap, z, x); };
    }
    throw config_error("unknown propagator");
}

inline FieldGrid propagate_grid(const ScenarioConfig& c, const BeamConfig& b, const SampledAperture* ap,
                                const FieldGrid& coords, const PropagateOptions& o) {
    switch (c.propagator) {
    case Propagator::closed_form:
        return is_airy(b) ? airy_grid_closed(b.airy, coords, o.threads) : gaussian_grid_closed(b.gaussian, coords, o.threads);
    case Propagator::rs: return propagate_rs(*ap, coords, o);
    case Propagator::fresnel: return propagate_fresnel(*ap, coords, o);
    case Propagator::far_field: return propagate_far_field(*ap, coords, o);
    }
    throw config_error("unknown propagator");
}

// Rows of coords split at z_b and filled by two different evaluators.
inline FieldGrid stitch(const FieldGrid& coords, double z_b, const std::function<FieldGrid(const FieldGrid&)>& before,
                        const std::function<FieldGrid(const FieldGrid&)>& after) {
    std::vector<double> za, zb;
    for (double z : coords.z_values) (z <= z_b ? za : zb).push_back(z);
    FieldGrid out(coords.z_values, coords.x_values);
    std::size_t row = 0;
    for (const auto* part : {&za, &zb}) {
        if (part->empty()) continue;
        const FieldGrid g = (part == &za ? before : after)(FieldGrid(*part, coords.x_values));
        std::copy(g.field.begin(), g.field.end(), out.field.begin() + long(row * out.nx()));
        row += part->size();
    }
    return out;
}

inline KnifeEdgeSpec resolved_knife(const ScenarioConfig& c) {
    KnifeEdgeSpec k = c.obstacle.knife;
    if (c.obstacle.clearance) {
        if (!is_airy(c.beam)) throw config_error("config error at 'obstacle.clearance': needs an airy beam");
        k.x_b1 = clearance_edge_position(c.beam.airy, k.z_b, *c.obstacle.clearance);
    }
    k.validate();
    return k;
}

// Incident field across z_b for the two-stage knife-edge computation.
inline FieldColumn knife_column(const ScenarioConfig& c, const BeamConfig& b, const SampledAperture* ap, double z_b,
                                double x_lo, double x_hi, int threads) {
    double lo = x_lo - z_b, hi = x_hi + z_b, dx = c.aperture.present ? c.aperture.dx : 1.0 / 16.0;
    if (ap) {
        lo = std::min(lo, ap->x1 - z_b);
        hi = std::max(hi, ap->x2 + z_b);
    }
    if (c.obstacle.column) {
        lo = c.obstacle.column->min;
        hi = c.obstacle.column->max;
        if (c.obstacle.column->n > 1) dx = (hi - lo) / double(c.obstacle.column->n - 1);
    }
    if (c.propagator == Propagator::rs) return incident_column_rs(*ap, z_b, lo, hi, dx, threads);
    const PointField f = point_field(c.propagator, b, ap);
    FieldColumn col;
    col.z = z_b;
    col.x = linspace(lo, hi, ::airybeam::detail::sample_count(lo, hi, dx));
    col.field.resize(col.x.size());
    parallel_for(col.x.size(), threads, [&](std::size_t i) { col.field[i] = f(z_b, col.x[i]); });
    return col;
}

inline PropagatorKind screen_kernel(const ScenarioConfig& c) {
    return c.propagator == Propagator::fresnel ? PropagatorKind::fresnel : PropagatorKind::rayleigh_sommerfeld;
}

// Field of beam b on coords including the configured obstacle.
inline FieldGrid scenario_field(const ScenarioConfig& c, const BeamConfig& b, const SampledAperture* ap,
                                const FieldGrid& coords, const PropagateOptions& o) {
    auto free = [&](const FieldGrid& g) { return propagate_grid(c, b, ap, g, o); };
    if (c.obstacle.kind == ObstacleConfig::Kind::knife) {
        const KnifeEdgeSpec k = resolved_knife(c);
        std::optional<FieldColumn> col;
        return stitch(coords, k.z_b, free, [&](const FieldGrid& g) {
            if (!col) col = knife_column(c, b, ap, k.z_b, g.x_values.front(), g.x_values.back(), o.threads);
            return knife_edge_field(*col, k, g, screen_kernel(c), o.threads);
        });
    }
    if (c.obstacle.kind == ObstacleConfig::Kind::soft) {
        if (!is_airy(b) || c.propagator != Propagator::closed_form)
            throw config_error("config error at 'obstacle': the soft obstacle is closed form, use an airy beam "
                               "with propagator closed_form");
        const AiryBeamSpec s = b.airy;
        const SoftObstacleSpec so = c.obstacle.soft;
        return stitch(coords, so.z_b, free, [&](const FieldGrid& g) {
            FieldGrid out(g.z_values, g.x_values);
            ::airybeam::detail::fill_grid(out, o.threads, [&](double z, double x) { return soft_diffracted_field(s, so, z, x); });
            return out;
        });
    }
    return free(coords);
}

// At most nz x nx evenly spread nodes of the grid, for oracle comparisons.
inline FieldGrid thin(const FieldGrid& g, std::size_t nz, std::size_t nx) {
    auto pick = [](const std::vector<double>& v, std::size_t n) {
        if (v.size() <= n) return v;
        std::vector<double> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(v[(i * (v.size() - 1)) / (n - 1)]);
        return out;
    };
    return FieldGrid(pick(g.z_values, nz), pick(g.x_values, nx));
}

inline void write_aperture(const SampledAperture& ap, const std::string& path) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ap.size(); ++i)
        rows.push_back({ap.x(i), ap.samples[i].real(), ap.samples[i].imag(), std::norm(ap.samples[i])});
    write_table_csv(path, {"x", "re", "im", "intensity"}, rows);
}

inline std::string join(const std::string& dir, const std::string& f) { return (std::filesystem::path(dir) / f).string(); }

inline double window_energy(const PointField& f, double z, Interval w, double dx, int threads) {
    const std::size_t n = std::max<std::size_t>(9, std::size_t(std::ceil(w.length() / dx)) + 1);
    const std::vector<double> xs = linspace(w.lo, w.hi, n);
    std::vector<cplx> col(n);
    parallel_for(n, threads, [&](std::size_t i) { col[i] = f(z, xs[i]); });
    return received_energy(xs, col, w);
}

// Fields at the receiver window, with the obstacle when one is configured.
inline double knife_received(const ScenarioConfig& c, const BeamConfig& b, const SampledAperture& ap, double z_r,
                             Interval w, int threads) {
    const double dx = c.aperture.dx / 2.0;
    if (c.obstacle.kind != ObstacleConfig::Kind::knife)
        return window_energy(point_field(c.propagator, b, &ap), z_r, w, dx, threads);
    const KnifeEdgeSpec k = resolved_knife(c);
    if (!(z_r > k.z_b)) throw config_error("config error at 'receiver.z_r': must lie beyond the obstacle");
    const FieldColumn col = knife_column(c, b, &ap, k.z_b, w.lo, w.hi, threads);
    const std::size_t n = std::max<std::size_t>(9, std::size_t(std::ceil(w.length() / dx)) + 1);
    const FieldGrid g = knife_edge_field(col, k, FieldGrid({z_r}, linspace(w.lo, w.hi, n)), screen_kernel(c), threads);
    return received_energy(g.x_values, g.field, w);
}

inline void say(const RunOptions& o, const std::string& s) {
    if (o.log) *o.log << s << '\n';
}

// ---- commands -------------------------------------------------------------

inline RunResult run_field(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    std::vector<std::string> warnings;
    PropagateOptions po;
    po.threads = o.threads;
    po.warnings = &warnings;
    const FieldGrid coords = need_grid(c, "field");
    std::optional<SampledAperture> ap;
    if (c.aperture.present) ap = beam_aperture(c.beam, c.aperture);
    const SampledAperture* app = ap ? &*ap : nullptr;
    const FieldGrid g = scenario_field(c, c.beam, app, coords, po);

    const std::string f = join(o.out_dir, "field.csv");
    write_grid_csv(g, f);
    res.files.push_back(f);
    if (ap) {
        write_aperture(*ap, join(o.out_dir, "aperture.csv"));
        res.files.push_back(join(o.out_dir, "aperture.csv"));
    }
    if (is_airy(c.beam) && c.obstacle.kind == ObstacleConfig::Kind::none) {
        const PointField pf = point_field(c.propagator, c.beam, app);
        std::vector<std::vector<double>> rows(g.nz());
        parallel_for(g.nz(), o.threads, [&](std::size_t i) {
            const double z = g.z_values[i], xc = airy_caustic_x(c.beam.airy, z);
            rows[i] = {z, xc, std::norm(pf(z, xc)), std::norm(airy_field_closed(c.beam.airy, z, xc))};
        });
        write_table_csv(join(o.out_dir, "caustic_track.csv"), {"z", "x_c", "intensity", "intensity_closed"}, rows);
        res.files.push_back(join(o.out_dir, "caustic_track.csv"));
    }
    if (o.preview) {
        write_pgm(intensity_grid(g), join(o.out_dir, "field.pgm"));
        res.files.push_back(join(o.out_dir, "field.pgm"));
    }
    double peak = 0.0;
    for (const cplx& v : g.field) peak = std::max(peak, std::norm(v));
    res.summary["peak_intensity"] = peak;
    if (o.oracle) {
        const FieldGrid t = thin(g, 24, 48);
        json orc;
        if (c.obstacle.kind == ObstacleConfig::Kind::soft) {
            std::vector<double> zb;
            for (double z : t.z_values)
                if (z > c.obstacle.soft.z_b + 1.0) zb.push_back(z);
            if (!zb.empty()) {
                const FieldGrid tb(zb, t.x_values);
                const FieldGrid q = soft_diffracted_quadrature(c.beam.airy, c.obstacle.soft, tb, {-300.0, 20.0}, 0.0, o.threads);
                FieldGrid cl(zb, t.x_values);
                ::airybeam::detail::fill_grid(cl, o.threads, [&](double z, double x) { return soft_diffracted_field(c.beam.airy, c.obstacle.soft, z, x); });
                orc = {{"reference", "fresnel quadrature of the screened beam"}, {"relative_l2", relative_l2(cl.field, q.field)}};
            }
        } else if (c.obstacle.kind == ObstacleConfig::Kind::none && ap) {
            const FieldGrid mine = propagate_grid(c, c.beam, app, t, po);
            FieldGrid ref(t.z_values, t.x_values);
            std::string what;
            if (c.propagator == Propagator::closed_form) {
                ::airybeam::detail::fill_grid(ref, o.threads, [&](double z, double x) { return fresnel_point(*ap, z, x); });
                what = "fresnel quadrature of the sampled aperture";
            } else {
                ref = is_airy(c.beam) ? airy_grid_closed(c.beam.airy, t, o.threads) : gaussian_grid_closed(c.beam.gaussian, t, o.threads);
                what = "closed form of the unbounded beam";
            }
            orc = {{"reference", what}, {"relative_l2", relative_l2(mine.field, ref.field)}};
        }
        if (!orc.is_null()) {
            res.summary["oracle"] = orc;
            say(o, "oracle: relative L2 = " + fmt(orc["relative_l2"].get<double>()));
        }
    }
    res.summary["warnings"] = warnings;
    return res;
}

inline RunResult run_caustic(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    const AiryBeamSpec& s = need_airy(c, "caustic");
    const std::vector<double> zs = need_grid(c, "caustic").z_values;
    const double xi_lo = c.aperture.present ? (s.mirrored ? -c.aperture.x2 : c.aperture.x1) : -1e4 / s.gamma_a;
    const PhaseProfile p = airy_phase_profile(std::max(-1e4, s.gamma_a * xi_lo));
    const CausticCurve curve = caustic_paraxial(p, s.gamma_a, s.nu_a, zs);
    std::optional<SampledAperture> ap;
    if (c.propagator != Propagator::closed_form) ap = beam_aperture(c.beam, c.aperture);
    const PointField pf = point_field(c.propagator, c.beam, ap ? &*ap : nullptr);
    std::vector<std::vector<double>> rows(curve.points.size());
    double worst = 0.0;
    for (const auto& q : curve.points) worst = std::max(worst, caustic_residual_paraxial(p, s.gamma_a, s.nu_a, q));
    parallel_for(rows.size(), o.threads, [&](std::size_t i) {
        const CausticPoint q = curve.points[i];
        const double x = s.mirrored ? -q.x : q.x;
        rows[i] = {q.z, x, s.mirrored ? -q.xi : q.xi, airy_caustic_x(s, q.z), caustic_intensity_modulated(s, q.z),
                   std::norm(pf(q.z, x))};
    });
    write_table_csv(join(o.out_dir, "caustic.csv"), {"z", "x_c", "xi_c", "x_c_closed", "intensity_closed", "intensity"},
                    rows);
    res.files.push_back(join(o.out_dir, "caustic.csv"));
    const double inf = std::numeric_limits<double>::infinity();
    double x_eff = c.x_eff.value_or(inf);
    std::optional<double> xa;
    if (c.aperture.present) {
        if (!c.x_eff) x_eff = s.mirrored ? c.aperture.x2 : -c.aperture.x1;
        xa = std::max(std::abs(c.aperture.x1), std::abs(c.aperture.x2));
    }
    const RangeReport r = range_report(s, x_eff > 0.0 ? x_eff : inf, c.n, xa);
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    res.summary["range"] = {{"x_eff", num(x_eff)},
                            {"z_max", num(r.z_max)},
                            {"z_corner", num(r.z_corner)},
                            {"z_fraunhofer", num(r.z_fraunhofer)},
                            {"z_fraunhofer_apodized", num(r.z_fraunhofer_apodized)}};
    res.summary["max_residual"] = worst;
    res.summary["points"] = curve.points.size();
    return res;
}

inline RunResult run_pathloss(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    const AiryBeamSpec& s = need_airy(c, "pathloss");
    if (!c.receiver.present || !c.receiver.z)
        throw config_error("config error at 'receiver.z': pathloss needs receiver widths and a z range");
    std::optional<SampledAperture> ap;
    if (c.propagator != Propagator::closed_form) ap = beam_aperture(c.beam, c.aperture);
    const PointField pf = point_field(c.propagator, c.beam, ap ? &*ap : nullptr);
    const std::vector<double> zs = c.receiver.z->values();
    std::vector<std::vector<double>> rows;
    for (double w : c.receiver.widths) {
        for (double z : zs) {
            const double xc = airy_caustic_x(s, z);
            const Interval win = s.mirrored ? Interval{xc, xc + w} : Interval{xc - w, xc};
            const double e = received_energy_closed(s, z, w);
            std::vector<double> row{z, w, xc, e, path_loss_db(e)};
            if (ap) {
                const double en = window_energy(pf, z, win, c.aperture.dx / 2.0, o.threads);
                row.push_back(en);
                row.push_back(path_loss_db(en));
            }
            rows.push_back(row);
        }
        json q{{"width", w}, {"qdl_warning", qdl_warning(s, w)}};
        if (s.alpha_a * w < 0.1) {
            const double e = received_energy_qdl_approx(s, w);
            q["energy_qdl"] = e;
            q["loss_qdl_db"] = path_loss_db(e);
        }
        res.summary["qdl"].push_back(q);
    }
    std::vector<std::string> head{"z", "width", "x_c", "energy_closed", "loss_closed_db"};
    if (ap) {
        head.push_back("energy");
        head.push_back("loss_db");
    }
    write_table_csv(join(o.out_dir, "pathloss.csv"), head, rows);
    res.files.push_back(join(o.out_dir, "pathloss.csv"));
    return res;
}

inline RunResult run_knife(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    need_airy(c, "knife");
    if (!c.receiver.present || !c.receiver.z_r)
        throw config_error("config error at 'receiver': knife needs z_r, x_r and a width");
    const double z_r = *c.receiver.z_r, w = c.receiver.widths.front();
    const Interval win{*c.receiver.x_r - w / 2.0, *c.receiver.x_r + w / 2.0};
    const SampledAperture ap = beam_aperture(c.beam, c.aperture);
    std::optional<Interval> shadow;
    if (c.obstacle.kind == ObstacleConfig::Kind::knife) {
        const KnifeEdgeSpec k = resolved_knife(c);
        shadow = Interval{k.x_b1, k.x_b2};
        res.summary["obstacle"] = {{"z_b", k.z_b}, {"x_b1", k.x_b1}, {"x_b2", std::isfinite(k.x_b2) ? json(k.x_b2) : json(nullptr)}};
    } else if (c.obstacle.kind == ObstacleConfig::Kind::soft) {
        throw config_error("config error at 'obstacle.type': knife needs a knife obstacle or none");
    }
    std::vector<std::vector<double>> rows;
    const double e_obs = shadow ? obstructed_energy_fraction(ap, *shadow) : 0.0;
    const double ea = knife_received(c, c.beam, ap, z_r, win, o.threads);
    rows.push_back({0.0, e_obs, 0.0, ea, path_loss_db(ea)});
    res.summary["airy"] = {{"e_obs", e_obs}, {"energy", ea}, {"loss_db", path_loss_db(ea)}};
    if (c.baseline) {
        BeamConfig g = *c.baseline;
        double center = g.gaussian.center;
        if (shadow && e_obs > 0.0)
            center = gaussian_center_for_obstruction(g.gaussian, c.aperture.x1, c.aperture.x2, c.aperture.dx, *shadow, e_obs);
        g.gaussian.center = center;
        const SampledAperture gap = beam_aperture(g, c.aperture);
        const double eg_obs = shadow ? obstructed_energy_fraction(gap, *shadow) : 0.0;
        const double eg = knife_received(c, g, gap, z_r, win, o.threads);
        rows.push_back({1.0, eg_obs, center, eg, path_loss_db(eg)});
        res.summary["gaussian"] = {{"e_obs", eg_obs}, {"center", center}, {"energy", eg}, {"loss_db", path_loss_db(eg)}};
        res.summary["airy_advantage_db"] = path_loss_db(eg) - path_loss_db(ea);
    }
    write_table_csv(join(o.out_dir, "knife.csv"), {"beam", "e_obs", "center", "energy", "loss_db"}, rows);
    res.files.push_back(join(o.out_dir, "knife.csv"));
    if (c.grid_z && c.grid_x) {
        PropagateOptions po;
        po.threads = o.threads;
        const FieldGrid g = scenario_field(c, c.beam, &ap, need_grid(c, "knife"), po);
        write_grid_csv(g, join(o.out_dir, "field.csv"));
        res.files.push_back(join(o.out_dir, "field.csv"));
        if (o.preview) {
            write_pgm(intensity_grid(g), join(o.out_dir, "field.pgm"));
            res.files.push_back(join(o.out_dir, "field.pgm"));
        }
    }
    return res;
}

inline RunResult run_softheal(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    const AiryBeamSpec& s = need_airy(c, "softheal");
    if (c.obstacle.kind != ObstacleConfig::Kind::soft)
        throw config_error("config error at 'obstacle': softheal needs a soft obstacle");
    const SoftObstacleSpec so = c.obstacle.soft;
    std::vector<double> zs;
    if (c.similarity.z) zs = c.similarity.z->values();
    else if (c.grid_z) zs = c.grid_z->values();
    else throw config_error("config error at 'similarity.z': softheal needs a z range");
    const double eps = c.similarity.epsilon;
    auto ud = [&](double z, double x) { return soft_diffracted_field(s, so, z, x); };
    auto u = [&](double z, double x) { return airy_field_closed(s, z, x); };
    auto caustic = [&](double z) { return airy_caustic_x(s, z); };
    std::vector<std::vector<double>> rows(zs.size());
    parallel_for(zs.size(), o.threads, [&](std::size_t i) {
        const double z = zs[i];
        if (!(z - eps / 2.0 > so.z_b)) throw config_error("config error at 'similarity.z': windows must start beyond z_b");
        const double xc = caustic(z);
        const double rho = similarity_index(ud, u, caustic, z, eps, c.similarity.path, c.similarity.measure);
        const double pu = std::abs(soft_perturbation_closed(s, so, z, xc)) / std::abs(airy_envelope_closed(s, z, xc));
        rows[i] = {z, xc, rho, pu, std::norm(ud(z, xc)), std::norm(u(z, xc))};
    });
    write_table_csv(join(o.out_dir, "similarity.csv"), {"z_c", "x_c", "rho", "p_over_u", "intensity_d", "intensity"}, rows);
    res.files.push_back(join(o.out_dir, "similarity.csv"));

    const double lo = c.aperture.present ? c.aperture.x1 : -30.0, hi = c.aperture.present ? c.aperture.x2 : 10.0;
    std::vector<std::vector<double>> trows;
    for (double xi : linspace(lo, hi, ::airybeam::detail::sample_count(lo, hi, 1.0 / 16.0))) {
        const double t = soft_transmittance(so, xi), i0 = std::norm(airy_envelope_closed(s, so.z_b, xi));
        trows.push_back({xi, t, i0, i0 * t * t});
    }
    write_table_csv(join(o.out_dir, "transmittance.csv"), {"x", "tau", "intensity_incident", "intensity_screened"}, trows);
    res.files.push_back(join(o.out_dir, "transmittance.csv"));

    double onset = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = rows.size(); i-- > 0;) {
        if (rows[i][2] < 0.95) break;
        onset = rows[i][0];
    }
    res.summary["healing_onset_z"] = std::isfinite(onset) ? json(onset) : json(nullptr);
    if (o.oracle) {
        const double z1 = so.z_b + 6.0, z2 = so.z_b + 40.0;
        const FieldGrid patch(linspace(z1, z2, 12), linspace(caustic(z1) - 6.0, caustic(z2) + 2.0, 24));
        const FieldGrid q = soft_diffracted_quadrature(s, so, patch, {-300.0, 20.0}, 0.0, o.threads);
        FieldGrid cl(patch.z_values, patch.x_values);
        ::airybeam::detail::fill_grid(cl, o.threads, ud);
        res.summary["oracle"] = {{"reference", "fresnel quadrature of the screened beam"},
                                 {"relative_l2", relative_l2(cl.field, q.field)}};
        say(o, "oracle: relative L2 = " + fmt(relative_l2(cl.field, q.field)));
    }
    return res;
}

inline RunResult run_pulse(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    const AiryBeamSpec& s = need_airy(c, "pulse");
    if (!c.pulse.present) throw config_error("config error at 'pulse': pulse needs a pulse block");
    const FieldGrid coords = need_grid(c, "pulse");
    const double b = c.pulse.bandwidth_ratio;
    const PulseSpec pulse =
        (c.beam.normalize && s.alpha_a > 0.0) ? normalized_pulse(s, b) : PulseSpec{b, std::sqrt(b) * s.u_a};
    RealGrid poly, mono;
    PropagateOptions po;
    po.threads = o.threads;
    if (c.propagator == Propagator::closed_form) {
        poly = polychromatic_intensity(s, pulse, coords, c.pulse.nodes, o.threads);
        mono = intensity_grid(airy_grid_closed(s, coords, o.threads));
    } else if (c.propagator == Propagator::rs) {
        AiryBeamSpec unit = s;
        unit.u_a = 1.0;
        const SampledAperture ap = make_airy_aperture(unit, c.aperture.x1, c.aperture.x2, c.aperture.dx);
        poly = polychromatic_intensity_rs(ap, pulse, coords, c.pulse.nodes, o.threads);
        mono = intensity_grid(propagate_rs(beam_aperture(c.beam, c.aperture), coords, po));
    } else {
        throw config_error("config error at 'propagator': pulse supports closed_form and rs");
    }
    // monochromatic reference carries the same energy as the pulse
    const double scale = pulse.u_bar_a * pulse.u_bar_a / (b * s.u_a * s.u_a);
    std::vector<std::vector<double>> rows;
    for (std::size_t iz = 0; iz < coords.nz(); ++iz)
        for (std::size_t ix = 0; ix < coords.nx(); ++ix)
            rows.push_back({coords.z_values[iz], coords.x_values[ix], poly.at(iz, ix), mono.at(iz, ix) * scale});
    write_table_csv(join(o.out_dir, "pulse.csv"), {"z", "x", "intensity_pulse", "intensity_mono"}, rows);
    res.files.push_back(join(o.out_dir, "pulse.csv"));
    if (o.preview) {
        write_pgm(poly, join(o.out_dir, "pulse.pgm"));
        res.files.push_back(join(o.out_dir, "pulse.pgm"));
    }
    double wp = 0.0, wm = 0.0;
    int n = 0;
    for (std::size_t iz = 0; iz < coords.nz(); ++iz) {
        auto slice = [&](const RealGrid& g) {
            return std::vector<double>(g.values.begin() + long(iz * g.nx()), g.values.begin() + long((iz + 1) * g.nx()));
        };
        try {
            const double a = main_lobe_fwhm(coords.x_values, slice(poly)), m = main_lobe_fwhm(coords.x_values, slice(mono));
            wp += a;
            wm += m;
            ++n;
        } catch (const domain_error&) {
        }
    }
    res.summary["rows_with_lobe"] = n;
    if (n) {
        res.summary["main_lobe_fwhm_pulse"] = wp / n;
        res.summary["main_lobe_fwhm_mono"] = wm / n;
    }
    return res;
}

// ---- validate -----------------------------------------------------------------

struct Check {
    std::string name;
    bool pass;
    double value;
};

inline double paraxial_residual(const PointField& env, double z, double x, double k) {
    const double h = 1e-3;
    const cplx uxx = (env(z, x + h) - 2.0 * env(z, x) + env(z, x - h)) / (h * h);
    const cplx uz = (env(z + h, x) - env(z - h, x)) / (2.0 * h);
    const double scale = std::abs(uxx) + std::abs(2.0 * k * uz) + 1e-300;
    return std::abs(uxx - cplx(0.0, 2.0 * k) * uz) / scale;
}

inline RunResult run_validate(const ScenarioConfig& c, const RunOptions& o) {
    RunResult res;
    std::vector<Check> checks;
    auto add = [&](std::string n, bool ok, double v) { checks.push_back({std::move(n), ok, v}); };

    const double a1 = airy_zero(1);
    add("airy first zero", std::abs(a1 + 2.338107410459767) < 1e-9, a1);
    double ode = 0.0;
    for (cplx z : {cplx(-7.3, 0.4), cplx(2.1, -3.3), cplx(6.0, 6.5), cplx(-0.4, 9.7), cplx(11.0, -1.0)}) {
        const double h = 1e-4;
        const cplx d2 = (airy_ai_prime(z + h) - airy_ai_prime(z - h)) / (2.0 * h);
        const cplx rhs = z * airy_ai(z);
        ode = std::max(ode, std::abs(d2 - rhs) / (std::abs(rhs) + 1e-300));
    }
    add("airy equation residual", ode < 1e-6, ode);
    double wr = 0.0;
    for (double u : {0.5, 3.0, 16.9, 17.1, 40.0}) {
        const cplx h0 = hankel2(0, u), h1 = hankel2(1, u);
        const double jy = h1.real() * -h0.imag() - h0.real() * -h1.imag();
        wr = std::max(wr, std::abs(jy - 2.0 / (pi * u)) * pi * u / 2.0);
    }
    add("hankel wronskian", wr < 1e-10, wr);

    const BeamConfig& b = c.beam;
    if (is_airy(b) && b.airy.alpha_a > 0.0) {
        const AiryBeamSpec& s = b.airy;
        const double lo = -std::min(40.0 / s.alpha_a, 2e4), hi = 12.0 / s.gamma_a;
        const int panels = int(std::ceil((hi - lo) * airy_local_wavenumber(s, lo, hi) / pi)) + 8;
        const double num = integrate_gl([&](double x) { return std::norm(airy_aperture_value(s, x)); }, lo, hi, panels, 16);
        const double ref = airy_energy_modulated_closed(s);
        add("aperture energy, closed vs quadrature", std::abs(num / ref - 1.0) < 1e-6, num / ref - 1.0);
    } else if (!is_airy(b)) {
        const GaussianBeamSpec& g = b.gaussian;
        const double num = integrate_gl([&](double x) { return std::norm(gaussian_aperture_value(g, x)); },
                                        g.center - 10.0 * g.w_a, g.center + 10.0 * g.w_a, 40, 16);
        const double ref = g.v_a * g.v_a * g.w_a * std::sqrt(pi / 2.0);
        add("aperture energy, closed vs quadrature", std::abs(num / ref - 1.0) < 1e-10, num / ref - 1.0);
    }

    PointField env;
    if (is_airy(b)) env = [s = b.airy](double z, double x) { return airy_envelope_closed(s, z, x); };
    else env = [s = b.gaussian](double z, double x) { return gaussian_envelope_closed(s, z, x); };
    double pr = 0.0;
    for (double z : {5.0, 20.0, 60.0})
        for (double x : {-2.0, 0.5, 3.0}) {
            const double xx = is_airy(b) ? airy_caustic_x(b.airy, z) + x : x;
            pr = std::max(pr, paraxial_residual(env, z, xx, k0));
        }
    add("closed form solves the paraxial equation", pr < 1e-5, pr);

    if (is_airy(b)) {
        const AiryBeamSpec& s = b.airy;
        const std::vector<double> zs = c.grid_z ? c.grid_z->values() : linspace(10.0, 100.0, 10);
        const PhaseProfile p = airy_phase_profile();
        const CausticCurve cc = caustic_paraxial(p, s.gamma_a, s.nu_a, zs);
        double r = 0.0, d = 0.0;
        AiryBeamSpec plain = s;
        plain.mirrored = false;
        for (const auto& q : cc.points) {
            r = std::max(r, caustic_residual_paraxial(p, s.gamma_a, s.nu_a, q));
            d = std::max(d, std::abs(q.x - airy_caustic_x(plain, q.z)) / (1.0 + std::abs(q.x)));
        }
        add("caustic residual", r < 1e-8, r);
        add("caustic vs closed parabola", d < 1e-6, d);
    }

    {
        const SampledAperture ap = make_gaussian_aperture(normalized(GaussianBeamSpec{1.5, 0.0, 1.0, 0.0}), -8.0, 8.0, 1.0 / 32.0);
        double e = 0.0;
        for (double x : {-1.0, 0.0, 0.7}) {
            const cplx r = rs_point(ap, 200.0, x), f = fresnel_point(ap, 200.0, x);
            e = std::max(e, std::abs(r - f) / std::abs(f));
        }
        add("rayleigh-sommerfeld vs fresnel, paraxial regime", e < 5e-3, e);
    }

    if (c.obstacle.kind == ObstacleConfig::Kind::soft && is_airy(b)) {
        const AiryBeamSpec& s = b.airy;
        const SoftObstacleSpec so = c.obstacle.soft;
        auto u = [&](double z, double x) { return airy_field_closed(s, z, x); };
        auto cx = [&](double z) { return airy_caustic_x(s, z); };
        const double zc = so.z_b + 20.0;
        const double self = similarity_index(u, u, cx, zc, 12.0);
        add("similarity of a field with itself", std::abs(self - 1.0) < 1e-12, self);
        auto ud = [&](double z, double x) { return soft_diffracted_field(s, so, z, x); };
        const double rho = similarity_index(ud, u, cx, zc, 12.0);
        add("similarity within [0, 1]", rho >= 0.0 && rho <= 1.0, rho);
    }

    int failed = 0;
    for (const auto& ch : checks) {
        say(o, std::string(ch.pass ? "PASS " : "FAIL ") + ch.name + " (" + fmt(ch.value) + ")");
        failed += !ch.pass;
        res.summary["checks"].push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}});
    }
    say(o, "validate: " + std::to_string(checks.size() - failed) + " passed, " + std::to_string(failed) + " failed");
    res.failures = failed;
    return res;
}

} // namespace detail

/// Runs one command; writes its files and a JSON sidecar into opts.out_dir.
inline RunResult run_scenario(const ScenarioConfig& c, const std::string& command, const RunOptions& opts) {
    RunResult r;
    if (command == "field") r = detail::run_field(c, opts);
    else if (command == "caustic") r = detail::run_caustic(c, opts);
    else if (command == "pathloss") r = detail::run_pathloss(c, opts);
    else if (command == "knife") r = detail::run_knife(c, opts);
    else if (command == "softheal") r = detail::run_softheal(c, opts);
    else if (command == "pulse") r = detail::run_pulse(c, opts);
    else if (command == "validate") r = detail::run_validate(c, opts);
    else throw config_error("unknown command '" + command + "'");
    json side{{"command", command}, {"config", serialize_config(c)}, {"summary", r.summary}};
    const std::string path = detail::join(opts.out_dir, command + ".json");
    write_json(path, side);
    r.files.push_back(path);
    return r;
}

} // namespace airybeam::cli
