#pragma once

#include "../aperture.hpp"
#include "../core.hpp"
#include "../obstacles.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace airybeam::cli {

using json = nlohmann::ordered_json;

/// Malformed or inconsistent scenario file (exit code 2).
struct config_error : error {
    using error::error;
};

/// File system failure (exit code 4).
struct io_error : error {
    using error::error;
};

struct Range {
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 1;
    std::vector<double> values() const { return linspace(min, max, n); }
};

struct BeamConfig {
    enum class Kind { airy, gaussian };
    Kind kind = Kind::airy;
    AiryBeamSpec airy;
    GaussianBeamSpec gaussian;
    bool normalize = false;
};

struct ApertureConfig {
    bool present = false;
    double x1 = 0.0;
    double x2 = 0.0;
    double dx = 1.0 / 16.0;
};

struct ObstacleConfig {
    enum class Kind { none, knife, soft };
    Kind kind = Kind::none;
    KnifeEdgeSpec knife;
    std::optional<double> clearance;  // resolves x_b1 from the caustic when set
    SoftObstacleSpec soft;
    std::optional<Range> column;      // knife: extent of the incident column
};

struct ReceiverConfig {
    bool present = false;
    std::vector<double> widths;
    std::optional<Range> z;             // on-caustic sweep
    std::optional<double> z_r, x_r;     // explicit placement
};

struct PulseConfig {
    bool present = false;
    double bandwidth_ratio = 0.1;
    int nodes = 33;
};

struct SimilarityConfig {
    double epsilon = 12.0;
    std::optional<Range> z;
    SimilarityPath path = SimilarityPath::fixed_x;
    SimilarityMeasure measure = SimilarityMeasure::modulus;
};

enum class Propagator { closed_form, rs, fresnel, far_field };

struct ScenarioConfig {
    std::string name = "scenario";
    std::string command;
    BeamConfig beam;
    std::optional<BeamConfig> baseline;  // Gaussian reference for `knife`
    ApertureConfig aperture;
    std::optional<Range> grid_z, grid_x;
    Propagator propagator = Propagator::closed_form;
    ObstacleConfig obstacle;
    ReceiverConfig receiver;
    PulseConfig pulse;
    std::optional<double> x_eff;
    int n = 3;
    SimilarityConfig similarity;
    std::string output_dir = "out";
};

inline const char* to_string(Propagator p) {
    switch (p) {
    case Propagator::closed_form: return "closed_form";
    case Propagator::rs: return "rs";
    case Propagator::fresnel: return "fresnel";
    case Propagator::far_field: return "far_field";
    }
    return "?";
}

namespace detail {

// Reads one JSON object, tracking which keys were used so that leftovers can
// be reported as typos. Lengths are converted to wavelength units when the
// scenario gives a carrier frequency (inputs then in millimetres).
class Reader {
public:
    Reader(const json& j, std::string path, double mm_per_lambda)
        : j_(j), path_(std::move(path)), mm_(mm_per_lambda) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    std::string key_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    [[noreturn]] void fail(const std::string& k, const std::string& what) const {
        const std::string p = k.empty() ? (path_.empty() ? "<root>" : path_) : key_path(k);
        throw config_error("config error at '" + p + "': " + what);
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        used_.insert(k);
        return j_.at(k);
    }

    double number(const std::string& k) {
        if (!has(k)) fail(k, "is required");
        const json& v = raw(k);
        if (!v.is_number()) fail(k, "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(k, "must be finite");
        return d;
    }
    double number(const std::string& k, double def) { return has(k) ? number(k) : def; }
    double length(const std::string& k) { return number(k) / mm_; }
    double length(const std::string& k, double def) { return has(k) ? length(k) : def; }
    double inv_length(const std::string& k) { return number(k) * mm_; }

    int integer(const std::string& k, int def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_number_integer()) fail(k, "must be an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& k, bool def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_boolean()) fail(k, "must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& k, const std::string& def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_string()) fail(k, "must be a string");
        return v.get<std::string>();
    }

    Reader child(const std::string& k) { return Reader(raw(k), key_path(k), mm_); }

    Range range(const std::string& k) {
        Reader r = child(k);
        Range out{r.length("min"), r.length("max"), std::size_t(r.integer("n", 0))};
        if (r.has("n") == false) r.fail("n", "is required");
        if (out.n < 1) r.fail("n", "must be >= 1");
        if (out.n > 1 && !(out.max > out.min)) r.fail("max", "must exceed min");
        r.finish();
        return out;
    }

    void positive(const std::string& k, double v) const {
        if (!(v > 0.0)) fail(k, "must be > 0");
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown key");
    }

    double mm() const { return mm_; }

private:
    const json& j_;
    std::string path_;
    double mm_;
    std::set<std::string> used_;
};

inline BeamConfig parse_beam(Reader r) {
    BeamConfig b;
    const std::string type = r.string("type", "");
    auto one_of = [&](const std::string& plain, const std::string& rel, double def) {
        if (r.has(plain) && r.has(rel)) r.fail(rel, "give either '" + plain + "' or '" + rel + "', not both");
        if (r.has(rel)) return r.number(rel) * k0;
        if (r.has(plain)) return r.inv_length(plain);
        return def;
    };
    if (type == "airy") {
        b.kind = BeamConfig::Kind::airy;
        b.airy.gamma_a = one_of("gamma", "gamma_over_k0", std::nan(""));
        if (std::isnan(b.airy.gamma_a)) r.fail("gamma", "is required (or gamma_over_k0)");
        r.positive(r.has("gamma") ? "gamma" : "gamma_over_k0", b.airy.gamma_a);
        b.airy.alpha_a = r.has("alpha") ? r.inv_length("alpha") : 0.0;
        if (b.airy.alpha_a < 0.0) r.fail("alpha", "must be >= 0");
        b.airy.nu_a = one_of("nu", "nu_over_k0", 0.0);
        b.airy.u_a = r.number("amplitude", 1.0);
        r.positive("amplitude", b.airy.u_a);
        b.airy.mirrored = r.boolean("mirrored", false);
        b.normalize = r.boolean("normalize", b.airy.alpha_a > 0.0);
        if (b.normalize) {
            if (!(b.airy.alpha_a > 0.0)) r.fail("normalize", "needs alpha > 0 (infinite energy otherwise)");
            b.airy = normalized(b.airy);
        }
    } else if (type == "gaussian") {
        b.kind = BeamConfig::Kind::gaussian;
        b.gaussian.w_a = r.length("w");
        r.positive("w", b.gaussian.w_a);
        b.gaussian.mu_a = one_of("mu", "mu_over_k0", 0.0);
        b.gaussian.center = r.length("center", 0.0);
        b.gaussian.v_a = r.number("amplitude", 1.0);
        r.positive("amplitude", b.gaussian.v_a);
        b.normalize = r.boolean("normalize", true);
        if (b.normalize) b.gaussian = normalized(b.gaussian);
    } else {
        r.fail("type", "must be \"airy\" or \"gaussian\"");
    }
    r.finish();
    return b;
}

} // namespace detail

inline ScenarioConfig parse_config_json(const json& root) {
    using detail::Reader;
    if (!root.is_object()) throw config_error("config error at '<root>': must be an object");
    double mm = 1.0;
    if (root.contains("carrier_ghz")) {
        const json& f = root.at("carrier_ghz");
        if (!f.is_number() || !(f.get<double>() > 0.0))
            throw config_error("config error at 'carrier_ghz': must be a positive number");
        mm = 299.792458 / f.get<double>();  // wavelength in mm
    }
    Reader r(root, "", mm);
    if (r.has("carrier_ghz")) r.raw("carrier_ghz");
    ScenarioConfig c;
    c.name = r.string("name", c.name);
    c.command = r.string("command", "");
    c.output_dir = r.string("output_dir", c.output_dir);
    if (!r.has("beam")) r.fail("beam", "is required");
    c.beam = detail::parse_beam(r.child("beam"));
    if (r.has("baseline")) {
        c.baseline = detail::parse_beam(r.child("baseline"));
        if (c.baseline->kind != BeamConfig::Kind::gaussian) r.fail("baseline", "must be a gaussian beam");
    }
    if (r.has("aperture")) {
        Reader a = r.child("aperture");
        c.aperture.present = true;
        c.aperture.x1 = a.length("x1");
        c.aperture.x2 = a.length("x2");
        if (!(c.aperture.x2 > c.aperture.x1)) a.fail("x2", "must exceed x1");
        c.aperture.dx = a.length("dx", 1.0 / 16.0);
        a.positive("dx", c.aperture.dx);
        a.finish();
    }
    if (r.has("grid")) {
        Reader g = r.child("grid");
        c.grid_z = g.range("z");
        c.grid_x = g.range("x");
        if (!(c.grid_z->min > 0.0)) g.fail("z", "min must be > 0");
        g.finish();
    }
    const std::string prop = r.string("propagator", "closed_form");
    if (prop == "closed_form") c.propagator = Propagator::closed_form;
    else if (prop == "rs") c.propagator = Propagator::rs;
    else if (prop == "fresnel") c.propagator = Propagator::fresnel;
    else if (prop == "far_field") c.propagator = Propagator::far_field;
    else r.fail("propagator", "must be one of closed_form, rs, fresnel, far_field");
    if (c.propagator != Propagator::closed_form && !c.aperture.present)
        r.fail("propagator", "numeric propagation needs an 'aperture' block");

    if (r.has("obstacle")) {
        Reader o = r.child("obstacle");
        const std::string type = o.string("type", "");
        if (type == "knife") {
            c.obstacle.kind = ObstacleConfig::Kind::knife;
            c.obstacle.knife.z_b = o.length("z_b");
            o.positive("z_b", c.obstacle.knife.z_b);
            if (o.has("clearance") == o.has("x_b1")) o.fail("x_b1", "give exactly one of 'x_b1' or 'clearance'");
            if (o.has("clearance")) c.obstacle.clearance = o.length("clearance");
            else c.obstacle.knife.x_b1 = o.length("x_b1");
            if (o.has("x_b2")) c.obstacle.knife.x_b2 = o.length("x_b2");
            if (o.has("column")) c.obstacle.column = o.range("column");
        } else if (type == "soft") {
            c.obstacle.kind = ObstacleConfig::Kind::soft;
            c.obstacle.soft.z_b = o.length("z_b");
            o.positive("z_b", c.obstacle.soft.z_b);
            c.obstacle.soft.mu_obs = o.length("mu_obs");
            c.obstacle.soft.sigma_obs = o.length("sigma_obs");
            o.positive("sigma_obs", c.obstacle.soft.sigma_obs);
        } else {
            o.fail("type", "must be \"knife\" or \"soft\"");
        }
        o.finish();
    }
    if (r.has("receiver")) {
        Reader rc = r.child("receiver");
        c.receiver.present = true;
        if (rc.has("widths")) {
            const json& w = rc.raw("widths");
            if (!w.is_array() || w.empty()) rc.fail("widths", "must be a non-empty array");
            for (const auto& v : w) {
                if (!v.is_number() || !(v.get<double>() > 0.0)) rc.fail("widths", "entries must be positive numbers");
                c.receiver.widths.push_back(v.get<double>() / mm);
            }
        } else {
            const double w = rc.length("width");
            rc.positive("width", w);
            c.receiver.widths.push_back(w);
        }
        if (rc.has("z")) c.receiver.z = rc.range("z");
        if (rc.has("z_r") || rc.has("x_r")) {
            c.receiver.z_r = rc.length("z_r");
            c.receiver.x_r = rc.length("x_r");
            rc.positive("z_r", *c.receiver.z_r);
        }
        rc.finish();
    }
    if (r.has("pulse")) {
        Reader p = r.child("pulse");
        c.pulse.present = true;
        c.pulse.bandwidth_ratio = p.number("bandwidth_ratio");
        if (!(c.pulse.bandwidth_ratio > 0.0 && c.pulse.bandwidth_ratio < 2.0))
            p.fail("bandwidth_ratio", "must be in (0, 2)");
        c.pulse.nodes = p.integer("nodes", 33);
        if (c.pulse.nodes < 1) p.fail("nodes", "must be >= 1");
        p.finish();
    }
    if (r.has("range")) {
        Reader g = r.child("range");
        if (g.has("x_eff")) {
            c.x_eff = g.length("x_eff");
            g.positive("x_eff", *c.x_eff);
        }
        c.n = g.integer("n", 3);
        if (c.n < 1) g.fail("n", "must be >= 1");
        g.finish();
    }
    if (r.has("similarity")) {
        Reader s = r.child("similarity");
        c.similarity.epsilon = s.length("epsilon", 12.0);
        s.positive("epsilon", c.similarity.epsilon);
        if (s.has("z")) c.similarity.z = s.range("z");
        const std::string path = s.string("path", "fixed_x");
        if (path == "fixed_x") c.similarity.path = SimilarityPath::fixed_x;
        else if (path == "along_caustic") c.similarity.path = SimilarityPath::along_caustic;
        else s.fail("path", "must be fixed_x or along_caustic");
        const std::string m = s.string("measure", "modulus");
        if (m == "modulus") c.similarity.measure = SimilarityMeasure::modulus;
        else if (m == "real_part") c.similarity.measure = SimilarityMeasure::real_part;
        else s.fail("measure", "must be modulus or real_part");
        s.finish();
    }
    if (r.has("sweep")) r.raw("sweep");  // expanded by the caller, see expand_sweep
    r.finish();
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw config_error("config parse error in '" + path + "': " + e.what());
    }
}

inline ScenarioConfig parse_config(const std::string& path) { return parse_config_json(read_json_file(path)); }

namespace detail {

inline json range_json(const Range& r) { return json{{"min", r.min}, {"max", r.max}, {"n", r.n}}; }

inline json beam_json(const BeamConfig& b) {
    if (b.kind == BeamConfig::Kind::airy)
        return json{{"type", "airy"},         {"gamma", b.airy.gamma_a},  {"alpha", b.airy.alpha_a},
                    {"nu", b.airy.nu_a},      {"amplitude", b.airy.u_a},  {"mirrored", b.airy.mirrored},
                    {"normalize", b.normalize}};
    return json{{"type", "gaussian"}, {"w", b.gaussian.w_a},          {"mu", b.gaussian.mu_a},
                {"center", b.gaussian.center}, {"amplitude", b.gaussian.v_a}, {"normalize", b.normalize}};
}

} // namespace detail

/// Canonical form (wavelength units, every default spelled out). Parsing the
/// result gives back the same configuration.
inline json serialize_config(const ScenarioConfig& c) {
    using detail::range_json;
    json j;
    j["name"] = c.name;
    if (!c.command.empty()) j["command"] = c.command;
    j["output_dir"] = c.output_dir;
    j["beam"] = detail::beam_json(c.beam);
    if (c.baseline) j["baseline"] = detail::beam_json(*c.baseline);
    if (c.aperture.present) j["aperture"] = {{"x1", c.aperture.x1}, {"x2", c.aperture.x2}, {"dx", c.aperture.dx}};
    if (c.grid_z && c.grid_x) j["grid"] = {{"z", range_json(*c.grid_z)}, {"x", range_json(*c.grid_x)}};
    j["propagator"] = to_string(c.propagator);
    if (c.obstacle.kind == ObstacleConfig::Kind::knife) {
        json o{{"type", "knife"}, {"z_b", c.obstacle.knife.z_b}};
        if (c.obstacle.clearance) o["clearance"] = *c.obstacle.clearance;
        else o["x_b1"] = c.obstacle.knife.x_b1;
        if (std::isfinite(c.obstacle.knife.x_b2)) o["x_b2"] = c.obstacle.knife.x_b2;
        if (c.obstacle.column) o["column"] = range_json(*c.obstacle.column);
        j["obstacle"] = o;
    } else if (c.obstacle.kind == ObstacleConfig::Kind::soft) {
        j["obstacle"] = {{"type", "soft"},
                         {"z_b", c.obstacle.soft.z_b},
                         {"mu_obs", c.obstacle.soft.mu_obs},
                         {"sigma_obs", c.obstacle.soft.sigma_obs}};
    }
    if (c.receiver.present) {
        json r{{"widths", c.receiver.widths}};
        if (c.receiver.z) r["z"] = range_json(*c.receiver.z);
        if (c.receiver.z_r) {
            r["z_r"] = *c.receiver.z_r;
            r["x_r"] = *c.receiver.x_r;
        }
        j["receiver"] = r;
    }
    if (c.pulse.present) j["pulse"] = {{"bandwidth_ratio", c.pulse.bandwidth_ratio}, {"nodes", c.pulse.nodes}};
    json rg{{"n", c.n}};
    if (c.x_eff) rg["x_eff"] = *c.x_eff;
    j["range"] = rg;
    json s{{"epsilon", c.similarity.epsilon},
           {"path", c.similarity.path == SimilarityPath::fixed_x ? "fixed_x" : "along_caustic"},
           {"measure", c.similarity.measure == SimilarityMeasure::modulus ? "modulus" : "real_part"}};
    if (c.similarity.z) s["z"] = range_json(*c.similarity.z);
    j["similarity"] = s;
    return j;
}

struct SweepCase {
    std::string label;
    json config;
};

/// A top-level "sweep": {"key": "beam.alpha", "values": [...]} produces one
/// configuration per value; without it the input is returned as is.
inline std::vector<SweepCase> expand_sweep(const json& root) {
    if (!root.is_object() || !root.contains("sweep")) return {{"", root}};
    const json& sw = root.at("sweep");
    if (!sw.is_object() || !sw.contains("key") || !sw.contains("values") || !sw.at("key").is_string() ||
        !sw.at("values").is_array() || sw.at("values").empty() || sw.size() != 2)
        throw config_error("config error at 'sweep': needs exactly 'key' (string) and 'values' (non-empty array)");
    const std::string key = sw.at("key").get<std::string>();
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
    std::vector<SweepCase> out;
    for (const auto& v : sw.at("values")) {
        json c = root;
        c.erase("sweep");
        json* node = &c;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
                throw config_error("config error at 'sweep.key': '" + key + "' does not name a config entry");
            node = &(*node)[parts[i]];
        }
        (*node)[parts.back()] = v;
        out.push_back({parts.back() + "=" + v.dump(), c});
    }
    return out;
}

} // namespace airybeam::cli
