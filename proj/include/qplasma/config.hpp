#pragma once

// Run configuration: a JSON document
//
//   { "command": "<name>", "parameters": { ... } }
//
// parsed strictly (unknown keys are errors) into typed, validated parameter
// blocks. Every block can be written back as JSON with defaults filled in, so
// outputs can carry the fully resolved parameter set.

#include "qplasma/dispersion_numeric.hpp"
#include "qplasma/stability_map.hpp"
#include "qplasma/wigner_sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qplasma {

using json = nlohmann::json;

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
    /// 1-based line of a syntax error, 0 when not applicable.
    int line() const noexcept { return line_; }

private:
    int line_;
};

enum class Command { dispersion, map, bands, simulate, sweep, verify };

inline const char* to_string(Command c) {
    switch (c) {
    case Command::dispersion: return "dispersion";
    case Command::map: return "map";
    case Command::bands: return "bands";
    case Command::simulate: return "simulate";
    case Command::sweep: return "sweep";
    case Command::verify: return "verify";
    }
    return "?";
}

inline Command parse_command(std::string_view name) {
    for (Command c : {Command::dispersion, Command::map, Command::bands, Command::simulate, Command::sweep,
                      Command::verify})
        if (name == to_string(c)) return c;
    throw ConfigError("unknown command '" + std::string(name) +
                      "' (expected dispersion, map, bands, simulate, sweep or verify)");
}

enum class OutputFormat { csv, json_lines };

inline OutputFormat parse_format(std::string_view s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json-lines") return OutputFormat::json_lines;
    throw ConfigError("unknown output format '" + std::string(s) + "' (expected csv or json-lines)");
}

enum class StreamModel { one_stream, two_stream };

struct DispersionParams {
    double K_bar = 0.5;
    double H = 0.0;
    double alpha = 0.0;
    StreamModel model = StreamModel::two_stream;
    DielectricMethod method = DielectricMethod::closed_form_pole;
};

struct MapParams {
    double alpha = 0.0;
    double K_min = 0.0; // exclusive
    double K_max = 4.0;
    int K_points = 400;
    double H_min = 0.0;
    double H_max = 4.0;
    int H_points = 400;
};

struct BandsParams {
    double H = 0.6;
    double alpha = 0.0;
    double K_min = 1e-6;
    double K_max = 4.0;
    int samples = 4000;
};

struct SimulateParams {
    SimConfig sim;
    bool check_reversibility = false;
};

struct SweepParams {
    StreamModel model = StreamModel::two_stream;
    PathPoint from{0.5, 0.0, 0.0};
    PathPoint to{0.5, 0.0, 1.0};
    int points = 51;
    std::optional<cdouble> init; // defaults to the closed-form root at `from`
    DielectricMethod method = DielectricMethod::closed_form_pole;
};

struct VerifyParams {
    bool simulate = true;
};

using Parameters =
    std::variant<DispersionParams, MapParams, BandsParams, SimulateParams, SweepParams, VerifyParams>;

struct RunSpec {
    Command command;
    Parameters parameters;
};

namespace detail {

inline int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Reads keys out of one JSON object and rejects any it did not consume.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string context) : obj_(obj), context_(std::move(context)) {
        if (!obj_.is_object()) throw ConfigError(context_ + ": expected an object");
    }

    double number(const char* key, double fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ConfigError(path(key) + ": expected a number, got " + v->dump());
        return v->get<double>();
    }

    int integer(const char* key, int fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer, got " + v->dump());
        return v->get<int>();
    }

    bool boolean(const char* key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false, got " + v->dump());
        return v->get<bool>();
    }

    std::string string(const char* key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(path(key) + ": expected a string, got " + v->dump());
        return v->get<std::string>();
    }

    const json* raw(const char* key) { return find(key); }

    std::string path(const char* key) const { return context_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!used_.count(key)) throw ConfigError(context_ + ": unknown key '" + key + "'");
    }

private:
    const json* find(const char* key) {
        used_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const json& obj_;
    std::string context_;
    std::set<std::string> used_;
};

inline StreamModel parse_model(const std::string& s) {
    if (s == "one_stream") return StreamModel::one_stream;
    if (s == "two_stream") return StreamModel::two_stream;
    throw ConfigError("parameters.background: expected one_stream or two_stream, got '" + s + "'");
}

inline const char* to_string(StreamModel m) { return m == StreamModel::one_stream ? "one_stream" : "two_stream"; }

inline DielectricMethod parse_method(const std::string& s) {
    if (s == "closed_form_pole" || s == "pole") return DielectricMethod::closed_form_pole;
    if (s == "quadrature_plemelj" || s == "quadrature") return DielectricMethod::quadrature_plemelj;
    throw ConfigError("parameters.method: expected closed_form_pole or quadrature_plemelj, got '" + s + "'");
}

inline Background model_background(StreamModel m, double alpha) {
    return m == StreamModel::one_stream ? Background::one_stream(alpha) : Background::symmetric_two_stream(alpha);
}

// Re-raises precondition failures as configuration errors that quote the
// offending value.
template <class F>
void validated(const json& params, F&& check) {
    try {
        check();
    } catch (const PreconditionError& e) {
        std::string value;
        auto it = params.find(e.parameter());
        if (it != params.end()) value = " (got " + it->dump() + ")";
        throw ConfigError("parameters." + e.parameter() + value + ": " + e.message());
    }
}

inline PathPoint parse_point(ObjectReader& r, const char* key, PathPoint fallback) {
    const json* v = r.raw(key);
    if (!v) return fallback;
    ObjectReader p(*v, r.path(key));
    PathPoint out{p.number("K_bar", fallback.K_bar), p.number("H", fallback.H), p.number("alpha", fallback.alpha)};
    p.finish();
    return out;
}

inline Background parse_sim_background(const json* v, const std::string& context) {
    if (!v) return Background::symmetric_two_stream(0.0);
    ObjectReader r(*v, context);
    const std::string type = r.string("type", "two_stream");
    Background bg = Background::symmetric_two_stream(0.0);
    if (type == "streams") {
        const json* list = r.raw("streams");
        if (!list || !list->is_array() || list->empty())
            throw ConfigError(context + ".streams: expected a non-empty array");
        std::vector<StreamSpectrum> streams;
        for (std::size_t i = 0; i < list->size(); ++i) {
            ObjectReader s((*list)[i], context + ".streams[" + std::to_string(i) + "]");
            const double density = s.number("density", 1.0);
            const double drift = s.number("drift", 1.0);
            const double width = s.number("width", 0.0);
            s.finish();
            try {
                streams.push_back(StreamSpectrum::from_width(density, drift, width));
            } catch (const PreconditionError& e) {
                throw ConfigError(context + ".streams[" + std::to_string(i) + "]." + e.what());
            }
        }
        r.finish();
        try {
            return Background(std::move(streams));
        } catch (const PreconditionError& e) {
            throw ConfigError(context + ": " + e.what());
        }
    }
    const double alpha = r.number("alpha", 0.0);
    r.finish();
    if (!(alpha >= 0)) throw ConfigError(context + ".alpha (got " + json(alpha).dump() + "): must be non-negative");
    return model_background(parse_model(type), alpha);
}

} // namespace detail

/// Parses and validates a configuration document.
inline RunSpec parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const int line = detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError("syntax error on line " + std::to_string(line) + ": " + e.what(), line);
    }
    detail::ObjectReader top(doc, "config");
    const json* cmd = top.raw("command");
    if (!cmd || !cmd->is_string()) throw ConfigError("config.command: required string is missing");
    const Command command = parse_command(cmd->get<std::string>());
    const json empty = json::object();
    const json* p = top.raw("parameters");
    const json& params = p ? *p : empty;
    top.finish();
    detail::ObjectReader r(params, "parameters");

    RunSpec spec{command, VerifyParams{}};
    switch (command) {
    case Command::dispersion: {
        DispersionParams d;
        d.K_bar = r.number("K_bar", d.K_bar);
        d.H = r.number("H", d.H);
        d.alpha = r.number("alpha", d.alpha);
        d.model = detail::parse_model(r.string("background", "two_stream"));
        d.method = detail::parse_method(r.string("method", "closed_form_pole"));
        r.finish();
        detail::validated(params, [&] {
            DimensionlessParams{d.K_bar, d.H, d.alpha, BranchSign::plus}.validate();
            require(d.method == DielectricMethod::closed_form_pole || d.alpha > 0, "alpha",
                    "quadrature needs Lorentzian streams (alpha > 0)");
        });
        spec.parameters = d;
        break;
    }
    case Command::map: {
        MapParams m;
        m.alpha = r.number("alpha", m.alpha);
        m.K_min = r.number("K_min", m.K_min);
        m.K_max = r.number("K_max", m.K_max);
        m.K_points = r.integer("K_points", m.K_points);
        m.H_min = r.number("H_min", m.H_min);
        m.H_max = r.number("H_max", m.H_max);
        m.H_points = r.integer("H_points", m.H_points);
        r.finish();
        detail::validated(params, [&] {
            require(m.alpha >= 0, "alpha", "must be non-negative");
            require(m.K_min >= 0, "K_min", "must be non-negative");
            require(m.K_max > m.K_min, "K_max", "must exceed K_min");
            require(m.K_points >= 2, "K_points", "need at least two points");
            require(m.H_min >= 0, "H_min", "must be non-negative");
            require(m.H_max > m.H_min, "H_max", "must exceed H_min");
            require(m.H_points >= 2, "H_points", "need at least two points");
        });
        spec.parameters = m;
        break;
    }
    case Command::bands: {
        BandsParams b;
        b.H = r.number("H", b.H);
        b.alpha = r.number("alpha", b.alpha);
        b.K_min = r.number("K_min", b.K_min);
        b.K_max = r.number("K_max", b.K_max);
        b.samples = r.integer("samples", b.samples);
        r.finish();
        detail::validated(params, [&] {
            require(b.H >= 0, "H", "must be non-negative");
            require(b.alpha >= 0, "alpha", "must be non-negative");
            require(b.K_min > 0, "K_min", "must be positive");
            require(b.K_max > b.K_min, "K_max", "must exceed K_min");
            require(b.samples >= 2, "samples", "need at least two samples");
        });
        spec.parameters = b;
        break;
    }
    case Command::simulate: {
        SimulateParams s;
        SimConfig& c = s.sim;
        c.K_bar = r.number("K_bar", c.K_bar);
        c.mode_number = r.integer("mode_number", c.mode_number);
        c.nx = r.integer("nx", c.nx);
        c.np = r.integer("np", c.np);
        c.q_max = r.number("q_max", c.q_max);
        c.dt = r.number("dt", c.dt);
        c.t_end = r.number("t_end", c.t_end);
        c.H = r.number("H", c.H);
        c.background = detail::parse_sim_background(r.raw("background"), "parameters.background");
        c.delta = r.number("delta", c.delta);
        c.sample_interval = r.number("sample_interval", c.sample_interval);
        c.widening_cells = r.number("widening_cells", c.widening_cells);
        c.widen_delta = r.boolean("widen_delta", c.widen_delta);
        c.extrapolate_width = r.boolean("extrapolate_width", c.extrapolate_width);
        c.mask = r.boolean("mask", c.mask);
        c.mask_fraction = r.number("mask_fraction", c.mask_fraction);
        c.fit_rate = r.boolean("fit_rate", c.fit_rate);
        c.linear_ceiling = r.number("linear_ceiling", c.linear_ceiling);
        c.slope_tolerance = r.number("slope_tolerance", c.slope_tolerance);
        c.slope_window = r.number("slope_window", c.slope_window);
        s.check_reversibility = r.boolean("check_reversibility", s.check_reversibility);
        r.finish();
        detail::validated(params, [&] { c.validate(); });
        spec.parameters = s;
        break;
    }
    case Command::sweep: {
        SweepParams w;
        w.model = detail::parse_model(r.string("background", "two_stream"));
        w.from = detail::parse_point(r, "from", w.from);
        w.to = detail::parse_point(r, "to", w.to);
        w.points = r.integer("points", w.points);
        w.method = detail::parse_method(r.string("method", "closed_form_pole"));
        if (const json* init = r.raw("init")) {
            detail::ObjectReader i(*init, "parameters.init");
            w.init = cdouble(i.number("re", 0.0), i.number("im", 0.0));
            i.finish();
        }
        r.finish();
        detail::validated(params, [&] {
            require(w.points >= 2, "points", "a path needs at least two points");
            for (const PathPoint& p : {w.from, w.to}) {
                require(p.K_bar > 0, "K_bar", "path K_bar must be positive");
                require(p.H >= 0, "H", "path H must be non-negative");
                require(p.alpha >= 0, "alpha", "path alpha must be non-negative");
            }
            require(w.method == DielectricMethod::closed_form_pole ||
                        std::min(w.from.alpha, w.to.alpha) > 0,
                    "alpha", "quadrature needs Lorentzian streams (alpha > 0) along the whole path");
        });
        spec.parameters = w;
        break;
    }
    case Command::verify: {
        VerifyParams v;
        v.simulate = r.boolean("simulate", v.simulate);
        r.finish();
        spec.parameters = v;
        break;
    }
    }
    return spec;
}

inline json background_json(const Background& bg) {
    json list = json::array();
    for (const auto& s : bg.streams())
        list.push_back({{"density", s.density()}, {"drift", s.drift()}, {"width", s.width()},
                        {"kind", to_string(s.kind())}});
    return list;
}

/// Fully resolved parameter set, defaults included.
inline json resolved_parameters(const RunSpec& spec) {
    struct Visitor {
        json operator()(const DispersionParams& d) const {
            return {{"K_bar", d.K_bar}, {"H", d.H}, {"alpha", d.alpha},
                    {"background", detail::to_string(d.model)}, {"method", to_string(d.method)}};
        }
        json operator()(const MapParams& m) const {
            return {{"alpha", m.alpha}, {"K_min", m.K_min}, {"K_max", m.K_max}, {"K_points", m.K_points},
                    {"H_min", m.H_min}, {"H_max", m.H_max}, {"H_points", m.H_points}};
        }
        json operator()(const BandsParams& b) const {
            return {{"H", b.H}, {"alpha", b.alpha}, {"K_min", b.K_min}, {"K_max", b.K_max},
                    {"samples", b.samples}};
        }
        json operator()(const SimulateParams& s) const {
            const SimConfig& c = s.sim;
            return {{"K_bar", c.K_bar},
                    {"mode_number", c.mode_number},
                    {"box_length", c.box_length()},
                    {"nx", c.nx},
                    {"np", c.np},
                    {"q_max", c.q_max},
                    {"dt", c.dt},
                    {"t_end", c.t_end},
                    {"H", c.H},
                    {"background", background_json(c.background)},
                    {"delta", c.delta},
                    {"sample_interval", c.sample_interval},
                    {"widening_cells", c.widening_cells},
                    {"widen_delta", c.widen_delta},
                    {"extrapolate_width", c.extrapolate_width},
                    {"mask", c.mask},
                    {"mask_fraction", c.mask_fraction},
                    {"fit_rate", c.fit_rate},
                    {"linear_ceiling", c.linear_ceiling},
                    {"slope_tolerance", c.slope_tolerance},
                    {"slope_window", c.slope_window},
                    {"check_reversibility", s.check_reversibility}};
        }
        json operator()(const SweepParams& w) const {
            auto pt = [](const PathPoint& p) { return json{{"K_bar", p.K_bar}, {"H", p.H}, {"alpha", p.alpha}}; };
            json j = {{"background", detail::to_string(w.model)}, {"from", pt(w.from)}, {"to", pt(w.to)},
                      {"points", w.points}, {"method", to_string(w.method)}};
            if (w.init) j["init"] = {{"re", w.init->real()}, {"im", w.init->imag()}};
            else j["init"] = "closed_form";
            return j;
        }
        json operator()(const VerifyParams& v) const { return {{"simulate", v.simulate}}; }
    };
    return {{"command", to_string(spec.command)}, {"parameters", std::visit(Visitor{}, spec.parameters)}};
}

} // namespace qplasma
