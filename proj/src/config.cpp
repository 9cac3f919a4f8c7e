#include "transq/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "transq/csv.hpp"

namespace transq {

namespace {

using nlohmann::json;

const json& need(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

double num(const json& obj, const char* key, const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

ArrivalDist parse_arrival(const json& a) {
    if (!a.is_object()) throw ConfigError("arrival", "expected an object");
    const json& k = need(a, "kind", "arrival");
    if (!k.is_string()) throw ConfigError("arrival.kind", "expected a string");
    const std::string kind = k.get<std::string>();
    try {
        if (kind == "uniform") return ArrivalDist::uniform(num(a, "t0", "arrival"), num(a, "t_end", "arrival"));
        if (kind == "triangular")
            return ArrivalDist::triangular(num(a, "t0", "arrival"), num(a, "mode", "arrival"),
                                           num(a, "t_end", "arrival"));
        if (kind == "piecewise_linear") {
            const json& kn = need(a, "knots", "arrival");
            if (!kn.is_array()) throw ConfigError("arrival.knots", "expected an array of [t, F] pairs");
            std::vector<std::pair<double, double>> knots;
            for (const json& p : kn) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError("arrival.knots", "expected an array of [t, F] pairs");
                knots.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            return ArrivalDist::piecewise_linear_cdf(std::move(knots));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError("arrival", e.what());
    }
    throw ConfigError("arrival.kind", "unknown distribution kind '" + kind + "'");
}

ServiceDist parse_service(const json& s) {
    if (!s.is_object()) throw ConfigError("service", "expected an object");
    const json& k = need(s, "kind", "service");
    if (!k.is_string()) throw ConfigError("service.kind", "expected a string");
    const std::string kind = k.get<std::string>();
    try {
        if (kind == "exponential") return ServiceDist::exponential(num(s, "mu", "service"));
        if (kind == "deterministic") return ServiceDist::deterministic(num(s, "mu", "service"));
        if (kind == "gamma") return ServiceDist::gamma(num(s, "mu", "service"), num(s, "sigma", "service"));
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError("service", e.what());
    }
    throw ConfigError("service.kind", "unknown distribution kind '" + kind + "'");
}

std::size_t positive_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(path, "expected a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

RunConfig from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
    RunConfig cfg;
    cfg.echo = doc.dump();
    if (doc.contains("arrival")) cfg.arrival = parse_arrival(doc["arrival"]);
    if (doc.contains("service")) cfg.service = parse_service(doc["service"]);
    if (doc.contains("n")) {
        const json& n = doc["n"];
        if (n.is_array()) {
            for (std::size_t i = 0; i < n.size(); ++i) cfg.n_list.push_back(positive_count(n[i], "n"));
            if (cfg.n_list.empty()) throw ConfigError("n", "expected at least one population size");
        } else {
            cfg.n_list.push_back(positive_count(n, "n"));
        }
    }
    if (doc.contains("replications")) cfg.replications = positive_count(doc["replications"], "replications");
    if (doc.contains("seed")) {
        const json& s = doc["seed"];
        if (!s.is_number_integer() || s.get<long long>() < 0)
            throw ConfigError("seed", "expected a nonnegative integer");
        cfg.seed = s.get<uint64_t>();
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        if (!g.is_object()) throw ConfigError("grid", "expected an object");
        const double t_min = num(g, "t_min", "grid"), t_max = num(g, "t_max", "grid"), dt = num(g, "dt", "grid");
        if (!(dt > 0.0)) throw ConfigError("grid.dt", "must be positive");
        if (cfg.arrival && !(t_max > cfg.arrival->t_end()))
            throw ConfigError("grid.t_max", "must exceed the arrival support end " + fmt(cfg.arrival->t_end()));
        if (cfg.arrival && t_min > cfg.arrival->t0())
            throw ConfigError("grid.t_min", "must not exceed the arrival support start");
        try {
            cfg.grid = GridSpec(t_min, t_max, dt);
        } catch (const InputError& e) {
            throw ConfigError("grid", e.what());
        }
    }
    if (doc.contains("outputs")) {
        const json& o = doc["outputs"];
        if (!o.is_object()) throw ConfigError("outputs", "expected an object");
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) throw ConfigError("outputs.directory", "expected a string");
            cfg.out_dir = o["directory"].get<std::string>();
        }
        if (o.contains("formats")) {
            cfg.formats.clear();
            for (const json& f : o["formats"]) {
                if (!f.is_string() || (f != "csv" && f != "json"))
                    throw ConfigError("outputs.formats", "entries must be \"csv\" or \"json\"");
                cfg.formats.push_back(f.get<std::string>());
            }
        }
    }
    if (doc.contains("eps_nabla")) {
        const json& e = doc["eps_nabla"];
        if (!e.is_number() || !(e.get<double>() > 0.0)) throw ConfigError("eps_nabla", "expected a positive number");
        cfg.eps_nabla = e.get<double>();
    }
    if (doc.contains("times")) {
        for (const json& t : doc["times"]) {
            if (!t.is_number()) throw ConfigError("times", "expected numbers");
            cfg.times.push_back(t.get<double>());
        }
    }
    return cfg;
}

json preset_json(const std::string& name) {
    if (name == "uniform-exp")
        return json{{"arrival", {{"kind", "uniform"}, {"t0", -20.0}, {"t_end", 40.0}}},
                    {"service", {{"kind", "exponential"}, {"mu", 0.03}}},
                    {"n", {10, 25, 100, 1000}},
                    {"replications", 10000},
                    {"seed", 1},
                    {"grid", {{"t_min", -20.0}, {"t_max", 60.0}, {"dt", 0.05}}},
                    {"times", {-10.0, 0.0, 10.0, 20.0}}};
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return from_json(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig preset_config(const std::string& name) { return from_json(preset_json(name)); }

std::vector<std::string> preset_names() { return {"uniform-exp"}; }

void require_fields(const RunConfig& cfg, const std::string& sub) {
    if (!cfg.arrival) throw ConfigError("arrival", "missing required field for '" + sub + "'");
    if (!cfg.service) throw ConfigError("service", "missing required field for '" + sub + "'");
    if (!cfg.grid) throw ConfigError("grid", "missing required field for '" + sub + "'");
    if ((sub == "simulate" || sub == "validate") && cfg.n_list.empty())
        throw ConfigError("n", "missing required field for '" + sub + "'");
    if (sub == "validate" && cfg.replications < 2) throw ConfigError("replications", "validate needs at least 2");
}

bool wants_format(const RunConfig& cfg, const std::string& f) {
    for (const std::string& s : cfg.formats)
        if (s == f) return true;
    return false;
}

}  // namespace transq
