#include "accport/cli.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace accport {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UnitInfo {
    std::string_view unit;
    Dimension dim;
};

constexpr UnitInfo kUnits[] = {
    {"km/h", Dimension::speed},         {"m/s", Dimension::speed},
    {"m", Dimension::length},           {"s", Dimension::time},
    {"m/s^2", Dimension::acceleration}, {"m/s2", Dimension::acceleration},
    {"m/s²", Dimension::acceleration},
};

const char* dimension_name(Dimension d) {
    switch (d) {
        case Dimension::speed: return "speed";
        case Dimension::length: return "length";
        case Dimension::time: return "time";
        case Dimension::acceleration: return "acceleration";
    }
    return "?";
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json& need(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    return j.at(key);
}

double quantity(const json& j, const std::string& where, const char* key, Dimension d) {
    const json& v = need(j, where, key);
    if (!v.is_string())
        throw ConfigError(where + "." + key + ": units are mandatory, write e.g. \"130 km/h\"");
    try {
        return parse_quantity(v.get<std::string>(), d);
    } catch (const ConfigError& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

double number(const json& j, const std::string& where, const char* key) {
    const json& v = need(j, where, key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": not finite");
    return x;
}

template <class T>
T integer(const json& j, const std::string& where, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<T>();
}

VhcParams parse_vhc(const json& j, const std::string& where) {
    check_keys(j, where, {"name", "c1", "c2", "t_cycle", "k", "h_max", "a_min", "a_max", "w_min",
                          "w_max", "h_max_by_class"});
    VhcParams p;
    const json& name = need(j, where, "name");
    if (!name.is_string() || name.get<std::string>().empty())
        throw ConfigError(where + ".name: expected a nonempty string");
    p.name = name.get<std::string>();
    p.c1 = number(j, where, "c1");
    p.c2 = number(j, where, "c2");
    p.t_cycle = quantity(j, where, "t_cycle", Dimension::time);
    if (!j.contains("k")) throw ConfigError(where + ": missing 'k'");
    p.k = integer<int>(j, where, "k", 0);
    p.h_max = quantity(j, where, "h_max", Dimension::length);
    p.a_min = quantity(j, where, "a_min", Dimension::acceleration);
    p.a_max = quantity(j, where, "a_max", Dimension::acceleration);
    p.w_min = quantity(j, where, "w_min", Dimension::acceleration);
    p.w_max = quantity(j, where, "w_max", Dimension::acceleration);
    if (j.contains("h_max_by_class")) {
        const json& m = j.at("h_max_by_class");
        if (!m.is_object()) throw ConfigError(where + ".h_max_by_class: expected an object");
        for (const auto& [cls, _] : m.items())
            p.h_max_by_class[cls] = quantity(m, where + ".h_max_by_class", cls.c_str(), Dimension::length);
    }
    try {
        p.validate();
    } catch (const ModelError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

OddParams parse_odd(const json& j) {
    const std::string w = "odd";
    check_keys(j, w, {"h_min", "t_h_min", "v_min", "v_max", "v_T_min", "v_T_max", "a_T_min", "a_T_max"});
    OddParams o;
    o.h_min = quantity(j, w, "h_min", Dimension::length);
    o.t_h_min = quantity(j, w, "t_h_min", Dimension::time);
    o.v_min = quantity(j, w, "v_min", Dimension::speed);
    o.v_max = quantity(j, w, "v_max", Dimension::speed);
    o.v_T_min = quantity(j, w, "v_T_min", Dimension::speed);
    o.v_T_max = quantity(j, w, "v_T_max", Dimension::speed);
    o.a_T_min = quantity(j, w, "a_T_min", Dimension::acceleration);
    o.a_T_max = quantity(j, w, "a_T_max", Dimension::acceleration);
    try {
        o.validate();
    } catch (const ModelError& e) {
        throw ConfigError(std::string("odd: ") + e.what());
    }
    return o;
}

std::vector<double> quantity_list(const json& g, const char* key, Dimension d) {
    const json& a = need(g, "driver_grid", key);
    if (!a.is_array()) throw ConfigError(std::string("driver_grid.") + key + ": expected an array");
    std::vector<double> out;
    for (const auto& e : a) {
        if (!e.is_string())
            throw ConfigError(std::string("driver_grid.") + key + ": units are mandatory");
        out.push_back(parse_quantity(e.get<std::string>(), d));
    }
    return out;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec json_vec(const json& a, const char* what) {
    if (!a.is_array()) throw ConfigError(std::string(what) + ": expected an array");
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw ConfigError(std::string(what) + ": expected numbers");
        v(static_cast<int>(i)) = a[i].get<double>();
        if (!std::isfinite(v(static_cast<int>(i)))) throw ConfigError(std::string(what) + ": not finite");
    }
    return v;
}

json vhc_json(const VhcParams& p) {
    json j = {{"name", p.name}, {"c1", p.c1},       {"c2", p.c2},       {"t_cycle", p.t_cycle},
              {"k", p.k},       {"h_max", p.h_max}, {"a_min", p.a_min}, {"a_max", p.a_max},
              {"w_min", p.w_min}, {"w_max", p.w_max}};
    json m = json::object();
    for (const auto& [c, h] : p.h_max_by_class) m[c] = h;
    j["h_max_by_class"] = m;
    return j;
}

json odd_json(const OddParams& o) {
    return {{"h_min", o.h_min},     {"t_h_min", o.t_h_min}, {"v_min", o.v_min},
            {"v_max", o.v_max},     {"v_T_min", o.v_T_min}, {"v_T_max", o.v_T_max},
            {"a_T_min", o.a_T_min}, {"a_T_max", o.a_T_max}};
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

double parse_quantity(const std::string& text, Dimension dim) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first < last && *first == ' ') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || !std::isfinite(value))
        throw ConfigError("cannot read a number in '" + text + "'");
    std::string unit(ptr, last);
    unit.erase(0, unit.find_first_not_of(' '));
    unit.erase(unit.find_last_not_of(' ') + 1);
    if (unit.empty()) throw ConfigError("missing unit in '" + text + "'");
    for (const auto& u : kUnits) {
        if (u.unit != unit) continue;
        if (u.dim != dim)
            throw ConfigError("'" + text + "' is not a " + dimension_name(dim));
        return to_si(value, unit);
    }
    throw ConfigError("unknown unit '" + unit + "'");
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config", {"schema_version", "front_model", "max_iter", "seed", "budget",
                             "falsify_samples", "workers", "odd", "vhcs", "driver_grid", "controllers"});
    if (integer<int>(j, "config", "schema_version", -1) != kSchemaVersion)
        throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion));

    RunConfig c;
    if (j.contains("front_model")) {
        if (!j["front_model"].is_string()) throw ConfigError("config.front_model: expected a string");
        try {
            c.front = parse_front_model(j["front_model"].get<std::string>());
        } catch (const ModelError& e) {
            throw ConfigError(std::string("config.front_model: ") + e.what());
        }
    }
    c.max_iter = integer<int>(j, "config", "max_iter", c.max_iter);
    c.seed = integer<std::uint64_t>(j, "config", "seed", c.seed);
    c.budget = integer<long>(j, "config", "budget", c.budget);
    c.falsify_samples = integer<long>(j, "config", "falsify_samples", c.falsify_samples);
    c.workers = integer<int>(j, "config", "workers", c.workers);
    if (c.max_iter < 1 || c.budget < 1 || c.falsify_samples < 0 || c.workers < 0)
        throw ConfigError("config: caps and budgets must be positive");

    c.odd = parse_odd(need(j, "config", "odd"));

    const json& vs = need(j, "config", "vhcs");
    if (!vs.is_array() || vs.empty()) throw ConfigError("config.vhcs: expected a nonempty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        c.vhcs.push_back(parse_vhc(vs[i], "vhcs[" + std::to_string(i) + "]"));
        if (!names.insert(c.vhcs.back().name).second)
            throw ConfigError("config.vhcs: duplicate name " + c.vhcs.back().name);
    }

    if (j.contains("driver_grid")) {
        const json& g = j["driver_grid"];
        check_keys(g, "driver_grid", {"v_d", "t_h_d", "object_class"});
        c.grid.v_d = quantity_list(g, "v_d", Dimension::speed);
        c.grid.t_h_d = quantity_list(g, "t_h_d", Dimension::time);
        if (g.contains("object_class")) {
            for (const auto& e : g["object_class"]) {
                if (!e.is_string()) throw ConfigError("driver_grid.object_class: expected strings");
                try {
                    c.grid.object_class.push_back(to_string(parse_object_class(e.get<std::string>())));
                } catch (const ModelError& ex) {
                    throw ConfigError(std::string("driver_grid.object_class: ") + ex.what());
                }
            }
        } else {
            c.grid.object_class = {"car"};
        }
        for (double vd : c.grid.v_d)
            for (double th : c.grid.t_h_d) {
                DriverParams d{vd, th, ObjectClass::car};
                try {
                    d.validate(c.odd);
                } catch (const ModelError& e) {
                    throw ConfigError(std::string("driver_grid: ") + e.what());
                }
            }
    } else {
        c.grid.object_class = {"car"};
    }

    if (j.contains("controllers")) {
        const json& cs = j["controllers"];
        if (!cs.is_array()) throw ConfigError("config.controllers: expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string w = "controllers[" + std::to_string(i) + "]";
            check_keys(cs[i], w, {"name", "file"});
            const json& name = need(cs[i], w, "name");
            const json& file = need(cs[i], w, "file");
            if (!name.is_string() || !file.is_string()) throw ConfigError(w + ": expected strings");
            fs::path p = file.get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            if (!fs::exists(p)) throw ConfigError(w + ": file not found: " + p.string());
            c.controllers.push_back({name.get<std::string>(), p});
        }
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    return parse_run_config(read_file(path), path.parent_path());
}

std::string safe_set_file_name(const std::string& vhc, const std::string& object_class) {
    return vhc + "." + object_class + ".json";
}

std::string safe_set_to_json_text(const SafeSet& s) {
    json A = json::array();
    for (int i = 0; i < s.poly.rows(); ++i) A.push_back(vec_json(s.poly.A().row(i).transpose()));
    json exit = json::array();
    for (char e : s.exit) exit.push_back(e ? 1 : 0);
    json j = {{"schema_version", kSchemaVersion},
              {"kind", "safe_set"},
              {"vhc", vhc_json(s.vhc)},
              {"odd", odd_json(s.odd)},
              {"object_class", s.object_class},
              {"front_model", to_string(s.front)},
              {"coordinates", coordinate_names(s.vhc.k)},
              {"dim", s.dim()},
              {"converged", s.converged},
              {"empty", s.empty},
              {"iterations_used", s.iterations_used},
              {"facet_count", s.facet_count()},
              {"A", A},
              {"b", vec_json(s.poly.b())},
              {"exit", exit}};
    return j.dump(1) + "\n";
}

SafeSet safe_set_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("safe set is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("schema_version", -1) != kSchemaVersion || j.value("kind", "") != "safe_set")
        throw ConfigError("not a safe set file of schema_version " + std::to_string(kSchemaVersion));
    try {
        SafeSet s;
        const json& v = j.at("vhc");
        s.vhc.name = v.at("name").get<std::string>();
        s.vhc.c1 = v.at("c1").get<double>();
        s.vhc.c2 = v.at("c2").get<double>();
        s.vhc.t_cycle = v.at("t_cycle").get<double>();
        s.vhc.k = v.at("k").get<int>();
        s.vhc.h_max = v.at("h_max").get<double>();
        s.vhc.a_min = v.at("a_min").get<double>();
        s.vhc.a_max = v.at("a_max").get<double>();
        s.vhc.w_min = v.at("w_min").get<double>();
        s.vhc.w_max = v.at("w_max").get<double>();
        for (const auto& [c, h] : v.at("h_max_by_class").items()) s.vhc.h_max_by_class[c] = h.get<double>();
        s.vhc.validate();
        const json& o = j.at("odd");
        s.odd.h_min = o.at("h_min").get<double>();
        s.odd.t_h_min = o.at("t_h_min").get<double>();
        s.odd.v_min = o.at("v_min").get<double>();
        s.odd.v_max = o.at("v_max").get<double>();
        s.odd.v_T_min = o.at("v_T_min").get<double>();
        s.odd.v_T_max = o.at("v_T_max").get<double>();
        s.odd.a_T_min = o.at("a_T_min").get<double>();
        s.odd.a_T_max = o.at("a_T_max").get<double>();
        s.odd.validate();
        s.vhc_name = s.vhc.name;
        s.object_class = to_string(parse_object_class(j.at("object_class").get<std::string>()));
        s.front = parse_front_model(j.at("front_model").get<std::string>());
        s.converged = j.at("converged").get<bool>();
        s.empty = j.at("empty").get<bool>();
        s.iterations_used = j.at("iterations_used").get<int>();
        const int n = j.at("dim").get<int>();
        if (n != 3 + s.vhc.k) throw ConfigError("safe set dimension does not match k");
        const json& A = j.at("A");
        const Vec b = json_vec(j.at("b"), "b");
        if (!A.is_array() || A.size() != static_cast<std::size_t>(b.size()))
            throw ConfigError("A and b disagree in row count");
        Mat M(b.size(), n);
        for (int i = 0; i < b.size(); ++i) {
            const Vec r = json_vec(A[i], "A");
            if (r.size() != n) throw ConfigError("row of A has the wrong length");
            M.row(i) = r.transpose();
        }
        s.poly = b.size() ? HPolytope(M, b) : HPolytope(n);
        const json& e = j.at("exit");
        if (!e.is_array() || e.size() != static_cast<std::size_t>(b.size()))
            throw ConfigError("exit flags disagree with the row count");
        for (const auto& f : e) s.exit.push_back(f.get<int>() ? 1 : 0);
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("safe set schema: ") + e.what());
    } catch (const ModelError& e) {
        throw ConfigError(std::string("safe set schema: ") + e.what());
    }
}

SafeSet load_safe_set(const fs::path& path) { return safe_set_from_json_text(read_file(path)); }

std::string report_to_json_text(const std::vector<CellResult>& cells) {
    json out = json::array();
    std::map<std::string, int> counts;
    for (const auto& c : cells) {
        ++counts[to_string(c.status)];
        json cell = {{"controller", c.controller},
                     {"vhc", c.cell.vhc},
                     {"params", {{"v_d", c.cell.v_d}, {"t_h_d", c.cell.t_h_d},
                                 {"object_class", c.cell.object_class}}},
                     {"status", to_string(c.status)},
                     {"warning", c.warning},
                     {"note", c.note},
                     {"max_margin", nullable(c.max_margin)},
                     {"stats", {{"regions", c.regions}, {"lps", c.stats.lps},
                                {"leaves", c.stats.leaves}, {"frontier", c.stats.frontier},
                                {"samples", c.stats.samples}}}};
        if (c.counterexample) {
            const Counterexample& x = *c.counterexample;
            cell["counterexample"] = {{"x", vec_json(x.x)},
                                      {"a", x.a},
                                      {"a_T", x.a_T},
                                      {"a_T_range", {x.a_T_lo, x.a_T_hi}},
                                      {"w", x.w},
                                      {"x_next", vec_json(x.x_next)},
                                      {"violated_facet", x.violated_facet},
                                      {"family", to_string(x.family)},
                                      {"margin", x.margin}};
        }
        out.push_back(std::move(cell));
    }
    json summary = json::object();
    for (auto s : {Status::SAFE, Status::UNSAFE, Status::UNKNOWN, Status::ERROR})
        summary[to_string(s)] = counts[to_string(s)];
    json j = {{"schema_version", kSchemaVersion}, {"kind", "verdict_report"},
              {"summary", summary}, {"cells", out}};
    return j.dump(1) + "\n";
}

std::string counterexamples_csv(const std::vector<CellResult>& cells) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "controller,vhc,object_class,v_d,t_h_d,step,v,v_T,h,queue,a,a_T,w,facet,family,margin\n";
    for (const auto& c : cells) {
        if (!c.counterexample) continue;
        const Counterexample& x = *c.counterexample;
        for (int step = 0; step < 2; ++step) {
            const Vec& s = step == 0 ? x.x : x.x_next;
            os << c.controller << ',' << c.cell.vhc << ',' << c.cell.object_class << ',' << c.cell.v_d
               << ',' << c.cell.t_h_d << ',' << step << ',' << s(0) << ',' << s(1) << ',' << s(2) << ',';
            for (int i = 3; i < s.size(); ++i) os << (i > 3 ? ";" : "") << s(i);
            os << ',' << x.a << ',' << x.a_T << ',' << x.w << ',' << x.violated_facet << ','
               << to_string(x.family) << ',' << x.margin << '\n';
        }
    }
    return os.str();
}

}  // namespace accport
