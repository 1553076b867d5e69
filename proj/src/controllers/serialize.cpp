#include "accport/controllers.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace accport {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

double num(const json& j, const char* what) {
    if (!j.is_number()) throw ControllerError(std::string("expected a number for ") + what);
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ControllerError(std::string("non-finite number in ") + what);
    return v;
}

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ControllerError(std::string("missing field ") + key);
    return j.at(key);
}

Vec vec_from(const json& j, const char* what) {
    if (!j.is_array()) throw ControllerError(std::string("expected an array for ") + what);
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = num(j[i], what);
    return v;
}

Mat mat_from(const json& j, const char* what) {
    if (!j.is_array()) throw ControllerError(std::string("expected a matrix for ") + what);
    const size_t rows = j.size();
    size_t cols = rows ? j[0].size() : 0;
    Mat M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        const Vec row = vec_from(j[r], what);
        if (static_cast<size_t>(row.size()) != cols) throw ControllerError(std::string("ragged matrix in ") + what);
        M.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return M;
}

json to_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Mat& M) {
    json a = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) a.push_back(to_json(Vec(M.row(r).transpose())));
    return a;
}

std::pair<double, double> saturation(const json& j) {
    const json& s = field(j, "saturation");
    if (!s.is_array() || s.size() != 2) throw ControllerError("saturation must be [lo, hi]");
    const double lo = num(s[0], "saturation"), hi = num(s[1], "saturation");
    if (!(lo < hi)) throw ControllerError("saturation needs lo < hi");
    return {lo, hi};
}

PwaController pwa_from(const json& j) {
    auto [lo, hi] = saturation(j);
    const int dim = static_cast<int>(num(field(j, "input_dim"), "input_dim"));
    std::vector<PwaRegion> regions;
    for (const json& r : field(j, "regions")) {
        const Mat A = mat_from(field(r, "A"), "region A");
        const Vec b = vec_from(field(r, "b"), "region b");
        const Vec K = vec_from(field(r, "K"), "region K");
        if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != dim) || K.size() != dim)
            throw ControllerError("region dimension mismatch");
        HPolytope P = A.rows() ? HPolytope(A, b) : HPolytope(dim);
        regions.push_back({P, K.transpose(), num(field(r, "g"), "region g")});
    }
    PwaController c(dim, std::move(regions), lo, hi);
    if (j.contains("fallback")) c.set_fallback(num(j.at("fallback"), "fallback"));
    return c;
}

ReluNetwork relu_from(const json& j) {
    auto [lo, hi] = saturation(j);
    ReluNetwork n;
    n.a_min = lo;
    n.a_max = hi;
    for (const json& l : field(j, "layers")) {
        n.W.push_back(mat_from(field(l, "W"), "layer W"));
        n.b.push_back(vec_from(field(l, "b"), "layer b"));
    }
    n.validate();
    return n;
}

MpcSpec mpc_from(const json& j) {
    auto [lo, hi] = saturation(j);
    VhcParams design;
    const json& m = field(j, "model");
    design.name = "design";
    design.c1 = num(field(m, "c1"), "c1");
    design.c2 = num(field(m, "c2"), "c2");
    design.t_cycle = num(field(m, "t_cycle"), "t_cycle");
    design.a_min = lo;
    design.a_max = hi;
    OddParams o;
    if (j.contains("odd")) {
        const json& oj = j.at("odd");
        o.h_min = num(field(oj, "h_min"), "h_min");
        o.t_h_min = num(field(oj, "t_h_min"), "t_h_min");
        o.v_min = num(field(oj, "v_min"), "v_min");
        o.v_max = num(field(oj, "v_max"), "v_max");
        o.v_T_min = num(field(oj, "v_T_min"), "v_T_min");
        o.v_T_max = num(field(oj, "v_T_max"), "v_T_max");
        o.a_T_min = num(field(oj, "a_T_min"), "a_T_min");
        o.a_T_max = num(field(oj, "a_T_max"), "a_T_max");
    }
    DriverParams d;
    d.v_d = num(field(j, "v_d"), "v_d");
    d.t_h_d = num(field(j, "t_h_d"), "t_h_d");
    MpcSpec s;
    try {
        design.validate();
        s = MpcSpec::case_study(design, o, d);
    } catch (const ModelError& e) {
        throw ControllerError(e.what());
    }
    if (j.contains("horizon")) s.N = static_cast<int>(num(j.at("horizon"), "horizon"));
    if (j.contains("q_v")) s.q_v = num(j.at("q_v"), "q_v");
    if (j.contains("r_a")) s.r_a = num(j.at("r_a"), "r_a");
    if (j.contains("h_domain_max")) s.h_domain_max = num(j.at("h_domain_max"), "h_domain_max");
    s.validate();
    return s;
}

}  // namespace

Controller controller_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ControllerError(std::string("controller file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion)
        throw ControllerError("controller file needs schema_version " + std::to_string(kSchemaVersion));
    const json& t = field(j, "type");
    if (!t.is_string()) throw ControllerError("controller type must be a string");
    const std::string type = t.get<std::string>();
    if (type == "pwa") return pwa_from(j);
    if (type == "relu") return relu_from(j);
    if (type == "mpc") return mpc_from(j);
    throw ControllerError("unknown controller type: " + type);
}

Controller load_controller(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ControllerError("cannot open controller file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return controller_from_json_text(ss.str());
}

std::string controller_to_json_text(const Controller& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    if (const auto* p = std::get_if<PwaController>(&c)) {
        j["type"] = "pwa";
        j["saturation"] = {p->a_min(), p->a_max()};
        j["input_dim"] = p->input_dim();
        j["fallback"] = p->fallback();
        json rs = json::array();
        for (const auto& r : p->regions())
            rs.push_back({{"A", to_json(r.poly.A())},
                          {"b", to_json(r.poly.b())},
                          {"K", to_json(Vec(r.K.transpose()))},
                          {"g", r.g}});
        j["regions"] = rs;
    } else if (const auto* n = std::get_if<ReluNetwork>(&c)) {
        j["type"] = "relu";
        j["saturation"] = {n->a_min, n->a_max};
        json ls = json::array();
        for (size_t l = 0; l < n->W.size(); ++l)
            ls.push_back({{"W", to_json(n->W[l])}, {"b", to_json(n->b[l])}});
        j["layers"] = ls;
    } else {
        const auto& s = std::get<MpcSpec>(c);
        j["type"] = "mpc";
        j["saturation"] = {s.U_a.lo(0), s.U_a.hi(0)};
        j["horizon"] = s.N;
        j["v_d"] = s.v_d;
        j["t_h_d"] = s.t_h_d;
        j["q_v"] = s.q_v;
        j["r_a"] = s.r_a;
        j["h_domain_max"] = s.h_domain_max;
        const double ts = s.dyn.t_s;
        j["model"] = {{"c1", s.dyn.B_a(0) / ts}, {"c2", s.dyn.E(0) / ts}, {"t_cycle", ts}};
        const OddParams& o = s.odd_params;
        j["odd"] = {{"h_min", o.h_min},     {"t_h_min", o.t_h_min}, {"v_min", o.v_min},
                    {"v_max", o.v_max},     {"v_T_min", o.v_T_min}, {"v_T_max", o.v_T_max},
                    {"a_T_min", o.a_T_min}, {"a_T_max", o.a_T_max}};
    }
    return j.dump(1);
}

void save_controller(const Controller& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ControllerError("cannot write controller file " + path);
    out << controller_to_json_text(c) << "\n";
}

}  // namespace accport
