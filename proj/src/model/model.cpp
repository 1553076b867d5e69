#include "accport/model.hpp"

#include <cmath>
#include <limits>

namespace accport {

std::string to_string(ObjectClass c) { return c == ObjectClass::car ? "car" : "pedestrian"; }

ObjectClass parse_object_class(std::string_view s) {
    if (s == "car") return ObjectClass::car;
    if (s == "pedestrian") return ObjectClass::pedestrian;
    throw ModelError("unknown object class: " + std::string(s));
}

std::string to_string(FrontModel m) { return m == FrontModel::box ? "box" : "stopping"; }

FrontModel parse_front_model(std::string_view s) {
    if (s == "box") return FrontModel::box;
    if (s == "stopping") return FrontModel::stopping;
    throw ModelError("unknown front model: " + std::string(s));
}

std::string to_string(FacetFamily f) {
    switch (f) {
        case FacetFamily::headway: return "headway";
        case FacetFamily::sensing_range: return "sensing_range";
        case FacetFamily::velocity: return "velocity";
        case FacetFamily::front_velocity: return "front_velocity";
        case FacetFamily::queue: return "queue";
    }
    return "?";
}

void VhcParams::validate() const {
    auto fail = [&](const std::string& what) { throw ModelError("VHC " + name + ": " + what); };
    if (!(c1 > 0 && c1 <= 1)) fail("c1 must lie in (0,1]");
    if (!(c2 > 0 && c2 <= 1)) fail("c2 must lie in (0,1]");
    if (!(t_cycle > 0)) fail("t_cycle must be positive");
    if (k < 0) fail("k must be non-negative");
    if (!(h_max > 0)) fail("h_max must be positive");
    if (!(a_min < 0 && 0 < a_max)) fail("need a_min < 0 < a_max");
    if (!(w_min <= 0 && 0 <= w_max)) fail("need w_min <= 0 <= w_max");
    for (const auto& [cls, h] : h_max_by_class) {
        parse_object_class(cls);
        if (!(h > 0)) fail("class h_max must be positive");
    }
}

double VhcParams::h_max_for(ObjectClass c) const {
    auto it = h_max_by_class.find(to_string(c));
    return it == h_max_by_class.end() ? h_max : it->second;
}

void OddParams::validate() const {
    if (!(h_min > 0)) throw ModelError("h_min must be positive");
    if (!(t_h_min > 0)) throw ModelError("t_h_min must be positive");
    if (!(0 < v_min && v_min < v_max)) throw ModelError("need 0 < v_min < v_max");
    if (!(v_T_min < v_T_max)) throw ModelError("need v_T_min < v_T_max");
    if (!(a_T_min < 0 && 0 < a_T_max)) throw ModelError("need a_T_min < 0 < a_T_max");
}

void DriverParams::validate(const OddParams& o) const {
    if (!(v_d >= o.v_min && v_d <= o.v_max)) throw ModelError("v_d outside [v_min, v_max]");
    if (!(t_h_d >= o.t_h_min)) throw ModelError("t_h_d below t_h_min");
}

Eigen::Vector3d LinearDynamics::step(const Eigen::Vector3d& x, double a, double a_T, double w) const {
    return A * x + B_a * a + B_f * a_T + E * w;
}

Vec AugmentedSystem::step(const Vec& x, double a, double a_T, double w) const {
    return A * x + B * a + B_f * a_T + E * w;
}

LinearDynamics discretize(const VhcParams& p) {
    p.validate();
    const double ts = p.t_cycle;
    LinearDynamics d;
    d.t_s = ts;
    d.A << 1, 0, 0, 0, 1, 0, -ts, ts, 1;
    d.B_a << p.c1 * ts, 0, -p.c1 * ts * ts / 2;
    d.B_f << 0, ts, ts * ts / 2;
    d.E << p.c2 * ts, 0, -p.c2 * ts * ts / 2;
    return d;
}

AugmentedSystem augment(const LinearDynamics& d, int k) {
    if (k < 0) throw ModelError("augment: negative delay");
    const int n = 3 + k;
    AugmentedSystem s;
    s.k = k;
    s.A = Mat::Zero(n, n);
    s.A.topLeftCorner(3, 3) = d.A;
    s.B = Vec::Zero(n);
    s.B_f = Vec::Zero(n);
    s.E = Vec::Zero(n);
    s.B_f.head(3) = d.B_f;
    s.E.head(3) = d.E;
    if (k == 0) {
        s.B.head(3) = d.B_a;
    } else {
        s.A.block(0, 3, 3, 1) = d.B_a;
        for (int i = 0; i + 1 < k; ++i) s.A(3 + i, 4 + i) = 1.0;
        s.B(n - 1) = 1.0;
    }
    return s;
}

namespace {

Mat odd_rows(const OddParams& o, double h_max, Vec& b) {
    Mat A = Mat::Zero(kOddFacetCount, 3);
    b.resize(kOddFacetCount);
    A(kHeadwayMin, 2) = -1;              b(kHeadwayMin) = -o.h_min;
    A(kTimeHeadway, 0) = o.t_h_min;
    A(kTimeHeadway, 2) = -1;             b(kTimeHeadway) = 0;
    A(kEgoSpeedMax, 0) = 1;              b(kEgoSpeedMax) = o.v_max;
    A(kEgoSpeedMin, 0) = -1;             b(kEgoSpeedMin) = -o.v_min;
    A(kFrontSpeedMax, 1) = 1;            b(kFrontSpeedMax) = o.v_T_max;
    A(kFrontSpeedMin, 1) = -1;           b(kFrontSpeedMin) = -o.v_T_min;
    A(kSensingRange, 2) = 1;             b(kSensingRange) = h_max;
    return A;
}

}  // namespace

HPolytope build_odd(const OddParams& o, const VhcParams& p) {
    o.validate();
    if (p.h_max < o.h_min) throw ModelError("empty ODD: h_max below h_min");
    Vec b;
    Mat A = odd_rows(o, p.h_max, b);
    return HPolytope(A, b);
}

HPolytope build_general_odd(const OddParams& o) {
    o.validate();
    Vec b;
    Mat A = odd_rows(o, 0.0, b);
    return HPolytope(A.topRows(kSensingRange), b.head(kSensingRange));
}

SetBundle build_sets(const VhcParams& p, const OddParams& o) {
    p.validate();
    const HPolytope odd = build_odd(o, p);
    const int n = 3 + p.k;
    Mat A = Mat::Zero(odd.rows() + 2 * p.k, n);
    Vec b(odd.rows() + 2 * p.k);
    A.topLeftCorner(odd.rows(), 3) = odd.A();
    b.head(odd.rows()) = odd.b();
    for (int i = 0; i < p.k; ++i) {
        const int r = odd.rows() + 2 * i;
        A(r, 3 + i) = 1;
        b(r) = p.a_max;
        A(r + 1, 3 + i) = -1;
        b(r + 1) = -p.a_min;
    }
    Vec ulo(1), uhi(1), dlo(2), dhi(2);
    ulo << p.a_min;
    uhi << p.a_max;
    dlo << o.a_T_min, p.w_min;
    dhi << o.a_T_max, p.w_max;
    return {Box(ulo, uhi), Box(dlo, dhi), HPolytope(A, b)};
}

std::vector<char> exit_facets(FrontModel m, const OddParams& /*o*/, const VhcParams& p) {
    std::vector<char> e(kOddFacetCount + 2 * p.k, 0);
    if (m == FrontModel::stopping) {
        e[kEgoSpeedMin] = 1;
        e[kFrontSpeedMax] = 1;
        e[kFrontSpeedMin] = 1;
        e[kSensingRange] = 1;
    }
    return e;
}

const DisturbancePiece& Disturbance::piece_at(const Vec& x) const {
    for (const auto& p : pieces)
        if (p.zone.contains_point(x, 1e-12)) return p;
    // boundary round-off: take the piece with the smallest violation
    size_t best = 0;
    double v = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pieces.size(); ++i) {
        const double m = pieces[i].zone.max_violation(x);
        if (m < v) {
            v = m;
            best = i;
        }
    }
    return pieces.at(best);
}

namespace {

AffineBound constant_bound(int n, double c) { return {Vec::Zero(n), c}; }

// (limit - v_T) / t_s
AffineBound speed_limit_bound(int n, double limit, double ts) {
    AffineBound a{Vec::Zero(n), limit / ts};
    a.coef(1) = -1.0 / ts;
    return a;
}

HPolytope front_zone(int n, double sign, double bound) {
    Mat A = Mat::Zero(1, n);
    A(0, 1) = sign;
    Vec b(1);
    b << sign * bound;
    return HPolytope(A, b);
}

}  // namespace

Disturbance box_disturbance(const Box& D_box, int n) {
    return {{{HPolytope(n), constant_bound(n, D_box.lo(0)), constant_bound(n, D_box.hi(0)),
              D_box.lo(1), D_box.hi(1)}}};
}

Disturbance pre_disturbance(FrontModel m, const OddParams& o, const VhcParams& p) {
    const int n = 3 + p.k;
    if (m == FrontModel::box) {
        Vec lo(2), hi(2);
        lo << o.a_T_min, p.w_min;
        hi << o.a_T_max, p.w_max;
        return box_disturbance(Box(lo, hi), n);
    }
    return {{{HPolytope(n), speed_limit_bound(n, o.v_T_min, p.t_cycle),
              constant_bound(n, o.a_T_max), p.w_min, p.w_max}}};
}

Disturbance check_disturbance(FrontModel m, const OddParams& o, const VhcParams& p) {
    const int n = 3 + p.k;
    if (m == FrontModel::box) return pre_disturbance(m, o, p);
    const double ts = p.t_cycle;
    const double low_edge = o.v_T_min - ts * o.a_T_min;   // below: front reaches v_T_min this cycle
    const double high_edge = o.v_T_max - ts * o.a_T_max;  // above: front reaches v_T_max this cycle
    Disturbance d;
    d.pieces.push_back({front_zone(n, 1.0, low_edge), speed_limit_bound(n, o.v_T_min, ts),
                        constant_bound(n, o.a_T_max), p.w_min, p.w_max});
    d.pieces.push_back({front_zone(n, -1.0, high_edge), constant_bound(n, o.a_T_min),
                        speed_limit_bound(n, o.v_T_max, ts), p.w_min, p.w_max});
    HPolytope mid = front_zone(n, -1.0, low_edge).intersect(front_zone(n, 1.0, high_edge));
    d.pieces.push_back({mid, constant_bound(n, o.a_T_min), constant_bound(n, o.a_T_max), p.w_min,
                        p.w_max});
    return d;
}

FacetFamily classify_facet(const Vec& a) {
    const double eps = 1e-9;
    if (a.size() > 3 && a.head(3).lpNorm<Eigen::Infinity>() <= eps) return FacetFamily::queue;
    if (a(2) < -eps) return FacetFamily::headway;
    if (a(2) > eps) return FacetFamily::sensing_range;
    if (std::abs(a(0)) > eps) return FacetFamily::velocity;
    return FacetFamily::front_velocity;
}

double to_si(double value, std::string_view unit) {
    if (unit == "km/h") return value / 3.6;
    if (unit == "m/s" || unit == "m" || unit == "s" || unit == "m/s²" || unit == "m/s^2" ||
        unit == "m/s2")
        return value;
    throw ModelError("unknown unit: " + std::string(unit));
}

std::vector<VhcParams> case_study_vhcs() {
    VhcParams v1{"VHC1", 0.95, 0.1, 0.2, 1, 220.0, -4.0, 2.0, -0.05, 0.05, {}};
    VhcParams v2{"VHC2", 0.9, 0.2, 0.1, 1, 200.0, -4.0, 2.2, -0.1, 0.1, {}};
    VhcParams v3{"VHC3", 0.85, 0.2, 0.2, 2, 200.0, -4.0, 2.1, -0.1, 0.1, {}};
    return {v1, v2, v3};
}

OddParams case_study_odd() { return OddParams{}; }

DriverParams case_study_driver() { return DriverParams{}; }

}  // namespace accport
