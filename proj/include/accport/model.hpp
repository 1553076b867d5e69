#pragma once

#include "accport/geometry.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace accport {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ObjectClass { car, pedestrian };
std::string to_string(ObjectClass c);
ObjectClass parse_object_class(std::string_view s);

struct VhcParams {
    std::string name;
    double c1 = 1.0;
    double c2 = 0.0;
    double t_cycle = 0.1;
    int k = 0;
    double h_max = 200.0;
    double a_min = -4.0, a_max = 2.0;
    double w_min = 0.0, w_max = 0.0;
    std::map<std::string, double> h_max_by_class;  // optional per object class

    void validate() const;
    double h_max_for(ObjectClass c) const;
};

struct OddParams {
    double h_min = 5.0;
    double t_h_min = 0.9;
    double v_min = 1.0 / 3.6, v_max = 130.0 / 3.6;
    double v_T_min = 1.0 / 3.6, v_T_max = 130.0 / 3.6;
    double a_T_min = -1.0, a_T_max = 0.5;

    void validate() const;
};

struct DriverParams {
    double v_d = 130.0 / 3.6;
    double t_h_d = 1.8;
    ObjectClass object_class = ObjectClass::car;

    void validate(const OddParams& o) const;
};

// x = [v, v_T, h]
struct LinearDynamics {
    Eigen::Matrix3d A;
    Eigen::Vector3d B_a, B_f, E;
    double t_s = 0.0;

    Eigen::Vector3d step(const Eigen::Vector3d& x, double a, double a_T, double w) const;
};

// x = [v, v_T, h, a_delayed(1..k)]; a_delayed(1) acts this step, a enters the tail.
struct AugmentedSystem {
    Mat A;
    Vec B, B_f, E;
    int k = 0;

    int dim() const { return static_cast<int>(A.rows()); }
    Vec step(const Vec& x, double a, double a_T, double w) const;
};

LinearDynamics discretize(const VhcParams& p);
AugmentedSystem augment(const LinearDynamics& d, int k);

// Facet order of build_odd.
enum OddFacet : int {
    kHeadwayMin = 0,
    kTimeHeadway,
    kEgoSpeedMax,
    kEgoSpeedMin,
    kFrontSpeedMax,
    kFrontSpeedMin,
    kSensingRange,
    kOddFacetCount
};

HPolytope build_odd(const OddParams& o, const VhcParams& p);
// Same facets without the sensing-range bound.
HPolytope build_general_odd(const OddParams& o);

struct SetBundle {
    Box U_a;
    Box D_box;  // (a_T, w)
    HPolytope X_aug;
};
SetBundle build_sets(const VhcParams& p, const OddParams& o);

// How the front object may move. `box` takes a_T over its full range in every
// state, so the front may leave its own speed range. `stopping` keeps the
// front speed inside [v_T_min, v_T_max]: the set computation assumes the front
// can reach v_T_min within one cycle, and the checker uses the saturated range
// max(a_T_min, (v_T_min - v_T)/t_s) <= a_T <= min(a_T_max, (v_T_max - v_T)/t_s).
enum class FrontModel { box, stopping };
std::string to_string(FrontModel m);
FrontModel parse_front_model(std::string_view s);

struct AffineBound {
    Vec coef;
    double offset = 0.0;
    double at(const Vec& x) const { return coef.dot(x) + offset; }
    bool constant() const { return coef.isZero(0.0); }
};

struct DisturbancePiece {
    HPolytope zone;  // over the augmented state
    AffineBound aT_lo, aT_hi;
    double w_lo = 0.0, w_hi = 0.0;
};

struct Disturbance {
    std::vector<DisturbancePiece> pieces;
    // Piece whose zone contains x (first match).
    const DisturbancePiece& piece_at(const Vec& x) const;
};

Disturbance pre_disturbance(FrontModel m, const OddParams& o, const VhcParams& p);
Disturbance check_disturbance(FrontModel m, const OddParams& o, const VhcParams& p);
Disturbance box_disturbance(const Box& D_box, int dim);

// ODD facets of the augmented ODD that are crossed only when the ODD itself
// ends (front speed range, sensing range, ego at standstill).
std::vector<char> exit_facets(FrontModel m, const OddParams& o, const VhcParams& p);

enum class FacetFamily { headway, sensing_range, velocity, front_velocity, queue };
std::string to_string(FacetFamily f);
// Classify a facet normal over [v, v_T, h, queue...].
FacetFamily classify_facet(const Vec& a);

double to_si(double value, std::string_view unit);

// Values of the case study.
std::vector<VhcParams> case_study_vhcs();
OddParams case_study_odd();
DriverParams case_study_driver();

}  // namespace accport
