#include "support.hpp"

#include <doctest.h>

using namespace accport;
using namespace testsupport;

TEST_CASE("discrete matrices of VHC1") {
    const LinearDynamics d = discretize(case_study_vhcs()[0]);
    Eigen::Matrix3d A;
    A << 1, 0, 0, 0, 1, 0, -0.2, 0.2, 1;
    CHECK((d.A - A).norm() < 1e-15);
    CHECK(d.B_a(0) == doctest::Approx(0.19));
    CHECK(d.B_a(1) == 0.0);
    CHECK(d.B_a(2) == doctest::Approx(-0.019));
    CHECK(d.B_f(1) == doctest::Approx(0.2));
    CHECK(d.B_f(2) == doctest::Approx(0.02));
    CHECK(d.E(0) == doctest::Approx(0.02));
    CHECK(d.E(2) == doctest::Approx(-0.002));
}

TEST_CASE("one step equals constant-acceleration kinematics") {
    for (const auto& p : case_study_vhcs()) {
        const LinearDynamics d = discretize(p);
        const double v = 20, vT = 15, h = 40, a = -1.5, aT = 0.3, w = 0.04;
        const double ae = p.c1 * a + p.c2 * w, t = p.t_cycle;
        const Eigen::Vector3d y = d.step(Eigen::Vector3d(v, vT, h), a, aT, w);
        CHECK(y(0) == doctest::Approx(v + ae * t));
        CHECK(y(1) == doctest::Approx(vT + aT * t));
        // gap = front travel minus ego travel
        CHECK(y(2) == doctest::Approx(h + (vT * t + 0.5 * aT * t * t) - (v * t + 0.5 * ae * t * t)));
    }
}

TEST_CASE("augmented system delays the input by k cycles") {
    const auto p = case_study_vhcs()[2];
    REQUIRE(p.k == 2);
    const AugmentedSystem s = augment(discretize(p), p.k);
    CHECK(s.dim() == 5);
    const Plant pl = plant_of(p);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 100; ++i) {
        Vec x(5);
        for (int j = 0; j < 5; ++j) x(j) = u(rng) * 10;
        const double a = u(rng), aT = u(rng) / 3, w = u(rng) / 30;
        CHECK((s.step(x, a, aT, w) - pl.step(x, a, aT, w)).norm() < 1e-12);
    }
    // an input applied now reaches the ego speed after k steps
    Vec x = Vec::Zero(5);
    x(0) = 10;
    x = s.step(x, 1.0, 0, 0);
    CHECK(x(0) == doctest::Approx(10));
    x = s.step(x, 0.0, 0, 0);
    CHECK(x(0) == doctest::Approx(10));
    x = s.step(x, 0.0, 0, 0);
    CHECK(x(0) == doctest::Approx(10 + p.c1 * p.t_cycle));
}

TEST_CASE("odd facets follow the headway rules") {
    const auto p = case_study_vhcs()[0];
    const OddParams o = case_study_odd();
    const HPolytope X = build_odd(o, p);
    CHECK(X.rows() == kOddFacetCount);
    CHECK(X.contains_point(Eigen::Vector3d(20, 20, 30)));
    CHECK_FALSE(X.contains_point(Eigen::Vector3d(20, 20, 17.9)));  // below 0.9 s
    CHECK_FALSE(X.contains_point(Eigen::Vector3d(2, 2, 4.9)));     // below h_min
    CHECK_FALSE(X.contains_point(Eigen::Vector3d(20, 20, 221)));   // sensing range
    CHECK_FALSE(X.contains_point(Eigen::Vector3d(36.2, 20, 100)));
    CHECK_FALSE(X.contains_point(Eigen::Vector3d(20, 0.2, 100)));
    const Box bb = bounding_box(X);
    CHECK(bb.hi(2) == doctest::Approx(220));
    CHECK(bb.lo(0) == doctest::Approx(1 / 3.6));
    CHECK(build_general_odd(o).rows() == kOddFacetCount - 1);

    const SetBundle sb = build_sets(case_study_vhcs()[2], o);
    CHECK(sb.X_aug.dim() == 5);
    Vec x(5);
    x << 20, 20, 30, -4, 2.1;
    CHECK(sb.X_aug.contains_point(x));
    x(4) = 2.2;
    CHECK_FALSE(sb.X_aug.contains_point(x));
}

TEST_CASE("stopping front model saturates a_T at the speed limits") {
    const auto p = case_study_vhcs()[0];
    const OddParams o = case_study_odd();
    const Disturbance d = check_disturbance(FrontModel::stopping, o, p);
    Vec x(4);
    x << 10, o.v_T_min + 0.05, 50, 0;
    const auto& low = d.piece_at(x);
    CHECK(low.aT_lo.at(x) == doctest::Approx(-0.05 / p.t_cycle));
    CHECK(low.aT_hi.at(x) == doctest::Approx(o.a_T_max));
    x(1) = 20;
    const auto& mid = d.piece_at(x);
    CHECK(mid.aT_lo.at(x) == doctest::Approx(o.a_T_min));
    x(1) = o.v_T_max - 0.02;
    const auto& high = d.piece_at(x);
    CHECK(high.aT_hi.at(x) == doctest::Approx(0.02 / p.t_cycle));
    CHECK(high.w_hi == p.w_max);

    const auto ex = exit_facets(FrontModel::stopping, o, p);
    CHECK(ex.size() == static_cast<size_t>(kOddFacetCount + 2));
    CHECK(ex[kEgoSpeedMin]);
    CHECK_FALSE(ex[kHeadwayMin]);
    CHECK_FALSE(ex[kTimeHeadway]);
    const auto bx = exit_facets(FrontModel::box, o, p);
    CHECK(std::count(bx.begin(), bx.end(), 1) == 0);
}

TEST_CASE("facet families") {
    Vec a(4);
    a << 0.9, 0, -1, 0;
    CHECK(classify_facet(a) == FacetFamily::headway);
    a << 0, 0, 1, 0;
    CHECK(classify_facet(a) == FacetFamily::sensing_range);
    a << 0, 0, 0, 1;
    CHECK(classify_facet(a) == FacetFamily::queue);
    a << 1, 0, 0, 0.3;
    CHECK(classify_facet(a) == FacetFamily::velocity);
    a << 0, -1, 0, 0;
    CHECK(classify_facet(a) == FacetFamily::front_velocity);
}

TEST_CASE("units and validation") {
    CHECK(to_si(130, "km/h") == doctest::Approx(36.1111111));
    CHECK(to_si(2, "m/s^2") == 2);
    CHECK_THROWS_AS(to_si(1, "mph"), ModelError);

    auto p = case_study_vhcs()[0];
    p.t_cycle = 0;
    CHECK_THROWS_AS(p.validate(), ModelError);
    p = case_study_vhcs()[0];
    p.a_min = 3;
    CHECK_THROWS_AS(p.validate(), ModelError);
    p = case_study_vhcs()[0];
    p.k = -1;
    CHECK_THROWS_AS(p.validate(), ModelError);
    OddParams o;
    o.v_min = o.v_max + 1;
    CHECK_THROWS_AS(o.validate(), ModelError);
    CHECK_THROWS_AS(parse_object_class("truck"), ModelError);
    CHECK(parse_front_model("box") == FrontModel::box);
}

TEST_CASE("object class overrides the sensing range") {
    auto p = case_study_vhcs()[0];
    p.h_max_by_class["pedestrian"] = 80;
    CHECK(p.h_max_for(ObjectClass::car) == 220);
    CHECK(p.h_max_for(ObjectClass::pedestrian) == 80);
}
