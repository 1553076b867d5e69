#include "support.hpp"

#include <doctest.h>

using namespace accport;
using namespace testsupport;

namespace {

// Box [-1,1]^n cut by `cuts` random halfspaces that keep the origin inside.
HPolytope random_polytope(int n, int cuts, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.2, 1.0);
    Mat A(2 * n + cuts, n);
    Vec b(2 * n + cuts);
    A.topRows(n) = Mat::Identity(n, n);
    A.middleRows(n, n) = -Mat::Identity(n, n);
    b.head(2 * n).setOnes();
    for (int i = 0; i < cuts; ++i) {
        Vec a(n);
        for (int j = 0; j < n; ++j) a(j) = g(rng);
        A.row(2 * n + i) = a.normalized().transpose();
        b(2 * n + i) = u(rng);
    }
    return HPolytope(A, b);
}

}  // namespace

TEST_CASE("lp optimum matches vertex enumeration") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 2;
        const HPolytope P = random_polytope(n, 6, rng);
        Vec c(n);
        for (int j = 0; j < n; ++j) c(j) = g(rng);
        double best = -1e300;
        for (const Vec& v : brute_vertices(P.A(), P.b())) best = std::max(best, c.dot(v));
        const LpSolution s = solve_lp(c, P);
        REQUIRE(s.optimal());
        CHECK(s.value == doctest::Approx(best).epsilon(1e-9));
        CHECK(P.contains_point(s.x, 1e-9));
    }
}

TEST_CASE("lp reports infeasible and unbounded problems") {
    Mat A(2, 1);
    A << 1, -1;
    Vec b(2);
    b << -1, -1;  // x <= -1 and x >= 1
    CHECK(lp_max(A, b, Vec::Ones(1)).status == LpStatus::infeasible);
    Mat A2(1, 2);
    A2 << 1, 0;
    Vec b2(1);
    b2 << 1;
    Vec c(2);
    c << 0, 1;
    CHECK(lp_max(A2, b2, c).status == LpStatus::unbounded);
    CHECK(is_empty(HPolytope(A, b)));
}

TEST_CASE("rows are normalized") {
    Mat A(2, 2);
    A << 3, 4, 0, -2;
    Vec b(2);
    b << 10, 2;
    const HPolytope P(A, b);
    CHECK(P.A().row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(P.b()(0) == doctest::Approx(2.0));
    CHECK(P.b()(1) == doctest::Approx(1.0));
}

TEST_CASE("redundancy removal keeps the set and drops redundant rows") {
    Box box(Vec::Constant(3, -1.0), Vec::Constant(3, 1.0));
    HPolytope P = HPolytope::from_box(box);
    Mat extra(3, 3);
    extra << 1, 0, 0,  // duplicate of x <= 1, looser
        1, 1, 0,       // x + y <= 5 never binds
        2, 0, 0;       // scaled duplicate
    Vec eb(3);
    eb << 1.5, 5, 2;
    const HPolytope Q = remove_redundancy(P.with_rows(extra, eb));
    CHECK(Q.rows() == 6);
    CHECK(contains(Q, P));
    CHECK(contains(P, Q));
}

TEST_CASE("fourier-motzkin projection equals the projected vertex hull") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const HPolytope P = random_polytope(3, 5, rng);
        const HPolytope Q = eliminate(P, 2);
        std::vector<Vec> pts;
        for (const Vec& v : brute_vertices(P.A(), P.b())) pts.push_back(v.head(2));
        const auto hull = hull2d(pts);
        for (const Vec& p : pts) CHECK(Q.contains_point(p, 1e-7));
        for (const Vec& v : brute_vertices(Q.A(), Q.b())) CHECK(in_hull2d(hull, v, 1e-7));
    }
}

TEST_CASE("pontryagin difference with a box is analytic") {
    const Box P(Vec::Constant(2, -3.0), Vec::Constant(2, 5.0));
    Vec lo(2), hi(2);
    lo << -1, -0.5;
    hi << 2, 0.25;
    const HPolytope D = pontryagin_diff(HPolytope::from_box(P), Box(lo, hi));
    Vec elo(2), ehi(2);
    elo << -3 + 1, -3 + 0.5;
    ehi << 5 - 2, 5 - 0.25;
    const HPolytope E = HPolytope::from_box(Box(elo, ehi));
    CHECK(contains(D, E, 1e-12));
    CHECK(contains(E, D, 1e-12));

    // general polytope: offsets drop by the support of D
    std::mt19937_64 rng(3);
    const HPolytope R = random_polytope(2, 4, rng);
    const Box small(Vec::Constant(2, -0.05), Vec::Constant(2, 0.05));
    const HPolytope Rd = pontryagin_diff(R, small);
    HitAndRun s(Rd, 100, 5);
    for (int i = 0; i < 200; ++i) {
        const Vec x = s.next();
        for (const Vec& d : small.vertices()) CHECK(R.contains_point(x + d, 1e-9));
    }
}

TEST_CASE("containment agrees between serial and parallel kernels") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const HPolytope P = random_polytope(3, 4, rng);
        const HPolytope Q = random_polytope(3, 4, rng);
        const bool s = contains(P, Q, tol::containment, Exec::serial);
        CHECK(s == contains(P, Q, tol::containment, Exec::parallel));
        // oracle: Q inside P iff every vertex of Q is in P
        bool v = true;
        for (const Vec& x : brute_vertices(Q.A(), Q.b())) v = v && P.contains_point(x, 1e-7);
        CHECK(s == v);
    }
}

TEST_CASE("chebyshev center and bounding box of a box") {
    Vec lo(3), hi(3);
    lo << 0, -2, 1;
    hi << 4, 2, 2;
    const HPolytope P = HPolytope::from_box(Box(lo, hi));
    const auto [c, r] = chebyshev_center(P);
    CHECK(r == doctest::Approx(0.5));
    CHECK(c(2) == doctest::Approx(1.5));
    const Box bb = bounding_box(P);
    CHECK((bb.lo - lo).norm() < 1e-9);
    CHECK((bb.hi - hi).norm() < 1e-9);
}

TEST_CASE("hit and run stays inside and is seeded") {
    std::mt19937_64 rng(9);
    const HPolytope P = random_polytope(3, 5, rng);
    HitAndRun a(P, 42), b(P, 42);
    for (int i = 0; i < 500; ++i) {
        const Vec x = a.next();
        CHECK(P.contains_point(x, 1e-9));
        CHECK((x - b.next()).norm() == 0.0);
    }
    const Vec y = a.boundary_point();
    CHECK(P.max_violation(y) <= 1e-9);
    CHECK(P.max_violation(y) >= -1e-6);
}

TEST_CASE("affine preimage maps membership back") {
    Mat M(2, 2);
    M << 1, 1, 0, 1;
    Vec c(2);
    c << 0.5, -0.5;
    const HPolytope P = HPolytope::from_box(Box(Vec::Constant(2, -1), Vec::Constant(2, 1)));
    const HPolytope Q = affine_preimage(P, M, c);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 1000; ++i) {
        Vec x(2);
        x << u(rng), u(rng);
        const Vec y = M * x + c;
        if (std::abs(P.max_violation(y)) < 1e-9) continue;
        CHECK(Q.contains_point(x) == P.contains_point(y));
    }
}
