#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace accport;
using namespace testsupport;

namespace {

// Optimum of a strictly convex QP by trying every active set.
Vec brute_qp(const Mat& H, const Vec& f, const Mat& G, const Vec& w) {
    const int n = static_cast<int>(H.rows()), m = static_cast<int>(G.rows());
    Vec best;
    double best_cost = 1e300;
    for (int mask = 0; mask < (1 << m); ++mask) {
        std::vector<int> act;
        for (int i = 0; i < m; ++i)
            if (mask >> i & 1) act.push_back(i);
        if (static_cast<int>(act.size()) > n) continue;
        const int k = static_cast<int>(act.size());
        Mat K = Mat::Zero(n + k, n + k);
        Vec r(n + k);
        K.topLeftCorner(n, n) = H;
        r.head(n) = -f;
        for (int j = 0; j < k; ++j) {
            K.block(0, n + j, n, 1) = G.row(act[j]).transpose();
            K.block(n + j, 0, 1, n) = G.row(act[j]);
            r(n + j) = w(act[j]);
        }
        Eigen::FullPivLU<Mat> lu(K);
        if (lu.rank() < n + k) continue;
        const Vec s = lu.solve(r);
        const Vec z = s.head(n);
        if (((G * z - w).array() > 1e-9).any()) continue;
        if (k && (s.tail(k).array() < -1e-9).any()) continue;
        const double c = 0.5 * z.dot(H * z) + f.dot(z);
        if (c < best_cost) {
            best_cost = c;
            best = z;
        }
    }
    return best;
}

MpcSpec paper_spec() {
    const auto v = case_study_vhcs();
    return MpcSpec::case_study(v[0], case_study_odd(), case_study_driver());
}

// Nominal prediction (front keeps its speed) against the input-dependent ODD rows.
bool mpc_feasible(const MpcSpec& s, const Vec& x0, const Vec& z) {
    const OddParams& o = s.odd_params;
    const auto p = case_study_vhcs()[0];
    Plant pl{p.c1, p.c2, p.t_cycle, 0};
    Vec x = x0;
    for (int t = 0; t < z.size(); ++t) {
        if (z(t) < s.U_a.lo(0) - 1e-9 || z(t) > s.U_a.hi(0) + 1e-9) return false;
        x = pl.step(x, z(t), 0, 0);
        if (x(2) < o.h_min - 1e-7 || x(2) < o.t_h_min * x(0) - 1e-7) return false;
        if (x(0) > o.v_max + 1e-7 || x(0) < o.v_min - 1e-7) return false;
    }
    return true;
}

double mpc_cost_oracle(const MpcSpec& s, const Vec& x0, const Vec& z) {
    const double r = std::min(s.v_d, x0(2) / s.t_h_d);
    const auto p = case_study_vhcs()[0];
    Plant pl{p.c1, p.c2, p.t_cycle, 0};
    Vec x = x0;
    double c = s.q_v * (x(0) - r) * (x(0) - r);
    for (int t = 0; t < z.size(); ++t) {
        x = pl.step(x, z(t), 0, 0);
        c += s.q_v * (x(0) - r) * (x(0) - r) + s.r_a * z(t) * z(t);
    }
    return c;
}

Vec random_odd_state(std::mt19937_64& rng, const OddParams& o, double h_max) {
    std::uniform_real_distribution<double> u(0, 1);
    Vec x(3);
    while (true) {
        x << o.v_min + u(rng) * (o.v_max - o.v_min), o.v_T_min + u(rng) * (o.v_T_max - o.v_T_min),
            o.h_min + u(rng) * (h_max - o.h_min);
        if (x(2) >= o.t_h_min * x(0)) return x;
    }
}

}  // namespace

TEST_CASE("active-set qp matches active-set enumeration") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3, m = 6;
        Mat R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = g(rng);
        const Mat H = R * R.transpose() + 0.5 * Mat::Identity(n, n);
        Vec f(n), w(m);
        Mat G(m, n);
        for (int i = 0; i < n; ++i) f(i) = 3 * g(rng);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) G(i, j) = g(rng);
            w(i) = std::abs(g(rng)) + 0.1;  // z = 0 feasible
        }
        const QpResult r = solve_qp(H, f, G, w);
        REQUIRE(r.feasible);
        const Vec z = brute_qp(H, f, G, w);
        CHECK((r.z - z).norm() < 1e-7);
    }
}

TEST_CASE("qp detects infeasibility") {
    Mat H = Mat::Identity(1, 1);
    Vec f = Vec::Zero(1);
    Mat G(2, 1);
    G << 1, -1;
    Vec w(2);
    w << -1, -1;
    CHECK_FALSE(solve_qp(H, f, G, w).feasible);
}

TEST_CASE("online mpc is feasible and locally optimal") {
    const MpcSpec s = paper_spec();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        const Vec x = random_odd_state(rng, s.odd_params, 200);
        const MpcSolution sol = mpc_solve_full(s, x);
        if (!sol.feasible) {
            CHECK(sol.a == s.U_a.lo(0));
            continue;
        }
        ++checked;
        REQUIRE(mpc_feasible(s, x, sol.z));
        CHECK(sol.a == doctest::Approx(sol.z(0)));
        CHECK(mpc_cost(s, x, sol.z) == doctest::Approx(mpc_cost_oracle(s, x, sol.z)).epsilon(1e-9));
        const double c0 = mpc_cost_oracle(s, x, sol.z);
        for (int j = 0; j < 200; ++j) {
            Vec z = sol.z;
            for (int t = 0; t < z.size(); ++t) z(t) += 0.05 * g(rng);
            if (mpc_feasible(s, x, z)) CHECK(mpc_cost_oracle(s, x, z) >= c0 - 1e-9);
        }
    }
    CHECK(checked > 30);
    CHECK(mpc_reference(s, Eigen::Vector3d(20, 20, 30)) == doctest::Approx(30 / 1.8));
}

TEST_CASE("explicit mpc reproduces the online solution") {
    const MpcSpec s = paper_spec();
    MpqpStats st;
    const PwaController pc = mpc_explicit(s, &st);
    CHECK(st.feasible_regions >= 50);
    CHECK(st.feasible_regions <= 5000);
    CHECK(pc.fallback() == s.U_a.lo(0));
    std::mt19937_64 rng(6);
    for (int i = 0; i < 500; ++i) {
        const Vec x = random_odd_state(rng, s.odd_params, s.h_domain_max);
        CHECK(std::abs(pc.evaluate(x) - mpc_solve(s, x)) < 1e-6);
    }
}

TEST_CASE("relu forward pass and activation regions") {
    const ReluNetwork net = fixture_network(3, {4, 2}, 13, -4, 2, 0.0, 1.0);
    CHECK(net.hidden_count() == 6);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20, 40);
    for (int i = 0; i < 300; ++i) {
        Vec x(3);
        x << u(rng), u(rng), u(rng) + 20;
        // plain forward pass
        Vec z = x;
        for (std::size_t l = 0; l + 1 < net.W.size(); ++l) z = (net.W[l] * z + net.b[l]).cwiseMax(0.0);
        const double y = (net.W.back() * z + net.b.back())(0);
        CHECK(nn_preoutput(net, x)(0) == doctest::Approx(y).epsilon(1e-12));
        CHECK(nn_forward(net, x) == doctest::Approx(std::clamp(y, -4.0, 2.0)).epsilon(1e-12));
        const NnRegion r = nn_region(net, nn_pattern(net, x));
        REQUIRE_FALSE(r.empty);
        CHECK(r.poly.contains_point(x, 1e-9));
        CHECK(std::abs(r.K.dot(x) + r.g - y) < 1e-9);
    }
    const ReluNetwork z = zero_surrogate(net);
    CHECK(nn_forward(z, Vec::Ones(3)) == 0.0);
    CHECK(fixture_network(3, {4, 2}, 13, -4, 2).W[0] == net.W[0]);
}

TEST_CASE("controller files round-trip") {
    const ReluNetwork net = fixture_network(3, {6}, 2, -4, 2);
    const std::string t = controller_to_json_text(net);
    const Controller back = controller_from_json_text(t);
    REQUIRE(std::holds_alternative<ReluNetwork>(back));
    CHECK(controller_to_json_text(back) == t);

    const Controller spec = paper_spec();
    const std::string ts = controller_to_json_text(spec);
    CHECK(controller_to_json_text(controller_from_json_text(ts)) == ts);

    PwaRegion r{HPolytope::from_box(Box(Vec::Zero(3), Vec::Ones(3))), Eigen::RowVector3d(1, 2, 3), 0.5};
    const Controller pwa = PwaController(3, {r}, -4, 2);
    const std::string tp = controller_to_json_text(pwa);
    CHECK(controller_to_json_text(controller_from_json_text(tp)) == tp);
}

TEST_CASE("controller schema violations are rejected") {
    const std::string good = controller_to_json_text(fixture_network(3, {2}, 1, -4, 2));
    auto edit = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        const auto p = s.find(from);
        REQUIRE(p != std::string::npos);
        return s.replace(p, from.size(), to);
    };
    CHECK_THROWS_AS(controller_from_json_text(edit("\"relu\"", "\"lookup\"")), ControllerError);
    CHECK_THROWS_AS(controller_from_json_text(edit("\"saturation\"", "\"saturation_\"")), ControllerError);
    CHECK_THROWS_AS(controller_from_json_text("{\"schema_version\": 1, \"type\": \"relu\", \"saturation\": [-4, 2], "
                                              "\"weights\": [[[NaN]]]}"),
                    ControllerError);
    CHECK_THROWS_AS(controller_from_json_text("not json"), ControllerError);
}
