#pragma once

#include "accport/checker.hpp"

#include <algorithm>
#include <random>

namespace testsupport {

using accport::Mat;
using accport::Vec;

// Safe sets are costly enough to share between test cases.
inline const accport::SafeSet& case_set(int i, int max_iter = 200) {
    static std::vector<accport::SafeSet> cache = [max_iter] {
        std::vector<accport::SafeSet> v;
        accport::RcisOptions o;
        o.max_iter = max_iter;
        for (const auto& p : accport::case_study_vhcs()) v.push_back(accport::compute_rcis(p, accport::case_study_odd(), o));
        return v;
    }();
    return cache.at(i);
}

inline accport::VhcParams vhc1_no_delay() {
    auto p = accport::case_study_vhcs()[0];
    p.k = 0;
    p.name = "VHC1-k0";
    return p;
}

inline const accport::SafeSet& no_delay_set() {
    static const accport::SafeSet s = accport::compute_rcis(vhc1_no_delay(), accport::case_study_odd());
    return s;
}

// Solve the n x n system picked by `rows`; false when singular.
inline bool solve_rows(const Mat& A, const Vec& b, const std::vector<int>& rows, Vec& x) {
    const int n = static_cast<int>(A.cols());
    Mat M(n, n);
    Vec r(n);
    for (int i = 0; i < n; ++i) {
        M.row(i) = A.row(rows[i]);
        r(i) = b(rows[i]);
    }
    Eigen::FullPivLU<Mat> lu(M);
    if (lu.rank() < n) return false;
    x = lu.solve(r);
    return true;
}

// All vertices of {A x <= b} by trying every n-subset of rows.
inline std::vector<Vec> brute_vertices(const Mat& A, const Vec& b, double tol = 1e-9) {
    const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
    std::vector<Vec> out;
    std::vector<int> pick(n);
    std::vector<bool> sel(m, false);
    std::fill(sel.begin(), sel.begin() + n, true);
    do {
        int k = 0;
        for (int i = 0; i < m; ++i)
            if (sel[i]) pick[k++] = i;
        Vec x;
        if (!solve_rows(A, b, pick, x)) continue;
        if (((A * x - b).array() <= tol).all()) out.push_back(x);
    } while (std::prev_permutation(sel.begin(), sel.end()));
    return out;
}

// Andrew monotone chain; counter-clockwise hull of 2D points.
inline std::vector<Vec> hull2d(std::vector<Vec> p) {
    std::sort(p.begin(), p.end(), [](const Vec& a, const Vec& b) {
        return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
    });
    auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
        return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
    };
    std::vector<Vec> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 1e-12) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 1e-12) --k;
        h[k++] = p[i];
    }
    h.resize(k > 1 ? k - 1 : k);
    return h;
}

inline bool in_hull2d(const std::vector<Vec>& h, const Vec& x, double tol) {
    for (std::size_t i = 0; i < h.size(); ++i) {
        const Vec& a = h[i];
        const Vec& b = h[(i + 1) % h.size()];
        const double ex = b(0) - a(0), ey = b(1) - a(1);
        const double len = std::hypot(ex, ey);
        if (len == 0) continue;
        if ((ex * (x(1) - a(1)) - ey * (x(0) - a(0))) / len < -tol) return false;
    }
    return true;
}

// Hand-written one-step model: ego accelerates c1 a + c2 w, front a_T.
struct Plant {
    double c1, c2, ts;
    int k;
    Vec step(const Vec& x, double a, double aT, double w) const {
        Vec y(x.size());
        const double acc = k > 0 ? x(3) : a;
        const double ae = c1 * acc + c2 * w;
        y(0) = x(0) + ts * ae;
        y(1) = x(1) + ts * aT;
        y(2) = x(2) + ts * (x(1) - x(0)) + 0.5 * ts * ts * (aT - ae);
        for (int i = 0; i + 1 < k; ++i) y(3 + i) = x(4 + i);
        if (k > 0) y(3 + k - 1) = a;
        return y;
    }
};

inline Plant plant_of(const accport::VhcParams& p) { return {p.c1, p.c2, p.t_cycle, p.k}; }

// Rows of S that are not crossed by leaving the ODD: everything except
// v >= v_min, v_T <= v_max, v_T >= v_min and the sensing range.
inline std::vector<int> safety_rows(const accport::SafeSet& S) {
    std::vector<int> rows;
    const int n = S.dim();
    for (int i = 0; i < S.poly.rows(); ++i) {
        Vec a = S.poly.A().row(i).transpose();
        auto is_axis = [&](int j, double s) {
            Vec e = Vec::Zero(n);
            e(j) = s;
            return (a - e).norm() < 1e-9;
        };
        if (is_axis(0, -1) || is_axis(1, 1) || is_axis(1, -1) || is_axis(2, 1)) continue;
        rows.push_back(i);
    }
    return rows;
}

// Worst successor margin over the stopping front model, by enumerating the
// extreme front accelerations and disturbances.
inline double oracle_margin(const accport::SafeSet& S, const std::vector<int>& rows, const Vec& x, double a) {
    const auto& p = S.vhc;
    const auto& o = S.odd;
    const Plant pl = plant_of(p);
    const double lo = std::max(o.a_T_min, (o.v_T_min - x(1)) / p.t_cycle);
    const double hi = std::min(o.a_T_max, (o.v_T_max - x(1)) / p.t_cycle);
    double worst = -1e300;
    for (double aT : {lo, hi})
        for (double w : {p.w_min, p.w_max}) {
            const Vec y = pl.step(x, a, aT, w);
            for (int r : rows) worst = std::max(worst, S.poly.A().row(r).dot(y) - S.poly.b()(r));
        }
    return worst;
}

}  // namespace testsupport
