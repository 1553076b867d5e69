// Primal active-set method for strictly convex QPs with inequality
// constraints. The start point comes from the LP feasibility kernel; the
// working set stays linearly independent because every added constraint is a
// blocking one (G_i p > 0 while G_W p = 0).

#include "accport/controllers.hpp"

#include <cmath>
#include <limits>

namespace accport {

namespace {

std::vector<int> independent_tight(const Mat& G, const Vec& w, const Vec& z, int n) {
    std::vector<int> W;
    Mat rows(0, n);
    for (int i = 0; i < G.rows() && static_cast<int>(W.size()) < n; ++i) {
        if (std::abs(G.row(i).dot(z) - w(i)) > 1e-9) continue;
        Mat trial(rows.rows() + 1, n);
        trial.topRows(rows.rows()) = rows;
        trial.row(rows.rows()) = G.row(i);
        Eigen::FullPivLU<Mat> lu(trial);
        lu.setThreshold(1e-10);
        if (lu.rank() == trial.rows()) {
            rows = trial;
            W.push_back(i);
        }
    }
    return W;
}

}  // namespace

QpResult solve_qp(const Mat& H, const Vec& f, const Mat& G, const Vec& w, int max_iter) {
    const int n = static_cast<int>(H.rows());
    const int m = static_cast<int>(G.rows());
    QpResult out;
    Vec z;
    if (m == 0) {
        out.feasible = true;
        out.z = H.ldlt().solve(-f);
        return out;
    }
    {
        auto [t, z0] = feasibility_gap(G, w);
        if (t > tol::feasibility) return out;
        z = z0;
    }
    std::vector<int> W = independent_tight(G, w, z, n);
    const double scale = std::max(1.0, f.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < max_iter; ++it) {
        const int k = static_cast<int>(W.size());
        Mat K = Mat::Zero(n + k, n + k);
        Vec rhs = Vec::Zero(n + k);
        K.topLeftCorner(n, n) = H;
        for (int j = 0; j < k; ++j) {
            K.block(0, n + j, n, 1) = G.row(W[j]).transpose();
            K.block(n + j, 0, 1, n) = G.row(W[j]);
        }
        rhs.head(n) = -(H * z + f);
        const Vec sol = K.fullPivLu().solve(rhs);
        const Vec p = sol.head(n);
        const Vec lam = sol.tail(k);
        out.iterations = it + 1;
        if (p.lpNorm<Eigen::Infinity>() <= 1e-11 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) {
            int drop = -1;
            double most = -1e-11 * scale;
            for (int j = 0; j < k; ++j)
                if (lam(j) < most) {
                    most = lam(j);
                    drop = j;
                }
            if (drop < 0) {
                out.feasible = true;
                out.z = z;
                out.active = W;
                out.lambda = lam;
                return out;
            }
            W.erase(W.begin() + drop);
            continue;
        }
        double alpha = 1.0;
        int block = -1;
        for (int i = 0; i < m; ++i) {
            if (std::find(W.begin(), W.end(), i) != W.end()) continue;
            const double gp = G.row(i).dot(p);
            if (gp <= 1e-14) continue;
            const double a = std::max(0.0, w(i) - G.row(i).dot(z)) / gp;
            if (a < alpha) {
                alpha = a;
                block = i;
            }
        }
        z += alpha * p;
        if (block >= 0) W.push_back(block);
    }
    throw ControllerError("QP active-set iteration cap exceeded");
}

}  // namespace accport
