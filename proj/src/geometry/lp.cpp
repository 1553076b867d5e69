// Dense simplex on the dual of  max c.x s.t. A x <= b  (x free).
//
// The dual is  min b.y s.t. A^T y = c, y >= 0: d equality rows and one column
// per primal row. A basis is a set of d primal rows; its simplex multipliers
// are the primal vertex x (A_B x = b_B) and the reduced costs are the primal
// slacks. Phase 1 uses d artificial columns. Dantzig pricing switches to
// Bland's rule after a streak of degenerate pivots.

#include "accport/geometry.hpp"

#include <cmath>
#include <limits>

namespace accport {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;
constexpr int kDegenerateStreak = 40;

enum class Outcome { optimal, unbounded };

class DualSimplex {
public:
    DualSimplex(const Mat& A, const Vec& b, const Vec& c, const std::vector<int>& rows)
        : A_(A), b_(b), c_(c), d_(static_cast<int>(A.cols())) {
        if (rows.empty()) {
            rows_.resize(A.rows());
            for (int i = 0; i < A.rows(); ++i) rows_[i] = i;
        } else {
            rows_ = rows;
        }
        m_ = static_cast<int>(rows_.size());
        sign_.resize(d_);
        basis_.resize(d_);
        in_basis_.assign(m_ + d_, 0);
        for (int j = 0; j < d_; ++j) {
            sign_[j] = c_(j) < 0 ? -1.0 : 1.0;
            basis_[j] = m_ + j;
            in_basis_[m_ + j] = 1;
        }
        cap_ = 200 * (m_ + d_) + 2000;
    }

    // Returns false when the dual is infeasible (primal unbounded or infeasible).
    bool phase1() {
        phase_ = 1;
        run();
        double art = 0.0;
        for (int k = 0; k < d_; ++k)
            if (basis_[k] >= m_) art += std::abs(yB_(k));
        if (art > 1e-9 * std::max(1.0, c_.lpNorm<Eigen::Infinity>())) return false;
        drive_out_artificials();
        return true;
    }

    Outcome phase2() {
        phase_ = 2;
        return run();
    }

    Vec primal() {
        factor();
        Vec costB(d_);
        for (int k = 0; k < d_; ++k) costB(k) = cost(basis_[k]);
        return lu_.transpose().solve(costB);
    }

private:
    Vec column(int j) const {
        if (j < m_) return A_.row(rows_[j]).transpose();
        Vec e = Vec::Zero(d_);
        e(j - m_) = sign_[j - m_];
        return e;
    }

    double cost(int j) const {
        if (phase_ == 1) return j < m_ ? 0.0 : 1.0;
        return j < m_ ? b_(rows_[j]) : 0.0;
    }

    void factor() {
        Mat B(d_, d_);
        for (int k = 0; k < d_; ++k) B.col(k) = column(basis_[k]);
        lu_.compute(B);
    }

    Outcome run() {
        bool bland = false;
        int degenerate = 0;
        for (int it = 0; it < cap_; ++it) {
            factor();
            yB_ = lu_.solve(c_);
            Vec costB(d_);
            for (int k = 0; k < d_; ++k) costB(k) = cost(basis_[k]);
            Vec pi = lu_.transpose().solve(costB);

            int enter = -1;
            double best = -kCostTol;
            for (int j = 0; j < m_; ++j) {
                if (in_basis_[j]) continue;
                double r = cost(j) - A_.row(rows_[j]).dot(pi);
                if (r < best) {
                    enter = j;
                    if (bland) break;
                    best = r;
                }
            }
            if (enter < 0) return Outcome::optimal;

            Vec dB = lu_.solve(column(enter));
            int leave = -1;
            double tmin = std::numeric_limits<double>::infinity();
            double piv = 0.0;
            for (int k = 0; k < d_; ++k) {
                const int var = basis_[k];
                double t;
                if (phase_ == 2 && var >= m_) {
                    if (std::abs(dB(k)) <= kPivotTol) continue;
                    t = 0.0;
                } else {
                    if (dB(k) <= kPivotTol) continue;
                    t = std::max(yB_(k), 0.0) / dB(k);
                }
                bool take = false;
                if (t < tmin - 1e-12) {
                    take = true;
                } else if (t <= tmin + 1e-12 && leave >= 0) {
                    // prefer artificials leaving, then Bland order or larger pivot
                    const bool a_new = var >= m_, a_old = basis_[leave] >= m_;
                    if (a_new != a_old)
                        take = a_new;
                    else if (bland)
                        take = var < basis_[leave];
                    else
                        take = std::abs(dB(k)) > piv;
                }
                if (take) {
                    tmin = t;
                    leave = k;
                    piv = std::abs(dB(k));
                }
            }
            if (leave < 0) return Outcome::unbounded;

            if (tmin < 1e-12) {
                if (++degenerate > kDegenerateStreak) bland = true;
            } else {
                degenerate = 0;
            }
            in_basis_[basis_[leave]] = 0;
            basis_[leave] = enter;
            in_basis_[enter] = 1;
        }
        throw NumericalError("simplex iteration cap exceeded");
    }

    void drive_out_artificials() {
        for (int k = 0; k < d_; ++k) {
            if (basis_[k] < m_) continue;
            factor();
            Vec ek = Vec::Zero(d_);
            ek(k) = 1.0;
            Vec rowk = lu_.transpose().solve(ek);
            int best = -1;
            double bestv = 1e-7;
            for (int j = 0; j < m_; ++j) {
                if (in_basis_[j]) continue;
                double v = std::abs(A_.row(rows_[j]).dot(rowk));
                if (v > bestv) {
                    bestv = v;
                    best = j;
                }
            }
            if (best < 0) continue;  // A lacks full column rank; artificial stays at zero
            in_basis_[basis_[k]] = 0;
            basis_[k] = best;
            in_basis_[best] = 1;
        }
    }

    const Mat& A_;
    const Vec& b_;
    const Vec& c_;
    int d_;
    int m_ = 0;
    int cap_ = 0;
    int phase_ = 1;
    std::vector<int> rows_;
    std::vector<double> sign_;
    std::vector<int> basis_;
    std::vector<char> in_basis_;
    Eigen::PartialPivLU<Mat> lu_;
    Vec yB_;
};

}  // namespace

std::pair<double, Vec> feasibility_gap(const Mat& A, const Vec& b) {
    const int d = static_cast<int>(A.cols());
    const int m = static_cast<int>(A.rows());
    Mat Aa(m + 1, d + 1);
    Vec ba(m + 1);
    Aa.topLeftCorner(m, d) = A;
    Aa.col(d).head(m).setConstant(-1.0);
    Aa.row(m).setZero();
    Aa(m, d) = -1.0;
    ba.head(m) = b;
    ba(m) = 1.0;
    Vec c = Vec::Zero(d + 1);
    c(d) = -1.0;
    DualSimplex s(Aa, ba, c, {});
    if (!s.phase1() || s.phase2() != Outcome::optimal)
        throw NumericalError("feasibility subproblem failed");
    Vec z = s.primal();
    return {z(d), z.head(d)};
}

LpSolution lp_max(const Mat& A, const Vec& b, const Vec& c, const std::vector<int>& rows) {
    LpSolution out;
    const int d = static_cast<int>(A.cols());
    if (A.rows() == 0) {
        out.status = c.norm() == 0.0 ? LpStatus::optimal : LpStatus::unbounded;
        out.x = Vec::Zero(d);
        return out;
    }
    DualSimplex s(A, b, c, rows);
    if (!s.phase1()) {
        Mat As = A;
        Vec bs = b;
        if (!rows.empty()) {
            As.resize(static_cast<Eigen::Index>(rows.size()), d);
            bs.resize(static_cast<Eigen::Index>(rows.size()));
            for (size_t i = 0; i < rows.size(); ++i) {
                As.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
                bs(static_cast<Eigen::Index>(i)) = b(rows[i]);
            }
        }
        auto [t, x] = feasibility_gap(As, bs);
        out.status = t <= tol::feasibility ? LpStatus::unbounded : LpStatus::infeasible;
        out.x = x;
        return out;
    }
    if (s.phase2() == Outcome::unbounded) {
        out.status = LpStatus::infeasible;
        return out;
    }
    out.status = LpStatus::optimal;
    out.x = s.primal();
    out.value = c.dot(out.x);
    return out;
}

LpSolution solve_lp(const Vec& objective, const HPolytope& P, Sense sense) {
    if (objective.size() != P.dim()) throw GeometryError("solve_lp: objective dimension mismatch");
    if (P.known_empty()) return {};
    if (sense == Sense::max) return lp_max(P.A(), P.b(), objective);
    LpSolution s = lp_max(P.A(), P.b(), -objective);
    s.value = -s.value;
    return s;
}

bool is_empty(const HPolytope& P) {
    if (P.known_empty()) return true;
    if (P.rows() == 0) return false;
    return feasibility_gap(P.A(), P.b()).first > tol::feasibility;
}

std::pair<Vec, double> chebyshev_center(const HPolytope& P) {
    if (is_empty(P)) throw EmptySetError("chebyshev_center: empty polytope");
    const int d = P.dim();
    const int m = P.rows();
    Mat A(m + 1, d + 1);
    Vec b(m + 1);
    A.topLeftCorner(m, d) = P.A();
    for (int i = 0; i < m; ++i) A(i, d) = P.A().row(i).norm();
    A.row(m).setZero();
    A(m, d) = 1.0;
    b.head(m) = P.b();
    b(m) = 1e9;
    Vec c = Vec::Zero(d + 1);
    c(d) = 1.0;
    LpSolution s = lp_max(A, b, c);
    if (!s.optimal()) throw NumericalError("chebyshev_center: LP failed");
    return {s.x.head(d), std::max(0.0, s.x(d))};
}

}  // namespace accport
