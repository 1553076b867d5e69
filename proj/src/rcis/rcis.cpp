#include "accport/rcis.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace accport {

std::vector<int> SafeSet::obligation_rows() const {
    std::vector<int> out;
    for (int i = 0; i < poly.rows(); ++i)
        if (i >= static_cast<int>(exit.size()) || !exit[i]) out.push_back(i);
    return out;
}

namespace {

bool skipped(const std::vector<char>& skip, int i) {
    return i < static_cast<int>(skip.size()) && skip[i];
}

// Rows over (x, a): for each kept facet and each a_T endpoint
//   (a_i A + g coef) x + (a_i B) a <= b_i - wsup_i - g off,  g = a_i B_f.
void pre_rows(const HPolytope& S, const std::vector<char>& skip, const AugmentedSystem& sys,
              const DisturbancePiece& d, Mat& A, Vec& b) {
    const int n = sys.dim();
    std::vector<int> keep;
    for (int i = 0; i < S.rows(); ++i)
        if (!skipped(skip, i)) keep.push_back(i);
    const AffineBound* ends[2] = {&d.aT_lo, &d.aT_hi};
    const int nends = d.aT_lo.coef == d.aT_hi.coef && d.aT_lo.offset == d.aT_hi.offset ? 1 : 2;
    A.resize(static_cast<Eigen::Index>(keep.size()) * nends, n + 1);
    b.resize(A.rows());
    Eigen::Index r = 0;
    for (int i : keep) {
        const Eigen::RowVectorXd ai = S.A().row(i);
        const double g = ai.dot(sys.B_f);
        const double e = ai.dot(sys.E);
        const double wsup = std::max(e * d.w_lo, e * d.w_hi);
        for (int k = 0; k < nends; ++k) {
            A.row(r).head(n) = ai * sys.A + g * ends[k]->coef.transpose();
            A(r, n) = ai.dot(sys.B);
            b(r) = S.b()(i) - wsup - g * ends[k]->offset;
            ++r;
        }
    }
}

}  // namespace

HPolytope robust_pre(const HPolytope& S, const std::vector<char>& skip, const AugmentedSystem& sys,
                     const Box& U, const DisturbancePiece& d) {
    const int n = sys.dim();
    if (S.dim() != n) throw GeometryError("robust_pre: dimension mismatch");
    if (S.known_empty()) return HPolytope::empty_set(n);
    Mat A;
    Vec b;
    pre_rows(S, skip, sys, d, A, b);
    Mat Au = Mat::Zero(2, n + 1);
    Vec bu(2);
    Au(0, n) = 1.0;
    bu(0) = U.hi(0);
    Au(1, n) = -1.0;
    bu(1) = -U.lo(0);
    HPolytope xa = HPolytope(A, b).with_rows(Au, bu);
    if (d.zone.rows() > 0) {
        Mat Az = Mat::Zero(d.zone.rows(), n + 1);
        Az.leftCols(n) = d.zone.A();
        xa = xa.with_rows(Az, d.zone.b());
    }
    if (n + 1 < 2) throw GeometryError("robust_pre: dimension too small");
    xa = remove_redundancy(xa);
    return eliminate(xa, n);
}

HPolytope robust_pre(const HPolytope& S, const AugmentedSystem& sys, const Box& U, const Box& D_box) {
    return robust_pre(S, {}, sys, U, box_disturbance(D_box, sys.dim()).pieces.front());
}

std::optional<std::pair<double, double>> admissible_inputs(const HPolytope& S,
                                                           const std::vector<char>& skip,
                                                           const AugmentedSystem& sys,
                                                           const Box& U,
                                                           const DisturbancePiece& d,
                                                           const Vec& x) {
    Mat A;
    Vec b;
    pre_rows(S, skip, sys, d, A, b);
    const int n = sys.dim();
    double lo = U.lo(0), hi = U.hi(0);
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        const double c = A(r, n);
        const double rhs = b(r) - A.row(r).head(n).dot(x);
        if (std::abs(c) <= 1e-14) {
            if (rhs < -tol::feasibility) return std::nullopt;
        } else if (c > 0) {
            hi = std::min(hi, rhs / c);
        } else {
            lo = std::max(lo, rhs / c);
        }
    }
    if (lo > hi + tol::feasibility) return std::nullopt;
    return std::make_pair(lo, std::max(lo, hi));
}

std::vector<char> match_exit_rows(const HPolytope& S, const HPolytope& ref,
                                  const std::vector<char>& ref_exit) {
    std::vector<char> out(S.rows(), 0);
    for (int i = 0; i < S.rows(); ++i)
        for (int j = 0; j < ref.rows(); ++j)
            if (skipped(ref_exit, j) &&
                (S.A().row(i) - ref.A().row(j)).lpNorm<Eigen::Infinity>() <= 1e-9) {
                out[i] = 1;
                break;
            }
    return out;
}

namespace {

bool no_interior(const HPolytope& P) {
    if (P.known_empty() || is_empty(P)) return true;
    return chebyshev_center(P).second <= tol::feasibility;
}

}  // namespace

SafeSet compute_rcis(const HPolytope& odd, const std::vector<char>& odd_exit,
                     const AugmentedSystem& sys, const Box& U, const DisturbancePiece& d,
                     const RcisOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (is_empty(odd)) throw EmptySetError("compute_rcis: empty ODD");
    SafeSet out;
    out.front = opt.front;
    HPolytope S = remove_redundancy(odd);
    std::vector<char> exit = match_exit_rows(S, odd, odd_exit);
    for (int it = 1; it <= opt.max_iter; ++it) {
        const HPolytope pre = robust_pre(S, exit, sys, U, d);
        HPolytope next;
        if (pre.known_empty()) {
            next = HPolytope::empty_set(S.dim());
        } else {
            // pre rows first so they win ties against the current rows
            next = remove_redundancy(pre.with_rows(S.A(), S.b()));
        }
        out.iterations_used = it;
        if (opt.on_iteration) opt.on_iteration(it, next.known_empty() ? 0 : next.rows());
        if (no_interior(next)) {
            out.empty = true;
            out.converged = true;
            out.poly = HPolytope::empty_set(S.dim());
            out.exit.assign(out.poly.rows(), 0);
            break;
        }
        const bool fix = contains(next, S, tol::containment, opt.exec);
        S = next;
        exit = match_exit_rows(S, odd, odd_exit);
        if (fix) {
            out.converged = true;
            break;
        }
    }
    if (!out.empty) {
        out.poly = S;
        out.exit = exit;
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SafeSet compute_rcis(const HPolytope& odd, const AugmentedSystem& sys, const Box& U,
                     const Box& D_box, int max_iter) {
    RcisOptions opt;
    opt.max_iter = max_iter;
    opt.front = FrontModel::box;
    return compute_rcis(odd, {}, sys, U, box_disturbance(D_box, sys.dim()).pieces.front(), opt);
}

SafeSet compute_rcis(const VhcParams& p_in, const OddParams& o, const RcisOptions& opt) {
    VhcParams p = p_in;
    p.h_max = p_in.h_max_for(opt.object_class);
    const SetBundle sets = build_sets(p, o);
    const AugmentedSystem sys = augment(discretize(p), p.k);
    const Disturbance pre = pre_disturbance(opt.front, o, p);
    SafeSet s = compute_rcis(sets.X_aug, exit_facets(opt.front, o, p), sys, sets.U_a,
                             pre.pieces.front(), opt);
    s.vhc_name = p.name;
    s.object_class = to_string(opt.object_class);
    s.vhc = p;
    s.odd = o;
    return s;
}

HPolytope slice(const HPolytope& P, const std::vector<std::optional<double>>& fixed) {
    if (static_cast<int>(fixed.size()) != P.dim()) throw GeometryError("slice: dimension mismatch");
    std::vector<int> free;
    Vec val = Vec::Zero(P.dim());
    for (int i = 0; i < P.dim(); ++i) {
        if (fixed[i])
            val(i) = *fixed[i];
        else
            free.push_back(i);
    }
    const int nf = static_cast<int>(free.size());
    if (P.known_empty()) return HPolytope::empty_set(nf);
    Mat A(P.rows(), nf);
    for (int k = 0; k < nf; ++k) A.col(k) = P.A().col(free[k]);
    const Vec b = P.b() - P.A() * val;
    if (nf == 0) {
        if ((b.array() < -tol::feasibility).any()) return HPolytope::empty_set(0);
        return HPolytope(0);
    }
    HPolytope Q(A, b);
    if (Q.known_empty() || is_empty(Q)) return HPolytope::empty_set(nf);
    return remove_redundancy(Q);
}

std::vector<std::string> coordinate_names(int k) {
    std::vector<std::string> n = {"v", "v_T", "h"};
    for (int i = 1; i <= k; ++i) n.push_back("delay" + std::to_string(i));
    return n;
}

}  // namespace accport
