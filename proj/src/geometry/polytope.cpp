#include "accport/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace accport {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw GeometryError("Box: dimension mismatch");
    for (int i = 0; i < lo.size(); ++i)
        if (!(lo(i) <= hi(i))) throw GeometryError("Box: lo > hi");
}

bool Box::contains(const Vec& x, double eps) const {
    for (int i = 0; i < lo.size(); ++i)
        if (x(i) < lo(i) - eps || x(i) > hi(i) + eps) return false;
    return true;
}

std::vector<Vec> Box::vertices() const {
    const int d = dim();
    std::vector<Vec> out;
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v(i) = (mask >> i) & 1 ? hi(i) : lo(i);
        out.push_back(v);
    }
    return out;
}

HPolytope::HPolytope(int dim) : A_(0, dim), b_(0), dim_(dim) {}

HPolytope::HPolytope(Mat A, Vec b) : dim_(static_cast<int>(A.cols())) {
    if (A.rows() != b.size()) throw GeometryError("HPolytope: row count differs from offset length");
    std::vector<int> keep;
    Vec norms(A.rows());
    for (int i = 0; i < A.rows(); ++i) {
        if (!A.row(i).allFinite() || !std::isfinite(b(i)))
            throw GeometryError("HPolytope: non-finite entry");
        norms(i) = A.row(i).norm();
        if (norms(i) > tol::zero_row)
            keep.push_back(i);
        else if (b(i) < -tol::feasibility)
            known_empty_ = true;
    }
    if (known_empty_) {
        *this = empty_set(dim_);
        return;
    }
    A_.resize(static_cast<Eigen::Index>(keep.size()), dim_);
    b_.resize(static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) {
        const int i = keep[k];
        // rows read back from files are already unit; dividing again would move their last bits
        const double s = std::abs(norms(i) - 1.0) <= 4 * std::numeric_limits<double>::epsilon() ? 1.0 : norms(i);
        A_.row(static_cast<Eigen::Index>(k)) = A.row(i) / s;
        b_(static_cast<Eigen::Index>(k)) = b(i) / s;
    }
}

HPolytope HPolytope::from_box(const Box& box) {
    const int d = box.dim();
    Mat A(2 * d, d);
    Vec b(2 * d);
    A.setZero();
    for (int i = 0; i < d; ++i) {
        A(2 * i, i) = 1.0;
        b(2 * i) = box.hi(i);
        A(2 * i + 1, i) = -1.0;
        b(2 * i + 1) = -box.lo(i);
    }
    return HPolytope(A, b);
}

HPolytope HPolytope::empty_set(int dim) {
    HPolytope P;
    P.dim_ = dim;
    P.A_ = Mat::Zero(2, dim);
    P.b_ = Vec::Constant(2, -1.0);
    if (dim > 0) {
        P.A_(0, 0) = 1.0;
        P.A_(1, 0) = -1.0;
    }
    P.known_empty_ = true;
    return P;
}

bool HPolytope::contains_point(const Vec& x, double eps) const {
    if (known_empty_) return false;
    return rows() == 0 || max_violation(x) <= eps;
}

double HPolytope::max_violation(const Vec& x) const {
    if (rows() == 0) return -std::numeric_limits<double>::infinity();
    return (A_ * x - b_).maxCoeff();
}

HPolytope HPolytope::intersect(const HPolytope& other) const {
    if (other.dim() != dim_) throw GeometryError("intersect: dimension mismatch");
    if (known_empty_ || other.known_empty_) return empty_set(dim_);
    return with_rows(other.A_, other.b_);
}

HPolytope HPolytope::with_rows(const Mat& A, const Vec& b) const {
    if (known_empty_) return *this;
    Mat An(rows() + A.rows(), dim_);
    Vec bn(rows() + b.size());
    An << A_, A;
    bn << b_, b;
    return HPolytope(An, bn);
}

HPolytope HPolytope::select_rows(const std::vector<int>& idx) const {
    Mat A(static_cast<Eigen::Index>(idx.size()), dim_);
    Vec b(static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) {
        A.row(static_cast<Eigen::Index>(k)) = A_.row(idx[k]);
        b(static_cast<Eigen::Index>(k)) = b_(idx[k]);
    }
    HPolytope P;
    P.A_ = std::move(A);
    P.b_ = std::move(b);
    P.dim_ = dim_;
    return P;
}

namespace {

// Drop exact duplicates (same normal to 1e-12), keeping the tightest and,
// among equals, the earliest row.
std::vector<int> dedupe(const HPolytope& P) {
    const int m = P.rows();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    const Mat& A = P.A();
    auto lex = [&](int i, int j) {
        for (int c = 0; c < A.cols(); ++c)
            if (A(i, c) != A(j, c)) return A(i, c) < A(j, c);
        if (P.b()(i) != P.b()(j)) return P.b()(i) < P.b()(j);
        return i < j;
    };
    std::sort(order.begin(), order.end(), lex);
    std::vector<int> keep;
    for (int k = 0; k < m;) {
        int best = order[k];
        int e = k + 1;
        while (e < m && (A.row(order[e]) - A.row(order[k])).lpNorm<Eigen::Infinity>() <= 1e-12) {
            const int r = order[e];
            if (P.b()(r) < P.b()(best) - 1e-12 ||
                (std::abs(P.b()(r) - P.b()(best)) <= 1e-12 && r < best))
                best = r;
            ++e;
        }
        keep.push_back(best);
        k = e;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

// max A_j x over rows `others` plus the cap A_j x <= b_j + 1.
double capped_max(const HPolytope& P, const std::vector<int>& others, int j, Vec* arg) {
    const int d = P.dim();
    const int n = static_cast<int>(others.size());
    Mat A(n + 1, d);
    Vec b(n + 1);
    for (int k = 0; k < n; ++k) {
        A.row(k) = P.A().row(others[k]);
        b(k) = P.b()(others[k]);
    }
    A.row(n) = P.A().row(j);
    b(n) = P.b()(j) + 1.0;
    LpSolution s = lp_max(A, b, P.A().row(j).transpose());
    if (s.status == LpStatus::infeasible) throw EmptySetError("redundancy test on empty set");
    if (s.status == LpStatus::unbounded) throw NumericalError("capped redundancy LP unbounded");
    if (arg) *arg = s.x;
    return s.value;
}

std::vector<int> sequential_filter(const HPolytope& P, std::vector<int> keep) {
    for (size_t pos = 0; pos < keep.size();) {
        const int j = keep[pos];
        std::vector<int> others;
        others.reserve(keep.size());
        for (int r : keep)
            if (r != j) others.push_back(r);
        if (capped_max(P, others, j, nullptr) <= P.b()(j) + tol::redundancy)
            keep.erase(keep.begin() + static_cast<long>(pos));
        else
            ++pos;
    }
    return keep;
}

// Clarkson's output-sensitive scheme: each candidate is tested against the
// irredundant rows found so far; a failed test yields a point outside the
// candidate, and a ray from the interior point toward it exposes one more
// irredundant row.
std::vector<int> clarkson(const HPolytope& P, const std::vector<int>& cand, const Vec& z) {
    std::vector<int> found;
    std::vector<char> in_found(P.rows(), 0);
    const Vec slack0 = P.b() - P.A() * z;
    for (int j : cand) {
        if (in_found[j]) continue;
        for (int guard = 0; guard <= static_cast<int>(cand.size()); ++guard) {
            Vec xs;
            const double v = capped_max(P, found, j, &xs);
            if (v <= P.b()(j) + tol::redundancy) break;
            const Vec u = xs - z;
            const Vec Au = P.A() * u;
            const Vec Ax = P.A() * xs;
            int hit = -1;
            double tbest = std::numeric_limits<double>::infinity();
            for (int k : cand) {
                if (Ax(k) <= P.b()(k) + 1e-12 || Au(k) <= 1e-14) continue;
                const double t = slack0(k) / Au(k);
                if (t < tbest - 1e-14 || (t <= tbest + 1e-14 && k == j)) {
                    tbest = t;
                    hit = k;
                }
            }
            if (hit < 0) hit = j;
            if (!in_found[hit]) {
                in_found[hit] = 1;
                found.push_back(hit);
            }
            if (hit == j) break;
        }
    }
    std::sort(found.begin(), found.end());
    // rows picked up by ray shooting may sit within tolerance of the others
    return sequential_filter(P, found);
}

}  // namespace

std::vector<int> irredundant_rows(const HPolytope& P) {
    if (P.known_empty()) throw EmptySetError("irredundant_rows: empty polytope");
    if (P.rows() == 0) return {};
    std::vector<int> cand = dedupe(P);
    const HPolytope Q = P.select_rows(cand);
    auto [z, r] = chebyshev_center(Q);
    if (r > 1e-9) return clarkson(P, cand, z);
    return sequential_filter(P, cand);
}

HPolytope remove_redundancy(const HPolytope& P) {
    if (P.known_empty() || is_empty(P)) return HPolytope::empty_set(P.dim());
    return P.select_rows(irredundant_rows(P));
}

double support(const HPolytope& P, const Vec& d) {
    LpSolution s = solve_lp(d, P, Sense::max);
    if (s.status == LpStatus::infeasible) throw EmptySetError("support: empty polytope");
    if (s.status == LpStatus::unbounded) throw UnboundedError("support: unbounded direction");
    return s.value;
}

double support(const Box& B, const Vec& d) {
    if (d.size() != B.dim()) throw GeometryError("support: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < d.size(); ++i) s += std::max(d(i) * B.lo(i), d(i) * B.hi(i));
    return s;
}

HPolytope pontryagin_diff(const HPolytope& P, const Box& D) {
    if (D.dim() != P.dim()) throw GeometryError("pontryagin_diff: dimension mismatch");
    if (P.known_empty()) return P;
    Vec b = P.b();
    for (int i = 0; i < P.rows(); ++i) b(i) -= support(D, P.A().row(i).transpose());
    HPolytope R(P.A(), b);
    if (is_empty(R)) return HPolytope::empty_set(P.dim());
    return R;
}

HPolytope pontryagin_diff(const HPolytope& P, const HPolytope& D) {
    if (D.dim() != P.dim()) throw GeometryError("pontryagin_diff: dimension mismatch");
    if (P.known_empty()) return P;
    Vec b = P.b();
    for (int i = 0; i < P.rows(); ++i) b(i) -= support(D, P.A().row(i).transpose());
    HPolytope R(P.A(), b);
    if (is_empty(R)) return HPolytope::empty_set(P.dim());
    return R;
}

HPolytope affine_preimage(const HPolytope& P, const Mat& M, const Vec& c) {
    if (M.rows() != P.dim() || c.size() != P.dim())
        throw GeometryError("affine_preimage: dimension mismatch");
    if (P.known_empty()) return HPolytope::empty_set(static_cast<int>(M.cols()));
    return HPolytope(P.A() * M, P.b() - P.A() * c);
}

HPolytope eliminate(const HPolytope& P, int idx) {
    const int d = P.dim();
    if (d < 2) throw GeometryError("eliminate: dimension must be at least 2");
    if (idx < 0 || idx >= d) throw GeometryError("eliminate: index out of range");
    if (P.known_empty()) return HPolytope::empty_set(d - 1);
    std::vector<int> pos, neg, zero;
    for (int i = 0; i < P.rows(); ++i) {
        const double a = P.A()(i, idx);
        if (a > 1e-12)
            pos.push_back(i);
        else if (a < -1e-12)
            neg.push_back(i);
        else
            zero.push_back(i);
    }
    const size_t n = zero.size() + pos.size() * neg.size();
    Mat A(static_cast<Eigen::Index>(n), d);
    Vec b(static_cast<Eigen::Index>(n));
    Eigen::Index r = 0;
    for (int i : zero) {
        A.row(r) = P.A().row(i);
        A(r, idx) = 0.0;
        b(r++) = P.b()(i);
    }
    for (int p : pos) {
        const double ap = P.A()(p, idx);
        for (int q : neg) {
            const double aq = -P.A()(q, idx);
            A.row(r) = aq * P.A().row(p) + ap * P.A().row(q);
            A(r, idx) = 0.0;
            b(r++) = aq * P.b()(p) + ap * P.b()(q);
        }
    }
    Mat Ar(n, d - 1);
    if (idx > 0) Ar.leftCols(idx) = A.leftCols(idx);
    if (idx < d - 1) Ar.rightCols(d - 1 - idx) = A.rightCols(d - 1 - idx);
    return remove_redundancy(HPolytope(Ar, b));
}

HPolytope project(const HPolytope& P, const std::vector<int>& keep) {
    std::vector<int> coords(P.dim());
    std::iota(coords.begin(), coords.end(), 0);
    HPolytope Q = remove_redundancy(P);
    for (int i = P.dim() - 1; i >= 0; --i) {
        if (std::find(keep.begin(), keep.end(), i) != keep.end()) continue;
        Q = eliminate(Q, i);
        coords.erase(coords.begin() + i);
    }
    Mat perm = Mat::Zero(Q.dim(), static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) {
        auto it = std::find(coords.begin(), coords.end(), keep[k]);
        perm(it - coords.begin(), static_cast<Eigen::Index>(k)) = 1.0;
    }
    if (Q.known_empty()) return HPolytope::empty_set(static_cast<int>(keep.size()));
    return HPolytope(Q.A() * perm, Q.b());
}

std::vector<Vec> vertices(const HPolytope& P) {
    const int d = P.dim();
    if (d > 4) throw GeometryError("vertices: dimension too large");
    std::vector<Vec> out;
    if (P.known_empty() || d == 0) return out;
    const int m = P.rows();
    std::vector<int> pick(d);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == d) {
            Mat M(d, d);
            Vec rhs(d);
            for (int k = 0; k < d; ++k) {
                M.row(k) = P.A().row(pick[k]);
                rhs(k) = P.b()(pick[k]);
            }
            Eigen::FullPivLU<Mat> lu(M);
            if (lu.rank() < d) return;
            Vec x = lu.solve(rhs);
            if (!P.contains_point(x, 1e-9)) return;
            for (const Vec& v : out)
                if ((v - x).lpNorm<Eigen::Infinity>() <= 1e-9) return;
            out.push_back(x);
            return;
        }
        for (int i = start; i < m; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return out;
}

bool contains(const HPolytope& P, const HPolytope& Q, double eps, Exec exec) {
    if (P.dim() != Q.dim()) throw GeometryError("contains: dimension mismatch");
    if (Q.known_empty()) return true;
    const int m = P.rows();
    auto row_ok = [&](int i) {
        LpSolution s = lp_max(Q.A(), Q.b(), P.A().row(i).transpose());
        if (s.status == LpStatus::infeasible) return true;
        if (s.status == LpStatus::unbounded) return false;
        return s.value <= P.b()(i) + eps;
    };
    if (exec == Exec::serial) {
        for (int i = 0; i < m; ++i)
            if (!row_ok(i)) return false;
        return true;
    }
    std::vector<char> ok(m, 1);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < m; ++i) ok[i] = row_ok(i) ? 1 : 0;
    return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

Box bounding_box(const HPolytope& P) {
    const int d = P.dim();
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e(i) = 1.0;
        hi(i) = support(P, e);
        lo(i) = -support(P, -e);
    }
    return Box(lo, hi);
}

HitAndRun::HitAndRun(const HPolytope& P, std::uint64_t seed, int burn_in) : P_(P), rng_(seed) {
    x_ = chebyshev_center(P).first;
    for (int i = 0; i < burn_in; ++i) next();
}

Vec HitAndRun::next() {
    std::normal_distribution<double> nd(0.0, 1.0);
    const int d = P_.dim();
    Vec u(d);
    for (int i = 0; i < d; ++i) u(i) = nd(rng_);
    u.normalize();
    const Vec s = P_.A() * u;
    const Vec slack = P_.b() - P_.A() * x_;
    double tlo = -std::numeric_limits<double>::infinity();
    double thi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < P_.rows(); ++i) {
        if (s(i) > 1e-14)
            thi = std::min(thi, std::max(slack(i), 0.0) / s(i));
        else if (s(i) < -1e-14)
            tlo = std::max(tlo, -std::max(slack(i), 0.0) / -s(i));
    }
    if (!std::isfinite(tlo) || !std::isfinite(thi)) throw UnboundedError("hit-and-run on unbounded set");
    std::uniform_real_distribution<double> ud(tlo, thi);
    x_ += (thi > tlo ? ud(rng_) : 0.0) * u;
    return x_;
}

Vec HitAndRun::boundary_point(double eps) {
    const Vec y = next();
    std::uniform_int_distribution<int> pick(0, P_.rows() - 1);
    const Vec u = P_.A().row(pick(rng_)).transpose();
    const Vec s = P_.A() * u;
    const Vec slack = P_.b() - P_.A() * y;
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < P_.rows(); ++i)
        if (s(i) > 1e-14) t = std::min(t, std::max(slack(i), 0.0) / s(i));
    if (!std::isfinite(t)) return y;
    return y + std::max(t - eps, 0.0) * u;
}

}  // namespace accport
