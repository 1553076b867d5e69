#include "accport/checker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace accport {

std::string to_string(Status s) {
    switch (s) {
        case Status::SAFE: return "SAFE";
        case Status::UNSAFE: return "UNSAFE";
        case Status::UNKNOWN: return "UNKNOWN";
        case Status::ERROR: return "ERROR";
    }
    return "?";
}

CheckContext make_context(const SafeSet& S) {
    CheckContext c;
    c.S = &S;
    c.sys = augment(discretize(S.vhc), S.vhc.k);
    c.dist = check_disturbance(S.front, S.odd, S.vhc);
    c.rows = S.obligation_rows();
    return c;
}

CheckContext make_box_context(const SafeSet& S, const AugmentedSystem& sys, const Box& D_box) {
    CheckContext c;
    c.S = &S;
    c.sys = sys;
    c.dist = box_disturbance(D_box, sys.dim());
    for (int i = 0; i < S.poly.rows(); ++i) c.rows.push_back(i);
    return c;
}

namespace {

struct Worst {
    double a_T, w;
};

// Tie on the a_T coefficient resolves to the lower bound.
Worst worst_disturbance(double gamma, double eps, double lo, double hi, double wlo, double whi) {
    return {gamma > 0 ? hi : lo, eps > 0 ? whi : wlo};
}

MarginResult margin_rows(const Vec& x, double a, const AugmentedSystem& sys, const HPolytope& P,
                         const std::vector<int>& rows, double lo, double hi, double wlo,
                         double whi) {
    const Vec base = sys.A * x + sys.B * a;
    MarginResult r;
    for (int i : rows) {
        const auto ai = P.A().row(i);
        const double g = ai.dot(sys.B_f), e = ai.dot(sys.E);
        const Worst d = worst_disturbance(g, e, lo, hi, wlo, whi);
        const double m = ai.dot(base) + g * d.a_T + e * d.w - P.b()(i);
        if (m > r.margin) {
            r.margin = m;
            r.facet = i;
            r.a_T = d.a_T;
            r.w = d.w;
        }
    }
    return r;
}

}  // namespace

MarginResult worst_case_margin(const Vec& x, double a, const CheckContext& ctx) {
    const DisturbancePiece& p = ctx.dist.piece_at(x);
    return margin_rows(x, a, ctx.sys, ctx.S->poly, ctx.rows, p.aT_lo.at(x), p.aT_hi.at(x), p.w_lo,
                       p.w_hi);
}

MarginResult worst_case_margin(const Vec& x, double a, const AugmentedSystem& sys,
                               const HPolytope& S, const Box& D_box) {
    std::vector<int> rows(S.rows());
    for (int i = 0; i < S.rows(); ++i) rows[i] = i;
    return margin_rows(x, a, sys, S, rows, D_box.lo(0), D_box.hi(0), D_box.lo(1), D_box.hi(1));
}

std::optional<Counterexample> make_counterexample(const Vec& x, const StateFn& f,
                                                  const CheckContext& ctx) {
    if (ctx.S->poly.max_violation(x) > 1e-9) return std::nullopt;
    const double a = f(x);
    const MarginResult m = worst_case_margin(x, a, ctx);
    if (m.margin <= kViolation) return std::nullopt;
    Counterexample c;
    c.x = x;
    c.a = a;
    c.a_T = m.a_T;
    c.w = m.w;
    c.x_next = ctx.sys.step(x, a, m.a_T, m.w);
    c.violated_facet = m.facet;
    c.margin = ctx.S->poly.A().row(m.facet).dot(c.x_next) - ctx.S->poly.b()(m.facet);
    c.family = classify_facet(ctx.S->poly.A().row(m.facet).transpose());
    const DisturbancePiece& p = ctx.dist.piece_at(x);
    c.a_T_lo = p.aT_lo.at(x);
    c.a_T_hi = p.aT_hi.at(x);
    if (!replays(c, ctx)) return std::nullopt;
    return c;
}

bool replays(const Counterexample& c, const CheckContext& ctx, double tol) {
    const HPolytope& P = ctx.S->poly;
    if (c.x.size() != P.dim() || c.violated_facet < 0 || c.violated_facet >= P.rows()) return false;
    if (P.max_violation(c.x) > 1e-9) return false;
    const DisturbancePiece& p = ctx.dist.piece_at(c.x);
    if (c.a_T < p.aT_lo.at(c.x) - 1e-12 || c.a_T > p.aT_hi.at(c.x) + 1e-12) return false;
    if (c.w < p.w_lo - 1e-12 || c.w > p.w_hi + 1e-12) return false;
    const Vec xn = ctx.sys.step(c.x, c.a, c.a_T, c.w);
    const double m = P.A().row(c.violated_facet).dot(xn) - P.b()(c.violated_facet);
    return m > kViolation && std::abs(m - c.margin) <= tol &&
           (xn - c.x_next).lpNorm<Eigen::Infinity>() <= tol;
}

namespace {

enum class Sat { low, mid, high };

struct Job {
    int task;
    Sat sat;
    int zone;
};

struct JobResult {
    bool nonempty = false;
    double margin = -std::numeric_limits<double>::infinity();
    int facet = -1;
    Vec x;
    long lps = 0;
};

Eigen::RowVectorXd lift(const Eigen::RowVectorXd& K, int n) {
    Eigen::RowVectorXd k = Eigen::RowVectorXd::Zero(n);
    k.head(K.size()) = K;
    return k;
}

HPolytope job_set(const Job& j, const std::vector<AffineTask>& tasks, double lo, double hi,
                  const CheckContext& ctx) {
    const AffineTask& t = tasks[j.task];
    const int n = ctx.S->dim();
    HPolytope Q = ctx.S->poly.intersect(t.region).intersect(ctx.dist.pieces[j.zone].zone);
    if (j.sat != Sat::mid || t.K.lpNorm<Eigen::Infinity>() > 0) {
        const Eigen::RowVectorXd k = lift(t.K, n);
        if (k.lpNorm<Eigen::Infinity>() > 0) {
            Mat A(0, n);
            Vec b(0);
            auto add = [&](const Eigen::RowVectorXd& r, double rhs) {
                A.conservativeResize(A.rows() + 1, n);
                b.conservativeResize(b.size() + 1);
                A.row(A.rows() - 1) = r;
                b(b.size() - 1) = rhs;
            };
            if (j.sat == Sat::low) add(k, lo - t.g);
            if (j.sat == Sat::high) add(-k, t.g - hi);
            if (j.sat == Sat::mid) {
                add(-k, t.g - lo);
                add(k, hi - t.g);
            }
            Q = Q.with_rows(A, b);
        }
    }
    return Q;
}

// Objective over x for row i under the job's law: c x + c0 is the successor margin.
void job_objective(const Job& j, const std::vector<AffineTask>& tasks, double lo, double hi,
                   const CheckContext& ctx, int i, Vec& c, double& c0) {
    const AffineTask& t = tasks[j.task];
    const int n = ctx.S->dim();
    const auto ai = ctx.S->poly.A().row(i);
    const DisturbancePiece& p = ctx.dist.pieces[j.zone];
    const double g = ai.dot(ctx.sys.B_f), e = ai.dot(ctx.sys.E);
    const double ab = ai.dot(ctx.sys.B);
    const AffineBound& end = g > 0 ? p.aT_hi : p.aT_lo;
    c = (ai * ctx.sys.A).transpose() + g * end.coef;
    c0 = g * end.offset + std::max(e * p.w_lo, e * p.w_hi) - ctx.S->poly.b()(i);
    const bool constant_law = t.K.lpNorm<Eigen::Infinity>() == 0;
    if (j.sat == Sat::low) {
        c0 += ab * lo;
    } else if (j.sat == Sat::high) {
        c0 += ab * hi;
    } else if (constant_law) {
        c0 += ab * std::clamp(t.g, lo, hi);
    } else {
        c += ab * lift(t.K, n).transpose();
        c0 += ab * t.g;
    }
}

JobResult run_job(const Job& j, const std::vector<AffineTask>& tasks, double lo, double hi,
                  const CheckContext& ctx) {
    JobResult r;
    const HPolytope Q = job_set(j, tasks, lo, hi, ctx);
    ++r.lps;
    if (Q.known_empty() || is_empty(Q)) return r;
    r.nonempty = true;
    for (int i : ctx.rows) {
        Vec c;
        double c0;
        job_objective(j, tasks, lo, hi, ctx, i, c, c0);
        const LpSolution s = lp_max(Q.A(), Q.b(), c);
        ++r.lps;
        if (!s.optimal()) continue;
        const double m = s.value + c0;
        if (m > r.margin) {
            r.margin = m;
            r.facet = i;
            r.x = s.x;
        }
    }
    return r;
}

}  // namespace

CheckVerdict verify_affine_tasks(const std::vector<AffineTask>& tasks, double a_min, double a_max,
                                 const StateFn& f, const CheckContext& ctx, Exec exec) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckVerdict v;
    std::vector<Job> jobs;
    for (int t = 0; t < static_cast<int>(tasks.size()); ++t) {
        const bool constant = tasks[t].K.lpNorm<Eigen::Infinity>() == 0;
        for (int z = 0; z < static_cast<int>(ctx.dist.pieces.size()); ++z) {
            if (constant) {
                jobs.push_back({t, Sat::mid, z});
            } else {
                jobs.push_back({t, Sat::low, z});
                jobs.push_back({t, Sat::mid, z});
                jobs.push_back({t, Sat::high, z});
            }
        }
    }
    const int nj = static_cast<int>(jobs.size());
    std::vector<JobResult> res(nj);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < nj; ++k) res[k] = run_job(jobs[k], tasks, a_min, a_max, ctx);
    } else {
        for (int k = 0; k < nj; ++k) res[k] = run_job(jobs[k], tasks, a_min, a_max, ctx);
    }
    v.stats.regions = static_cast<long>(tasks.size());
    std::vector<int> bad;
    for (int k = 0; k < nj; ++k) {
        v.stats.lps += res[k].lps;
        if (!res[k].nonempty) continue;
        v.max_margin = std::max(v.max_margin, res[k].margin);
        if (res[k].margin > kViolation) bad.push_back(k);
    }
    for (int k : bad) {
        if (auto c = make_counterexample(res[k].x, f, ctx)) {
            v.counterexample = c;
            break;
        }
        // push the LP vertex into the part of the job set where the violation is large
        const HPolytope Q = job_set(jobs[k], tasks, a_min, a_max, ctx);
        Vec c;
        double c0;
        job_objective(jobs[k], tasks, a_min, a_max, ctx, res[k].facet, c, c0);
        Mat A = -c.transpose();
        Vec b(1);
        b << c0 - 0.5 * res[k].margin;
        const HPolytope deep = Q.with_rows(A, b);
        if (is_empty(deep)) continue;
        if (auto cx = make_counterexample(chebyshev_center(deep).first, f, ctx)) {
            v.counterexample = cx;
            break;
        }
    }
    if (v.counterexample) {
        v.status = Status::UNSAFE;
    } else if (!bad.empty()) {
        v.status = Status::UNKNOWN;
        v.note = "LP violations found but none replayed";
    } else {
        v.status = Status::SAFE;
        v.warning = v.max_margin > -kViolation;
        if (v.warning) v.note = "margin within violation threshold";
    }
    v.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

StateFn as_function(const PwaController& c) {
    return [&c](const Vec& x) { return c.evaluate(x.head(c.input_dim())); };
}

StateFn as_function(const ReluNetwork& n) {
    return [&n](const Vec& x) { return nn_forward(n, x.head(n.input_dim())); };
}

namespace {

CheckVerdict refuse_unconverged() {
    CheckVerdict v;
    v.status = Status::UNKNOWN;
    v.note = "safe set did not converge; check refused";
    return v;
}

}  // namespace

CheckVerdict verify_pwa(const PwaController& c, const CheckContext& ctx, const VerifyOptions& opt) {
    if (!ctx.S->converged || ctx.S->empty) return refuse_unconverged();
    const auto t0 = std::chrono::steady_clock::now();
    const int n = ctx.S->dim();
    if (c.input_dim() > n) throw ControllerError("PWA input dimension exceeds the state dimension");
    std::vector<AffineTask> tasks;
    for (const auto& r : c.regions()) {
        Mat A = Mat::Zero(r.poly.rows(), n);
        A.leftCols(c.input_dim()) = r.poly.A();
        tasks.push_back({r.poly.rows() ? HPolytope(A, r.poly.b()) : HPolytope(n), r.K, r.g});
    }
    const StateFn f = as_function(c);
    CheckVerdict v = verify_affine_tasks(tasks, c.a_min(), c.a_max(), f, ctx, opt.exec);

    // states outside every region run the fallback law
    long uncovered = 0;
    HitAndRun hr(ctx.S->poly, opt.seed);
    for (int s = 0; s < opt.coverage_samples; ++s) {
        const Vec x = hr.next();
        if (c.locate(x.head(c.input_dim())) >= 0) continue;
        ++uncovered;
        if (v.status != Status::UNSAFE)
            if (auto cx = make_counterexample(x, f, ctx)) {
                v.counterexample = cx;
                v.status = Status::UNSAFE;
            }
    }
    v.stats.samples = opt.coverage_samples;
    if (uncovered > 0 && v.status == Status::SAFE) {
        v.status = Status::UNKNOWN;
        v.note = "regions do not cover the safe set (" + std::to_string(uncovered) + " samples)";
    }
    v.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

std::optional<Counterexample> falsify(const StateFn& f, const CheckContext& ctx, long n_samples,
                                      std::uint64_t seed, long* evaluated) {
    HitAndRun hr(ctx.S->poly, seed);
    for (long i = 0; i < n_samples; ++i) {
        const Vec x = (i % 4 == 3) ? hr.boundary_point() : hr.next();
        if (evaluated) *evaluated = i + 1;
        const MarginResult m = worst_case_margin(x, f(x), ctx);
        if (m.margin <= kViolation) continue;
        if (auto c = make_counterexample(x, f, ctx)) return c;
    }
    return std::nullopt;
}

long sample_soundness(const StateFn& f, const CheckContext& ctx, long n, std::uint64_t seed,
                      double tol) {
    HitAndRun hr(ctx.S->poly, seed);
    const HPolytope& P = ctx.S->poly;
    long fails = 0;
    for (long s = 0; s < n; ++s) {
        const Vec x = hr.next();
        const double a = f(x);
        const DisturbancePiece& p = ctx.dist.piece_at(x);
        const double aT[2] = {p.aT_lo.at(x), p.aT_hi.at(x)};
        const double w[2] = {p.w_lo, p.w_hi};
        bool bad = false;
        for (double at : aT)
            for (double ww : w) {
                const Vec xn = ctx.sys.step(x, a, at, ww);
                for (int i : ctx.rows)
                    if (P.A().row(i).dot(xn) - P.b()(i) > tol) bad = true;
            }
        fails += bad ? 1 : 0;
    }
    return fails;
}

long fixpoint_failures(const SafeSet& S, long n, std::uint64_t seed) {
    const AugmentedSystem sys = augment(discretize(S.vhc), S.vhc.k);
    const Disturbance d = pre_disturbance(S.front, S.odd, S.vhc);
    const Box U = build_sets(S.vhc, S.odd).U_a;
    HitAndRun hr(S.poly, seed);
    long fails = 0;
    for (long s = 0; s < n; ++s)
        if (!admissible_inputs(S.poly, S.exit, sys, U, d.pieces.front(), hr.next())) ++fails;
    return fails;
}

}  // namespace accport
