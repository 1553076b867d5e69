#include "accport/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

namespace accport {

void MpcSpec::validate() const {
    if (N < 1) throw ControllerError("MPC horizon must be at least 1");
    if (!(q_v > 0 && r_a > 0)) throw ControllerError("MPC weights must be positive");
    if (odd.dim() != 3) throw ControllerError("MPC ODD must live on (v, v_T, h)");
    if (U_a.dim() != 1 || !(U_a.lo(0) < U_a.hi(0))) throw ControllerError("MPC input box invalid");
    if (!(v_d > 0 && t_h_d > 0)) throw ControllerError("MPC driver parameters invalid");
    if (!(dyn.t_s > 0)) throw ControllerError("MPC sample time invalid");
}

MpcSpec MpcSpec::case_study(const VhcParams& design, const OddParams& o, const DriverParams& d) {
    d.validate(o);
    MpcSpec s;
    s.dyn = discretize(design);
    s.odd_params = o;
    s.odd = build_general_odd(o);
    Vec lo(1), hi(1);
    lo << design.a_min;
    hi << design.a_max;
    s.U_a = Box(lo, hi);
    s.v_d = d.v_d;
    s.t_h_d = d.t_h_d;
    return s;
}

double mpc_reference(const MpcSpec& spec, const Vec& x) {
    return std::min(spec.v_d, x(2) / spec.t_h_d);
}

namespace {

// Prediction x_t = A^t x + Gamma_t z for t = 0..N (a_T = 0, w = 0, no delay).
void prediction(const MpcSpec& spec, std::vector<Mat>& At, std::vector<Mat>& Gam) {
    const int N = spec.N;
    const Mat A = spec.dyn.A;
    const Vec B = spec.dyn.B_a;
    At.assign(N + 1, Mat::Identity(3, 3));
    Gam.assign(N + 1, Mat::Zero(3, N));
    for (int t = 1; t <= N; ++t) {
        At[t] = A * At[t - 1];
        Gam[t] = A * Gam[t - 1];
        Gam[t].col(t - 1) += B;
    }
}

}  // namespace

MpcQp mpc_qp(const MpcSpec& spec, const Vec& rho, double rho0) {
    const int N = spec.N;
    std::vector<Mat> At, Gam;
    prediction(spec, At, Gam);
    MpcQp q;
    q.H = 2.0 * spec.r_a * Mat::Identity(N, N);
    q.F = Mat::Zero(N, 3);
    q.f0 = Vec::Zero(N);
    for (int t = 0; t <= N; ++t) {
        const Vec g = Gam[t].row(0).transpose();
        const Vec c = At[t].row(0).transpose() - rho;
        q.H += 2.0 * spec.q_v * g * g.transpose();
        q.F += 2.0 * spec.q_v * g * c.transpose();
        q.f0 -= 2.0 * spec.q_v * rho0 * g;
    }
    std::vector<Eigen::RowVectorXd> Gr, Sr;
    std::vector<double> wr;
    for (int t = 1; t <= N; ++t) {
        for (int i = 0; i < spec.odd.rows(); ++i) {
            const Eigen::RowVectorXd a = spec.odd.A().row(i);
            const Eigen::RowVectorXd g = a * Gam[t];
            if (g.lpNorm<Eigen::Infinity>() <= 1e-12) continue;  // independent of the inputs
            Gr.push_back(g);
            Sr.push_back(-a * At[t]);
            wr.push_back(spec.odd.b()(i));
        }
    }
    for (int j = 0; j < N; ++j) {
        Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(N);
        e(j) = 1.0;
        Gr.push_back(e);
        Sr.push_back(Eigen::RowVectorXd::Zero(3));
        wr.push_back(spec.U_a.hi(0));
        Gr.push_back(-e);
        Sr.push_back(Eigen::RowVectorXd::Zero(3));
        wr.push_back(-spec.U_a.lo(0));
    }
    const int m = static_cast<int>(Gr.size());
    q.G.resize(m, N);
    q.S.resize(m, 3);
    q.w.resize(m);
    for (int i = 0; i < m; ++i) {
        q.G.row(i) = Gr[i];
        q.S.row(i) = Sr[i];
        q.w(i) = wr[i];
    }
    return q;
}

namespace {

void reference_affine(const MpcSpec& spec, const Vec& x, Vec& rho, double& rho0) {
    rho = Vec::Zero(3);
    rho0 = 0.0;
    if (x(2) / spec.t_h_d >= spec.v_d) {
        rho0 = spec.v_d;
    } else {
        rho(2) = 1.0 / spec.t_h_d;
    }
}

}  // namespace

double mpc_cost(const MpcSpec& spec, const Vec& x, const Vec& z) {
    const double r = mpc_reference(spec, x);
    Vec s = x;
    double J = spec.q_v * (s(0) - r) * (s(0) - r);
    for (int t = 0; t < spec.N; ++t) {
        s = spec.dyn.A * s + spec.dyn.B_a * z(t);
        J += spec.q_v * (s(0) - r) * (s(0) - r) + spec.r_a * z(t) * z(t);
    }
    return J;
}

MpcSolution mpc_solve_full(const MpcSpec& spec, const Vec& x) {
    if (x.size() != 3) throw ControllerError("mpc_solve: state must be (v, v_T, h)");
    Vec rho;
    double rho0;
    reference_affine(spec, x, rho, rho0);
    const MpcQp q = mpc_qp(spec, rho, rho0);
    const QpResult r = solve_qp(q.H, q.F * x + q.f0, q.G, q.w + q.S * x);
    MpcSolution s;
    if (!r.feasible) {
        s.a = spec.U_a.lo(0);
        return s;
    }
    s.feasible = true;
    s.z = r.z;
    s.a = std::clamp(r.z(0), spec.U_a.lo(0), spec.U_a.hi(0));
    return s;
}

double mpc_solve(const MpcSpec& spec, const Vec& x) { return mpc_solve_full(spec, x).a; }

namespace {

struct CaseData {
    MpcQp q;
    HPolytope domain;  // parameter domain of this reference case
    Mat Hinv;
};

// {(theta, z) | G z - S theta <= w, theta in domain} plus equalities on `act`.
HPolytope joint_set(const CaseData& c, const std::vector<int>& act) {
    const int N = static_cast<int>(c.q.H.rows());
    const int m = static_cast<int>(c.q.G.rows());
    const int nd = c.domain.rows();
    const int na = static_cast<int>(act.size());
    Mat A = Mat::Zero(m + nd + na, 3 + N);
    Vec b(m + nd + na);
    A.leftCols(3).topRows(m) = -c.q.S;
    A.rightCols(N).topRows(m) = c.q.G;
    b.head(m) = c.q.w;
    A.block(m, 0, nd, 3) = c.domain.A();
    b.segment(m, nd) = c.domain.b();
    for (int j = 0; j < na; ++j) {
        A.block(m + nd + j, 0, 1, 3) = c.q.S.row(act[j]);
        A.block(m + nd + j, 3, 1, N) = -c.q.G.row(act[j]);
        b(m + nd + j) = -c.q.w(act[j]);
    }
    return HPolytope(A, b);
}

bool licq(const Mat& G, const std::vector<int>& act) {
    if (act.empty()) return true;
    if (static_cast<int>(act.size()) > G.cols()) return false;
    Mat M(act.size(), G.cols());
    for (size_t j = 0; j < act.size(); ++j) M.row(static_cast<Eigen::Index>(j)) = G.row(act[j]);
    Eigen::FullPivLU<Mat> lu(M);
    lu.setThreshold(1e-9);
    return lu.rank() == static_cast<int>(act.size());
}

// Critical region and first-input law of an active set; nullopt when the
// region has no interior.
std::optional<PwaRegion> critical_region(const CaseData& c, const std::vector<int>& act) {
    const Mat& G = c.q.G;
    const int N = static_cast<int>(G.cols());
    const int na = static_cast<int>(act.size());
    Mat Zt = -c.Hinv * c.q.F;  // z = Zt theta + zt
    Vec zt = -c.Hinv * c.q.f0;
    Mat L = Mat::Zero(na, 3);
    Vec l = Vec::Zero(na);
    if (na > 0) {
        Mat GA(na, N), SA(na, 3);
        Vec wA(na);
        for (int j = 0; j < na; ++j) {
            GA.row(j) = G.row(act[j]);
            SA.row(j) = c.q.S.row(act[j]);
            wA(j) = c.q.w(act[j]);
        }
        const Mat M = GA * c.Hinv * GA.transpose();
        const Eigen::LDLT<Mat> ldlt(M);
        L = -ldlt.solve(GA * c.Hinv * c.q.F + SA);
        l = -ldlt.solve(GA * c.Hinv * c.q.f0 + wA);
        Zt -= c.Hinv * GA.transpose() * L;
        zt -= c.Hinv * GA.transpose() * l;
    }
    std::vector<char> in(G.rows(), 0);
    for (int j : act) in[j] = 1;
    const int m = static_cast<int>(G.rows());
    Mat A(m - na + na + c.domain.rows(), 3);
    Vec b(A.rows());
    int r = 0;
    for (int i = 0; i < m; ++i) {
        if (in[i]) continue;
        A.row(r) = G.row(i) * Zt - c.q.S.row(i);
        b(r++) = c.q.w(i) - G.row(i).dot(zt);
    }
    for (int j = 0; j < na; ++j) {
        A.row(r) = -L.row(j);
        b(r++) = l(j);
    }
    A.bottomRows(c.domain.rows()) = c.domain.A();
    b.tail(c.domain.rows()) = c.domain.b();
    HPolytope P(A, b);
    if (P.known_empty() || is_empty(P)) return std::nullopt;
    if (chebyshev_center(P).second <= 1e-6) return std::nullopt;
    return PwaRegion{remove_redundancy(P), Zt.row(0), zt(0)};
}

using ActiveSet = std::vector<int>;

void enumerate_case(const CaseData& c, std::vector<PwaRegion>& regions, MpqpStats& st,
                    long budget) {
    const int m = static_cast<int>(c.q.G.rows());
    const int N = static_cast<int>(c.q.G.cols());
    std::vector<ActiveSet> level = {{}};
    for (int size = 0; size <= N && !level.empty(); ++size) {
        const int nc = static_cast<int>(level.size());
        st.candidates += nc;
        if (st.candidates > budget) throw ControllerError("mpQP enumeration budget exceeded");
        std::vector<char> feas(nc, 0);
        std::vector<std::optional<PwaRegion>> reg(nc);
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < nc; ++i) {
            const ActiveSet& a = level[i];
            if (!licq(c.q.G, a)) continue;
            if (is_empty(joint_set(c, a))) continue;
            feas[i] = 1;
            reg[i] = critical_region(c, a);
        }
        st.lps += nc;
        std::set<ActiveSet> feasible_now;
        for (int i = 0; i < nc; ++i) {
            if (!feas[i]) continue;
            feasible_now.insert(level[i]);
            if (reg[i]) regions.push_back(std::move(*reg[i]));
        }
        // children extend by a larger index; every subset one smaller must be feasible
        std::vector<ActiveSet> next;
        for (const ActiveSet& a : feasible_now) {
            const int start = a.empty() ? 0 : a.back() + 1;
            for (int j = start; j < m; ++j) {
                ActiveSet child = a;
                child.push_back(j);
                bool ok = true;
                for (size_t drop = 0; drop + 1 < child.size() && ok; ++drop) {
                    ActiveSet sub;
                    for (size_t t = 0; t < child.size(); ++t)
                        if (t != drop) sub.push_back(child[t]);
                    ok = feasible_now.count(sub) > 0;
                }
                if (ok) next.push_back(std::move(child));
            }
        }
        level = std::move(next);
    }
}

}  // namespace

PwaController mpc_explicit(const MpcSpec& spec, MpqpStats* stats, long candidate_budget) {
    spec.validate();
    MpqpStats st;
    Mat Ah = Mat::Zero(1, 3);
    Ah(0, 2) = 1.0;
    Vec bh(1);
    bh << spec.h_domain_max;
    const HPolytope theta = spec.odd.with_rows(Ah, bh);
    const double h_split = spec.v_d * spec.t_h_d;

    std::vector<CaseData> cases;
    for (int c = 0; c < 2; ++c) {
        Vec rho = Vec::Zero(3);
        double rho0 = 0.0;
        Mat As = Mat::Zero(1, 3);
        Vec bs(1);
        if (c == 0) {
            rho0 = spec.v_d;
            As(0, 2) = -1.0;
            bs << -h_split;
        } else {
            rho(2) = 1.0 / spec.t_h_d;
            As(0, 2) = 1.0;
            bs << h_split;
        }
        CaseData cd;
        cd.q = mpc_qp(spec, rho, rho0);
        cd.domain = remove_redundancy(theta.with_rows(As, bs));
        if (is_empty(cd.domain) || chebyshev_center(cd.domain).second <= 1e-9) continue;
        cd.Hinv = cd.q.H.inverse();
        cases.push_back(std::move(cd));
    }

    std::vector<PwaRegion> regions, fallback;
    for (const CaseData& c : cases) {
        enumerate_case(c, regions, st, candidate_budget);
        // parameters where the QP is infeasible
        std::vector<int> keep = {0, 1, 2};
        const HPolytope feasible = project(joint_set(c, {}), keep);
        if (feasible.known_empty()) {
            fallback.push_back({c.domain, Eigen::RowVectorXd::Zero(3), spec.U_a.lo(0)});
            continue;
        }
        std::vector<int> cuts;
        for (int i = 0; i < feasible.rows(); ++i)
            if (support(c.domain, feasible.A().row(i).transpose()) > feasible.b()(i) + 1e-7)
                cuts.push_back(i);
        for (size_t j = 0; j < cuts.size(); ++j) {
            Mat A(static_cast<Eigen::Index>(j) + 1, 3);
            Vec b(A.rows());
            A.row(0) = -feasible.A().row(cuts[j]);
            b(0) = -feasible.b()(cuts[j]);
            for (size_t t = 0; t < j; ++t) {
                A.row(static_cast<Eigen::Index>(t) + 1) = feasible.A().row(cuts[t]);
                b(static_cast<Eigen::Index>(t) + 1) = feasible.b()(cuts[t]);
            }
            HPolytope piece = c.domain.with_rows(A, b);
            if (is_empty(piece) || chebyshev_center(piece).second <= 1e-6) continue;
            fallback.push_back({remove_redundancy(piece), Eigen::RowVectorXd::Zero(3), spec.U_a.lo(0)});
        }
    }
    st.feasible_regions = static_cast<int>(regions.size());
    st.fallback_regions = static_cast<int>(fallback.size());
    for (auto& r : fallback) regions.push_back(std::move(r));
    if (stats) *stats = st;
    PwaController pc(3, std::move(regions), spec.U_a.lo(0), spec.U_a.hi(0));
    pc.set_fallback(spec.U_a.lo(0));
    return pc;
}

}  // namespace accport
