// Branch and bound over hidden activation patterns. Each node carries the
// sign constraints decided so far; LP bounds of the next pre-activations over
// S intersected with those constraints fix stable neurons and split on the
// first unstable one. Fully decided nodes become affine leaves checked exactly.

#include "accport/checker.hpp"

#include <algorithm>
#include <chrono>

namespace accport {

namespace {

struct Node {
    Mat A;  // sign constraints over the augmented state
    Vec b;
    int layer = 0;
    int pos = 0;
    Mat P;  // current layer input = P x_phys + p
    Vec p;
    Vec z_pattern;  // decided signs of the current layer (1 active, 0 inactive)
};

void add_row(Mat& A, Vec& b, const Eigen::RowVectorXd& r, double rhs) {
    A.conservativeResize(A.rows() + 1, r.size());
    b.conservativeResize(b.size() + 1);
    A.row(A.rows() - 1) = r;
    b(b.size() - 1) = rhs;
}

}  // namespace

CheckVerdict verify_relu(const ReluNetwork& net, const CheckContext& ctx, const VerifyOptions& opt) {
    CheckVerdict v;
    if (!ctx.S->converged || ctx.S->empty) {
        v.status = Status::UNKNOWN;
        v.note = "safe set did not converge; check refused";
        return v;
    }
    net.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int n = ctx.S->dim();
    const int d = net.input_dim();
    if (d > n) throw ControllerError("network input dimension exceeds the state dimension");
    const HPolytope& S = ctx.S->poly;
    const int hidden_layers = static_cast<int>(net.W.size()) - 1;

    std::vector<AffineTask> leaves;
    std::vector<Node> stack;
    {
        Node root;
        root.A = Mat(0, n);
        root.b = Vec(0);
        root.P = Mat::Identity(d, d);
        root.p = Vec::Zero(d);
        root.z_pattern = Vec::Zero(hidden_layers > 0 ? net.W[0].rows() : 0);
        stack.push_back(root);
    }
    long lps = 0;
    bool exhausted = false;
    while (!stack.empty()) {
        Node nd = std::move(stack.back());
        stack.pop_back();
        if (nd.layer == hidden_layers) {
            AffineTask t;
            t.region = nd.A.rows() ? HPolytope(nd.A, nd.b) : HPolytope(n);
            t.K = net.W.back() * nd.P;
            t.g = (net.W.back() * nd.p + net.b.back())(0);
            leaves.push_back(std::move(t));
            if (static_cast<long>(leaves.size()) > opt.budget) {
                exhausted = true;
                break;
            }
            continue;
        }
        const Mat Q = net.W[nd.layer] * nd.P;
        const Vec q = net.W[nd.layer] * nd.p + net.b[nd.layer];
        const HPolytope dom = nd.A.rows() ? S.with_rows(nd.A, nd.b) : S;
        bool branched = false, dead = false;
        for (int j = nd.pos; j < Q.rows(); ++j) {
            Vec c = Vec::Zero(n);
            c.head(d) = Q.row(j).transpose();
            const LpSolution up = lp_max(dom.A(), dom.b(), c);
            ++lps;
            if (up.status == LpStatus::infeasible) {
                dead = true;
                break;
            }
            const LpSolution lo = lp_max(dom.A(), dom.b(), -c);
            ++lps;
            const double ub = up.value + q(j), lb = -lo.value + q(j);
            if (lb >= 0.0) {
                nd.z_pattern(j) = 1.0;
            } else if (ub <= 0.0) {
                nd.z_pattern(j) = 0.0;
            } else {
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
                r.head(d) = Q.row(j);
                Node off = nd, on = nd;
                off.pos = on.pos = j + 1;
                off.z_pattern(j) = 0.0;
                add_row(off.A, off.b, r, -q(j));
                on.z_pattern(j) = 1.0;
                add_row(on.A, on.b, -r, q(j));
                stack.push_back(std::move(off));
                stack.push_back(std::move(on));
                branched = true;
                break;
            }
        }
        if (dead || branched) continue;
        const Mat D = nd.z_pattern.asDiagonal();
        nd.P = D * Q;
        nd.p = D * q;
        ++nd.layer;
        nd.pos = 0;
        nd.z_pattern = Vec::Zero(nd.layer < hidden_layers ? net.W[nd.layer].rows() : 0);
        stack.push_back(std::move(nd));
    }
    if (exhausted) {
        v.status = Status::UNKNOWN;
        v.note = "leaf budget exhausted";
        v.stats.leaves = static_cast<long>(leaves.size());
        v.stats.frontier = static_cast<long>(stack.size());
        v.stats.lps = lps;
        v.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return v;
    }
    v = verify_affine_tasks(leaves, net.a_min, net.a_max, as_function(net), ctx, opt.exec);
    v.stats.leaves = static_cast<long>(leaves.size());
    v.stats.lps += lps;
    v.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

ThreeStepResult dnn_three_step(const ReluNetwork& net, const CheckContext& ctx,
                               long falsify_samples, const VerifyOptions& opt) {
    ThreeStepResult r;
    if (!ctx.S->converged || ctx.S->empty) {
        r.verdict.status = Status::UNKNOWN;
        r.verdict.note = "safe set did not converge; check refused";
        return r;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](CheckVerdict v) {
        v.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.verdict = std::move(v);
        return r;
    };

    long evaluated = 0;
    auto cex = falsify(as_function(net), ctx, falsify_samples, opt.seed, &evaluated);
    if (cex) {
        r.step1 = Status::UNSAFE;
        CheckVerdict v;
        v.status = Status::UNSAFE;
        v.counterexample = cex;
        v.stats.samples = evaluated;
        v.note = "step 1 (falsification) found a counterexample";
        return finish(v);
    }
    r.step1 = Status::SAFE;

    // the zero network is a constant law; both exact paths must agree on it
    r.step2_ran = true;
    const ReluNetwork sur = zero_surrogate(net);
    const double a0 = std::clamp(sur.b.back()(0), sur.a_min, sur.a_max);
    PwaRegion whole{HPolytope(net.input_dim()), Eigen::RowVectorXd::Zero(net.input_dim()), a0};
    const PwaController constant(net.input_dim(), {whole}, sur.a_min, sur.a_max);
    const CheckVerdict via_pwa = verify_pwa(constant, ctx, opt);
    const CheckVerdict via_relu = verify_relu(sur, ctx, opt);
    bool ok = via_pwa.status == via_relu.status && via_pwa.status != Status::UNKNOWN;
    for (const auto* vv : {&via_pwa, &via_relu})
        if (vv->counterexample && !replays(*vv->counterexample, ctx)) ok = false;
    r.step2 = ok ? Status::SAFE : Status::UNKNOWN;
    r.step2_note = "surrogate verdicts: pwa " + to_string(via_pwa.status) + ", relu " +
                   to_string(via_relu.status);
    if (!ok) {
        CheckVerdict v;
        v.status = Status::UNKNOWN;
        v.note = "step 2 (surrogate path) disagreed: " + r.step2_note;
        return finish(v);
    }

    r.step3_ran = true;
    CheckVerdict v = verify_relu(net, ctx, opt);
    r.step3 = v.status;
    v.stats.samples = evaluated;
    return finish(v);
}

}  // namespace accport
