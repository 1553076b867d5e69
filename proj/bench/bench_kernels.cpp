// Serial reference vs OpenMP kernels on the VHC1 safe set.

#include "accport/checker.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace accport;

const SafeSet& vhc1_set() {
    static const SafeSet s = compute_rcis(case_study_vhcs()[0], case_study_odd());
    return s;
}

const PwaController& mpc_law() {
    static const PwaController c = [] {
        const auto v = case_study_vhcs();
        return mpc_explicit(MpcSpec::case_study(v[0], case_study_odd(), case_study_driver()));
    }();
    return c;
}

void BM_Contains(benchmark::State& st) {
    const SafeSet& s = vhc1_set();
    const Exec exec = st.range(0) ? Exec::parallel : Exec::serial;
    for (auto _ : st) benchmark::DoNotOptimize(contains(s.poly, s.poly, tol::containment, exec));
}
BENCHMARK(BM_Contains)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

void BM_RobustPre(benchmark::State& st) {
    const SafeSet& s = vhc1_set();
    const AugmentedSystem sys = augment(discretize(s.vhc), s.vhc.k);
    const SetBundle b = build_sets(s.vhc, s.odd);
    const Disturbance d = pre_disturbance(s.front, s.odd, s.vhc);
    for (auto _ : st)
        benchmark::DoNotOptimize(robust_pre(s.poly, s.exit, sys, b.U_a, d.pieces.front()));
}
BENCHMARK(BM_RobustPre)->Unit(benchmark::kMillisecond);

void BM_VerifyPwa(benchmark::State& st) {
    const SafeSet& s = vhc1_set();
    const CheckContext ctx = make_context(s);
    VerifyOptions o;
    o.exec = st.range(0) ? Exec::parallel : Exec::serial;
    const PwaController& law = mpc_law();
    for (auto _ : st) benchmark::DoNotOptimize(verify_pwa(law, ctx, o).status);
}
BENCHMARK(BM_VerifyPwa)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
