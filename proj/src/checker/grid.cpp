#include "accport/checker.hpp"

#include <map>

namespace accport {

namespace {

const SafeSet* find_set(const std::vector<SafeSet>& sets, const GridCell& c) {
    for (const auto& s : sets)
        if (s.vhc_name == c.vhc && s.object_class == c.object_class) return &s;
    return nullptr;
}

void fill(CellResult& r, const CheckVerdict& v) {
    r.status = v.status;
    r.note = v.note;
    r.counterexample = v.counterexample;
    r.stats = v.stats;
    r.max_margin = v.max_margin;
    r.warning = v.warning;
}

}  // namespace

std::vector<CellResult> check_grid(const Controller& controller, const std::string& controller_name,
                                   const std::vector<SafeSet>& sets,
                                   const std::vector<std::string>& vhc_names,
                                   const DriverGrid& grid, const GridOptions& opt) {
    std::vector<CellResult> cells;
    for (const auto& vhc : vhc_names)
        for (const auto& cls : grid.object_class)
            for (double vd : grid.v_d)
                for (double th : grid.t_h_d) {
                    CellResult r;
                    r.cell = {vhc, cls, vd, th};
                    r.controller = controller_name;
                    cells.push_back(std::move(r));
                }

    // explicit MPC laws depend on the driver parameters only
    std::map<std::pair<double, double>, PwaController> laws;
    std::map<std::pair<double, double>, std::string> law_errors;
    if (const auto* spec = std::get_if<MpcSpec>(&controller)) {
        for (const auto& c : cells) {
            const auto key = std::make_pair(c.cell.v_d, c.cell.t_h_d);
            if (laws.count(key) || law_errors.count(key)) continue;
            try {
                MpcSpec s = *spec;
                s.v_d = c.cell.v_d;
                s.t_h_d = c.cell.t_h_d;
                laws.emplace(key, mpc_explicit(s));
            } catch (const std::exception& e) {
                law_errors.emplace(key, e.what());
            }
        }
    }

    auto run = [&](CellResult& r) {
        try {
            const SafeSet* S = find_set(sets, r.cell);
            if (!S) {
                r.status = Status::ERROR;
                r.note = "no safe set for " + r.cell.vhc + " / " + r.cell.object_class;
                return;
            }
            if (!S->converged || S->empty) {
                r.status = Status::UNKNOWN;
                r.note = S->empty ? "safe set is empty; check refused"
                                  : "safe set did not converge; check refused";
                return;
            }
            const CheckContext ctx = make_context(*S);
            VerifyOptions vo = opt.verify;
            if (opt.exec == Exec::parallel) vo.exec = Exec::serial;
            if (std::holds_alternative<MpcSpec>(controller)) {
                const auto key = std::make_pair(r.cell.v_d, r.cell.t_h_d);
                if (auto it = law_errors.find(key); it != law_errors.end()) {
                    r.status = Status::ERROR;
                    r.note = it->second;
                    return;
                }
                const PwaController& pc = laws.at(key);
                r.regions = static_cast<int>(pc.regions().size());
                fill(r, verify_pwa(pc, ctx, vo));
            } else if (const auto* pc = std::get_if<PwaController>(&controller)) {
                r.regions = static_cast<int>(pc->regions().size());
                fill(r, verify_pwa(*pc, ctx, vo));
            } else {
                const auto& net = std::get<ReluNetwork>(controller);
                const ThreeStepResult t = dnn_three_step(net, ctx, opt.falsify_samples, vo);
                fill(r, t.verdict);
                r.regions = static_cast<int>(t.verdict.stats.leaves);
            }
        } catch (const std::exception& e) {
            r.status = Status::ERROR;
            r.note = e.what();
        }
    };

    const int nc = static_cast<int>(cells.size());
    if (opt.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < nc; ++i) run(cells[i]);
    } else {
        for (int i = 0; i < nc; ++i) run(cells[i]);
    }
    return cells;
}

}  // namespace accport
