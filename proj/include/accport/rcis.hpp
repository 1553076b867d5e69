#pragma once

#include "accport/model.hpp"

#include <functional>
#include <optional>

namespace accport {

struct SafeSet {
    HPolytope poly;
    // Rows whose crossing ends the ODD instead of violating safety.
    std::vector<char> exit;
    std::string vhc_name;
    std::string object_class = "car";
    FrontModel front = FrontModel::stopping;
    int iterations_used = 0;
    bool converged = false;
    bool empty = false;
    double wall_seconds = 0.0;
    VhcParams vhc;
    OddParams odd;

    int facet_count() const { return poly.rows(); }
    int dim() const { return poly.dim(); }
    // Rows that a successor state has to satisfy.
    std::vector<int> obligation_rows() const;
};

struct RcisOptions {
    int max_iter = 100;
    FrontModel front = FrontModel::stopping;
    ObjectClass object_class = ObjectClass::car;
    Exec exec = Exec::parallel;
    std::function<void(int iteration, int facets)> on_iteration;
};

// {x | exists a in U, for all disturbances: A x + B a + B_f a_T + E w satisfies
// every row of S not flagged in skip}. Both a_T endpoints of the piece are
// enforced; w enters through its support.
HPolytope robust_pre(const HPolytope& S, const std::vector<char>& skip, const AugmentedSystem& sys,
                     const Box& U, const DisturbancePiece& d);
HPolytope robust_pre(const HPolytope& S, const AugmentedSystem& sys, const Box& U, const Box& D_box);

// Interval of inputs a in U that keep x robustly inside S for the piece d;
// nullopt when none exists.
std::optional<std::pair<double, double>> admissible_inputs(const HPolytope& S,
                                                           const std::vector<char>& skip,
                                                           const AugmentedSystem& sys,
                                                           const Box& U,
                                                           const DisturbancePiece& d,
                                                           const Vec& x);

// Rows of S whose normal matches a flagged row of `ref`.
std::vector<char> match_exit_rows(const HPolytope& S, const HPolytope& ref,
                                  const std::vector<char>& ref_exit);

// S_0 = odd; S_{i+1} = pre(S_i) intersected with S_i until S_{i+1} contains S_i.
// A set without interior counts as empty.
SafeSet compute_rcis(const HPolytope& odd, const std::vector<char>& odd_exit,
                     const AugmentedSystem& sys, const Box& U, const DisturbancePiece& d,
                     const RcisOptions& opt = {});
SafeSet compute_rcis(const HPolytope& odd, const AugmentedSystem& sys, const Box& U,
                     const Box& D_box, int max_iter = 100);
SafeSet compute_rcis(const VhcParams& p, const OddParams& o, const RcisOptions& opt = {});

// Substitute fixed coordinates; result lives on the free ones.
HPolytope slice(const HPolytope& P, const std::vector<std::optional<double>>& fixed);
inline HPolytope slice(const SafeSet& S, const std::vector<std::optional<double>>& fixed) {
    return slice(S.poly, fixed);
}

// Names of the augmented coordinates: v, v_T, h, delay1..delayk.
std::vector<std::string> coordinate_names(int k);

}  // namespace accport
