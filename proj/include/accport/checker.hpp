#pragma once

#include "accport/controllers.hpp"
#include "accport/rcis.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace accport {

enum class Status { SAFE, UNSAFE, UNKNOWN, ERROR };
std::string to_string(Status s);

// Violations above this count as unsafe; margins in (-kViolation, kViolation]
// are reported SAFE with a warning.
inline constexpr double kViolation = 1e-8;

struct Counterexample {
    Vec x;  // augmented state
    double a = 0.0, a_T = 0.0, w = 0.0;
    Vec x_next;
    int violated_facet = -1;
    double margin = 0.0;
    FacetFamily family = FacetFamily::headway;
    // a_T range admissible at x
    double a_T_lo = 0.0, a_T_hi = 0.0;
};

struct CheckStats {
    long regions = 0;
    long lps = 0;
    long leaves = 0;
    long frontier = 0;
    long samples = 0;
    double wall_seconds = 0.0;  // reported separately from verdicts
};

struct CheckVerdict {
    Status status = Status::UNKNOWN;
    std::optional<Counterexample> counterexample;
    CheckStats stats;
    double max_margin = -std::numeric_limits<double>::infinity();
    bool warning = false;
    std::string note;
};

// Controller output as a function of the augmented state.
using StateFn = std::function<double(const Vec& x)>;

// One-step problem: safe set, augmented dynamics, admissible disturbances.
struct CheckContext {
    const SafeSet* S = nullptr;
    AugmentedSystem sys;
    Disturbance dist;
    std::vector<int> rows;  // obligation rows of S
};
CheckContext make_context(const SafeSet& S);
// Plain box disturbance on every row of S (no exit facets).
CheckContext make_box_context(const SafeSet& S, const AugmentedSystem& sys, const Box& D_box);

struct MarginResult {
    double margin = -std::numeric_limits<double>::infinity();
    int facet = -1;
    double a_T = 0.0, w = 0.0;
};

// max over rows and admissible (a_T, w) of A_i x_next - b_i.
MarginResult worst_case_margin(const Vec& x, double a, const CheckContext& ctx);
MarginResult worst_case_margin(const Vec& x, double a, const AugmentedSystem& sys,
                               const HPolytope& S, const Box& D_box);

// Rebuild a counterexample at x from the controller; nullopt unless it replays.
std::optional<Counterexample> make_counterexample(const Vec& x, const StateFn& f,
                                                  const CheckContext& ctx);
// Exact re-simulation of a stored counterexample.
bool replays(const Counterexample& c, const CheckContext& ctx, double tol = 1e-9);

// Affine law a = K x_phys + g on an augmented region, saturated to [lo, hi].
struct AffineTask {
    HPolytope region;  // over the augmented state
    Eigen::RowVectorXd K;  // over the physical state
    double g = 0.0;
};

struct VerifyOptions {
    Exec exec = Exec::parallel;
    long budget = 200000;       // max leaves in ReLU branch and bound
    int coverage_samples = 4000;
    std::uint64_t seed = 1;
};

// Decide one-step invariance of the saturated PWA laws in `tasks` on S.
CheckVerdict verify_affine_tasks(const std::vector<AffineTask>& tasks, double a_min, double a_max,
                                 const StateFn& f, const CheckContext& ctx, Exec exec);

CheckVerdict verify_pwa(const PwaController& c, const CheckContext& ctx,
                        const VerifyOptions& opt = {});
CheckVerdict verify_relu(const ReluNetwork& net, const CheckContext& ctx,
                         const VerifyOptions& opt = {});

std::optional<Counterexample> falsify(const StateFn& f, const CheckContext& ctx, long n_samples,
                                      std::uint64_t seed, long* evaluated = nullptr);

struct ThreeStepResult {
    CheckVerdict verdict;
    Status step1 = Status::UNKNOWN, step2 = Status::UNKNOWN, step3 = Status::UNKNOWN;
    bool step2_ran = false, step3_ran = false;
    std::string step2_note;
};
ThreeStepResult dnn_three_step(const ReluNetwork& net, const CheckContext& ctx,
                               long falsify_samples, const VerifyOptions& opt = {});

// Seeded one-step closed-loop samples; returns the number of successors that
// leave the obligation rows of S by more than tol.
long sample_soundness(const StateFn& f, const CheckContext& ctx, long n, std::uint64_t seed,
                      double tol = 1e-6);

// Random states of S for which no admissible input keeps the successor
// robustly in S (pre-set model of S).
long fixpoint_failures(const SafeSet& S, long n, std::uint64_t seed);

StateFn as_function(const PwaController& c);
StateFn as_function(const ReluNetwork& n);

struct GridCell {
    std::string vhc;
    std::string object_class = "car";
    double v_d = 130.0 / 3.6;
    double t_h_d = 1.8;
};

struct CellResult {
    GridCell cell;
    std::string controller;  // "mpc", "pwa" or "relu"
    Status status = Status::UNKNOWN;
    std::string note;
    std::optional<Counterexample> counterexample;
    CheckStats stats;
    double max_margin = 0.0;
    bool warning = false;
    int regions = 0;
};

struct DriverGrid {
    std::vector<double> v_d;
    std::vector<double> t_h_d;
    std::vector<std::string> object_class;
};

struct GridOptions {
    VerifyOptions verify;
    long falsify_samples = 20000;
    Exec exec = Exec::parallel;  // over cells
};

// One cell per (VHC, v_d, t_h_d, class); cells whose safe set is missing or
// unconverged are recorded, never thrown.
std::vector<CellResult> check_grid(const Controller& controller, const std::string& controller_name,
                                   const std::vector<SafeSet>& sets,
                                   const std::vector<std::string>& vhc_names,
                                   const DriverGrid& grid, const GridOptions& opt = {});

}  // namespace accport
