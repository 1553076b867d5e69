#pragma once

#include "accport/model.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace accport {

struct ControllerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// min 0.5 z'Hz + f'z  s.t.  G z <= w, H positive definite.
struct QpResult {
    bool feasible = false;
    Vec z;
    std::vector<int> active;
    Vec lambda;  // multipliers of `active`
    int iterations = 0;
};
QpResult solve_qp(const Mat& H, const Vec& f, const Mat& G, const Vec& w, int max_iter = 500);

struct MpcSpec {
    int N = 5;
    LinearDynamics dyn;
    OddParams odd_params;
    HPolytope odd;  // over (v, v_T, h), no sensing range
    Box U_a;
    double v_d = 130.0 / 3.6;
    double t_h_d = 1.8;
    double q_v = 1.0, r_a = 0.1;
    double h_domain_max = 250.0;  // parameter domain of the explicit solution

    void validate() const;
    static MpcSpec case_study(const VhcParams& design, const OddParams& o, const DriverParams& d);
};

// QP in z = (a_0..a_{N-1}) for the parameter x:
//   min 0.5 z'Hz + (F x + f0)'z  s.t. G z <= w + S x
// with the reference r = rho'x + rho0 frozen at the measured state.
struct MpcQp {
    Mat H, F, G, S;
    Vec f0, w;
};
MpcQp mpc_qp(const MpcSpec& spec, const Vec& rho, double rho0);
double mpc_reference(const MpcSpec& spec, const Vec& x);
double mpc_cost(const MpcSpec& spec, const Vec& x, const Vec& z);

struct MpcSolution {
    bool feasible = false;
    double a = 0.0;
    Vec z;
};
MpcSolution mpc_solve_full(const MpcSpec& spec, const Vec& x);
double mpc_solve(const MpcSpec& spec, const Vec& x);

struct PwaRegion {
    HPolytope poly;
    Eigen::RowVectorXd K;
    double g = 0.0;
};

class PwaController {
public:
    PwaController() = default;
    PwaController(int input_dim, std::vector<PwaRegion> regions, double a_min, double a_max);

    int input_dim() const { return input_dim_; }
    const std::vector<PwaRegion>& regions() const { return regions_; }
    double a_min() const { return a_min_; }
    double a_max() const { return a_max_; }
    // Used where no region contains the input.
    double fallback() const { return fallback_; }
    void set_fallback(double a) { fallback_ = a; }

    // Lowest-index region containing x within eps, or -1.
    int locate(const Vec& x, double eps = 1e-9) const;
    double evaluate(const Vec& x) const;

private:
    int input_dim_ = 0;
    std::vector<PwaRegion> regions_;
    double a_min_ = 0.0, a_max_ = 0.0, fallback_ = 0.0;
};

struct MpqpStats {
    long candidates = 0;
    long lps = 0;
    int feasible_regions = 0;
    int fallback_regions = 0;
};

// Explicit solution by active-set enumeration; infeasible parameters get the
// constant law a_min through regions placed after the feasible ones.
PwaController mpc_explicit(const MpcSpec& spec, MpqpStats* stats = nullptr,
                           long candidate_budget = 2000000);

struct ReluNetwork {
    std::vector<Mat> W;  // hidden layers then the output layer
    std::vector<Vec> b;
    double a_min = -4.0, a_max = 2.0;

    int input_dim() const { return static_cast<int>(W.front().cols()); }
    int hidden_count() const;
    void validate() const;
};

Vec nn_preoutput(const ReluNetwork& net, const Vec& x);
double nn_forward(const ReluNetwork& net, const Vec& x);
// Hidden activation pattern at x, concatenated over layers (1 = active).
std::vector<char> nn_pattern(const ReluNetwork& net, const Vec& x);

struct NnRegion {
    HPolytope poly;  // over the input
    Eigen::RowVectorXd K;
    double g = 0.0;
    bool empty = false;
};
NnRegion nn_region(const ReluNetwork& net, const std::vector<char>& pattern);

// Seeded random network with hidden sizes `hidden`; weights scaled by 1/sqrt(fan-in).
ReluNetwork fixture_network(int input_dim, const std::vector<int>& hidden, std::uint64_t seed,
                            double a_min, double a_max, double output_bias = 0.0,
                            double weight_scale = 1.0);
// Same architecture with every weight and bias zero.
ReluNetwork zero_surrogate(const ReluNetwork& net);

using Controller = std::variant<PwaController, ReluNetwork, MpcSpec>;

Controller load_controller(const std::string& path);
Controller controller_from_json_text(const std::string& text);
std::string controller_to_json_text(const Controller& c);
void save_controller(const Controller& c, const std::string& path);

}  // namespace accport
