#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace accport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace tol {
inline constexpr double feasibility = 1e-9;
inline constexpr double redundancy = 1e-7;
inline constexpr double containment = 1e-7;
inline constexpr double zero_row = 1e-12;
}  // namespace tol

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : GeometryError {
    using GeometryError::GeometryError;
};
struct EmptySetError : GeometryError {
    using GeometryError::GeometryError;
};
struct UnboundedError : GeometryError {
    using GeometryError::GeometryError;
};

// Serial paths are the reference implementation; parallel ones use OpenMP.
enum class Exec { serial, parallel };

struct Box {
    Vec lo, hi;
    Box() = default;
    Box(Vec lo_, Vec hi_);
    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x, double eps = 0.0) const;
    Vec center() const { return 0.5 * (lo + hi); }
    std::vector<Vec> vertices() const;
};

// { x | A x <= b } with unit-norm rows. A polytope whose construction already
// proved emptiness carries known_empty; it still has a valid (infeasible) row set.
class HPolytope {
public:
    HPolytope() = default;
    explicit HPolytope(int dim);  // whole space
    HPolytope(Mat A, Vec b);

    static HPolytope from_box(const Box& box);
    static HPolytope empty_set(int dim);

    int dim() const { return dim_; }
    int rows() const { return static_cast<int>(b_.size()); }
    const Mat& A() const { return A_; }
    const Vec& b() const { return b_; }
    bool known_empty() const { return known_empty_; }

    bool contains_point(const Vec& x, double eps = tol::feasibility) const;
    // max_i (A_i x - b_i); negative inside
    double max_violation(const Vec& x) const;

    HPolytope intersect(const HPolytope& other) const;
    HPolytope with_rows(const Mat& A, const Vec& b) const;
    HPolytope select_rows(const std::vector<int>& idx) const;

private:
    Mat A_;
    Vec b_;
    int dim_ = 0;
    bool known_empty_ = false;
};

enum class LpStatus { optimal, infeasible, unbounded };
enum class Sense { max, min };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    Vec x;
    bool optimal() const { return status == LpStatus::optimal; }
};

// Raw kernel: max c.x s.t. A_r x <= b_r for r in rows (all rows when empty).
LpSolution lp_max(const Mat& A, const Vec& b, const Vec& c,
                  const std::vector<int>& rows = {});

LpSolution solve_lp(const Vec& objective, const HPolytope& P, Sense sense = Sense::max);
bool is_empty(const HPolytope& P);
// Smallest t with A x - t <= b (t >= -1); <= 0 means feasible.
std::pair<double, Vec> feasibility_gap(const Mat& A, const Vec& b);
std::pair<Vec, double> chebyshev_center(const HPolytope& P);

// Indices of an irredundant subset of rows. On exact or near duplicates the
// earliest minimal row wins, so callers can order rows by priority.
std::vector<int> irredundant_rows(const HPolytope& P);
HPolytope remove_redundancy(const HPolytope& P);

double support(const HPolytope& P, const Vec& d);
double support(const Box& B, const Vec& d);

HPolytope pontryagin_diff(const HPolytope& P, const Box& D);
HPolytope pontryagin_diff(const HPolytope& P, const HPolytope& D);
HPolytope affine_preimage(const HPolytope& P, const Mat& M, const Vec& c);
HPolytope eliminate(const HPolytope& P, int idx);
// Project onto the coordinates in keep (in that order) by repeated elimination.
HPolytope project(const HPolytope& P, const std::vector<int>& keep);

std::vector<Vec> vertices(const HPolytope& P);

bool contains(const HPolytope& P, const HPolytope& Q, double eps = tol::containment,
              Exec exec = Exec::parallel);

// Axis bounds of a bounded polytope (2 LPs per coordinate).
Box bounding_box(const HPolytope& P);

// Seeded hit-and-run sampler over a bounded, full-dimensional polytope.
class HitAndRun {
public:
    HitAndRun(const HPolytope& P, std::uint64_t seed, int burn_in = 50);
    Vec next();
    // A random point on a random facet (nudged inside by eps).
    Vec boundary_point(double eps = 1e-9);

private:
    const HPolytope& P_;
    std::mt19937_64 rng_;
    Vec x_;
};

}  // namespace accport
