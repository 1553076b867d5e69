#include "accport/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace accport {

PwaController::PwaController(int input_dim, std::vector<PwaRegion> regions, double a_min,
                             double a_max)
    : input_dim_(input_dim), regions_(std::move(regions)), a_min_(a_min), a_max_(a_max),
      fallback_(a_min) {
    if (!(a_min < a_max)) throw ControllerError("PWA saturation bounds invalid");
    for (const auto& r : regions_) {
        if (r.poly.dim() != input_dim || r.K.size() != input_dim)
            throw ControllerError("PWA region dimension mismatch");
        if (!r.K.allFinite() || !std::isfinite(r.g) || !r.poly.A().allFinite() ||
            !r.poly.b().allFinite())
            throw ControllerError("PWA region has non-finite entries");
    }
}

int PwaController::locate(const Vec& x, double eps) const {
    for (size_t j = 0; j < regions_.size(); ++j)
        if (regions_[j].poly.contains_point(x, eps)) return static_cast<int>(j);
    return -1;
}

double PwaController::evaluate(const Vec& x) const {
    if (x.size() != input_dim_) throw ControllerError("PWA input dimension mismatch");
    const int j = locate(x);
    const double a = j < 0 ? fallback_ : regions_[j].K.dot(x) + regions_[j].g;
    return std::clamp(a, a_min_, a_max_);
}

}  // namespace accport
